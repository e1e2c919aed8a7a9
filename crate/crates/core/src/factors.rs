//! Explanatory factors: market return, SMB, momentum, idiosyncratic risk and the
//! employment/affordability/foreclosure covariates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::ols::sample_sd;
use crate::panel::{
    compute_market_returns, log_changes, AssetMatrix, IndexPanel, ReturnPanel, Series, SeriesKind, TimeSeries,
};
use crate::quarter::QuarterId;

/// Smallest window accepted for windowed single-factor fits.
pub const MIN_WINDOW: usize = 8;

/// Trailing window used for the time-varying idiosyncratic-risk series.
pub const DEFAULT_IDIO_WINDOW: usize = 24;

/// Number of extreme assets on each side of the momentum spread.
pub const DEFAULT_MOMENTUM_K: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarketProxy {
    /// Returns of the supplied national index.
    NationalProvided,
    /// Equal-weight cross-sectional mean of the asset returns.
    NationalEqualWeight,
    /// Returns of the supplied equity index.
    Equity,
}

impl MarketProxy {
    /// The supplied national index when the panel has one, else the equal-weight mean.
    pub fn auto(panel: &IndexPanel) -> Self {
        if panel.has_series(SeriesKind::NationalIndex) {
            MarketProxy::NationalProvided
        } else {
            MarketProxy::NationalEqualWeight
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MarketProxy::NationalProvided => "national_provided",
            MarketProxy::NationalEqualWeight => "national_equalweight",
            MarketProxy::Equity => "equity",
        }
    }
}

impl FromStr for MarketProxy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "national_provided" => Ok(MarketProxy::NationalProvided),
            "national_equalweight" => Ok(MarketProxy::NationalEqualWeight),
            "equity" => Ok(MarketProxy::Equity),
            _ => Err(Error::InvalidConfig(format!("unknown market proxy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmbMode {
    /// The single asset at each percentile rank.
    #[default]
    Single,
    /// Mean of the cheapest quarter of assets minus mean of the dearest quarter.
    QuartileMean,
}

impl FromStr for SmbMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(SmbMode::Single),
            "quartile_mean" => Ok(SmbMode::QuartileMean),
            _ => Err(Error::InvalidConfig(format!("unknown smb mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentumMode {
    /// The `k` highest minus the `k` lowest lagged returns.
    FixedCount(usize),
    /// Top decile minus bottom decile, `k = ceil(n / 10)`.
    Decile,
}

impl Default for MomentumMode {
    fn default() -> Self {
        MomentumMode::FixedCount(DEFAULT_MOMENTUM_K)
    }
}

impl MomentumMode {
    fn min_assets(self) -> usize {
        match self {
            MomentumMode::FixedCount(k) => 2 * k,
            MomentumMode::Decile => 20,
        }
    }
}

/// Equal-weight cross-sectional mean of present returns, or `provided` passed through.
pub fn market_factor(returns: &ReturnPanel, provided: Option<&TimeSeries>) -> Result<Series> {
    if let Some(series) = provided {
        return series.align_to(returns.calendar());
    }
    (0..returns.n_quarters())
        .map(|t| {
            let present: Vec<f64> = returns.returns().iter().filter_map(|row| row[t]).collect();
            if present.is_empty() {
                Err(Error::InsufficientData(format!(
                    "no asset returns in {} to form the market factor",
                    returns.calendar()[t]
                )))
            } else {
                Ok(Some(present.iter().sum::<f64>() / present.len() as f64))
            }
        })
        .collect()
}

/// Sorts `(key, asset index, value)` triples by key, ties by asset index.
fn rank(mut items: Vec<(f64, usize, f64)>) -> Vec<(f64, usize, f64)> {
    items.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    items
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    s / n as f64
}

/// Small-minus-big spread. `prior_prices[a][t]` is asset `a`'s price level in the
/// quarter before return quarter `t`; assets are ranked on it ascending.
pub fn smb_factor(returns: &ReturnPanel, prior_prices: &AssetMatrix, mode: SmbMode) -> Result<Series> {
    if prior_prices.len() != returns.n_assets() || prior_prices.iter().any(|r| r.len() != returns.n_quarters()) {
        return Err(Error::CalendarMismatch(
            "price levels must be aligned asset-by-asset with the return panel".into(),
        ));
    }
    (0..returns.n_quarters())
        .map(|t| {
            let eligible: Vec<(f64, usize, f64)> = (0..returns.n_assets())
                .filter_map(|a| Some((prior_prices[a][t]?, a, returns.returns()[a][t]?)))
                .collect();
            let n = eligible.len();
            if n < 4 {
                return Err(Error::InsufficientData(format!(
                    "SMB in {} needs 4 assets with a return and a prior price, found {n}",
                    returns.calendar()[t]
                )));
            }
            let ranked = rank(eligible);
            let value = match mode {
                SmbMode::Single => {
                    // 1-based ranks ceil(0.25 n) and ceil(0.75 n)
                    let low = n.div_ceil(4);
                    let high = (3 * n).div_ceil(4);
                    ranked[low - 1].2 - ranked[high - 1].2
                }
                SmbMode::QuartileMean => {
                    let g = n.div_ceil(4);
                    mean(ranked[..g].iter().map(|e| e.2)) - mean(ranked[n - g..].iter().map(|e| e.2))
                }
            };
            Ok(Some(value))
        })
        .collect()
}

/// Lagged winners-minus-losers spread; the first quarter has no predecessor and is missing.
pub fn momentum_factor(returns: &ReturnPanel, mode: MomentumMode) -> Result<Series> {
    if let MomentumMode::FixedCount(0) = mode {
        return Err(Error::InvalidConfig("momentum count must be positive".into()));
    }
    let mut out = vec![None; returns.n_quarters()];
    for t in 1..returns.n_quarters() {
        let lagged: Vec<(f64, usize, f64)> =
            (0..returns.n_assets()).filter_map(|a| returns.returns()[a][t - 1].map(|r| (r, a, r))).collect();
        let n = lagged.len();
        if n < mode.min_assets() {
            return Err(Error::InsufficientData(format!(
                "momentum in {} needs {} lagged returns, found {n}",
                returns.calendar()[t],
                mode.min_assets()
            )));
        }
        let k = match mode {
            MomentumMode::FixedCount(k) => k,
            MomentumMode::Decile => n.div_ceil(10),
        };
        let ranked = rank(lagged);
        out[t] = Some(mean(ranked[n - k..].iter().map(|e| e.2)) - mean(ranked[..k].iter().map(|e| e.2)));
    }
    Ok(out)
}

/// Sample sd of the squared residuals of `y = a + b m` on complete data.
pub(crate) fn squared_residual_sd(y: &[f64], m: &[f64], what: impl Fn() -> String) -> Result<f64> {
    let mean_m = m.iter().sum::<f64>() / m.len() as f64;
    if m.iter().all(|v| *v == mean_m) {
        return Err(Error::ZeroVariance(format!("market factor within {}", what())));
    }
    let ls = least_squares(&[vec![1.0; m.len()], m.to_vec()], y)
        .map_err(|_| Error::ZeroVariance(format!("market factor within {}", what())))?;
    let sq: Vec<f64> = ls.residuals.iter().map(|e| e * e).collect();
    Ok(sample_sd(&sq))
}

/// Time-varying idiosyncratic risk: for each asset and quarter `t`, the sample sd of
/// squared residuals of the single-factor fit over quarters `t-window+1..=t`.
/// Quarters without a complete trailing window are missing.
pub fn idiosyncratic_risk(returns: &ReturnPanel, market: &Series, window: usize) -> Result<AssetMatrix> {
    if window < MIN_WINDOW {
        return Err(Error::InvalidConfig(format!(
            "idiosyncratic-risk window {window} is below the minimum of {MIN_WINDOW}"
        )));
    }
    if market.len() != returns.n_quarters() {
        return Err(Error::CalendarMismatch("market series length differs from returns".into()));
    }
    returns
        .returns()
        .iter()
        .enumerate()
        .map(|(a, row)| {
            let mut out = vec![None; row.len()];
            for t in (window - 1)..row.len() {
                let span = (t + 1 - window)..=t;
                let pairs: Option<(Vec<f64>, Vec<f64>)> = span
                    .map(|s| Some((row[s]?, market[s]?)))
                    .collect::<Option<Vec<_>>>()
                    .map(|v| v.into_iter().unzip());
                if let Some((y, m)) = pairs {
                    let sd = squared_residual_sd(&y, &m, || {
                        format!("window ending {} for {}", returns.calendar()[t], returns.assets()[a])
                    })?;
                    out[t] = Some(sd);
                }
            }
            Ok(out)
        })
        .collect()
}

/// Static idiosyncratic risk per asset from one fit over all complete quarters.
pub fn idiosyncratic_risk_full_sample(returns: &ReturnPanel, market: &Series) -> Result<Vec<Option<f64>>> {
    returns
        .returns()
        .iter()
        .enumerate()
        .map(|(a, row)| {
            let (y, m): (Vec<f64>, Vec<f64>) = row.iter().zip(market).filter_map(|(r, m)| Some(((*r)?, (*m)?))).unzip();
            if y.len() < MIN_WINDOW {
                return Ok(None);
            }
            squared_residual_sd(&y, &m, || format!("full sample for {}", returns.assets()[a])).map(Some)
        })
        .collect()
}

/// Employment growth, lagged log affordability and foreclosure growth, on the
/// return calendar (one quarter shorter than the level panel).
#[derive(Debug, Clone, PartialEq)]
pub struct Covariates {
    pub d_emp: AssetMatrix,
    pub afford_lag: AssetMatrix,
    pub d_forc: AssetMatrix,
}

pub fn covariate_transforms(panel: &IndexPanel) -> Result<Covariates> {
    let emp = panel.asset_series(SeriesKind::Employment)?;
    let income = panel.asset_series(SeriesKind::Income)?;
    let price = panel.asset_series(SeriesKind::MedianPrice)?;
    let forc = panel.asset_series(SeriesKind::Foreclosures)?;
    let assets = panel.assets();

    let d_emp = assets
        .iter()
        .zip(emp)
        .map(|(a, row)| log_changes(row, &format!("employment of {a}")))
        .collect::<Result<AssetMatrix>>()?;
    let d_forc = assets
        .iter()
        .zip(forc)
        .map(|(a, row)| log_changes(row, &format!("foreclosures of {a}")))
        .collect::<Result<AssetMatrix>>()?;
    let afford_lag = assets
        .iter()
        .enumerate()
        .map(|(i, a)| {
            income[i][..income[i].len() - 1]
                .iter()
                .zip(&price[i])
                .map(|(inc, p)| match (inc, p) {
                    (Some(inc), Some(p)) => {
                        if !(*inc > 0.0 && *p > 0.0) {
                            return Err(Error::NonPositiveLog {
                                what: format!("income/price of {a}"),
                                value: if *inc > 0.0 { *p } else { *inc },
                            });
                        }
                        Ok(Some((inc / p).ln()))
                    }
                    _ => Ok(None),
                })
                .collect()
        })
        .collect::<Result<AssetMatrix>>()?;
    Ok(Covariates { d_emp, afford_lag, d_forc })
}

/// Regressors available to the model battery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    /// The housing market return (national index or its equal-weight stand-in).
    Market,
    /// The equity index return.
    EquityMarket,
    Smb,
    Momentum,
    IdioRisk,
    DeltaEmp,
    Afford,
    DeltaForc,
}

impl Factor {
    pub fn name(self) -> &'static str {
        match self {
            Factor::Market => "market",
            Factor::EquityMarket => "market_sp",
            Factor::Smb => "smb",
            Factor::Momentum => "mom",
            Factor::IdioRisk => "s2",
            Factor::DeltaEmp => "d_emp",
            Factor::Afford => "afford",
            Factor::DeltaForc => "d_forc",
        }
    }

    pub fn is_market(self) -> bool {
        matches!(self, Factor::Market | Factor::EquityMarket)
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorConfig {
    /// `None` picks [`MarketProxy::auto`].
    pub market_proxy: Option<MarketProxy>,
    pub smb_mode: SmbMode,
    pub momentum_mode: MomentumMode,
    pub idio_window: usize,
    /// Subtract the panel's risk-free rate from supplied market series. Asset
    /// returns must already be in excess form.
    pub excess: bool,
}

impl Default for FactorConfig {
    fn default() -> Self {
        Self {
            market_proxy: None,
            smb_mode: SmbMode::Single,
            momentum_mode: MomentumMode::default(),
            idio_window: DEFAULT_IDIO_WINDOW,
            excess: false,
        }
    }
}

/// All factor series on the return calendar.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorBundle {
    pub calendar: Vec<QuarterId>,
    pub market_proxy: MarketProxy,
    pub market: Series,
    pub equity: Option<Series>,
    pub smb: Option<Series>,
    pub momentum: Option<Series>,
    pub idio: AssetMatrix,
    pub idio_window: usize,
    pub covariates: Option<Covariates>,
    /// Why optional factors were left out.
    pub notes: Vec<String>,
}

impl FactorBundle {
    pub fn build(panel: &IndexPanel, returns: &ReturnPanel, config: &FactorConfig) -> Result<Self> {
        if panel.calendar().len() != returns.n_quarters() + 1
            || panel.calendar()[1..] != *returns.calendar()
            || panel.assets() != returns.assets()
        {
            return Err(Error::CalendarMismatch("return panel must be derived from the level panel".into()));
        }
        let mut notes = Vec::new();
        let proxy = config.market_proxy.unwrap_or_else(|| MarketProxy::auto(panel));

        let riskfree = if config.excess {
            Some(TimeSeries::new(panel.calendar().to_vec(), panel.market_series(SeriesKind::RiskfreeRate)?.clone())?)
        } else {
            None
        };
        let supplied = |kind: SeriesKind| -> Result<TimeSeries> {
            let mut r = compute_market_returns(panel, kind)?;
            if let Some(rf) = &riskfree {
                let rf = rf.align_to(&r.calendar)?;
                for (v, f) in r.values.iter_mut().zip(rf) {
                    *v = match (*v, f) {
                        (Some(v), Some(f)) => Some(v - f),
                        _ => None,
                    };
                }
            }
            Ok(r)
        };

        let equity = if panel.has_series(SeriesKind::EquityIndex) {
            Some(supplied(SeriesKind::EquityIndex)?.values)
        } else {
            None
        };
        let market = match proxy {
            MarketProxy::NationalProvided => market_factor(returns, Some(&supplied(SeriesKind::NationalIndex)?))?,
            MarketProxy::NationalEqualWeight => market_factor(returns, None)?,
            MarketProxy::Equity => {
                equity.clone().ok_or_else(|| Error::UnknownSeries(SeriesKind::EquityIndex.to_string()))?
            }
        };

        let smb = if panel.has_series(SeriesKind::MedianPrice) {
            let prices = panel.asset_series(SeriesKind::MedianPrice)?;
            let prior: AssetMatrix = prices.iter().map(|row| row[..row.len() - 1].to_vec()).collect();
            Some(smb_factor(returns, &prior, config.smb_mode)?)
        } else {
            notes.push("smb omitted: panel has no median_price series".into());
            None
        };

        let momentum = if returns.n_assets() >= config.momentum_mode.min_assets() {
            Some(momentum_factor(returns, config.momentum_mode)?)
        } else {
            notes.push(format!(
                "mom omitted: {} assets, {} required",
                returns.n_assets(),
                config.momentum_mode.min_assets()
            ));
            None
        };

        let idio = idiosyncratic_risk(returns, &market, config.idio_window)?;

        let needed = [SeriesKind::Employment, SeriesKind::Income, SeriesKind::MedianPrice, SeriesKind::Foreclosures];
        let covariates = if needed.iter().all(|k| panel.has_series(*k)) {
            Some(covariate_transforms(panel)?)
        } else {
            notes.push("covariates omitted: employment, income, median_price and foreclosures are all required".into());
            None
        };

        Ok(Self {
            calendar: returns.calendar().to_vec(),
            market_proxy: proxy,
            market,
            equity,
            smb,
            momentum,
            idio,
            idio_window: config.idio_window,
            covariates,
            notes,
        })
    }

    pub fn has(&self, factor: Factor) -> bool {
        match factor {
            Factor::Market | Factor::IdioRisk => true,
            Factor::EquityMarket => self.equity.is_some(),
            Factor::Smb => self.smb.is_some(),
            Factor::Momentum => self.momentum.is_some(),
            Factor::DeltaEmp | Factor::Afford | Factor::DeltaForc => self.covariates.is_some(),
        }
    }

    /// The regressor series for `factor` as seen by asset `asset`.
    pub fn series(&self, factor: Factor, asset: usize) -> Result<&Series> {
        let missing = || Error::UnknownSeries(factor.name().to_string());
        let cov = || self.covariates.as_ref().ok_or_else(missing);
        Ok(match factor {
            Factor::Market => &self.market,
            Factor::EquityMarket => self.equity.as_ref().ok_or_else(missing)?,
            Factor::Smb => self.smb.as_ref().ok_or_else(missing)?,
            Factor::Momentum => self.momentum.as_ref().ok_or_else(missing)?,
            Factor::IdioRisk => &self.idio[asset],
            Factor::DeltaEmp => &cov()?.d_emp[asset],
            Factor::Afford => &cov()?.afford_lag[asset],
            Factor::DeltaForc => &cov()?.d_forc[asset],
        })
    }
}
