//! Three-stage portfolio test: rank assets on formation-range betas, estimate
//! post-ranking portfolio betas and idiosyncratic risk on a disjoint range, then
//! run one cross-sectional regression per testing quarter.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factors::squared_residual_sd;
use crate::ols::{fit_columns, mean_tstat, DataSet, MeanTest, RegressionSpec, SeMode, INTERCEPT};
use crate::panel::{ReturnPanel, Series};
use crate::quarter::{QuarterId, QuarterRange};

pub const DEFAULT_PORTFOLIOS: usize = 15;

/// Residuals below this fraction of the largest portfolio return are rounding
/// noise; the portfolio s² is then reported as exactly 0.
pub const EXACT_FIT_TOLERANCE: f64 = 1e-9;

/// How the portfolio idiosyncratic-risk regressor is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdioConstruction {
    /// One value per portfolio from the estimation-range fit.
    EstimationStatic,
    /// Per testing quarter, from a fit over the `window` quarters before it.
    Trailing { window: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubPeriod {
    pub label: String,
    pub range: QuarterRange,
}

/// Ranges are 1-based positions on the return calendar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FmConfig {
    pub formation: QuarterRange,
    pub estimation: QuarterRange,
    pub testing: QuarterRange,
    pub n_portfolios: usize,
    pub include_intercept: bool,
    pub idio: IdioConstruction,
    /// Minimum present formation quarters per asset; defaults to 12.
    pub min_obs: Option<usize>,
    /// Sub-ranges of the testing range summarized in addition to the full range.
    pub sub_periods: Vec<SubPeriod>,
}

impl Default for FmConfig {
    fn default() -> Self {
        Self {
            formation: QuarterRange { first: 1, last: 30 },
            estimation: QuarterRange { first: 31, last: 60 },
            testing: QuarterRange { first: 61, last: 92 },
            n_portfolios: DEFAULT_PORTFOLIOS,
            include_intercept: false,
            idio: IdioConstruction::EstimationStatic,
            min_obs: None,
            sub_periods: Vec::new(),
        }
    }
}

impl FmConfig {
    pub fn validate(&self, n_quarters: usize, n_assets: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.formation.last < self.estimation.first && self.estimation.last < self.testing.first) {
            return bad("ranges must be disjoint and ordered formation < estimation < testing".into());
        }
        if self.testing.last > n_quarters {
            return bad(format!(
                "testing range ends at quarter {} but only {n_quarters} return quarters exist",
                self.testing.last
            ));
        }
        if self.testing.len() < 2 {
            return bad("testing range needs at least 2 quarters".into());
        }
        if self.n_portfolios < 2 || self.n_portfolios > n_assets / 2 {
            return bad(format!(
                "{} portfolios for {n_assets} assets; need 2 <= portfolios <= assets / 2",
                self.n_portfolios
            ));
        }
        if let IdioConstruction::Trailing { window } = self.idio {
            if window < 3 || window >= self.testing.first {
                return bad(format!("trailing idiosyncratic-risk window {window} does not fit before testing"));
            }
        }
        for p in &self.sub_periods {
            if p.range.first < self.testing.first || p.range.last > self.testing.last || p.range.len() < 2 {
                return bad(format!("sub-period {} must lie within the testing range", p.label));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedAsset {
    pub asset: String,
    pub formation_beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortfolioSet {
    /// Per portfolio, members in ascending formation-beta order.
    pub assignments: Vec<Vec<RankedAsset>>,
    /// Equal-weight mean of present member returns on the full return calendar.
    pub returns: Vec<Series>,
    /// Assets left out of the ranking, with reasons.
    pub excluded: Vec<(String, String)>,
}

impl PortfolioSet {
    pub fn sizes(&self) -> Vec<usize> {
        self.assignments.iter().map(Vec::len).collect()
    }
}

fn slice(s: &Series, r: QuarterRange) -> Series {
    s[r.indices()].to_vec()
}

fn single_factor_beta(y: &Series, m: &Series, min_obs: usize) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let data = DataSet::new(y.len()).with("y", y.clone())?.with("market", m.clone())?;
    let f = crate::ols::fit(&RegressionSpec::new("y", &["market"]).min_obs(min_obs), &data)?;
    let (yy, mm): (Vec<f64>, Vec<f64>) = y.iter().zip(m).filter_map(|(a, b)| Some(((*a)?, (*b)?))).unzip();
    Ok((f.coefficients[1], yy, mm))
}

/// Ranks assets by single-factor beta over the formation range and cuts the
/// ranking into contiguous blocks; when sizes differ the first blocks get the
/// extra asset.
pub fn form_portfolios(returns: &ReturnPanel, market: &Series, config: &FmConfig) -> Result<PortfolioSet> {
    config.validate(returns.n_quarters(), returns.n_assets())?;
    if market.len() != returns.n_quarters() {
        return Err(Error::CalendarMismatch("market series length differs from returns".into()));
    }
    let min_obs = config.min_obs.unwrap_or(12);
    let m = slice(market, config.formation);
    let mut ranked = Vec::new();
    let mut excluded = Vec::new();
    for (a, name) in returns.assets().iter().enumerate() {
        match single_factor_beta(&slice(returns.asset_returns(a), config.formation), &m, min_obs) {
            Ok((b, _, _)) => ranked.push((a, RankedAsset { asset: name.clone(), formation_beta: b })),
            Err(Error::RankDeficient { .. }) => {
                return Err(Error::ZeroVariance("market factor in formation range".into()))
            }
            Err(e @ (Error::InsufficientObservations { .. } | Error::ZeroVariance(_))) => {
                excluded.push((name.clone(), e.to_string()))
            }
            Err(e) => return Err(e),
        }
    }
    let n = ranked.len();
    if n < 2 * config.n_portfolios {
        return Err(Error::InsufficientData(format!("{n} rankable assets for {} portfolios", config.n_portfolios)));
    }
    ranked.sort_by(|x, y| x.1.formation_beta.total_cmp(&y.1.formation_beta).then_with(|| x.1.asset.cmp(&y.1.asset)));

    let (base, extra) = (n / config.n_portfolios, n % config.n_portfolios);
    let mut assignments = Vec::with_capacity(config.n_portfolios);
    let mut port_returns = Vec::with_capacity(config.n_portfolios);
    let mut it = ranked.into_iter();
    for p in 0..config.n_portfolios {
        let members: Vec<(usize, RankedAsset)> = it.by_ref().take(base + usize::from(p < extra)).collect();
        let series = (0..returns.n_quarters())
            .map(|t| {
                let v: Vec<f64> = members.iter().filter_map(|(a, _)| returns.asset_returns(*a)[t]).collect();
                (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
            })
            .collect();
        port_returns.push(series);
        assignments.push(members.into_iter().map(|(_, r)| r).collect());
    }
    Ok(PortfolioSet { assignments, returns: port_returns, excluded })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortfolioEstimate {
    pub beta: f64,
    /// Sample sd of squared residuals from the same estimation-range fit.
    pub s2: f64,
}

/// Single-factor fit of each portfolio over the estimation range.
pub fn post_ranking_betas(
    portfolios: &PortfolioSet,
    market: &Series,
    config: &FmConfig,
) -> Result<Vec<PortfolioEstimate>> {
    let m = slice(market, config.estimation);
    let required = config.estimation.len();
    portfolios
        .returns
        .iter()
        .enumerate()
        .map(|(p, r)| {
            let what = || format!("estimation range of portfolio {}", p + 1);
            let (beta, y, mm) =
                single_factor_beta(&slice(r, config.estimation), &m, required).map_err(|e| match e {
                    Error::RankDeficient { .. } => Error::ZeroVariance(format!("market factor in {}", what())),
                    Error::InsufficientObservations { .. } => {
                        Error::InsufficientData(format!("{} has missing quarters", what()))
                    }
                    e => e,
                })?;
            let s2 = squared_residual_sd(&y, &mm, what)?;
            let scale = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            Ok(PortfolioEstimate { beta, s2: if s2 <= (EXACT_FIT_TOLERANCE * scale).powi(2) { 0.0 } else { s2 } })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaQuarter {
    pub quarter: QuarterId,
    /// In `FmResult::gamma_names` order.
    pub gammas: Vec<f64>,
    pub n_portfolios: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaSummary {
    pub name: String,
    #[serde(flatten)]
    pub test: MeanTest,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodSummary {
    pub label: String,
    pub first: QuarterId,
    pub last: QuarterId,
    pub gammas: Vec<GammaSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FmResult {
    pub config: FmConfig,
    pub portfolios: PortfolioSet,
    pub estimates: Vec<PortfolioEstimate>,
    /// `gamma0` (intercept, when configured), then `gamma1` (beta), `gamma2` (beta²), `gamma3` (s²).
    pub gamma_names: Vec<String>,
    pub quarters: Vec<GammaQuarter>,
    /// Full testing range first, then configured sub-periods.
    pub summary: Vec<PeriodSummary>,
    pub notes: Vec<String>,
}

impl FmResult {
    pub fn full_period(&self) -> &PeriodSummary {
        &self.summary[0]
    }

    pub fn gamma_index(&self, name: &str) -> Option<usize> {
        self.gamma_names.iter().position(|g| g == name)
    }
}

/// Portfolio s² per testing quarter (rows) and portfolio (columns).
fn testing_s2(
    portfolios: &PortfolioSet,
    estimates: &[PortfolioEstimate],
    market: &Series,
    config: &FmConfig,
) -> Result<Vec<Vec<f64>>> {
    config
        .testing
        .indices()
        .map(|t| match config.idio {
            IdioConstruction::EstimationStatic => Ok(estimates.iter().map(|e| e.s2).collect()),
            IdioConstruction::Trailing { window } => portfolios
                .returns
                .iter()
                .enumerate()
                .map(|(p, r)| {
                    let span = (t - window)..t;
                    let (y, m): (Vec<f64>, Vec<f64>) = span.clone().filter_map(|s| Some((r[s]?, market[s]?))).unzip();
                    if y.len() < window {
                        return Err(Error::InsufficientData(format!(
                            "portfolio {} lacks a complete trailing window before testing quarter {}",
                            p + 1,
                            t + 1
                        )));
                    }
                    squared_residual_sd(&y, &m, || format!("trailing window of portfolio {}", p + 1))
                })
                .collect(),
        })
        .collect()
}

/// One cross-sectional regression of portfolio returns on beta, beta² and s²
/// per testing quarter, then time-series means and t statistics of the gammas.
///
/// An identically zero s² column (exactly priced, noiseless portfolios) is
/// dropped from the design and its gamma reported as 0; any other rank
/// deficiency is an error.
pub fn testing_regressions(
    portfolios: &PortfolioSet,
    estimates: &[PortfolioEstimate],
    market: &Series,
    calendar: &[QuarterId],
    config: &FmConfig,
) -> Result<FmResult> {
    if estimates.len() != portfolios.returns.len() {
        return Err(Error::InvalidConfig("one estimate per portfolio is required".into()));
    }
    let s2 = testing_s2(portfolios, estimates, market, config)?;
    let mut gamma_names: Vec<String> = Vec::new();
    if config.include_intercept {
        gamma_names.push("gamma0".into());
    }
    gamma_names.extend(["gamma1", "gamma2", "gamma3"].map(String::from));
    let k = gamma_names.len();
    let mut notes = Vec::new();
    let sizes = portfolios.sizes();
    if sizes.iter().any(|s| *s != sizes[0]) {
        notes.push(format!("unequal portfolio sizes {sizes:?}; earlier portfolios hold the extra assets"));
    }

    let mut quarters = Vec::with_capacity(config.testing.len());
    for (row, t) in config.testing.indices().enumerate() {
        let present: Vec<usize> =
            (0..portfolios.returns.len()).filter(|p| portfolios.returns[*p][t].is_some()).collect();
        let y: Vec<f64> = present.iter().map(|p| portfolios.returns[*p][t].unwrap()).collect();
        let beta: Vec<f64> = present.iter().map(|p| estimates[*p].beta).collect();
        let s2_col: Vec<f64> = present.iter().map(|p| s2[row][*p]).collect();
        let drop_s2 = s2_col.iter().all(|v| *v == 0.0);
        if drop_s2 && quarters.is_empty() {
            notes.push("portfolio s² is identically zero; gamma3 fixed at 0".into());
        }

        let mut names = Vec::new();
        let mut cols = Vec::new();
        if config.include_intercept {
            names.push(INTERCEPT.to_string());
            cols.push(vec![1.0; y.len()]);
        }
        names.push("beta".into());
        cols.push(beta.clone());
        names.push("beta_sq".into());
        cols.push(beta.iter().map(|b| b * b).collect());
        if !drop_s2 {
            names.push("s2".into());
            cols.push(s2_col);
        }
        if y.len() <= cols.len() {
            return Err(Error::InsufficientObservations { available: y.len(), required: cols.len() + 1 });
        }
        let y0 = y[0];
        let mut gammas =
            match fit_columns("portfolio_return", &y, names, &cols, config.include_intercept, SeMode::Classical) {
                Ok(f) => f.coefficients,
                // constant cross-section: the intercept (or nothing) absorbs it exactly
                Err(Error::ZeroVariance(_)) if y.iter().all(|v| *v == y0) => {
                    let mut g = vec![0.0; cols.len()];
                    if config.include_intercept {
                        g[0] = y0;
                    }
                    g
                }
                Err(e) => return Err(e),
            };
        if drop_s2 {
            gammas.push(0.0);
        }
        debug_assert_eq!(gammas.len(), k);
        quarters.push(GammaQuarter { quarter: calendar[t], gammas, n_portfolios: y.len() });
    }

    let mut periods = vec![SubPeriod { label: "full".into(), range: config.testing }];
    periods.extend(config.sub_periods.iter().cloned());
    let summary = periods
        .iter()
        .map(|p| {
            let rows = &quarters[(p.range.first - config.testing.first)..=(p.range.last - config.testing.first)];
            let gammas = (0..k)
                .map(|g| {
                    let vals: Vec<Option<f64>> = rows.iter().map(|q| Some(q.gammas[g])).collect();
                    Ok(GammaSummary { name: gamma_names[g].clone(), test: mean_tstat(&vals)? })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(PeriodSummary {
                label: p.label.clone(),
                first: calendar[p.range.first - 1],
                last: calendar[p.range.last - 1],
                gammas,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(FmResult {
        config: config.clone(),
        portfolios: portfolios.clone(),
        estimates: estimates.to_vec(),
        gamma_names,
        quarters,
        summary,
        notes,
    })
}

/// All three stages with `config`.
pub fn run_fama_macbeth(returns: &ReturnPanel, market: &Series, config: &FmConfig) -> Result<FmResult> {
    let portfolios = form_portfolios(returns, market, config)?;
    let estimates = post_ranking_betas(&portfolios, market, config)?;
    testing_regressions(&portfolios, &estimates, market, returns.calendar(), config)
}
