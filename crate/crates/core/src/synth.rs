//! Synthetic panels with known parameters.
//!
//! Asset returns follow
//! `R_it = alpha_i + idio_premium * sigma_i^2 + beta_i * M_t + emp_loading * dEmp_it + sigma_i * z_it`
//! with `M_t ~ N(market_mean, market_sd^2)`. Levels start at 100 one quarter before
//! the first return quarter and compound as `L_t = L_{t-1} * exp(R_t / 100)`.
//!
//! Draw order: market returns, equity returns, per-asset parameters (betas,
//! noise sds, base prices), then per-asset noise, then per-asset covariate
//! growth (employment, income, foreclosures), each asset in turn.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{AssetMatrix, IndexPanel, Series, SeriesKind};
use crate::quarter::QuarterId;
use crate::rng::{DrawStream, RNG_ALGORITHM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaSpec {
    Explicit(Vec<f64>),
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Deterministic right-skewed grid `lo + (hi - lo) * (i / (n - 1))^2`.
    QuadraticGrid {
        lo: f64,
        hi: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueSpec {
    Constant(f64),
    Explicit(Vec<f64>),
    Uniform { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalProcess {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateConfig {
    pub emp_growth: NormalProcess,
    /// Loading of asset returns on employment growth.
    pub emp_loading: f64,
    pub income_growth: NormalProcess,
    /// ln(income / median price) in the base quarter.
    pub log_afford_base: f64,
    pub forc_growth: NormalProcess,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpConfig {
    pub n_assets: usize,
    /// Number of return quarters; the level panel has one more.
    pub n_quarters: usize,
    pub first_return_quarter: QuarterId,
    pub market: NormalProcess,
    pub equity: Option<NormalProcess>,
    pub betas: BetaSpec,
    pub alphas: ValueSpec,
    pub noise_sd: ValueSpec,
    /// Expected-return reward per unit of noise variance, added to alpha.
    pub idio_premium: f64,
    /// Base-quarter median house price range; prices then track the asset index.
    pub median_price_base: Option<(f64, f64)>,
    pub covariates: Option<CovariateConfig>,
    pub seed: u64,
}

impl DgpConfig {
    /// Single-factor panel with the given market process and betas, no extras.
    pub fn simple(
        n_assets: usize,
        n_quarters: usize,
        market: NormalProcess,
        betas: BetaSpec,
        noise_sd: f64,
        seed: u64,
    ) -> Self {
        Self {
            n_assets,
            n_quarters,
            first_return_quarter: QuarterId::new(1985, 1).expect("valid quarter"),
            market,
            equity: None,
            betas,
            alphas: ValueSpec::Constant(0.0),
            noise_sd: ValueSpec::Constant(noise_sd),
            idio_premium: 0.0,
            median_price_base: None,
            covariates: None,
            seed,
        }
    }

    /// 151 metropolitan areas over 92 quarters starting 1985Q1, with a right-skewed
    /// beta cross-section from -0.185 to 2.61 and noise that puts single-factor R²
    /// between roughly zero for the lowest betas and about 0.8 for the highest.
    pub fn replica_preset() -> Self {
        Self {
            n_assets: 151,
            n_quarters: 92,
            first_return_quarter: QuarterId::new(1985, 1).expect("valid quarter"),
            market: NormalProcess { mean: 1.15, sd: 1.0 },
            equity: Some(NormalProcess { mean: 2.4, sd: 8.0 }),
            betas: BetaSpec::QuadraticGrid { lo: -0.185, hi: 2.61 },
            alphas: ValueSpec::Constant(0.0),
            noise_sd: ValueSpec::Uniform { lo: 1.1, hi: 1.7 },
            idio_premium: 0.0,
            median_price_base: Some((80_000.0, 400_000.0)),
            covariates: Some(CovariateConfig {
                emp_growth: NormalProcess { mean: 0.4, sd: 0.6 },
                emp_loading: 0.0,
                income_growth: NormalProcess { mean: 1.0, sd: 0.8 },
                log_afford_base: 0.241,
                forc_growth: NormalProcess { mean: 1.09, sd: 6.0 },
            }),
            seed: 1,
        }
    }

    /// 150 assets priced linearly on beta: expected return is `premium * beta`
    /// with no alpha and no reward for idiosyncratic risk.
    pub fn linear_pricing_preset(premium: f64) -> Self {
        Self {
            n_assets: 150,
            n_quarters: 92,
            first_return_quarter: QuarterId::new(1985, 1).expect("valid quarter"),
            market: NormalProcess { mean: premium, sd: 2.5 },
            equity: None,
            betas: BetaSpec::Uniform { lo: 0.0, hi: 2.0 },
            alphas: ValueSpec::Constant(0.0),
            noise_sd: ValueSpec::Uniform { lo: 0.5, hi: 1.5 },
            idio_premium: 0.0,
            median_price_base: None,
            covariates: None,
            seed: 1,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_assets == 0 {
            return bad("n_assets must be positive".into());
        }
        if self.n_quarters < 8 {
            return bad(format!("n_quarters {} is below 8", self.n_quarters));
        }
        let check_sd = |name: &str, p: &NormalProcess| -> Result<()> {
            if !(p.sd >= 0.0 && p.sd.is_finite() && p.mean.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} process needs finite mean and sd >= 0")));
            }
            Ok(())
        };
        check_sd("market", &self.market)?;
        if let Some(e) = &self.equity {
            check_sd("equity", e)?;
        }
        if let Some(c) = &self.covariates {
            check_sd("employment", &c.emp_growth)?;
            check_sd("income", &c.income_growth)?;
            check_sd("foreclosure", &c.forc_growth)?;
            if self.median_price_base.is_none() {
                return bad("covariates need median_price_base".into());
            }
        }
        match &self.betas {
            BetaSpec::Explicit(v) if v.len() != self.n_assets => {
                return bad(format!("{} explicit betas for {} assets", v.len(), self.n_assets))
            }
            BetaSpec::Uniform { lo, hi } | BetaSpec::QuadraticGrid { lo, hi } if !(lo <= hi) => {
                return bad("beta range must satisfy lo <= hi".into())
            }
            BetaSpec::QuadraticGrid { .. } if self.n_assets < 2 => {
                return bad("beta grid needs at least 2 assets".into())
            }
            _ => {}
        }
        for (name, spec, nonneg) in [("alpha", &self.alphas, false), ("noise sd", &self.noise_sd, true)] {
            let ok = match spec {
                ValueSpec::Constant(v) => !nonneg || *v >= 0.0,
                ValueSpec::Explicit(v) => v.len() == self.n_assets && (!nonneg || v.iter().all(|x| *x >= 0.0)),
                ValueSpec::Uniform { lo, hi } => lo <= hi && (!nonneg || *lo >= 0.0),
            };
            if !ok {
                return bad(format!("invalid {name} values"));
            }
        }
        if let Some((lo, hi)) = self.median_price_base {
            if !(lo > 0.0 && lo <= hi) {
                return bad("median price base range must be positive".into());
            }
        }
        Ok(())
    }
}

/// Every drawn quantity behind a generated panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpTruth {
    pub rng_algorithm: String,
    pub config: DgpConfig,
    pub assets: Vec<String>,
    pub betas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub noise_sds: Vec<f64>,
    pub market_returns: Vec<f64>,
    pub equity_returns: Option<Vec<f64>>,
    pub asset_returns: Vec<Vec<f64>>,
}

impl DgpTruth {
    /// Index levels rebuilt from the recorded asset returns.
    pub fn price_index_levels(&self) -> AssetMatrix {
        self.asset_returns.iter().map(|r| compound(100.0, r)).collect()
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

fn compound(base: f64, returns: &[f64]) -> Series {
    let mut out = Vec::with_capacity(returns.len() + 1);
    let mut level = base;
    out.push(Some(level));
    for r in returns {
        level *= (r / 100.0).exp();
        out.push(Some(level));
    }
    out
}

fn draw_values(spec: &ValueSpec, n: usize, s: &mut DrawStream) -> Vec<f64> {
    match spec {
        ValueSpec::Constant(v) => vec![*v; n],
        ValueSpec::Explicit(v) => v.clone(),
        ValueSpec::Uniform { lo, hi } => (0..n).map(|_| s.uniform_range(*lo, *hi)).collect(),
    }
}

/// Asset names `MSA001`, `MSA002`, ... (already in lexicographic order).
pub fn asset_names(n: usize) -> Vec<String> {
    let width = n.to_string().len().max(3);
    (1..=n).map(|i| format!("MSA{i:0width$}")).collect()
}

pub fn generate(config: &DgpConfig) -> Result<(IndexPanel, DgpTruth)> {
    config.validate()?;
    let n = config.n_assets;
    let t_len = config.n_quarters;
    let mut s = DrawStream::new(config.seed);

    let market: Vec<f64> = (0..t_len).map(|_| s.normal(config.market.mean, config.market.sd)).collect();
    let equity: Option<Vec<f64>> = config.equity.map(|p| (0..t_len).map(|_| s.normal(p.mean, p.sd)).collect());

    let betas: Vec<f64> = match &config.betas {
        BetaSpec::Explicit(v) => v.clone(),
        BetaSpec::Uniform { lo, hi } => (0..n).map(|_| s.uniform_range(*lo, *hi)).collect(),
        BetaSpec::QuadraticGrid { lo, hi } => (0..n)
            .map(|i| {
                let u = i as f64 / (n - 1) as f64;
                lo + (hi - lo) * u * u
            })
            .collect(),
    };
    let noise_sds = draw_values(&config.noise_sd, n, &mut s);
    let alphas = draw_values(&config.alphas, n, &mut s);
    let base_prices: Option<Vec<f64>> =
        config.median_price_base.map(|(lo, hi)| (0..n).map(|_| s.uniform_range(lo, hi)).collect());

    let noise: Vec<Vec<f64>> = (0..n).map(|_| (0..t_len).map(|_| s.standard_normal()).collect()).collect();

    // growth rates per asset: (employment, income, foreclosures)
    let cov_draws: Option<Vec<[Vec<f64>; 3]>> = config.covariates.as_ref().map(|c| {
        (0..n)
            .map(|_| {
                [
                    (0..t_len).map(|_| s.normal(c.emp_growth.mean, c.emp_growth.sd)).collect(),
                    (0..t_len).map(|_| s.normal(c.income_growth.mean, c.income_growth.sd)).collect(),
                    (0..t_len).map(|_| s.normal(c.forc_growth.mean, c.forc_growth.sd)).collect(),
                ]
            })
            .collect()
    });

    let emp_loading = config.covariates.as_ref().map_or(0.0, |c| c.emp_loading);
    let asset_returns: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let drift = alphas[i] + config.idio_premium * noise_sds[i] * noise_sds[i];
            (0..t_len)
                .map(|t| {
                    let emp = cov_draws.as_ref().map_or(0.0, |c| c[i][0][t]);
                    drift + betas[i] * market[t] + emp_loading * emp + noise_sds[i] * noise[i][t]
                })
                .collect()
        })
        .collect();

    let assets = asset_names(n);
    let calendar = config.first_return_quarter.pred().range(t_len + 1);
    let price_index: AssetMatrix = asset_returns.iter().map(|r| compound(100.0, r)).collect();

    let mut asset_series = BTreeMap::new();
    let mut market_series = BTreeMap::new();
    market_series.insert(SeriesKind::NationalIndex, compound(100.0, &market));
    if let Some(eq) = &equity {
        market_series.insert(SeriesKind::EquityIndex, compound(100.0, eq));
    }
    if let Some(base) = &base_prices {
        let prices: AssetMatrix = asset_returns.iter().zip(base).map(|(r, b)| compound(*b, r)).collect();
        if let (Some(c), Some(draws)) = (&config.covariates, &cov_draws) {
            let emp = draws.iter().map(|d| compound(1_000.0, &d[0])).collect();
            let income = draws.iter().zip(base).map(|(d, b)| compound(b * c.log_afford_base.exp(), &d[1])).collect();
            let forc = draws.iter().map(|d| compound(100.0, &d[2])).collect();
            asset_series.insert(SeriesKind::Employment, emp);
            asset_series.insert(SeriesKind::Income, income);
            asset_series.insert(SeriesKind::Foreclosures, forc);
        }
        asset_series.insert(SeriesKind::MedianPrice, prices);
    }
    asset_series.insert(SeriesKind::PriceIndex, price_index);

    let panel = IndexPanel::new(assets.clone(), calendar, asset_series, market_series)?;
    let truth = DgpTruth {
        rng_algorithm: RNG_ALGORITHM.to_string(),
        config: config.clone(),
        assets,
        betas,
        alphas,
        noise_sds,
        market_returns: market,
        equity_returns: equity,
        asset_returns,
    };
    Ok((panel, truth))
}
