//! The per-asset model battery and its cross-asset summaries.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factors::{Factor, FactorBundle};
use crate::ols::{fit, DataSet, FitResult, RegressionSpec, SeMode};
use crate::panel::{ReturnPanel, Series};

/// Name of the dependent variable in every suite regression.
pub const DEPENDENT: &str = "r_hpi";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelEntry {
    pub id: String,
    pub regressors: Vec<Factor>,
}

impl ModelEntry {
    pub fn new(id: impl Into<String>, regressors: &[Factor]) -> Self {
        Self { id: id.into(), regressors: regressors.to_vec() }
    }

    pub fn market_factor(&self) -> Option<Factor> {
        self.regressors.iter().copied().find(|f| f.is_market())
    }

    fn validate(&self) -> Result<()> {
        let markets = self.regressors.iter().filter(|f| f.is_market()).count();
        if markets > 1 {
            return Err(Error::InvalidConfig(format!("model {} has {markets} market factors", self.id)));
        }
        let unique: BTreeSet<_> = self.regressors.iter().collect();
        if unique.len() != self.regressors.len() || self.regressors.is_empty() {
            return Err(Error::InvalidConfig(format!("model {} needs distinct, nonempty regressors", self.id)));
        }
        Ok(())
    }
}

/// Models 1 to 6 (market, equity market, and factor extensions) followed by the
/// covariate-augmented models A1 to A3.
pub fn catalog() -> Vec<ModelEntry> {
    use Factor::*;
    vec![
        ModelEntry::new("1", &[Market]),
        ModelEntry::new("2", &[EquityMarket]),
        ModelEntry::new("3", &[Market, Smb]),
        ModelEntry::new("4", &[Market, Momentum]),
        ModelEntry::new("5", &[Market, IdioRisk]),
        ModelEntry::new("6", &[Market, Smb, Momentum, IdioRisk]),
        ModelEntry::new("A1", &[Market, Smb, Momentum, IdioRisk, DeltaEmp]),
        ModelEntry::new("A2", &[Market, Smb, Momentum, IdioRisk, DeltaEmp, Afford]),
        ModelEntry::new("A3", &[Market, Smb, Momentum, IdioRisk, DeltaEmp, Afford, DeltaForc]),
    ]
}

pub fn find_model(id: &str) -> Option<ModelEntry> {
    catalog().into_iter().find(|m| m.id.eq_ignore_ascii_case(id))
}

/// Catalog entries whose factors all exist in `bundle`.
pub fn available_models(bundle: &FactorBundle) -> Vec<ModelEntry> {
    catalog().into_iter().filter(|m| m.regressors.iter().all(|f| bundle.has(*f))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteOptions {
    pub se_mode: SeMode,
    /// Overrides the default `k + 10` minimum observation count.
    pub min_obs: Option<usize>,
    /// Fit every model for an asset on the rows complete for all catalog models,
    /// so nested models share one sample.
    pub common_sample: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { se_mode: SeMode::Classical, min_obs: None, common_sample: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableSummary {
    pub name: String,
    pub mean_coefficient: f64,
    pub n_significant: usize,
}

/// Mean, min, median (midpoint average for even counts) and max.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distribution {
    pub mean: f64,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl Distribution {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
        Some(Self { mean: v.iter().sum::<f64>() / n as f64, min: v[0], median, max: v[n - 1] })
    }
}

/// One asset under one model. Coefficient fields are `None` when skipped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssetRow {
    pub asset: String,
    pub beta: Option<f64>,
    pub se_beta: Option<f64>,
    pub r_squared: Option<f64>,
    /// Full-sample mean quarterly return, fitted or not.
    pub mean_return: Option<f64>,
    pub n_obs: Option<usize>,
    pub dof: Option<usize>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub model_id: String,
    pub regressors: Vec<String>,
    pub n_assets: usize,
    pub n_fitted: usize,
    /// Slope regressors in model order; the intercept is not summarized.
    pub variables: Vec<VariableSummary>,
    /// Distribution of the market coefficient; `None` for models without one.
    pub beta: Option<Distribution>,
    pub r_squared: Distribution,
    /// Sorted by asset name.
    pub rows: Vec<AssetRow>,
}

impl SuiteSummary {
    pub fn variable(&self, name: &str) -> Option<&VariableSummary> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn fitted_rows(&self) -> impl Iterator<Item = &AssetRow> {
        self.rows.iter().filter(|r| r.skipped.is_none())
    }

    pub fn skipped_rows(&self) -> impl Iterator<Item = &AssetRow> {
        self.rows.iter().filter(|r| r.skipped.is_some())
    }
}

fn check_alignment(returns: &ReturnPanel, bundle: &FactorBundle) -> Result<()> {
    if bundle.calendar != returns.calendar() || bundle.idio.len() != returns.n_assets() {
        return Err(Error::CalendarMismatch("factor bundle was not built from this return panel".into()));
    }
    Ok(())
}

fn masked(y: &Series, mask: Option<&[bool]>) -> Series {
    match mask {
        None => y.clone(),
        Some(m) => y.iter().zip(m).map(|(v, keep)| if *keep { *v } else { None }).collect(),
    }
}

fn complete_rows(bundle: &FactorBundle, asset: usize, factors: &BTreeSet<Factor>) -> Result<Vec<bool>> {
    let mut keep = vec![true; bundle.calendar.len()];
    for f in factors {
        for (k, v) in keep.iter_mut().zip(bundle.series(*f, asset)?) {
            *k &= v.is_some();
        }
    }
    Ok(keep)
}

fn fit_masked(
    returns: &ReturnPanel,
    bundle: &FactorBundle,
    model: &ModelEntry,
    asset: usize,
    options: &SuiteOptions,
    mask: Option<&[bool]>,
) -> Result<FitResult> {
    let mut data = DataSet::new(returns.n_quarters());
    data.insert(DEPENDENT, masked(returns.asset_returns(asset), mask))?;
    for f in &model.regressors {
        data.insert(f.name(), bundle.series(*f, asset)?.clone())?;
    }
    let names: Vec<&str> = model.regressors.iter().map(|f| f.name()).collect();
    let mut spec = RegressionSpec::new(DEPENDENT, &names).se_mode(options.se_mode);
    if let Some(n) = options.min_obs {
        spec = spec.min_obs(n);
    }
    fit(&spec, &data)
}

/// One model fitted for one asset, with an intercept and listwise deletion.
pub fn fit_asset(
    returns: &ReturnPanel,
    bundle: &FactorBundle,
    model: &ModelEntry,
    asset: usize,
    options: &SuiteOptions,
) -> Result<FitResult> {
    check_alignment(returns, bundle)?;
    model.validate()?;
    fit_masked(returns, bundle, model, asset, options, None)
}

fn mean_of_present(s: &Series) -> Option<f64> {
    let v: Vec<f64> = s.iter().flatten().copied().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Fits every catalog model for every asset. Assets whose fit fails on data
/// grounds (too few rows, zero variance, collinearity) are kept as skipped rows;
/// aggregates cover fitted assets only.
pub fn run_suite(
    returns: &ReturnPanel,
    bundle: &FactorBundle,
    models: &[ModelEntry],
    options: &SuiteOptions,
) -> Result<Vec<SuiteSummary>> {
    if models.is_empty() {
        return Err(Error::InvalidConfig("empty model catalog".into()));
    }
    check_alignment(returns, bundle)?;
    let mut ids = BTreeSet::new();
    for m in models {
        m.validate()?;
        if !ids.insert(m.id.as_str()) {
            return Err(Error::InvalidConfig(format!("duplicate model id {}", m.id)));
        }
        if let Some(f) = m.regressors.iter().find(|f| !bundle.has(**f)) {
            return Err(Error::UnknownSeries(format!("{} (needed by model {})", f.name(), m.id)));
        }
    }
    let all_factors: BTreeSet<Factor> = models.iter().flat_map(|m| m.regressors.iter().copied()).collect();

    let mut order: Vec<usize> = (0..returns.n_assets()).collect();
    order.sort_by(|a, b| returns.assets()[*a].cmp(&returns.assets()[*b]));

    let masks: Option<Vec<Vec<bool>>> = if options.common_sample {
        Some((0..returns.n_assets()).map(|a| complete_rows(bundle, a, &all_factors)).collect::<Result<_>>()?)
    } else {
        None
    };

    let mut out = Vec::with_capacity(models.len());
    let mut any_fitted = false;
    for model in models {
        let market = model.market_factor().map(|f| f.name());
        let mut rows = Vec::with_capacity(order.len());
        let mut fits = Vec::new();
        for &a in &order {
            let mean_return = mean_of_present(returns.asset_returns(a));
            let mask = masks.as_ref().map(|m| m[a].as_slice());
            match fit_masked(returns, bundle, model, a, options, mask) {
                Ok(f) => {
                    let m_idx = market.and_then(|m| f.index_of(m));
                    rows.push(AssetRow {
                        asset: returns.assets()[a].clone(),
                        beta: m_idx.map(|i| f.coefficients[i]),
                        se_beta: m_idx.map(|i| f.std_errors[i]),
                        r_squared: Some(f.r_squared),
                        mean_return,
                        n_obs: Some(f.n_obs),
                        dof: Some(f.dof),
                        skipped: None,
                    });
                    fits.push(f);
                }
                Err(
                    e @ (Error::InsufficientObservations { .. } | Error::ZeroVariance(_) | Error::RankDeficient { .. }),
                ) => {
                    rows.push(AssetRow {
                        asset: returns.assets()[a].clone(),
                        beta: None,
                        se_beta: None,
                        r_squared: None,
                        mean_return,
                        n_obs: None,
                        dof: None,
                        skipped: Some(e.to_string()),
                    });
                }
                Err(e) => return Err(e),
            }
        }
        any_fitted |= !fits.is_empty();

        let variables = model
            .regressors
            .iter()
            .map(|f| {
                let name = f.name();
                let coefs: Vec<f64> = fits.iter().filter_map(|r| r.coef(name)).collect();
                VariableSummary {
                    name: name.to_string(),
                    mean_coefficient: if coefs.is_empty() {
                        f64::NAN
                    } else {
                        coefs.iter().sum::<f64>() / coefs.len() as f64
                    },
                    n_significant: fits.iter().filter(|r| r.is_significant(name) == Some(true)).count(),
                }
            })
            .collect();
        let betas: Vec<f64> = rows.iter().filter_map(|r| r.beta).collect();
        let r2: Vec<f64> = fits.iter().map(|f| f.r_squared).collect();
        out.push(SuiteSummary {
            model_id: model.id.clone(),
            regressors: model.regressors.iter().map(|f| f.name().to_string()).collect(),
            n_assets: returns.n_assets(),
            n_fitted: fits.len(),
            variables,
            beta: Distribution::of(&betas),
            r_squared: Distribution::of(&r2).unwrap_or(Distribution {
                mean: f64::NAN,
                min: f64::NAN,
                median: f64::NAN,
                max: f64::NAN,
            }),
            rows,
        });
    }
    if !any_fitted {
        return Err(Error::InsufficientData("no asset could be fitted under any model".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factors::FactorConfig;
    use crate::panel::compute_returns;
    use crate::panel::SeriesKind;
    use crate::synth::{generate, BetaSpec, DgpConfig, NormalProcess};

    fn setup(cfg: &DgpConfig) -> (ReturnPanel, FactorBundle) {
        let (panel, _) = generate(cfg).unwrap();
        let returns = compute_returns(&panel, SeriesKind::PriceIndex).unwrap();
        let bundle = FactorBundle::build(&panel, &returns, &FactorConfig::default()).unwrap();
        (returns, bundle)
    }

    #[test]
    fn catalog_ids_are_unique_with_one_market_each() {
        let c = catalog();
        let ids: BTreeSet<_> = c.iter().map(|m| &m.id).collect();
        assert_eq!(ids.len(), c.len());
        for m in &c {
            m.validate().unwrap();
            assert!(m.market_factor().is_some());
        }
    }

    #[test]
    fn noiseless_recovers_common_beta() {
        let cfg =
            DgpConfig::simple(12, 40, NormalProcess { mean: 1.0, sd: 1.0 }, BetaSpec::Explicit(vec![0.8; 12]), 0.0, 2);
        let (returns, bundle) = setup(&cfg);
        let m1 = find_model("1").unwrap();
        let s = &run_suite(&returns, &bundle, &[m1], &SuiteOptions::default()).unwrap()[0];
        assert_eq!(s.n_fitted, 12);
        assert!((s.beta.unwrap().mean - 0.8).abs() < 1e-6);
        assert_eq!(s.variable("market").unwrap().n_significant, 12);
        assert!(s.r_squared.mean > 1.0 - 1e-9);
    }

    #[test]
    fn constant_asset_is_skipped_not_dropped() {
        let cfg = DgpConfig::simple(
            4,
            40,
            NormalProcess { mean: 1.0, sd: 1.0 },
            BetaSpec::Explicit(vec![0.0, 1.0, 1.0, 1.0]),
            0.0,
            2,
        );
        let (returns, bundle) = setup(&cfg);
        let s = &run_suite(&returns, &bundle, &[find_model("1").unwrap()], &SuiteOptions::default()).unwrap()[0];
        assert_eq!(s.rows.len(), 4);
        assert_eq!(s.n_fitted, 3);
        let skipped: Vec<_> = s.skipped_rows().collect();
        assert_eq!(skipped[0].asset, "MSA001");
        assert!(skipped[0].skipped.as_ref().unwrap().contains("zero variance"));
        assert_eq!(skipped[0].mean_return, Some(0.0));
    }

    #[test]
    fn rejects_empty_and_unavailable() {
        let cfg = DgpConfig::simple(
            4,
            40,
            NormalProcess { mean: 1.0, sd: 1.0 },
            BetaSpec::Uniform { lo: 0.0, hi: 2.0 },
            1.0,
            2,
        );
        let (returns, bundle) = setup(&cfg);
        assert!(run_suite(&returns, &bundle, &[], &SuiteOptions::default()).is_err());
        let err = run_suite(&returns, &bundle, &[find_model("2").unwrap()], &SuiteOptions::default()).unwrap_err();
        assert!(err.to_string().contains("market_sp"));
        assert_eq!(available_models(&bundle).len(), 2);
    }

    #[test]
    fn distribution_median() {
        let d = Distribution::of(&[3.0, 1.0, 2.0, 10.0]).unwrap();
        assert_eq!((d.min, d.median, d.max, d.mean), (1.0, 2.5, 10.0, 4.0));
        assert!(Distribution::of(&[]).is_none());
    }

    #[test]
    fn rows_sorted_by_asset_name() {
        let cfg = DgpConfig::simple(
            5,
            40,
            NormalProcess { mean: 1.0, sd: 1.0 },
            BetaSpec::Uniform { lo: 0.0, hi: 2.0 },
            1.0,
            9,
        );
        let (returns, bundle) = setup(&cfg);
        let s = &run_suite(&returns, &bundle, &[find_model("1").unwrap()], &SuiteOptions::default()).unwrap()[0];
        let names: Vec<_> = s.rows.iter().map(|r| r.asset.clone()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }
}
