//! Least-squares regression with classical or HC0 standard errors, plus the
//! mean/t-statistic helper used for time series of estimates.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Serialize, Serializer};

use crate::dist::t_critical;
use crate::error::{Error, Result};
use crate::linalg::{least_squares, RankDeficiency};
use crate::panel::Series;

/// Name given to the constant column when an intercept is requested.
pub const INTERCEPT: &str = "intercept";

/// Two-sided test size used for the significance flags.
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeMode {
    #[default]
    Classical,
    Hc0,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSpec {
    pub dependent: String,
    pub regressors: Vec<String>,
    pub include_intercept: bool,
    /// Minimum usable rows after listwise deletion; `None` means k + 10.
    pub min_obs: Option<usize>,
    pub se_mode: SeMode,
}

impl RegressionSpec {
    /// Intercept on, classical errors, default minimum observations.
    pub fn new(dependent: impl Into<String>, regressors: &[&str]) -> Self {
        Self {
            dependent: dependent.into(),
            regressors: regressors.iter().map(|s| s.to_string()).collect(),
            include_intercept: true,
            min_obs: None,
            se_mode: SeMode::Classical,
        }
    }

    pub fn intercept(mut self, on: bool) -> Self {
        self.include_intercept = on;
        self
    }

    pub fn min_obs(mut self, n: usize) -> Self {
        self.min_obs = Some(n);
        self
    }

    pub fn se_mode(mut self, mode: SeMode) -> Self {
        self.se_mode = mode;
        self
    }

    pub fn n_params(&self) -> usize {
        self.regressors.len() + usize::from(self.include_intercept)
    }

    pub fn required_obs(&self) -> usize {
        self.min_obs.unwrap_or(self.n_params() + 10)
    }

    fn validate(&self) -> Result<()> {
        if self.n_params() == 0 {
            return Err(Error::InvalidConfig("regression has no parameters".into()));
        }
        let mut seen = BTreeSet::new();
        for r in &self.regressors {
            if r == INTERCEPT {
                return Err(Error::InvalidConfig(format!("`{INTERCEPT}` is reserved; use include_intercept")));
            }
            if !seen.insert(r) {
                return Err(Error::InvalidConfig(format!("regressor `{r}` listed twice")));
            }
        }
        if self.required_obs() < self.n_params() + 1 {
            return Err(Error::InvalidConfig(format!(
                "min_obs {} must be at least parameters + 1 = {}",
                self.required_obs(),
                self.n_params() + 1
            )));
        }
        Ok(())
    }
}

/// Equal-length named columns, possibly with missing values.
#[derive(Debug, Clone, Default)]
pub struct DataSet {
    len: usize,
    columns: BTreeMap<String, Series>,
}

impl DataSet {
    pub fn new(len: usize) -> Self {
        Self { len, columns: BTreeMap::new() }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn insert(&mut self, name: impl Into<String>, values: Series) -> Result<()> {
        let name = name.into();
        if values.len() != self.len {
            return Err(Error::CalendarMismatch(format!(
                "column `{name}` has {} rows, data set has {}",
                values.len(),
                self.len
            )));
        }
        self.columns.insert(name, values);
        Ok(())
    }

    pub fn with(mut self, name: impl Into<String>, values: Series) -> Result<Self> {
        self.insert(name, values)?;
        Ok(self)
    }

    pub fn with_complete(self, name: impl Into<String>, values: &[f64]) -> Result<Self> {
        self.with(name, values.iter().copied().map(Some).collect())
    }

    pub fn get(&self, name: &str) -> Result<&Series> {
        self.columns.get(name).ok_or_else(|| Error::UnknownSeries(name.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    /// Parameter names; the intercept, when present, comes first.
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub significant_5pct: Vec<bool>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    /// False when no intercept was fitted and R² is uncentered.
    pub centered_r2: bool,
    /// One slot per input row; `None` where the row was deleted.
    pub residuals: Series,
    pub n_obs: usize,
    pub dof: usize,
    pub sigma2: f64,
    pub se_mode: SeMode,
}

impl FitResult {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn coef(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.coefficients[i])
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.std_errors[i])
    }

    pub fn t_stat(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.t_stats[i])
    }

    pub fn is_significant(&self, name: &str) -> Option<bool> {
        self.index_of(name).map(|i| self.significant_5pct[i])
    }

    /// Two-sided confidence interval `coef ± t_crit(dof) * se` at the given test size.
    pub fn interval(&self, name: &str, level: f64) -> Result<Option<(f64, f64)>> {
        let Some(i) = self.index_of(name) else {
            return Ok(None);
        };
        let c = t_critical(self.dof, level)?;
        let (b, se) = (self.coefficients[i], self.std_errors[i]);
        Ok(Some((b - c * se, b + c * se)))
    }

    /// Residuals of the rows that entered the fit, in row order.
    pub fn used_residuals(&self) -> Vec<f64> {
        self.residuals.iter().flatten().copied().collect()
    }
}

/// Fits `spec` on `data`, dropping every row where any involved column is missing.
pub fn fit(spec: &RegressionSpec, data: &DataSet) -> Result<FitResult> {
    spec.validate()?;
    let y = data.get(&spec.dependent)?;
    let xs = spec.regressors.iter().map(|r| data.get(r)).collect::<Result<Vec<_>>>()?;

    let rows: Vec<usize> = (0..data.len()).filter(|&t| y[t].is_some() && xs.iter().all(|x| x[t].is_some())).collect();
    let required = spec.required_obs();
    if rows.len() < required {
        return Err(Error::InsufficientObservations { available: rows.len(), required });
    }

    let y_used: Vec<f64> = rows.iter().map(|&t| y[t].unwrap()).collect();
    let mut names = Vec::with_capacity(spec.n_params());
    let mut columns = Vec::with_capacity(spec.n_params());
    if spec.include_intercept {
        names.push(INTERCEPT.to_string());
        columns.push(vec![1.0; rows.len()]);
    }
    for (name, x) in spec.regressors.iter().zip(&xs) {
        names.push(name.clone());
        columns.push(rows.iter().map(|&t| x[t].unwrap()).collect());
    }

    let mut result = fit_columns(&spec.dependent, &y_used, names, &columns, spec.include_intercept, spec.se_mode)?;
    let mut residuals = vec![None; data.len()];
    for (slot, e) in rows.iter().zip(result.residuals.iter()) {
        residuals[*slot] = *e;
    }
    result.residuals = residuals;
    Ok(result)
}

/// Core fit on complete data. `columns` must already include the constant
/// column when `centered` is true.
pub(crate) fn fit_columns(
    dependent: &str,
    y: &[f64],
    names: Vec<String>,
    columns: &[Vec<f64>],
    centered: bool,
    se_mode: SeMode,
) -> Result<FitResult> {
    let n = y.len();
    let k = columns.len();
    let ls = least_squares(columns, y).map_err(|RankDeficiency { dependent }| Error::RankDeficient {
        columns: dependent.iter().map(|&j| names[j].clone()).collect(),
    })?;

    let rss: f64 = ls.residuals.iter().map(|e| e * e).sum();
    let tss: f64 = if centered {
        let mean = y.iter().sum::<f64>() / n as f64;
        y.iter().map(|v| (v - mean) * (v - mean)).sum()
    } else {
        y.iter().map(|v| v * v).sum()
    };
    if tss == 0.0 {
        return Err(Error::ZeroVariance(format!("dependent variable `{dependent}`")));
    }
    let dof = n - k;
    let r_squared = (1.0 - rss / tss).clamp(0.0, 1.0);
    let denom = if centered { n - 1 } else { n } as f64;
    let adj_r_squared = 1.0 - (1.0 - r_squared) * denom / dof as f64;
    let sigma2 = rss / dof as f64;

    let std_errors: Vec<f64> = match se_mode {
        SeMode::Classical => (0..k).map(|j| (sigma2 * ls.xtx_inv[j][j]).max(0.0).sqrt()).collect(),
        SeMode::Hc0 => {
            // (X'X)⁻¹ X' diag(e²) X (X'X)⁻¹, diagonal only
            (0..k)
                .map(|j| {
                    let v: f64 = (0..n)
                        .map(|t| {
                            let h: f64 = (0..k).map(|p| ls.xtx_inv[j][p] * columns[p][t]).sum();
                            h * h * ls.residuals[t] * ls.residuals[t]
                        })
                        .sum();
                    v.sqrt()
                })
                .collect()
        }
    };
    let t_stats: Vec<f64> = ls.coefficients.iter().zip(&std_errors).map(|(b, se)| b / se).collect();
    let crit = t_critical(dof, SIGNIFICANCE_LEVEL)?;
    let significant_5pct = t_stats.iter().map(|t| t.abs() > crit).collect();

    Ok(FitResult {
        names,
        coefficients: ls.coefficients,
        std_errors,
        t_stats,
        significant_5pct,
        r_squared,
        adj_r_squared,
        centered_r2: centered,
        residuals: ls.residuals.into_iter().map(Some).collect(),
        n_obs: n,
        dof,
        sigma2,
        se_mode,
    })
}

/// Result of a t-test that a series has mean zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TStat {
    Finite(f64),
    /// Zero sample variance with a nonzero mean; sign of the mean.
    Infinite(f64),
    /// Zero sample variance and zero mean.
    Undefined,
}

impl TStat {
    /// IEEE value: ±∞ for an exact fit, NaN when undefined.
    pub fn value(self) -> f64 {
        match self {
            TStat::Finite(t) => t,
            TStat::Infinite(sign) => sign * f64::INFINITY,
            TStat::Undefined => f64::NAN,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, TStat::Infinite(_))
    }

    /// |t| above the two-sided critical value for `dof`.
    pub fn rejects(self, dof: usize, level: f64) -> Result<bool> {
        Ok(match self {
            TStat::Finite(t) => t.abs() > t_critical(dof, level)?,
            TStat::Infinite(_) => true,
            TStat::Undefined => false,
        })
    }
}

impl Serialize for TStat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TStat::Finite(t) => s.serialize_f64(*t),
            TStat::Infinite(sign) if *sign > 0.0 => s.serialize_str("inf"),
            TStat::Infinite(_) => s.serialize_str("-inf"),
            TStat::Undefined => s.serialize_str("undefined"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanTest {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
    pub t: TStat,
}

/// t = mean / (sd / √n).
pub fn t_from_moments(mean: f64, sd: f64, n: usize) -> Result<TStat> {
    if n < 2 {
        return Err(Error::InsufficientData(format!("t statistic needs n >= 2, got {n}")));
    }
    if !(sd >= 0.0) {
        return Err(Error::InvalidConfig(format!("standard deviation {sd} is negative")));
    }
    Ok(if sd == 0.0 {
        if mean == 0.0 {
            TStat::Undefined
        } else {
            TStat::Infinite(mean.signum())
        }
    } else {
        TStat::Finite(mean / (sd / (n as f64).sqrt()))
    })
}

/// Mean, sample standard deviation (n − 1) and t statistic of the present values.
pub fn mean_tstat(values: &[Option<f64>]) -> Result<MeanTest> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let n = present.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("mean t statistic needs at least 2 values, got {n}")));
    }
    let first = present[0];
    let (mean, sd) = if present.iter().all(|v| v.to_bits() == first.to_bits()) {
        (first, 0.0)
    } else {
        let mean = present.iter().sum::<f64>() / n as f64;
        let var = present.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        (mean, var.sqrt())
    };
    Ok(MeanTest { mean, sd, n, t: t_from_moments(mean, sd, n)? })
}

/// Sample standard deviation with denominator n − 1.
pub fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Pearson correlation of two equal-length complete sequences.
pub fn correlation(x: &[f64], y: &[f64], what: &str) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidConfig(format!("{what}: sequences differ in length")));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        let which = if sxx == 0.0 { "first" } else { "second" };
        return Err(Error::ZeroVariance(format!("{what}: {which} sequence")));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(v: &[f64]) -> Series {
        v.iter().copied().map(Some).collect()
    }

    #[test]
    fn exact_linear_data() {
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let data = DataSet::new(10).with("y", complete(&y)).unwrap().with("x", complete(&x)).unwrap();
        let f = fit(&RegressionSpec::new("y", &["x"]).min_obs(3), &data).unwrap();
        assert!((f.coef("x").unwrap() - 2.0).abs() < 1e-12);
        assert!(f.coef(INTERCEPT).unwrap().abs() < 1e-12);
        assert_eq!(f.r_squared, 1.0);
        assert!(f.used_residuals().iter().all(|e| e.abs() < 1e-12));
    }

    #[test]
    fn self_regression() {
        let m = complete(&[0.5, -1.0, 2.0, 0.3, 1.1, -0.2, 0.9, 1.4, -0.7, 0.0, 0.6, 1.8]);
        let data = DataSet::new(12).with("market", m).unwrap();
        let f = fit(&RegressionSpec::new("market", &["market"]).min_obs(3), &data).unwrap();
        assert!((f.coef("market").unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(f.r_squared, 1.0);
    }

    #[test]
    fn listwise_deletion_drops_rows() {
        let mut y = complete(&(0..15).map(|i| (i * i) as f64).collect::<Vec<_>>());
        let mut x = complete(&(0..15).map(f64::from).collect::<Vec<_>>());
        y[3] = None;
        x[7] = None;
        let data = DataSet::new(15).with("y", y).unwrap().with("x", x).unwrap();
        let f = fit(&RegressionSpec::new("y", &["x"]).min_obs(5), &data).unwrap();
        assert_eq!(f.n_obs, 13);
        assert_eq!(f.residuals[3], None);
        assert_eq!(f.residuals[7], None);
        assert_eq!(f.dof, 11);
    }

    #[test]
    fn insufficient_observations_uses_default_k_plus_ten() {
        let data = DataSet::new(11)
            .with_complete("y", &(0..11).map(|i| (i % 3) as f64).collect::<Vec<_>>())
            .unwrap()
            .with_complete("x", &(0..11).map(f64::from).collect::<Vec<_>>())
            .unwrap();
        match fit(&RegressionSpec::new("y", &["x"]), &data) {
            Err(Error::InsufficientObservations { available, required }) => {
                assert_eq!((available, required), (11, 12));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rank_deficiency_names_columns() {
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        let z: Vec<f64> = x.iter().map(|v| 3.0 * v + 1.0).collect();
        let data = DataSet::new(20)
            .with_complete("y", &x.iter().map(|v| v.sin()).collect::<Vec<_>>())
            .unwrap()
            .with_complete("x", &x)
            .unwrap()
            .with_complete("z", &z)
            .unwrap();
        match fit(&RegressionSpec::new("y", &["x", "z"]), &data) {
            Err(Error::RankDeficient { columns }) => {
                assert_eq!(columns.len(), 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spec_validation() {
        let data = DataSet::new(20).with_complete("y", &[1.0; 20]).unwrap().with_complete("x", &[1.0; 20]).unwrap();
        assert!(matches!(fit(&RegressionSpec::new("y", &["x", "x"]), &data), Err(Error::InvalidConfig(_))));
        assert!(matches!(fit(&RegressionSpec::new("y", &["x"]).min_obs(2), &data), Err(Error::InvalidConfig(_))));
        assert!(matches!(fit(&RegressionSpec::new("y", &["w"]), &data), Err(Error::UnknownSeries(_))));
    }

    #[test]
    fn constant_dependent_is_zero_variance() {
        let data = DataSet::new(20)
            .with_complete("y", &[1.5; 20])
            .unwrap()
            .with_complete("x", &(0..20).map(f64::from).collect::<Vec<_>>())
            .unwrap();
        assert!(matches!(fit(&RegressionSpec::new("y", &["x"]), &data), Err(Error::ZeroVariance(_))));
    }

    #[test]
    fn hc0_equals_classical_pattern_on_homogeneous_residuals() {
        // Residuals of ±1 on a balanced design: HC0 variance of the slope is
        // Σ (x_t - x̄)² e_t² / Sxx² = 1/Sxx, classical is σ̂²/Sxx with σ̂² = n/(n-2).
        let x = [-1.0, -1.0, 1.0, 1.0, -2.0, -2.0, 2.0, 2.0];
        let y = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        let data = DataSet::new(8).with_complete("y", &y).unwrap().with_complete("x", &x).unwrap();
        let spec = RegressionSpec::new("y", &["x"]).min_obs(3);
        let classical = fit(&spec, &data).unwrap();
        let hc0 = fit(&spec.clone().se_mode(SeMode::Hc0), &data).unwrap();
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        assert!((hc0.std_error("x").unwrap() - (1.0 / sxx).sqrt()).abs() < 1e-12);
        assert!((classical.std_error("x").unwrap() - (8.0 / 6.0 / sxx).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn t_statistics_from_moment_triples() {
        let cases = [(4.59, 4.53, 4.86), (0.175, 0.406, 2.07), (6.35, 2.97, 10.26)];
        for (mean, sd, want) in cases {
            let t = t_from_moments(mean, sd, 23).unwrap().value();
            assert!((t - want).abs() <= 0.01, "{mean}/{sd}: {t}");
        }
    }

    #[test]
    fn constant_series_has_infinite_t() {
        let m = mean_tstat(&[Some(0.9); 32]).unwrap();
        assert_eq!(m.mean, 0.9);
        assert_eq!(m.sd, 0.0);
        assert_eq!(m.t, TStat::Infinite(1.0));
        assert_eq!(mean_tstat(&[Some(0.0); 4]).unwrap().t, TStat::Undefined);
        assert!(mean_tstat(&[Some(1.0), None]).is_err());
    }

    #[test]
    fn mean_tstat_hand_values() {
        let m = mean_tstat(&[Some(1.0), Some(2.0), None, Some(3.0)]).unwrap();
        assert_eq!(m.n, 3);
        assert_eq!(m.mean, 2.0);
        assert_eq!(m.sd, 1.0);
        assert!((m.t.value() - 2.0 * 3f64.sqrt()).abs() < 1e-14);
    }
}
