//! Summary tables and plot data, emitted as comma-separated text or JSON.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::factors::FactorBundle;
use crate::fama_macbeth::FmResult;
use crate::ols::{correlation, sample_sd};
use crate::panel::{AssetMatrix, Series};
use crate::quarter::QuarterId;
use crate::rolling::{RollingFitSeries, SortedBeta};
use crate::suite::{Distribution, SuiteSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    SummaryStats,
    CorrelationMatrix,
    SuiteTable,
    PerAssetTable,
    RollingPlot,
    SortedBetaPlot,
    ScatterPlot,
    FmTable,
    FactorSeries,
}

impl ArtifactKind {
    pub fn name(self) -> &'static str {
        match self {
            ArtifactKind::SummaryStats => "summary_stats",
            ArtifactKind::CorrelationMatrix => "correlation_matrix",
            ArtifactKind::SuiteTable => "suite_table",
            ArtifactKind::PerAssetTable => "per_asset_table",
            ArtifactKind::RollingPlot => "rolling_plot",
            ArtifactKind::SortedBetaPlot => "sorted_beta_plot",
            ArtifactKind::ScatterPlot => "scatter_plot",
            ArtifactKind::FmTable => "fm_table",
            ArtifactKind::FactorSeries => "factor_series",
        }
    }
}

impl fmt::Display for ArtifactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Num(f64),
    Int(i64),
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn delimited(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Num(v) => format_sig(*v, 6),
            Cell::Int(i) => i.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(v) => Value::String(non_finite(*v).into()),
            Cell::Int(i) => json!(i),
            Cell::Missing => Value::Null,
        }
    }
}

fn non_finite(v: f64) -> &'static str {
    if v.is_nan() {
        "nan"
    } else if v > 0.0 {
        "inf"
    } else {
        "-inf"
    }
}

/// `%g`-style formatting with `digits` significant digits.
pub fn format_sig(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return non_finite(v).into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        trim(&format!("{:.*}", (digits as i32 - 1 - exp) as usize, v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportArtifact {
    pub kind: ArtifactKind,
    /// Written as the first comment line of delimited output.
    pub title: String,
    pub metadata: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Delimited,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Delimited => "csv",
            Format::Json => "json",
        }
    }
}

impl ReportArtifact {
    pub fn new(kind: ArtifactKind, title: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            kind,
            title: title.into(),
            metadata: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// SHA-256 of the canonical JSON of columns and rows.
    pub fn payload_digest(&self) -> String {
        let payload = json!({ "columns": self.columns, "rows": self.json_rows() });
        hex::encode(Sha256::digest(payload.to_string().as_bytes()))
    }

    fn json_rows(&self) -> Vec<Value> {
        self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect()
    }

    fn full_metadata(&self) -> BTreeMap<String, String> {
        let mut m = self.metadata.clone();
        m.insert("payload_sha256".into(), self.payload_digest());
        m
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": self.kind.name(),
            "title": self.title,
            "metadata": self.full_metadata(),
            "columns": self.columns,
            "rows": self.json_rows(),
        })
    }

    pub fn to_delimited(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        let comment = |out: &mut Vec<u8>, text: &str| {
            for line in text.lines() {
                writeln!(out, "# {line}").expect("write to memory");
            }
        };
        comment(&mut out, &self.title);
        comment(&mut out, &format!("kind: {}", self.kind));
        for (k, v) in self.full_metadata() {
            comment(&mut out, &format!("{k}: {v}"));
        }
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::InvalidConfig(format!("delimited encoding failed: {e}"));
        w.write_record(&self.columns).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::delimited)).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::InvalidConfig(format!("delimited encoding failed: {e}")))
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Delimited => self.to_delimited(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json())?;
                s.push('\n');
                Ok(s.into_bytes())
            }
        }
    }

    /// Writes the artifact to `path`; identical artifacts give identical bytes.
    pub fn emit(&self, format: Format, path: &Path) -> Result<()> {
        let bytes = self.render(format)?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }
}

/// A named quarterly series for the summary and correlation tables.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedSeries {
    pub name: String,
    pub calendar: Vec<QuarterId>,
    pub values: Series,
}

impl NamedSeries {
    pub fn new(name: impl Into<String>, calendar: &[QuarterId], values: Series) -> Result<Self> {
        let name = name.into();
        if values.len() != calendar.len() {
            return Err(Error::CalendarMismatch(format!("{name}: values and calendar differ in length")));
        }
        Ok(Self { name, calendar: calendar.to_vec(), values })
    }

    /// Per-quarter mean over assets with a present value.
    pub fn cross_sectional_mean(name: impl Into<String>, calendar: &[QuarterId], matrix: &AssetMatrix) -> Result<Self> {
        let values = (0..calendar.len())
            .map(|t| {
                let v: Vec<f64> = matrix.iter().filter_map(|row| row.get(t).copied().flatten()).collect();
                (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
            })
            .collect();
        Self::new(name, calendar, values)
    }

    /// Means of calendar years whose four quarters are all present.
    pub fn annual_means(&self) -> NamedSeries {
        let mut years: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
        let mut incomplete = std::collections::BTreeSet::new();
        for (q, v) in self.calendar.iter().zip(&self.values) {
            match v {
                Some(v) => years.entry(q.year()).or_default().push(*v),
                None => {
                    incomplete.insert(q.year());
                }
            }
        }
        let (calendar, values) = years
            .into_iter()
            .filter(|(y, v)| v.len() == 4 && !incomplete.contains(y))
            .map(|(y, v)| (QuarterId::new(y, 4).expect("valid quarter"), Some(v.iter().sum::<f64>() / 4.0)))
            .unzip();
        NamedSeries { name: self.name.clone(), calendar, values }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frequency {
    Quarterly,
    /// Each calendar year's four quarters averaged first.
    AnnualMean,
}

impl Frequency {
    pub fn name(self) -> &'static str {
        match self {
            Frequency::Quarterly => "quarterly",
            Frequency::AnnualMean => "annual_mean",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub name: String,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

/// Mean, sample sd, min, median and max of each series' present values.
pub fn summary_stats(series: &[NamedSeries], frequency: Frequency) -> Result<Vec<SummaryRow>> {
    if series.is_empty() {
        return Err(Error::InsufficientData("no series to summarize".into()));
    }
    series
        .iter()
        .map(|s| {
            let s = match frequency {
                Frequency::Quarterly => s.clone(),
                Frequency::AnnualMean => s.annual_means(),
            };
            let v: Vec<f64> = s.values.iter().flatten().copied().collect();
            let d = Distribution::of(&v)
                .ok_or_else(|| Error::InsufficientData(format!("{} has no present values", s.name)))?;
            let sd = if v.len() < 2 {
                f64::NAN
            } else if v.iter().all(|x| *x == v[0]) {
                0.0
            } else {
                sample_sd(&v)
            };
            Ok(SummaryRow {
                name: s.name.clone(),
                n: v.len(),
                mean: d.mean,
                sd,
                min: d.min,
                median: d.median,
                max: d.max,
            })
        })
        .collect()
}

pub fn summary_stats_artifact(rows: &[SummaryRow], frequency: Frequency) -> ReportArtifact {
    let mut a = ReportArtifact::new(
        ArtifactKind::SummaryStats,
        format!("Summary statistics ({} frequency)", frequency.name()),
        &["series", "n", "mean", "sd", "min", "median", "max", "t_mean"],
    )
    .with_meta("frequency", frequency.name());
    for r in rows {
        let t = if r.n >= 2 { crate::ols::t_from_moments(r.mean, r.sd, r.n).map(|t| t.value()).ok() } else { None };
        a.push_row(vec![
            r.name.as_str().into(),
            r.n.into(),
            r.mean.into(),
            r.sd.into(),
            r.min.into(),
            r.median.into(),
            r.max.into(),
            t.into(),
        ]);
    }
    a
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    /// Pairwise-complete observation counts.
    pub counts: Vec<Vec<usize>>,
}

/// Pairwise-complete Pearson correlations on a common calendar.
pub fn correlation_matrix(series: &[NamedSeries]) -> Result<CorrelationMatrix> {
    if series.len() < 2 {
        return Err(Error::InsufficientData("correlation matrix needs at least 2 series".into()));
    }
    for s in &series[1..] {
        if s.calendar != series[0].calendar {
            return Err(Error::CalendarMismatch(format!("{} is not on the calendar of {}", s.name, series[0].name)));
        }
    }
    let k = series.len();
    let mut values = vec![vec![1.0; k]; k];
    let mut counts = vec![vec![0; k]; k];
    for i in 0..k {
        for j in i..k {
            let (x, y): (Vec<f64>, Vec<f64>) =
                series[i].values.iter().zip(&series[j].values).filter_map(|(a, b)| Some(((*a)?, (*b)?))).unzip();
            if x.len() < 3 {
                return Err(Error::InsufficientData(format!(
                    "{} and {} overlap in {} quarters; 3 required",
                    series[i].name,
                    series[j].name,
                    x.len()
                )));
            }
            let what = format!("correlation of {} with {}", series[i].name, series[j].name);
            let r = correlation(&x, &y, &what).map_err(|e| match e {
                Error::ZeroVariance(m) if m.ends_with("first sequence") => {
                    Error::ZeroVariance(format!("series {} ({what})", series[i].name))
                }
                Error::ZeroVariance(_) => Error::ZeroVariance(format!("series {} ({what})", series[j].name)),
                e => e,
            })?;
            counts[i][j] = x.len();
            counts[j][i] = x.len();
            if i != j {
                values[i][j] = r;
                values[j][i] = r;
            }
        }
    }
    Ok(CorrelationMatrix { names: series.iter().map(|s| s.name.clone()).collect(), values, counts })
}

pub fn correlation_artifact(m: &CorrelationMatrix) -> ReportArtifact {
    let mut cols = vec!["variable"];
    cols.extend(m.names.iter().map(String::as_str));
    let mut a = ReportArtifact::new(ArtifactKind::CorrelationMatrix, "Correlation matrix of time-varying terms", &cols);
    for (i, name) in m.names.iter().enumerate() {
        let mut row = vec![Cell::from(name.as_str())];
        row.extend(m.values[i].iter().map(|v| Cell::Num(*v)));
        a.push_row(row);
    }
    let counts: Vec<String> =
        m.counts.iter().map(|r| r.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")).collect();
    a.with_meta("pair_counts", counts.join("; "))
}

fn dist_rows(label: &str, d: Option<&Distribution>) -> [(String, Option<f64>); 4] {
    [
        (format!("{label}_mean"), d.map(|d| d.mean)),
        (format!("{label}_min"), d.map(|d| d.min)),
        (format!("{label}_median"), d.map(|d| d.median)),
        (format!("{label}_max"), d.map(|d| d.max)),
    ]
}

/// Models as columns; per-variable mean coefficients and 5% significance counts,
/// then the beta and R² distributions and fitted counts as rows.
pub fn suite_table(summaries: &[SuiteSummary]) -> ReportArtifact {
    let mut cols = vec!["row".to_string()];
    cols.extend(summaries.iter().map(|s| format!("model_{}", s.model_id)));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut a = ReportArtifact::new(ArtifactKind::SuiteTable, "Model battery summary across assets", &col_refs);
    let mut vars: Vec<&str> = Vec::new();
    for s in summaries {
        for v in &s.variables {
            if !vars.contains(&v.name.as_str()) {
                vars.push(&v.name);
            }
        }
    }
    for v in vars {
        let mut coef = vec![Cell::from(v)];
        let mut count = vec![Cell::from(format!("{v}_n_significant"))];
        for s in summaries {
            let found = s.variable(v);
            coef.push(found.map_or(Cell::Missing, |x| Cell::Num(x.mean_coefficient)));
            count.push(found.map_or(Cell::Missing, |x| x.n_significant.into()));
        }
        a.push_row(coef);
        a.push_row(count);
    }
    for (label, pick) in [("beta", 0), ("r2", 1)] {
        for i in 0..4 {
            let mut row = Vec::new();
            for s in summaries {
                let d = if pick == 0 { s.beta } else { Some(s.r_squared) };
                let r = dist_rows(label, d.as_ref());
                if row.is_empty() {
                    row.push(Cell::from(r[i].0.clone()));
                }
                row.push(r[i].1.into());
            }
            a.push_row(row);
        }
    }
    let mut fitted = vec![Cell::from("n_fitted")];
    let mut total = vec![Cell::from("n_assets")];
    for s in summaries {
        fitted.push(s.n_fitted.into());
        total.push(s.n_assets.into());
    }
    a.push_row(fitted);
    a.push_row(total);
    a
}

pub fn per_asset_table(summary: &SuiteSummary) -> ReportArtifact {
    let mut a = ReportArtifact::new(
        ArtifactKind::PerAssetTable,
        format!("Per-asset market betas, model {}", summary.model_id),
        &["asset", "beta", "se_beta", "r2", "mean_return", "n_obs", "skipped"],
    )
    .with_meta("model", summary.model_id.clone());
    for r in &summary.rows {
        a.push_row(vec![
            r.asset.as_str().into(),
            r.beta.into(),
            r.se_beta.into(),
            r.r_squared.into(),
            r.mean_return.into(),
            r.n_obs.map_or(Cell::Missing, Cell::from),
            r.skipped.clone().map_or(Cell::Missing, Cell::Text),
        ]);
    }
    a
}

pub fn rolling_plot(series: &RollingFitSeries, corr: Option<f64>) -> ReportArtifact {
    let mut a = ReportArtifact::new(
        ArtifactKind::RollingPlot,
        format!("Rolling market beta with 95% band and R² for {}, {}-quarter window", series.asset, series.window),
        &["period", "beta", "lower", "upper", "r2"],
    )
    .with_meta("asset", series.asset.clone())
    .with_meta("window", series.window.to_string())
    .with_meta("skipped_windows", series.skipped.len().to_string());
    if let Some(c) = corr {
        a = a.with_meta("corr_beta_r2", format_sig(c, 6));
    }
    for e in &series.entries {
        a.push_row(vec![e.end.to_string().into(), e.beta.into(), e.lower.into(), e.upper.into(), e.r_squared.into()]);
    }
    a
}

pub fn sorted_beta_plot(view: &[SortedBeta], step: usize) -> ReportArtifact {
    let mut a = ReportArtifact::new(
        ArtifactKind::SortedBetaPlot,
        format!("Sorted full-sample market betas, every {step}th, with 95% bands"),
        &["rank", "asset", "beta", "lower", "upper"],
    )
    .with_meta("step", step.to_string());
    for e in view {
        a.push_row(vec![e.rank.into(), e.asset.as_str().into(), e.beta.into(), e.lower.into(), e.upper.into()]);
    }
    a
}

/// Slope, its t statistic and R² of mean return on beta across assets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatterFit {
    pub slope: f64,
    pub t_slope: f64,
    pub r_squared: f64,
    pub n: usize,
}

pub fn scatter_fit(summary: &SuiteSummary) -> Result<ScatterFit> {
    let (b, m): (Vec<f64>, Vec<f64>) = summary.rows.iter().filter_map(|r| Some((r.beta?, r.mean_return?))).unzip();
    let data = crate::ols::DataSet::new(b.len()).with_complete("mean_return", &m)?.with_complete("beta", &b)?;
    let f = crate::ols::fit(&crate::ols::RegressionSpec::new("mean_return", &["beta"]).min_obs(3), &data)?;
    Ok(ScatterFit { slope: f.coefficients[1], t_slope: f.t_stats[1], r_squared: f.r_squared, n: f.n_obs })
}

pub fn scatter_plot(summary: &SuiteSummary) -> ReportArtifact {
    let mut a = ReportArtifact::new(
        ArtifactKind::ScatterPlot,
        format!("Market beta against mean quarterly return, model {}", summary.model_id),
        &["asset", "beta", "mean_return"],
    );
    if let Ok(f) = scatter_fit(summary) {
        a = a.with_meta("slope", format_sig(f.slope, 6)).with_meta("slope_t", format_sig(f.t_slope, 6));
    }
    for r in summary.fitted_rows() {
        a.push_row(vec![r.asset.as_str().into(), r.beta.into(), r.mean_return.into()]);
    }
    a
}

/// Period label, then mean and t statistic of each gamma.
pub fn fm_table(result: &FmResult) -> ReportArtifact {
    let mut cols = vec!["period_label".to_string()];
    let mut order: Vec<usize> = (0..result.gamma_names.len()).collect();
    // the intercept, when present, goes last so the slope columns keep their positions
    if result.config.include_intercept {
        order.rotate_left(1);
    }
    for &g in &order {
        let name = &result.gamma_names[g];
        cols.push(name.clone());
        cols.push(name.replace("gamma", "t"));
    }
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut a = ReportArtifact::new(ArtifactKind::FmTable, "Fama-MacBeth mean gammas with t statistics", &col_refs)
        .with_meta("portfolios", result.config.n_portfolios.to_string())
        .with_meta("portfolio_sizes", format!("{:?}", result.portfolios.sizes()))
        .with_meta("formation", result.config.formation.to_string())
        .with_meta("estimation", result.config.estimation.to_string())
        .with_meta("testing", result.config.testing.to_string())
        .with_meta("intercept", result.config.include_intercept.to_string());
    for (i, note) in result.notes.iter().enumerate() {
        a = a.with_meta(format!("note_{}", i + 1), note.clone());
    }
    for p in &result.summary {
        let mut row = vec![Cell::from(format!("{} ({}-{})", p.label, p.first, p.last))];
        for &g in &order {
            row.push(p.gammas[g].test.mean.into());
            row.push(p.gammas[g].test.t.value().into());
        }
        a.push_row(row);
    }
    a
}

/// Market-level factor series and the cross-sectional mean of s², by quarter.
pub fn factor_series_artifact(bundle: &FactorBundle) -> ReportArtifact {
    let s2 = NamedSeries::cross_sectional_mean("s2_mean", &bundle.calendar, &bundle.idio)
        .expect("idiosyncratic risk is on the bundle calendar");
    let none = vec![None; bundle.calendar.len()];
    let mut a = ReportArtifact::new(
        ArtifactKind::FactorSeries,
        "Factor series by quarter",
        &["quarter", "market", "market_sp", "smb", "mom", "s2_mean"],
    )
    .with_meta("market_proxy", bundle.market_proxy.name())
    .with_meta("idio_window", bundle.idio_window.to_string());
    for (i, note) in bundle.notes.iter().enumerate() {
        a = a.with_meta(format!("note_{}", i + 1), note.clone());
    }
    for (t, q) in bundle.calendar.iter().enumerate() {
        a.push_row(vec![
            q.to_string().into(),
            bundle.market[t].into(),
            bundle.equity.as_ref().unwrap_or(&none)[t].into(),
            bundle.smb.as_ref().unwrap_or(&none)[t].into(),
            bundle.momentum.as_ref().unwrap_or(&none)[t].into(),
            s2.values[t].into(),
        ]);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cal(n: usize) -> Vec<QuarterId> {
        QuarterId::new(2000, 1).unwrap().range(n)
    }

    fn named(name: &str, v: &[f64]) -> NamedSeries {
        NamedSeries::new(name, &cal(v.len()), v.iter().copied().map(Some).collect()).unwrap()
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(0.0, 6), "0");
        assert_eq!(format_sig(1.0, 6), "1");
        assert_eq!(format_sig(2.0 / 3.0, 6), "0.666667");
        assert_eq!(format_sig(123456.7, 6), "123457");
        assert_eq!(format_sig(1234567.0, 6), "1.23457e+06");
        assert_eq!(format_sig(-0.000012345, 6), "-1.2345e-05");
        assert_eq!(format_sig(0.0001, 6), "0.0001");
        assert_eq!(format_sig(999999.7, 6), "1e+06");
        assert_eq!(format_sig(f64::INFINITY, 6), "inf");
    }

    #[test]
    fn summary_hand_values() {
        let rows = summary_stats(&[named("c", &[2.5; 5]), named("x", &[1.0, 2.0, 3.0])], Frequency::Quarterly).unwrap();
        assert_eq!((rows[0].mean, rows[0].sd, rows[0].min, rows[0].median, rows[0].max), (2.5, 0.0, 2.5, 2.5, 2.5));
        assert_eq!((rows[1].mean, rows[1].sd, rows[1].median), (2.0, 1.0, 2.0));
        assert!(summary_stats(&[], Frequency::Quarterly).is_err());
    }

    #[test]
    fn annual_means_need_full_years() {
        // 2000Q1..2001Q2: only 2000 is complete
        let s = named("x", &[1.0, 2.0, 3.0, 4.0, 10.0, 10.0]);
        let a = s.annual_means();
        assert_eq!(a.values, vec![Some(2.5)]);
        assert_eq!(a.calendar[0].year(), 2000);
    }

    #[test]
    fn correlation_identities() {
        let x = [1.0, 3.0, 2.0, 5.0, 4.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let m = correlation_matrix(&[named("x", &x), named("neg", &neg)]).unwrap();
        assert_eq!(m.values[0][0], 1.0);
        assert!((m.values[0][1] + 1.0).abs() < 1e-15);
        assert_eq!(m.values[0][1], m.values[1][0]);
        let err = correlation_matrix(&[named("x", &x), named("flat", &[1.0; 5])]).unwrap_err();
        assert!(err.to_string().contains("flat"));
    }

    #[test]
    fn pairwise_complete_counts() {
        let a =
            NamedSeries::new("a", &cal(6), vec![None, Some(1.0), Some(2.0), Some(4.0), Some(3.0), Some(5.0)]).unwrap();
        let b = named("b", &[1.0, 2.0, 1.0, 3.0, 2.0, 4.0]);
        let m = correlation_matrix(&[a, b]).unwrap();
        assert_eq!(m.counts[0][1], 5);
        assert_eq!(m.counts[1][1], 6);
    }

    #[test]
    fn emission_is_deterministic_and_round_trips() {
        let mut a =
            ReportArtifact::new(ArtifactKind::RollingPlot, "test plot", &["period", "beta", "lower", "upper", "r2"]);
        a.push_row(vec!["1990Q4".into(), 1.25.into(), Cell::Missing, f64::INFINITY.into(), 0.5.into()]);
        a.push_row(vec!["a,b".into(), 0.1.into(), 0.2.into(), 0.3.into(), 0.4.into()]);
        let one = a.render(Format::Delimited).unwrap();
        assert_eq!(one, a.render(Format::Delimited).unwrap());
        let text = String::from_utf8(one).unwrap();
        assert!(text.starts_with("# test plot\n# kind: rolling_plot\n"));
        let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
        let mut r = csv::Reader::from_reader(body.as_bytes());
        assert_eq!(r.headers().unwrap(), vec!["period", "beta", "lower", "upper", "r2"]);
        let recs: Vec<_> = r.records().map(|r| r.unwrap()).collect();
        assert_eq!(&recs[0][2], "");
        assert_eq!(&recs[0][3], "inf");
        assert_eq!(&recs[1][0], "a,b");

        let j = a.to_json();
        assert_eq!(j["kind"], "rolling_plot");
        assert_eq!(j["rows"][0][1], 1.25);
        assert!(j["rows"][0][2].is_null());
        assert_eq!(j["rows"][0][3], "inf");
    }

    #[test]
    fn digest_distinguishes_payloads() {
        let mut a = ReportArtifact::new(ArtifactKind::SummaryStats, "t", &["x"]);
        a.push_row(vec![1.0.into()]);
        let mut b = a.clone();
        b.rows[0][0] = Cell::Num(1.0 + f64::EPSILON);
        assert_ne!(a.payload_digest(), b.payload_digest());
    }
}
