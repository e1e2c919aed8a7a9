//! Moving-window single-factor betas and the sorted cross-section of betas.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factors::MIN_WINDOW;
use crate::ols::{correlation, fit, DataSet, FitResult, RegressionSpec, SIGNIFICANCE_LEVEL};
use crate::panel::Series;
use crate::quarter::QuarterId;

pub const DEFAULT_WINDOW: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RollingEntry {
    pub start: QuarterId,
    pub end: QuarterId,
    pub beta: f64,
    pub se_beta: f64,
    pub r_squared: f64,
    pub n_obs: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedWindow {
    pub end: QuarterId,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RollingFitSeries {
    pub asset: String,
    pub window: usize,
    /// In window-end order; `lower <= beta <= upper` for every entry.
    pub entries: Vec<RollingEntry>,
    pub skipped: Vec<SkippedWindow>,
}

/// The standalone single-factor fit used for each window.
pub fn window_fit(y: &[Option<f64>], market: &[Option<f64>]) -> Result<FitResult> {
    let data = DataSet::new(y.len()).with("y", y.to_vec())?.with("market", market.to_vec())?;
    fit(&RegressionSpec::new("y", &["market"]).min_obs(y.len()), &data)
}

/// One single-factor fit per contiguous `window`-quarter span, advancing one
/// quarter at a time. Windows with a missing value, or a constant asset return,
/// are skipped and recorded.
pub fn rolling_betas(
    asset: &str,
    calendar: &[QuarterId],
    returns: &Series,
    market: &Series,
    window: usize,
) -> Result<RollingFitSeries> {
    if window < MIN_WINDOW {
        return Err(Error::InvalidConfig(format!("rolling window {window} is below the minimum of {MIN_WINDOW}")));
    }
    if returns.len() != calendar.len() || market.len() != calendar.len() {
        return Err(Error::CalendarMismatch(format!("{asset}: series and calendar lengths differ")));
    }
    let present = returns.iter().zip(market).filter(|(r, m)| r.is_some() && m.is_some()).count();
    if window > present {
        return Err(Error::InsufficientObservations { available: present, required: window });
    }

    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for end in (window - 1)..calendar.len() {
        let span = (end + 1 - window)..(end + 1);
        let (y, m) = (&returns[span.clone()], &market[span.clone()]);
        if y.iter().chain(m).any(Option::is_none) {
            skipped.push(SkippedWindow { end: calendar[end], reason: "missing value in window".into() });
            continue;
        }
        let f = match window_fit(y, m) {
            Ok(f) => f,
            Err(Error::RankDeficient { .. }) => {
                return Err(Error::ZeroVariance(format!("{asset}: market factor in window ending {}", calendar[end])))
            }
            Err(Error::ZeroVariance(_)) => {
                skipped.push(SkippedWindow { end: calendar[end], reason: "constant asset return in window".into() });
                continue;
            }
            Err(e) => return Err(e),
        };
        let (lower, upper) = f.interval("market", SIGNIFICANCE_LEVEL)?.expect("market coefficient");
        entries.push(RollingEntry {
            start: calendar[span.start],
            end: calendar[end],
            beta: f.coefficients[1],
            se_beta: f.std_errors[1],
            r_squared: f.r_squared,
            n_obs: f.n_obs,
            lower,
            upper,
        });
    }
    Ok(RollingFitSeries { asset: asset.to_string(), window, entries, skipped })
}

/// Pearson correlation between the rolling beta and R² sequences.
pub fn beta_r2_correlation(series: &RollingFitSeries) -> Result<f64> {
    if series.entries.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{}: correlation needs at least 3 rolling entries, got {}",
            series.asset,
            series.entries.len()
        )));
    }
    let b: Vec<f64> = series.entries.iter().map(|e| e.beta).collect();
    let r: Vec<f64> = series.entries.iter().map(|e| e.r_squared).collect();
    correlation(&b, &r, &format!("{} beta/R² correlation", series.asset))
}

/// A full-sample beta with its 95% band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaEstimate {
    pub asset: String,
    pub beta: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SortedBeta {
    /// 1-based position in the ascending sort.
    pub rank: usize,
    pub asset: String,
    pub beta: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Sorts by beta (ties by asset name) and keeps ranks `step, 2*step, ...`.
pub fn sorted_beta_view(betas: &[BetaEstimate], step: usize) -> Result<Vec<SortedBeta>> {
    if step == 0 || step > betas.len() {
        return Err(Error::InvalidConfig(format!(
            "step {step} must be between 1 and the number of betas ({})",
            betas.len()
        )));
    }
    let mut sorted: Vec<&BetaEstimate> = betas.iter().collect();
    sorted.sort_by(|a, b| a.beta.total_cmp(&b.beta).then_with(|| a.asset.cmp(&b.asset)));
    Ok(sorted
        .into_iter()
        .enumerate()
        .skip(step - 1)
        .step_by(step)
        .map(|(i, e)| SortedBeta { rank: i + 1, asset: e.asset.clone(), beta: e.beta, lower: e.lower, upper: e.upper })
        .collect())
}
