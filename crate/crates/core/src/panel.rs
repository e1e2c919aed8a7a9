//! Quarterly panel ingestion, percent log returns and the excess-return transform.
//!
//! Panels are read from long-format CSV with header `asset,year,quarter,series,value`.
//! Asset-invariant series (national index, equity index, risk-free rate) are stored
//! under the reserved asset name [`MARKET_ASSET`]. Missing observations are simply
//! absent rows and are carried as `None`; nothing is imputed.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quarter::QuarterId;

/// Reserved asset name for series that do not vary across assets.
pub const MARKET_ASSET: &str = "__MARKET__";

/// One value per quarter; `None` marks a missing observation.
pub type Series = Vec<Option<f64>>;

/// Per-asset series, indexed `[asset][quarter]`.
pub type AssetMatrix = Vec<Series>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    PriceIndex,
    MedianPrice,
    Income,
    Employment,
    Foreclosures,
    NationalIndex,
    EquityIndex,
    RiskfreeRate,
}

impl SeriesKind {
    pub const ALL: [SeriesKind; 8] = [
        SeriesKind::PriceIndex,
        SeriesKind::MedianPrice,
        SeriesKind::Income,
        SeriesKind::Employment,
        SeriesKind::Foreclosures,
        SeriesKind::NationalIndex,
        SeriesKind::EquityIndex,
        SeriesKind::RiskfreeRate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SeriesKind::PriceIndex => "price_index",
            SeriesKind::MedianPrice => "median_price",
            SeriesKind::Income => "income",
            SeriesKind::Employment => "employment",
            SeriesKind::Foreclosures => "foreclosures",
            SeriesKind::NationalIndex => "national_index",
            SeriesKind::EquityIndex => "equity_index",
            SeriesKind::RiskfreeRate => "riskfree_rate",
        }
    }

    /// True for series stored once per quarter under [`MARKET_ASSET`].
    pub fn is_market(self) -> bool {
        matches!(self, SeriesKind::NationalIndex | SeriesKind::EquityIndex | SeriesKind::RiskfreeRate)
    }
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SeriesKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SeriesKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::UnknownSeries(s.to_string()))
    }
}

/// Maps the labels found in the `series` column onto series kinds.
#[derive(Debug, Clone)]
pub struct PanelSchema {
    names: BTreeMap<String, SeriesKind>,
}

impl Default for PanelSchema {
    /// Canonical snake-case names (`price_index`, `median_price`, ...).
    fn default() -> Self {
        Self { names: SeriesKind::ALL.into_iter().map(|k| (k.name().to_string(), k)).collect() }
    }
}

impl PanelSchema {
    pub fn empty() -> Self {
        Self { names: BTreeMap::new() }
    }

    pub fn with_alias(mut self, label: impl Into<String>, kind: SeriesKind) -> Self {
        self.names.insert(label.into(), kind);
        self
    }

    pub fn resolve(&self, label: &str) -> Option<SeriesKind> {
        self.names.get(label).copied()
    }
}

/// Aligned quarterly levels for a set of assets on a gap-free calendar.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexPanel {
    assets: Vec<String>,
    calendar: Vec<QuarterId>,
    asset_series: BTreeMap<SeriesKind, AssetMatrix>,
    market_series: BTreeMap<SeriesKind, Series>,
}

impl IndexPanel {
    pub fn new(
        assets: Vec<String>,
        calendar: Vec<QuarterId>,
        asset_series: BTreeMap<SeriesKind, AssetMatrix>,
        market_series: BTreeMap<SeriesKind, Series>,
    ) -> Result<Self> {
        check_calendar(&calendar)?;
        check_assets(&assets)?;
        for (kind, matrix) in &asset_series {
            if kind.is_market() {
                return Err(Error::InvalidConfig(format!("{kind} is asset-invariant and cannot be stored per asset")));
            }
            if matrix.len() != assets.len() {
                return Err(Error::CalendarMismatch(format!(
                    "{kind} has {} asset rows, panel has {} assets",
                    matrix.len(),
                    assets.len()
                )));
            }
            for (asset, row) in assets.iter().zip(matrix) {
                if row.len() != calendar.len() {
                    return Err(Error::CalendarMismatch(format!(
                        "{kind} for {asset} has {} slots, calendar has {}",
                        row.len(),
                        calendar.len()
                    )));
                }
                if *kind == SeriesKind::PriceIndex {
                    for (q, v) in calendar.iter().zip(row) {
                        if let Some(v) = *v {
                            if !(v > 0.0) {
                                return Err(Error::NonPositiveLevel {
                                    line: 0,
                                    asset: asset.clone(),
                                    quarter: *q,
                                    series: kind.to_string(),
                                    value: v,
                                });
                            }
                        }
                    }
                }
            }
        }
        for (kind, series) in &market_series {
            if !kind.is_market() {
                return Err(Error::InvalidConfig(format!(
                    "{kind} is a per-asset series and cannot be stored under {MARKET_ASSET}"
                )));
            }
            if series.len() != calendar.len() {
                return Err(Error::CalendarMismatch(format!(
                    "{kind} has {} slots, calendar has {}",
                    series.len(),
                    calendar.len()
                )));
            }
        }
        Ok(Self { assets, calendar, asset_series, market_series })
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn calendar(&self) -> &[QuarterId] {
        &self.calendar
    }

    pub fn has_series(&self, kind: SeriesKind) -> bool {
        self.asset_series.contains_key(&kind) || self.market_series.contains_key(&kind)
    }

    pub fn series_kinds(&self) -> Vec<SeriesKind> {
        let mut kinds: Vec<_> = self.asset_series.keys().chain(self.market_series.keys()).copied().collect();
        kinds.sort();
        kinds
    }

    pub fn asset_series(&self, kind: SeriesKind) -> Result<&AssetMatrix> {
        self.asset_series.get(&kind).ok_or_else(|| Error::UnknownSeries(kind.to_string()))
    }

    pub fn market_series(&self, kind: SeriesKind) -> Result<&Series> {
        self.market_series.get(&kind).ok_or_else(|| Error::UnknownSeries(kind.to_string()))
    }

    /// Writes the panel in the long CSV layout accepted by [`load_panel`].
    /// Values are printed with the shortest representation that round-trips.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["asset", "year", "quarter", "series", "value"]).map_err(csv_err)?;
        let mut emit = |asset: &str, kind: SeriesKind, series: &Series| -> Result<()> {
            for (q, v) in self.calendar.iter().zip(series) {
                if let Some(v) = v {
                    w.write_record([
                        asset,
                        &q.year().to_string(),
                        &q.quarter().to_string(),
                        kind.name(),
                        &v.to_string(),
                    ])
                    .map_err(csv_err)?;
                }
            }
            Ok(())
        };
        for (i, asset) in self.assets.iter().enumerate() {
            for (kind, matrix) in &self.asset_series {
                emit(asset, *kind, &matrix[i])?;
            }
        }
        for (kind, series) in &self.market_series {
            emit(MARKET_ASSET, *kind, series)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn check_calendar(calendar: &[QuarterId]) -> Result<()> {
    if calendar.is_empty() {
        return Err(Error::InsufficientData("empty calendar".into()));
    }
    for pair in calendar.windows(2) {
        if pair[1] != pair[0].succ() {
            return Err(Error::CalendarGap { missing: pair[0].succ() });
        }
    }
    Ok(())
}

fn check_assets(assets: &[String]) -> Result<()> {
    for pair in assets.windows(2) {
        if pair[0] >= pair[1] {
            return Err(Error::InvalidConfig(format!(
                "assets must be unique and sorted; `{}` precedes `{}`",
                pair[0], pair[1]
            )));
        }
    }
    if assets.iter().any(|a| a == MARKET_ASSET) {
        return Err(Error::InvalidConfig(format!("{MARKET_ASSET} is reserved")));
    }
    Ok(())
}

struct RawCell {
    line: u64,
    asset: String,
    quarter: QuarterId,
    kind: SeriesKind,
    value: f64,
}

/// Reads a long-format panel file. Assets come out sorted lexicographically and the
/// calendar spans the first to the last quarter seen, which must be gap-free.
pub fn load_panel(path: &Path, schema: &PanelSchema) -> Result<IndexPanel> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_panel(file, schema)
}

/// Same as [`load_panel`] for any reader.
pub fn read_panel<R: Read>(reader: R, schema: &PanelSchema) -> Result<IndexPanel> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        Some(rec) => rec.map_err(|e| malformed_from_csv(&e, 1))?,
        None => return Err(Error::InsufficientData("empty panel file".into())),
    };
    let expected = ["asset", "year", "quarter", "series", "value"];
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::MalformedRow {
            line: 1,
            reason: format!("header must be `{}`, found `{}`", expected.join(","), got.join(",")),
        });
    }

    let mut cells = Vec::new();
    for (idx, rec) in records.enumerate() {
        let fallback_line = idx as u64 + 2;
        let rec = rec.map_err(|e| malformed_from_csv(&e, fallback_line))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(fallback_line);
        cells.push(parse_row(&rec, line, schema)?);
    }
    if cells.is_empty() {
        return Err(Error::InsufficientData("panel file has no data rows".into()));
    }

    let first = cells.iter().map(|c| c.quarter).min().expect("non-empty");
    let last = cells.iter().map(|c| c.quarter).max().expect("non-empty");
    let seen: BTreeSet<QuarterId> = cells.iter().map(|c| c.quarter).collect();
    let calendar = first.range((last.ordinal() - first.ordinal() + 1) as usize);
    if let Some(missing) = calendar.iter().find(|q| !seen.contains(q)) {
        return Err(Error::CalendarGap { missing: *missing });
    }
    let t_of: HashMap<QuarterId, usize> = calendar.iter().enumerate().map(|(i, q)| (*q, i)).collect();

    let assets: Vec<String> = cells
        .iter()
        .filter(|c| !c.kind.is_market())
        .map(|c| c.asset.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let a_of: HashMap<&str, usize> = assets.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();

    let mut asset_series: BTreeMap<SeriesKind, AssetMatrix> = BTreeMap::new();
    let mut market_series: BTreeMap<SeriesKind, Series> = BTreeMap::new();
    for cell in &cells {
        let t = t_of[&cell.quarter];
        let slot = if cell.kind.is_market() {
            &mut market_series.entry(cell.kind).or_insert_with(|| vec![None; calendar.len()])[t]
        } else {
            let a = a_of[cell.asset.as_str()];
            &mut asset_series.entry(cell.kind).or_insert_with(|| vec![vec![None; calendar.len()]; assets.len()])[a][t]
        };
        if slot.is_some() {
            return Err(Error::DuplicateCell {
                line: cell.line,
                asset: cell.asset.clone(),
                quarter: cell.quarter,
                series: cell.kind.to_string(),
            });
        }
        *slot = Some(cell.value);
    }

    IndexPanel::new(assets, calendar, asset_series, market_series)
}

fn malformed_from_csv(e: &csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(fallback_line);
    Error::MalformedRow { line, reason: e.to_string() }
}

fn parse_row(rec: &csv::StringRecord, line: u64, schema: &PanelSchema) -> Result<RawCell> {
    let bad = |reason: String| Error::MalformedRow { line, reason };
    if rec.len() != 5 {
        return Err(bad(format!("expected 5 fields, found {}", rec.len())));
    }
    let asset = rec[0].trim();
    if asset.is_empty() {
        return Err(bad("empty asset name".into()));
    }
    let year: i32 = rec[1].trim().parse().map_err(|_| bad(format!("year `{}` is not an integer", &rec[1])))?;
    let quarter: u8 = rec[2].trim().parse().map_err(|_| bad(format!("quarter `{}` is not an integer", &rec[2])))?;
    let quarter = QuarterId::new(year, quarter).map_err(|e| bad(e.to_string()))?;
    let label = rec[3].trim();
    let kind = schema.resolve(label).ok_or_else(|| bad(format!("unknown series `{label}`")))?;
    let value: f64 = rec[4].trim().parse().map_err(|_| bad(format!("value `{}` is not a number", &rec[4])))?;
    if !value.is_finite() {
        return Err(bad(format!("value `{}` is not finite", &rec[4])));
    }
    if kind.is_market() != (asset == MARKET_ASSET) {
        return Err(bad(if kind.is_market() {
            format!("{kind} must use the asset name {MARKET_ASSET}")
        } else {
            format!("{kind} cannot be stored under {MARKET_ASSET}")
        }));
    }
    if kind == SeriesKind::PriceIndex && !(value > 0.0) {
        return Err(Error::NonPositiveLevel {
            line,
            asset: asset.to_string(),
            quarter,
            series: kind.to_string(),
            value,
        });
    }
    Ok(RawCell { line, asset: asset.to_string(), quarter, kind, value })
}

/// A single quarterly series on an explicit calendar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub calendar: Vec<QuarterId>,
    pub values: Series,
}

impl TimeSeries {
    pub fn new(calendar: Vec<QuarterId>, values: Series) -> Result<Self> {
        if calendar.len() != values.len() {
            return Err(Error::CalendarMismatch(format!("{} values for {} quarters", values.len(), calendar.len())));
        }
        Ok(Self { calendar, values })
    }

    /// Restricts the series to `calendar`, which must be a contiguous stretch of
    /// this series' calendar.
    pub fn align_to(&self, calendar: &[QuarterId]) -> Result<Series> {
        let Some(first) = calendar.first() else {
            return Ok(Vec::new());
        };
        let start = self
            .calendar
            .iter()
            .position(|q| q == first)
            .ok_or_else(|| Error::CalendarMismatch(format!("series does not cover {first}")))?;
        let end = start + calendar.len();
        if end > self.calendar.len() || self.calendar[start..end] != *calendar {
            return Err(Error::CalendarMismatch(format!(
                "series does not cover {}..{}",
                first,
                calendar[calendar.len() - 1]
            )));
        }
        Ok(self.values[start..end].to_vec())
    }
}

/// Percent log returns per asset; one quarter shorter than the source levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    assets: Vec<String>,
    calendar: Vec<QuarterId>,
    returns: AssetMatrix,
}

impl ReturnPanel {
    pub fn new(assets: Vec<String>, calendar: Vec<QuarterId>, returns: AssetMatrix) -> Result<Self> {
        check_calendar(&calendar)?;
        if returns.len() != assets.len() {
            return Err(Error::CalendarMismatch(format!("{} return rows for {} assets", returns.len(), assets.len())));
        }
        if let Some((a, row)) = assets.iter().zip(&returns).find(|(_, row)| row.len() != calendar.len()) {
            return Err(Error::CalendarMismatch(format!(
                "{a} has {} return slots, calendar has {}",
                row.len(),
                calendar.len()
            )));
        }
        Ok(Self { assets, calendar, returns })
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn calendar(&self) -> &[QuarterId] {
        &self.calendar
    }

    pub fn returns(&self) -> &AssetMatrix {
        &self.returns
    }

    pub fn asset_returns(&self, asset: usize) -> &Series {
        &self.returns[asset]
    }

    pub fn asset_index(&self, name: &str) -> Option<usize> {
        self.assets.iter().position(|a| a == name)
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn n_quarters(&self) -> usize {
        self.calendar.len()
    }

    /// Returns the same panel with every present return mapped through `f`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ReturnPanel {
        ReturnPanel {
            assets: self.assets.clone(),
            calendar: self.calendar.clone(),
            returns: self.returns.iter().map(|row| row.iter().map(|v| v.map(&f)).collect()).collect(),
        }
    }
}

/// `100 * (ln x_t - ln x_{t-1})`; missing if either level is missing.
pub fn log_changes(levels: &[Option<f64>], what: &str) -> Result<Series> {
    levels
        .windows(2)
        .map(|w| match (w[0], w[1]) {
            (Some(prev), Some(cur)) => {
                for v in [prev, cur] {
                    if !(v > 0.0) {
                        return Err(Error::NonPositiveLog { what: what.to_string(), value: v });
                    }
                }
                Ok(Some(100.0 * (cur.ln() - prev.ln())))
            }
            _ => Ok(None),
        })
        .collect()
}

/// Percent log returns of a per-asset level series.
pub fn compute_returns(panel: &IndexPanel, kind: SeriesKind) -> Result<ReturnPanel> {
    let levels = panel.asset_series(kind)?;
    let returns = panel
        .assets()
        .iter()
        .zip(levels)
        .map(|(asset, row)| log_changes(row, &format!("{kind} of {asset}")))
        .collect::<Result<AssetMatrix>>()?;
    ReturnPanel::new(panel.assets().to_vec(), panel.calendar()[1..].to_vec(), returns)
}

/// Percent log returns of an asset-invariant level series (national or equity index).
pub fn compute_market_returns(panel: &IndexPanel, kind: SeriesKind) -> Result<TimeSeries> {
    let levels = panel.market_series(kind)?;
    TimeSeries::new(panel.calendar()[1..].to_vec(), log_changes(levels, kind.name())?)
}

/// Subtracts the contemporaneous risk-free rate from every return.
pub fn to_excess_returns(returns: &ReturnPanel, riskfree: &TimeSeries) -> Result<ReturnPanel> {
    if riskfree.calendar != returns.calendar {
        return Err(Error::CalendarMismatch("risk-free series must share the return calendar".into()));
    }
    let excess = returns
        .returns
        .iter()
        .map(|row| {
            row.iter()
                .zip(&riskfree.values)
                .map(|(r, rf)| match (r, rf) {
                    (Some(r), Some(rf)) => Some(r - rf),
                    _ => None,
                })
                .collect()
        })
        .collect();
    ReturnPanel::new(returns.assets.clone(), returns.calendar.clone(), excess)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(y: i32, n: u8) -> QuarterId {
        QuarterId::new(y, n).unwrap()
    }

    fn read(text: &str) -> Result<IndexPanel> {
        read_panel(text.as_bytes(), &PanelSchema::default())
    }

    #[test]
    fn loads_two_assets_four_quarters() {
        let mut text = String::from("asset,year,quarter,series,value\n");
        for a in ["Boston", "Akron"] {
            for qn in 1..=4 {
                text.push_str(&format!("{a},1990,{qn},price_index,{}\n", 100 + qn));
            }
        }
        let panel = read(&text).unwrap();
        assert_eq!(panel.assets(), ["Akron", "Boston"]);
        assert_eq!(panel.calendar().len(), 4);
        assert_eq!(panel.calendar()[0], q(1990, 1));
        let levels = panel.asset_series(SeriesKind::PriceIndex).unwrap();
        assert_eq!(levels[0][3], Some(104.0));
    }

    #[test]
    fn calendar_gap_names_missing_quarter() {
        let text = "asset,year,quarter,series,value\n\
                    A,1987,1,price_index,100\n\
                    A,1987,2,price_index,101\n\
                    A,1987,4,price_index,102\n\
                    B,1987,4,price_index,99\n";
        match read(text) {
            Err(Error::CalendarGap { missing }) => assert_eq!(missing, q(1987, 3)),
            other => panic!("expected gap, got {other:?}"),
        }
    }

    #[test]
    fn quarter_with_only_market_rows_is_not_a_gap() {
        let text = "asset,year,quarter,series,value\n\
                    A,1987,1,price_index,100\n\
                    __MARKET__,1987,2,riskfree_rate,1.2\n\
                    A,1987,3,price_index,102\n";
        let panel = read(text).unwrap();
        assert_eq!(panel.calendar().len(), 3);
        assert_eq!(panel.asset_series(SeriesKind::PriceIndex).unwrap()[0][1], None);
    }

    #[test]
    fn rejects_non_positive_index() {
        let text = "asset,year,quarter,series,value\nA,1990,1,price_index,-5\n";
        match read(text) {
            Err(Error::NonPositiveLevel { line, value, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(value, -5.0);
            }
            other => panic!("expected non-positive error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = "asset,year,quarter,series,value\n\
                    A,1990,1,price_index,100\n\
                    A,1990,two,price_index,100\n";
        match read(text) {
            Err(Error::MalformedRow { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected malformed row, got {other:?}"),
        }
        let short = "asset,year,quarter,series,value\nA,1990,1,price_index\n";
        assert!(matches!(read(short), Err(Error::MalformedRow { line: 2, .. })));
        let empty_value = "asset,year,quarter,series,value\nA,1990,1,price_index,\n";
        assert!(matches!(read(empty_value), Err(Error::MalformedRow { line: 2, .. })));
    }

    #[test]
    fn duplicate_cell_is_rejected() {
        let text = "asset,year,quarter,series,value\n\
                    A,1990,1,price_index,100\n\
                    A,1990,1,price_index,101\n";
        assert!(matches!(read(text), Err(Error::DuplicateCell { line: 3, .. })));
    }

    #[test]
    fn market_series_must_use_reserved_asset() {
        let text = "asset,year,quarter,series,value\nA,1990,1,national_index,100\n";
        assert!(matches!(read(text), Err(Error::MalformedRow { .. })));
        let text = "asset,year,quarter,series,value\n__MARKET__,1990,1,price_index,100\n";
        assert!(matches!(read(text), Err(Error::MalformedRow { .. })));
    }

    #[test]
    fn schema_aliases_resolve() {
        let schema = PanelSchema::empty().with_alias("hpi", SeriesKind::PriceIndex);
        let text = "asset,year,quarter,series,value\nA,1990,1,hpi,100\nA,1990,2,hpi,101\n";
        let panel = read_panel(text.as_bytes(), &schema).unwrap();
        assert!(panel.has_series(SeriesKind::PriceIndex));
        let text = "asset,year,quarter,series,value\nA,1990,1,price_index,100\n";
        assert!(read_panel(text.as_bytes(), &schema).is_err());
    }

    fn one_asset(levels: Series) -> IndexPanel {
        let cal = q(2000, 1).range(levels.len());
        IndexPanel::new(
            vec!["A".into()],
            cal,
            BTreeMap::from([(SeriesKind::PriceIndex, vec![levels])]),
            BTreeMap::new(),
        )
        .unwrap()
    }

    #[test]
    fn returns_of_constant_level_are_zero() {
        let r = compute_returns(&one_asset(vec![Some(100.0), Some(100.0)]), SeriesKind::PriceIndex).unwrap();
        assert_eq!(r.returns()[0], vec![Some(0.0)]);
        assert_eq!(r.calendar(), [q(2000, 2)]);
    }

    #[test]
    fn two_percent_level_change() {
        // 100 * ln(1.02), evaluated at high precision.
        let expected = 1.980_262_729_617_971_5;
        let r = compute_returns(&one_asset(vec![Some(100.0), Some(102.0)]), SeriesKind::PriceIndex).unwrap();
        assert!((r.returns()[0][0].unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn missing_level_blanks_both_adjacent_returns() {
        let r = compute_returns(&one_asset(vec![Some(100.0), None, Some(110.0)]), SeriesKind::PriceIndex).unwrap();
        assert_eq!(r.returns()[0], vec![None, None]);
    }

    #[test]
    fn unknown_series_kind() {
        let panel = one_asset(vec![Some(100.0), Some(101.0)]);
        assert!(matches!(compute_returns(&panel, SeriesKind::Employment), Err(Error::UnknownSeries(_))));
    }

    #[test]
    fn excess_return_subtracts_riskfree() {
        let cal = q(2000, 1).range(3);
        let rp = ReturnPanel::new(vec!["A".into()], cal.clone(), vec![vec![Some(1.5), None, Some(-0.25)]]).unwrap();
        let rf = TimeSeries::new(cal.clone(), vec![Some(0.5), Some(0.5), Some(0.5)]).unwrap();
        let ex = to_excess_returns(&rp, &rf).unwrap();
        assert_eq!(ex.returns()[0], vec![Some(1.0), None, Some(-0.75)]);

        let zero = TimeSeries::new(cal.clone(), vec![Some(0.0); 3]).unwrap();
        assert_eq!(to_excess_returns(&rp, &zero).unwrap(), rp);

        let shifted = TimeSeries::new(q(2000, 2).range(3), vec![Some(0.0); 3]).unwrap();
        assert!(matches!(to_excess_returns(&rp, &shifted), Err(Error::CalendarMismatch(_))));
    }

    #[test]
    fn align_to_sub_calendar() {
        let ts = TimeSeries::new(q(2000, 1).range(4), vec![Some(1.0), Some(2.0), None, Some(4.0)]).unwrap();
        assert_eq!(ts.align_to(&q(2000, 2).range(2)).unwrap(), vec![Some(2.0), None]);
        assert!(ts.align_to(&q(2000, 4).range(2)).is_err());
    }
}
