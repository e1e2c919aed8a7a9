use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use hprisk::factors::{FactorBundle, FactorConfig, MarketProxy, MomentumMode, SmbMode, DEFAULT_IDIO_WINDOW};
use hprisk::fama_macbeth::{run_fama_macbeth, FmConfig, IdioConstruction, SubPeriod, DEFAULT_PORTFOLIOS};
use hprisk::panel::{compute_returns, load_panel, IndexPanel, PanelSchema, ReturnPanel, SeriesKind};
use hprisk::report::{self, Format, Frequency, NamedSeries, ReportArtifact};
use hprisk::rolling::{beta_r2_correlation, rolling_betas, sorted_beta_view, BetaEstimate, DEFAULT_WINDOW};
use hprisk::suite::{available_models, find_model, run_suite, SuiteOptions};
use hprisk::synth::{generate, DgpConfig, ValueSpec};
use hprisk::{Error, QuarterRange};

#[derive(Parser, Debug)]
#[command(name = "hprisk", version, about = "Factor-model estimation for metropolitan house-price panels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a panel file and print its shape.
    IngestCheck(IngestArgs),
    /// Emit the factor series by quarter.
    Factors(PanelArgs),
    /// Fit the model battery for every asset.
    Suite(SuiteArgs),
    /// Moving-window market betas per asset.
    Rolling(RollingArgs),
    /// Every n-th full-sample beta in ascending order.
    SortedBetas(SortedArgs),
    /// Full-sample beta against mean return per asset.
    Scatter(PanelArgs),
    /// Three-stage Fama-MacBeth portfolio test.
    Fm(FmArgs),
    /// Generate a synthetic panel with known parameters.
    Synth(SynthArgs),
    /// Summary statistics and correlation matrix of the model variables.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output directory, created if absent.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Delimited,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// Panel file; a missing `.csv` extension is added.
    #[arg(long)]
    input: PathBuf,
    /// Extra `label=kind` mappings for the series column.
    #[arg(long = "alias", value_name = "LABEL=KIND")]
    aliases: Vec<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct PanelArgs {
    #[command(flatten)]
    ingest: IngestArgs,
    #[arg(long, value_enum)]
    market_proxy: Option<ProxyArg>,
    #[arg(long, value_enum, default_value_t = SmbArg::Single)]
    smb_mode: SmbArg,
    /// Fixed count of winners and losers in the momentum spread.
    #[arg(long, conflicts_with = "momentum_decile")]
    momentum_k: Option<usize>,
    /// Use the top and bottom deciles instead of a fixed count.
    #[arg(long)]
    momentum_decile: bool,
    /// Trailing window for the idiosyncratic-risk factor.
    #[arg(long, default_value_t = DEFAULT_IDIO_WINDOW)]
    idio_window: usize,
    /// Treat asset returns as excess returns and subtract the risk-free rate from market series.
    #[arg(long)]
    excess: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ProxyArg {
    NationalProvided,
    NationalEqualweight,
    Equity,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SmbArg {
    Single,
    QuartileMean,
}

#[derive(Args, Debug)]
struct SuiteArgs {
    #[command(flatten)]
    panel: PanelArgs,
    /// Model ids (1-6, A1-A3); defaults to every model the panel supports.
    #[arg(long = "model")]
    models: Vec<String>,
    /// Fit all models for an asset on one shared sample.
    #[arg(long)]
    common_sample: bool,
    /// Heteroskedasticity-robust (HC0) standard errors.
    #[arg(long)]
    hc0: bool,
    #[arg(long)]
    min_obs: Option<usize>,
}

#[derive(Args, Debug)]
struct RollingArgs {
    #[command(flatten)]
    panel: PanelArgs,
    /// Assets to process; defaults to all.
    #[arg(long = "asset")]
    assets: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
}

#[derive(Args, Debug)]
struct SortedArgs {
    #[command(flatten)]
    panel: PanelArgs,
    #[arg(long, default_value_t = 10)]
    step: usize,
}

#[derive(Args, Debug)]
struct FmArgs {
    #[command(flatten)]
    panel: PanelArgs,
    #[arg(long, default_value = "1-30")]
    formation: QuarterRange,
    #[arg(long, default_value = "31-60")]
    estimation: QuarterRange,
    #[arg(long, default_value = "61-92")]
    testing: QuarterRange,
    #[arg(long, default_value_t = DEFAULT_PORTFOLIOS)]
    portfolios: usize,
    /// Add an intercept to the cross-sectional regressions.
    #[arg(long)]
    intercept: bool,
    /// Portfolio s² from a trailing window before each testing quarter.
    #[arg(long)]
    idio_trailing: Option<usize>,
    /// Extra summary rows over part of the testing range, as `label=first-last`.
    #[arg(long = "sub-period", value_name = "LABEL=FIRST-LAST")]
    sub_periods: Vec<String>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_enum, default_value_t = Preset::Replica)]
    preset: Preset,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Market premium of the linear-pricing preset.
    #[arg(long, default_value_t = 0.9)]
    premium: f64,
    /// Multiplies every idiosyncratic noise sd.
    #[arg(long, default_value_t = 1.0)]
    noise_scale: f64,
    /// Expected-return reward per unit of noise variance.
    #[arg(long)]
    idio_premium: Option<f64>,
    #[arg(long)]
    n_assets: Option<usize>,
    #[arg(long)]
    n_quarters: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Preset {
    Replica,
    Linear,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[command(flatten)]
    panel: PanelArgs,
    #[arg(long, value_enum, default_value_t = FrequencyArg::Both)]
    frequency: FrequencyArg,
}

#[derive(Copy, Clone, Debug, ValueEnum, PartialEq)]
enum FrequencyArg {
    Quarterly,
    Annual,
    Both,
}

/// Error carrying the process exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_numeric() {
            4
        } else if matches!(e, Error::InvalidConfig(_) | Error::InvalidQuarter(_)) {
            2
        } else {
            3
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Run-level context echoed into every artifact and the metadata file.
struct Run {
    command: &'static str,
    out: PathBuf,
    format: Format,
    meta: BTreeMap<String, Value>,
    written: Vec<String>,
}

impl Run {
    fn new(command: &'static str, out: &Path, format: Format) -> CliResult<Self> {
        fs::create_dir_all(out)
            .map_err(|e| Failure { code: 3, message: format!("cannot create {}: {e}", out.display()) })?;
        let argv: Vec<String> = std::env::args().skip(1).collect();
        let mut meta = BTreeMap::new();
        meta.insert("command".into(), json!(command));
        meta.insert("argv".into(), json!(argv));
        meta.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        Ok(Self { command, out: out.to_path_buf(), format, meta, written: Vec::new() })
    }

    fn set(&mut self, key: &str, value: Value) {
        self.meta.insert(key.into(), value);
    }

    fn emit(&mut self, stem: &str, artifact: ReportArtifact) -> CliResult<()> {
        let mut a = artifact;
        for key in ["input_sha256", "seed"] {
            if let Some(v) = self.meta.get(key) {
                a = a.with_meta(key, v.as_str().map_or_else(|| v.to_string(), str::to_string));
            }
        }
        if let Some(c) = self.meta.get("config") {
            a = a.with_meta("config", c.to_string());
        }
        let name = format!("{stem}.{}", self.format.extension());
        a.emit(self.format, &self.out.join(&name))?;
        self.written.push(name);
        Ok(())
    }

    fn write_file(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.out.join(name);
        fs::write(&path, bytes).map_err(|e| Failure::from(Error::Io { path: path.clone(), source: e }))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn finish(mut self, summary: &str) -> CliResult<()> {
        self.set("outputs", json!(self.written));
        let text = serde_json::to_string_pretty(&self.meta).expect("metadata serializes") + "\n";
        let name = format!("{}.meta.json", self.command);
        fs::write(self.out.join(&name), text)
            .map_err(|e| Failure::from(Error::Io { path: self.out.join(&name), source: e }))?;
        println!("{summary}");
        Ok(())
    }
}

fn resolve_input(path: &Path) -> PathBuf {
    if !path.exists() && path.extension().is_none() {
        let with_ext = path.with_extension("csv");
        if with_ext.exists() {
            return with_ext;
        }
    }
    path.to_path_buf()
}

fn load(args: &IngestArgs, run: &mut Run) -> CliResult<IndexPanel> {
    let mut schema = PanelSchema::default();
    for a in &args.aliases {
        let (label, kind) = a.split_once('=').ok_or_else(|| usage(format!("alias `{a}` is not LABEL=KIND")))?;
        schema = schema.with_alias(label, kind.parse::<SeriesKind>()?);
    }
    let path = resolve_input(&args.input);
    let bytes = fs::read(&path).map_err(|e| Failure::from(Error::Io { path: path.clone(), source: e }))?;
    run.set("input", json!(path.display().to_string()));
    run.set("input_sha256", json!(hex::encode(Sha256::digest(&bytes))));
    Ok(load_panel(&path, &schema)?)
}

fn factor_config(p: &PanelArgs) -> FactorConfig {
    FactorConfig {
        market_proxy: p.market_proxy.map(|m| match m {
            ProxyArg::NationalProvided => MarketProxy::NationalProvided,
            ProxyArg::NationalEqualweight => MarketProxy::NationalEqualWeight,
            ProxyArg::Equity => MarketProxy::Equity,
        }),
        smb_mode: match p.smb_mode {
            SmbArg::Single => SmbMode::Single,
            SmbArg::QuartileMean => SmbMode::QuartileMean,
        },
        momentum_mode: match (p.momentum_decile, p.momentum_k) {
            (true, _) => MomentumMode::Decile,
            (false, Some(k)) => MomentumMode::FixedCount(k),
            (false, None) => MomentumMode::default(),
        },
        idio_window: p.idio_window,
        excess: p.excess,
    }
}

struct Prepared {
    returns: ReturnPanel,
    bundle: FactorBundle,
}

fn prepare(p: &PanelArgs, run: &mut Run, extra: Value) -> CliResult<Prepared> {
    if p.momentum_k == Some(0) {
        return Err(usage("--momentum-k must be positive"));
    }
    let config = factor_config(p);
    let panel = load(&p.ingest, run)?;
    let returns = compute_returns(&panel, SeriesKind::PriceIndex)?;
    let bundle = FactorBundle::build(&panel, &returns, &config)?;
    let mut cfg = serde_json::to_value(&config).expect("config serializes");
    cfg["market_proxy"] = json!(bundle.market_proxy.name());
    if let (Value::Object(c), Value::Object(e)) = (&mut cfg, extra) {
        c.extend(e);
    }
    run.set("config", cfg);
    if !bundle.notes.is_empty() {
        run.set("notes", json!(bundle.notes));
    }
    Ok(Prepared { returns, bundle })
}

fn ingest_check(args: IngestArgs) -> CliResult<()> {
    let mut run = Run::new("ingest-check", &args.output.out, args.output.format.into())?;
    let panel = load(&args, &mut run)?;
    let cal = panel.calendar();
    let kinds: Vec<&str> = panel.series_kinds().iter().map(|k| k.name()).collect();
    let shape = json!({
        "assets": panel.assets().len(),
        "quarters": cal.len(),
        "first": cal[0].to_string(),
        "last": cal[cal.len() - 1].to_string(),
        "series": kinds,
    });
    run.set("shape", shape);
    run.finish(&format!(
        "ok: {} assets, {} quarters ({} to {}), series {}",
        panel.assets().len(),
        cal.len(),
        cal[0],
        cal[cal.len() - 1],
        kinds.join(",")
    ))
}

fn factors(args: PanelArgs) -> CliResult<()> {
    let mut run = Run::new("factors", &args.ingest.output.out, args.ingest.output.format.into())?;
    let p = prepare(&args, &mut run, json!({}))?;
    run.emit("factors", report::factor_series_artifact(&p.bundle))?;
    run.finish(&format!("factors: {} quarters, proxy {}", p.bundle.calendar.len(), p.bundle.market_proxy.name()))
}

fn suite(args: SuiteArgs) -> CliResult<()> {
    let mut run = Run::new("suite", &args.panel.ingest.output.out, args.panel.ingest.output.format.into())?;
    let models = args
        .models
        .iter()
        .map(|m| find_model(m).ok_or_else(|| usage(format!("unknown model `{m}`"))))
        .collect::<CliResult<Vec<_>>>()?;
    let options = SuiteOptions {
        se_mode: if args.hc0 { hprisk::ols::SeMode::Hc0 } else { hprisk::ols::SeMode::Classical },
        min_obs: args.min_obs,
        common_sample: args.common_sample,
    };
    let extra = json!({ "models": args.models, "suite_options": options });
    let p = prepare(&args.panel, &mut run, extra)?;
    let models = if models.is_empty() { available_models(&p.bundle) } else { models };
    let summaries = run_suite(&p.returns, &p.bundle, &models, &options)?;
    run.emit("suite_table", report::suite_table(&summaries))?;
    for s in &summaries {
        run.emit(&format!("per_asset_model_{}", s.model_id), report::per_asset_table(s))?;
    }
    let ids: Vec<&str> = summaries.iter().map(|s| s.model_id.as_str()).collect();
    let fitted: Vec<String> = summaries.iter().map(|s| format!("{}/{}", s.n_fitted, s.n_assets)).collect();
    run.finish(&format!("suite: models {} fitted {}", ids.join(","), fitted.join(",")))
}

fn rolling(args: RollingArgs) -> CliResult<()> {
    let mut run = Run::new("rolling", &args.panel.ingest.output.out, args.panel.ingest.output.format.into())?;
    let p = prepare(&args.panel, &mut run, json!({ "window": args.window, "assets": args.assets }))?;
    let targets: Vec<usize> = if args.assets.is_empty() {
        (0..p.returns.n_assets()).collect()
    } else {
        args.assets
            .iter()
            .map(|a| p.returns.asset_index(a).ok_or_else(|| Failure::from(Error::UnknownSeries(format!("asset {a}")))))
            .collect::<CliResult<_>>()?
    };
    for a in &targets {
        let name = &p.returns.assets()[*a];
        let series =
            rolling_betas(name, p.returns.calendar(), p.returns.asset_returns(*a), &p.bundle.market, args.window)?;
        let corr = beta_r2_correlation(&series).ok();
        run.emit(&format!("rolling_{name}"), report::rolling_plot(&series, corr))?;
    }
    run.finish(&format!("rolling: {} assets, window {}", targets.len(), args.window))
}

fn model_one(p: &Prepared) -> CliResult<hprisk::suite::SuiteSummary> {
    let m1 = find_model("1").expect("model 1 is in the catalog");
    Ok(run_suite(&p.returns, &p.bundle, &[m1], &SuiteOptions::default())?.remove(0))
}

fn sorted_betas(args: SortedArgs) -> CliResult<()> {
    let mut run = Run::new("sorted-betas", &args.panel.ingest.output.out, args.panel.ingest.output.format.into())?;
    let p = prepare(&args.panel, &mut run, json!({ "step": args.step }))?;
    let s = model_one(&p)?;
    let mut betas = Vec::new();
    for r in s.fitted_rows() {
        let (b, se, dof) = (r.beta.unwrap_or(f64::NAN), r.se_beta.unwrap_or(f64::NAN), r.dof.unwrap_or(0));
        let c = hprisk::dist::t_critical(dof, hprisk::ols::SIGNIFICANCE_LEVEL)?;
        betas.push(BetaEstimate { asset: r.asset.clone(), beta: b, lower: b - c * se, upper: b + c * se });
    }
    let view = sorted_beta_view(&betas, args.step)?;
    run.emit("sorted_betas", report::sorted_beta_plot(&view, args.step))?;
    run.finish(&format!("sorted-betas: {} of {} betas", view.len(), betas.len()))
}

fn scatter(args: PanelArgs) -> CliResult<()> {
    let mut run = Run::new("scatter", &args.ingest.output.out, args.ingest.output.format.into())?;
    let p = prepare(&args, &mut run, json!({}))?;
    let s = model_one(&p)?;
    let fit = report::scatter_fit(&s)?;
    run.emit("scatter", report::scatter_plot(&s))?;
    run.finish(&format!(
        "scatter: {} assets, slope {} (t {})",
        fit.n,
        report::format_sig(fit.slope, 6),
        report::format_sig(fit.t_slope, 6)
    ))
}

fn parse_sub_period(s: &str) -> CliResult<SubPeriod> {
    let (label, range) = s.split_once('=').ok_or_else(|| usage(format!("sub-period `{s}` is not LABEL=FIRST-LAST")))?;
    Ok(SubPeriod { label: label.to_string(), range: range.parse()? })
}

fn fm(args: FmArgs) -> CliResult<()> {
    let mut run = Run::new("fm", &args.panel.ingest.output.out, args.panel.ingest.output.format.into())?;
    let config = FmConfig {
        formation: args.formation,
        estimation: args.estimation,
        testing: args.testing,
        n_portfolios: args.portfolios,
        include_intercept: args.intercept,
        idio: args
            .idio_trailing
            .map_or(IdioConstruction::EstimationStatic, |window| IdioConstruction::Trailing { window }),
        min_obs: None,
        sub_periods: args.sub_periods.iter().map(|s| parse_sub_period(s)).collect::<CliResult<_>>()?,
    };
    let p = prepare(&args.panel, &mut run, json!({ "fm": config }))?;
    config.validate(p.returns.n_quarters(), p.returns.n_assets())?;
    let result = run_fama_macbeth(&p.returns, &p.bundle.market, &config)?;
    run.emit("fm_table", report::fm_table(&result))?;
    let detail = serde_json::to_string_pretty(&result).map_err(Error::from)? + "\n";
    run.write_file("fm_result.json", detail.as_bytes())?;
    let full = result.full_period();
    let parts: Vec<String> = full
        .gammas
        .iter()
        .map(|g| {
            format!("{} {} (t {})", g.name, report::format_sig(g.test.mean, 6), report::format_sig(g.test.t.value(), 6))
        })
        .collect();
    run.finish(&format!("fm: {}", parts.join(", ")))
}

fn synth(args: SynthArgs) -> CliResult<()> {
    if !(args.noise_scale >= 0.0 && args.noise_scale.is_finite()) {
        return Err(usage("--noise-scale must be a finite number >= 0"));
    }
    let mut run = Run::new("synth", &args.out, Format::Delimited)?;
    let mut config = match args.preset {
        Preset::Replica => DgpConfig::replica_preset(),
        Preset::Linear => DgpConfig::linear_pricing_preset(args.premium),
    }
    .with_seed(args.seed);
    if let Some(n) = args.n_assets {
        config.n_assets = n;
    }
    if let Some(n) = args.n_quarters {
        config.n_quarters = n;
    }
    if let Some(p) = args.idio_premium {
        config.idio_premium = p;
    }
    config.noise_sd = match config.noise_sd {
        ValueSpec::Constant(v) => ValueSpec::Constant(v * args.noise_scale),
        ValueSpec::Explicit(v) => ValueSpec::Explicit(v.iter().map(|x| x * args.noise_scale).collect()),
        ValueSpec::Uniform { lo, hi } => ValueSpec::Uniform { lo: lo * args.noise_scale, hi: hi * args.noise_scale },
    };
    run.set("seed", json!(args.seed.to_string()));
    run.set("config", serde_json::to_value(&config).map_err(Error::from)?);
    let (panel, truth) = generate(&config)?;
    panel.write_csv(&run.out.join("panel.csv"))?;
    run.written.push("panel.csv".into());
    truth.write_json(&run.out.join("truth.json"))?;
    run.written.push("truth.json".into());
    run.finish(&format!(
        "synth: {} assets, {} quarters, seed {}",
        panel.assets().len(),
        panel.calendar().len(),
        args.seed
    ))
}

fn report_cmd(args: ReportArgs) -> CliResult<()> {
    let mut run = Run::new("report", &args.panel.ingest.output.out, args.panel.ingest.output.format.into())?;
    let p = prepare(&args.panel, &mut run, json!({ "frequency": format!("{:?}", args.frequency).to_lowercase() }))?;
    let cal = p.bundle.calendar.clone();
    let mut series = vec![
        NamedSeries::cross_sectional_mean("r_hpi", &cal, p.returns.returns())?,
        NamedSeries::new("market", &cal, p.bundle.market.clone())?,
    ];
    if let Some(e) = &p.bundle.equity {
        series.push(NamedSeries::new("market_sp", &cal, e.clone())?);
    }
    if let Some(s) = &p.bundle.smb {
        series.push(NamedSeries::new("smb", &cal, s.clone())?);
    }
    if let Some(m) = &p.bundle.momentum {
        series.push(NamedSeries::new("mom", &cal, m.clone())?);
    }
    series.push(NamedSeries::cross_sectional_mean("s2", &cal, &p.bundle.idio)?);
    if let Some(c) = &p.bundle.covariates {
        series.push(NamedSeries::cross_sectional_mean("d_emp", &cal, &c.d_emp)?);
        series.push(NamedSeries::cross_sectional_mean("afford", &cal, &c.afford_lag)?);
        series.push(NamedSeries::cross_sectional_mean("d_forc", &cal, &c.d_forc)?);
    }
    let freqs: &[Frequency] = match args.frequency {
        FrequencyArg::Quarterly => &[Frequency::Quarterly],
        FrequencyArg::Annual => &[Frequency::AnnualMean],
        FrequencyArg::Both => &[Frequency::Quarterly, Frequency::AnnualMean],
    };
    for f in freqs {
        let rows = report::summary_stats(&series, *f)?;
        run.emit(&format!("summary_stats_{}", f.name()), report::summary_stats_artifact(&rows, *f))?;
    }
    let corr = report::correlation_matrix(&series)?;
    run.emit("correlation_matrix", report::correlation_artifact(&corr))?;
    run.finish(&format!("report: {} series over {} quarters", series.len(), cal.len()))
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::IngestCheck(a) => ingest_check(a),
        Command::Factors(a) => factors(a),
        Command::Suite(a) => suite(a),
        Command::Rolling(a) => rolling(a),
        Command::SortedBetas(a) => sorted_betas(a),
        Command::Scatter(a) => scatter(a),
        Command::Fm(a) => fm(a),
        Command::Synth(a) => synth(a),
        Command::Report(a) => report_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hprisk: error: {}", f.message.lines().next().unwrap_or_default());
            ExitCode::from(f.code)
        }
    }
}
