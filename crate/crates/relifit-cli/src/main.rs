//! Command-line front end: fit, compare, gamma conversion, bug-report
//! ingestion, series simulation, and mu-trajectory emission.
//!
//! Exit codes: 0 success, 2 usage or validation failure, 3 fit failure,
//! 4 I/O failure. Every error prints one `error[code]: message` line on
//! stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use relifit::data::{
    ingest_bug_reports, load_bug_reports, load_failure_csv, load_release_windows,
    release_order_key, save_failure_csv, simulate_series, Grouping,
};
use relifit::error::{DataError, FitError};
use relifit::gof::{compare, fit_model, FitOptions, FitResult, GammaMode};
use relifit::model::{gamma_from_mu, mu_from_gamma, DebugProbs, ModelKind, ModelSpec, Modulation};
use relifit::optimizer::SwarmConfig;
use relifit::report::{
    format_sig, render_compare_csv, render_compare_json, render_compare_markdown, render_fit_json,
};

#[derive(Parser)]
#[command(
    name = "relifit",
    version,
    about = "Failure-rate reliability models fitted to time-between-failure data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one model to one release and write the result as JSON.
    Fit(FitArgs),
    /// Fit several models to every release and rank them by goodness of fit.
    Compare(CompareArgs),
    /// Convert between the acceptance parameter mu and the modulation factor gamma.
    Gamma(GammaArgs),
    /// Reformat raw bug reports into per-release failure intervals.
    Ingest(IngestArgs),
    /// Sample a synthetic failure series from a model.
    Simulate(SimulateArgs),
    /// Collect (release, mu) pairs from fit-result JSON files into a CSV.
    MuPlot(MuPlotArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Failure-interval CSV file.
    #[arg(long)]
    data: PathBuf,
    /// Release label to fit.
    #[arg(long)]
    release: String,
    /// Model kind: jm, sw, goi, mahapatra, msw, proposed.
    #[arg(long)]
    model: String,
    /// Fault-removal probability.
    #[arg(long, default_value_t = 0.95)]
    p: f64,
    /// Fault-introduction probability.
    #[arg(long, default_value_t = 0.03)]
    r: f64,
    /// Pin gamma to this value (proposed model).
    #[arg(long)]
    gamma: Option<f64>,
    /// Pin gamma via the acceptance parameter mu (proposed model).
    #[arg(long)]
    mu: Option<f64>,
    /// Estimate gamma jointly with phi and N (default for proposed).
    #[arg(long)]
    estimate_gamma: bool,
    /// Profile gamma over a LO:HI:STEP grid.
    #[arg(long, value_name = "LO:HI:STEP")]
    profile_gamma: Option<String>,
    /// Optimizer seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Swarm size.
    #[arg(long, default_value_t = 30)]
    swarm: usize,
    /// Swarm generations.
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    /// phi search range, LO:HI (log-scaled).
    #[arg(long, value_name = "LO:HI")]
    bounds_phi: Option<String>,
    /// N search range, LO:HI.
    #[arg(long, value_name = "LO:HI")]
    bounds_n: Option<String>,
    /// gamma search range, LO:HI.
    #[arg(long, value_name = "LO:HI")]
    bounds_gamma: Option<String>,
    /// Write the fit-result JSON here (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Failure-interval CSV file.
    #[arg(long)]
    data: PathBuf,
    /// Release label, or "all".
    #[arg(long, default_value = "all")]
    release: String,
    /// Comma-separated model kinds.
    #[arg(long, default_value = "jm,sw,goi,mahapatra,msw,proposed")]
    models: String,
    /// Output format: md, csv, or json.
    #[arg(long, default_value = "md")]
    format: String,
    /// Fault-removal probability.
    #[arg(long, default_value_t = 0.95)]
    p: f64,
    /// Fault-introduction probability.
    #[arg(long, default_value_t = 0.03)]
    r: f64,
    /// Optimizer seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Swarm size.
    #[arg(long, default_value_t = 30)]
    swarm: usize,
    /// Swarm generations.
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    /// Write the report here (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GammaArgs {
    /// Acceptance parameter in (0, 1].
    #[arg(long)]
    mu: Option<f64>,
    /// Modulation factor, at least 1.
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Args)]
struct IngestArgs {
    /// Bug-report CSV (bug_id, report_time, ...).
    #[arg(long)]
    bug_reports: PathBuf,
    /// Release-window CSV (release, start, end, kind).
    #[arg(long)]
    windows: PathBuf,
    /// "per-failure" or "fixed:<hours>".
    #[arg(long, default_value = "per-failure")]
    grouping: String,
    /// Output failure-interval CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Model kind: jm, sw, goi, mahapatra, msw, proposed.
    #[arg(long)]
    model: String,
    /// Proportionality constant.
    #[arg(long)]
    phi: f64,
    /// Initial fault count.
    #[arg(long = "N", value_name = "N")]
    n_initial: f64,
    /// Modulation factor (proposed model).
    #[arg(long)]
    gamma: Option<f64>,
    /// Fault-removal probability.
    #[arg(long, default_value_t = 0.95)]
    p: f64,
    /// Fault-introduction probability.
    #[arg(long, default_value_t = 0.03)]
    r: f64,
    /// Number of failures to sample.
    #[arg(long)]
    count: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Release label for the emitted series.
    #[arg(long, default_value = "sim")]
    release: String,
    /// Output failure-interval CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MuPlotArgs {
    /// Directory of fit-result JSON files.
    #[arg(long)]
    results: PathBuf,
    /// Output CSV of (release, mu) pairs.
    #[arg(long)]
    out: PathBuf,
}

enum CliError {
    Usage(String),
    Fit(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Fit(_) => "fit",
            CliError::Io(_) => "io",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Fit(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Fit(m) | CliError::Io(m) => m,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::Io(_) => CliError::Io(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        CliError::Fit(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Gamma(args) => cmd_gamma(args),
        Command::Ingest(args) => cmd_ingest(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::MuPlot(args) => cmd_mu_plot(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.code(), e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn parse_model(name: &str) -> Result<ModelKind, CliError> {
    name.parse().map_err(usage)
}

fn parse_probs(p: f64, r: f64) -> Result<DebugProbs, CliError> {
    DebugProbs::new(p, r).map_err(|e| usage(e.to_string()))
}

fn parse_lo_hi(text: &str, flag: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 {
        return Err(usage(format!("{flag} expects LO:HI, got '{text}'")));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| usage(format!("{flag}: bad number '{}'", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| usage(format!("{flag}: bad number '{}'", parts[1])))?;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(usage(format!("{flag}: need LO < HI, got {lo}:{hi}")));
    }
    Ok((lo, hi))
}

fn write_or_stdout(out: &Option<PathBuf>, content: &str) -> Result<bool, CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, content)
                .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
            Ok(true)
        }
        None => {
            print!("{content}");
            Ok(false)
        }
    }
}

fn find_release(
    series: Vec<relifit::FailureSeries>,
    release: &str,
) -> Result<relifit::FailureSeries, CliError> {
    let available: Vec<String> = series.iter().map(|s| s.release_id().to_string()).collect();
    series
        .into_iter()
        .find(|s| s.release_id() == release)
        .ok_or_else(|| {
            usage(format!(
                "release '{release}' not in data (available: {})",
                available.join(", ")
            ))
        })
}

fn fit_summary(fit: &FitResult) -> String {
    let mut s = format!(
        "fit release={} model={} phi={:.4e} N={}",
        fit.release_id, fit.model, fit.params.phi, fit.params.n_rounded
    );
    if let Some(g) = fit.params.gamma {
        s.push_str(&format!(
            " gamma={g:.4} mu={:.4}",
            fit.params.mu.unwrap_or(f64::NAN)
        ));
    }
    s.push_str(&format!(" llf={:.4}", fit.llf));
    s.push_str(&format!(" sse={}", format_sig(fit.sse, 6)));
    match fit.mse {
        Some(m) => s.push_str(&format!(" mse={}", format_sig(m, 6))),
        None => s.push_str(" mse=-"),
    }
    s
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    let kind = parse_model(&args.model)?;
    let debug = parse_probs(args.p, args.r)?;

    let mut gamma_modes_given = 0;
    let mut gamma_mode = GammaMode::Estimate;
    if let Some(g) = args.gamma {
        gamma_modes_given += 1;
        gamma_mode = GammaMode::Fixed(g);
    }
    if let Some(mu) = args.mu {
        gamma_modes_given += 1;
        gamma_mode = GammaMode::FromMu(mu);
    }
    if args.estimate_gamma {
        gamma_modes_given += 1;
        gamma_mode = GammaMode::Estimate;
    }
    if let Some(grid) = &args.profile_gamma {
        gamma_modes_given += 1;
        let parts: Vec<&str> = grid.split(':').collect();
        if parts.len() != 3 {
            return Err(usage(format!(
                "--profile-gamma expects LO:HI:STEP, got '{grid}'"
            )));
        }
        let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.parse::<f64>()).collect();
        let nums = nums.map_err(|_| usage(format!("--profile-gamma: bad number in '{grid}'")))?;
        gamma_mode = GammaMode::Profile {
            lo: nums[0],
            hi: nums[1],
            step: nums[2],
        };
    }
    if gamma_modes_given > 1 {
        return Err(usage(
            "choose at most one of --gamma, --mu, --estimate-gamma, --profile-gamma",
        ));
    }
    if gamma_modes_given > 0 && kind != ModelKind::Proposed {
        return Err(usage(format!(
            "gamma options only apply to the proposed model, not {kind}"
        )));
    }
    if let GammaMode::Fixed(g) = gamma_mode {
        mu_from_gamma(g).map_err(|e| usage(e.to_string()))?;
    }
    if let GammaMode::FromMu(mu) = gamma_mode {
        gamma_from_mu(mu).map_err(|e| usage(e.to_string()))?;
    }

    let mut opts = FitOptions {
        debug,
        gamma_mode,
        swarm: SwarmConfig {
            pop_size: args.swarm,
            max_iters: args.iters,
            seed: args.seed,
            ..SwarmConfig::default()
        },
        ..FitOptions::default()
    };
    if let Some(text) = &args.bounds_phi {
        opts.phi_bounds = parse_lo_hi(text, "--bounds-phi")?;
    }
    if let Some(text) = &args.bounds_n {
        opts.n_bounds = Some(parse_lo_hi(text, "--bounds-n")?);
    }
    if let Some(text) = &args.bounds_gamma {
        opts.gamma_bounds = parse_lo_hi(text, "--bounds-gamma")?;
    }

    let series = find_release(load_failure_csv(&args.data)?, &args.release)?;
    let fit = fit_model(&series, kind, &opts)?;
    let json = render_fit_json(&fit);
    let to_file = write_or_stdout(&args.out, &json)?;
    if to_file {
        println!("{}", fit_summary(&fit));
    } else {
        eprintln!("{}", fit_summary(&fit));
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let kinds: Vec<ModelKind> = args
        .models
        .split(',')
        .map(|name| parse_model(name.trim()))
        .collect::<Result<_, _>>()?;
    if kinds.is_empty() {
        return Err(usage("--models needs at least one model"));
    }
    let debug = parse_probs(args.p, args.r)?;

    let mut series = load_failure_csv(&args.data)?;
    if args.release != "all" {
        series = vec![find_release(series, &args.release)?];
    }

    let opts = FitOptions {
        debug,
        swarm: SwarmConfig {
            pop_size: args.swarm,
            max_iters: args.iters,
            seed: args.seed,
            ..SwarmConfig::default()
        },
        ..FitOptions::default()
    };
    let report = compare(&series, &kinds, &opts);

    let rendered = match args.format.as_str() {
        "md" => render_compare_markdown(&report),
        "csv" => render_compare_csv(&report),
        "json" => render_compare_json(&report),
        other => return Err(usage(format!("unknown format '{other}' (md, csv, json)"))),
    };
    write_or_stdout(&args.out, &rendered)?;
    Ok(())
}

fn cmd_gamma(args: GammaArgs) -> Result<(), CliError> {
    match (args.mu, args.gamma) {
        (Some(mu), None) => {
            let gamma = gamma_from_mu(mu).map_err(|e| usage(e.to_string()))?;
            println!("mu={} gamma={}", format_sig(mu, 6), format_sig(gamma, 6));
            Ok(())
        }
        (None, Some(gamma)) => {
            let mu = mu_from_gamma(gamma).map_err(|e| usage(e.to_string()))?;
            println!("mu={} gamma={}", format_sig(mu, 6), format_sig(gamma, 6));
            Ok(())
        }
        _ => Err(usage("pass exactly one of --mu or --gamma")),
    }
}

fn parse_grouping(text: &str) -> Result<Grouping, CliError> {
    if text == "per-failure" {
        return Ok(Grouping::PerFailure);
    }
    if let Some(rest) = text.strip_prefix("fixed:") {
        let hours: f64 = rest
            .parse()
            .map_err(|_| usage(format!("bad fixed-width hours '{rest}'")))?;
        if hours.is_nan() || hours <= 0.0 {
            return Err(usage(format!(
                "fixed-width hours must be positive, got {hours}"
            )));
        }
        return Ok(Grouping::FixedWidth { hours });
    }
    Err(usage(format!(
        "unknown grouping '{text}' (per-failure or fixed:<hours>)"
    )))
}

fn cmd_ingest(args: IngestArgs) -> Result<(), CliError> {
    let grouping = parse_grouping(&args.grouping)?;
    let bugs = load_bug_reports(&args.bug_reports)?;
    if bugs.is_empty() {
        return Err(usage("no bug reports in input"));
    }
    let windows = load_release_windows(&args.windows)?;
    let outcome = ingest_bug_reports(&bugs, &windows, grouping)?;
    for warning in &outcome.warnings {
        eprintln!("warning: {warning}");
    }
    if outcome.skipped() > 0 {
        eprintln!(
            "skipped {} of {} bug report(s): {} outside windows, {} clock anchors, {} in sparse windows",
            outcome.skipped(),
            outcome.input_count,
            outcome.outside_windows,
            outcome.origin_anchors,
            outcome.sparse_window_bugs
        );
    }
    save_failure_csv(&args.out, &outcome.series)?;
    println!(
        "ingested {} failures into {} release series -> {}",
        outcome.emitted_failures(),
        outcome.series.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let kind = parse_model(&args.model)?;
    let spec = build_spec(kind, &args)?;
    let series = simulate_series(&spec, args.count, args.seed, &args.release)
        .map_err(|e| usage(e.to_string()))?;
    save_failure_csv(&args.out, std::slice::from_ref(&series))?;
    println!(
        "simulated {} intervals for release {} -> {}",
        series.len(),
        args.release,
        args.out.display()
    );
    Ok(())
}

fn build_spec(kind: ModelKind, args: &SimulateArgs) -> Result<ModelSpec, CliError> {
    let as_usage = |e: relifit::ModelError| usage(e.to_string());
    match kind {
        ModelKind::Jm => ModelSpec::jm(args.phi, args.n_initial).map_err(as_usage),
        ModelKind::Sw => ModelSpec::sw(args.phi, args.n_initial).map_err(as_usage),
        ModelKind::Msw => ModelSpec::msw(args.phi, args.n_initial).map_err(as_usage),
        ModelKind::Goi => {
            let debug = parse_probs(args.p, args.r)?;
            ModelSpec::goi(args.phi, args.n_initial, debug).map_err(as_usage)
        }
        ModelKind::Mahapatra => {
            let debug = parse_probs(args.p, args.r)?;
            ModelSpec::mahapatra(args.phi, args.n_initial, debug).map_err(as_usage)
        }
        ModelKind::Proposed => {
            let debug = parse_probs(args.p, args.r)?;
            let gamma = args
                .gamma
                .ok_or_else(|| usage("--gamma is required for the proposed model"))?;
            let modulation = Modulation::from_gamma(gamma).map_err(as_usage)?;
            ModelSpec::proposed(args.phi, args.n_initial, debug, modulation).map_err(as_usage)
        }
    }
}

fn cmd_mu_plot(args: MuPlotArgs) -> Result<(), CliError> {
    let entries = std::fs::read_dir(&args.results)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", args.results.display())))?;
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| CliError::Io(e.to_string()))?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) == Some("json") {
            paths.push(path);
        }
    }
    paths.sort();

    let mut pairs: Vec<(String, f64)> = Vec::new();
    let mut skipped = 0usize;
    for path in &paths {
        match read_fit(path) {
            Ok(fit) => match (fit.model, fit.params.mu) {
                (ModelKind::Proposed, Some(mu)) => pairs.push((fit.release_id, mu)),
                _ => {
                    skipped += 1;
                    eprintln!(
                        "warning: {} is not a proposed-model fit; skipping",
                        path.display()
                    );
                }
            },
            Err(e) => {
                skipped += 1;
                eprintln!("warning: {}: {}; skipping", path.display(), e.message());
            }
        }
    }
    if pairs.is_empty() {
        return Err(usage(format!(
            "no proposed-model fit results found in {} ({skipped} file(s) skipped)",
            args.results.display()
        )));
    }
    pairs.sort_by(|a, b| {
        release_order_key(&a.0)
            .cmp(&release_order_key(&b.0))
            .then_with(|| a.0.cmp(&b.0))
    });
    let mut out = String::from("release,mu\n");
    for (release, mu) in &pairs {
        out.push_str(&format!("{release},{mu}\n"));
    }
    std::fs::write(&args.out, out)
        .map_err(|e| CliError::Io(format!("writing {}: {e}", args.out.display())))?;
    println!(
        "wrote {} (release, mu) pairs -> {}",
        pairs.len(),
        args.out.display()
    );
    Ok(())
}

fn read_fit(path: &Path) -> Result<FitResult, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("not a fit result: {e}")))
}
