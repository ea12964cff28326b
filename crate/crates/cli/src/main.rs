//! `ghzdyn`: compute, sweep, verify and roof subcommands.
//!
//! Exit codes: 0 success or passing verification, 1 failed verification,
//! 2 usage or input error.

mod config;
mod input;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use ghzdyn::analytic::TwoSidedVariant;
use ghzdyn::channels::{apply_channels, ChannelFamily, PauliChannel};
use ghzdyn::concurrence::{tau3, tau3_pure};
use ghzdyn::harness::{ghz_prediction, run_campaign, sweep, Campaign, CampaignParams, GridAxis, SweepSpec};
use ghzdyn::roof::{estimate_convex_roof, RoofOptions};
use ghzdyn::states::{pure_density, DensityMatrix, PureState, Qubit};

use config::{CliConfig, DEFAULT_SEED};
use input::{parse_channels, StateSpec};

#[derive(Parser, Debug)]
#[command(name = "ghzdyn", version, about = "Entanglement of noisy three-qubit GHZ-type states")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// RNG seed (default 42, or `seed` from the config file)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Tolerance for verify; the positivity floor for never-vanish
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write output here instead of stdout (atomic replace)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// key = value config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Reading of the a3 exponent in the two-sided C^{23|1} formula
    #[arg(long, global = true, value_parser = ["squared", "cubed"])]
    eq15_variant: Option<String>,
    /// Record the wall-clock time in reports (outputs then differ per run)
    #[arg(long, global = true)]
    stamp_time: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Concurrences and τ₃ of a state after local channels
    Compute(StateArgs),
    /// Grid sweep over channel error probabilities, written as CSV
    Sweep(SweepArgs),
    /// Run a verification campaign and report pass or fail
    Verify(VerifyArgs),
    /// Numerical convex roof of a noisy state compared with τ₃
    Roof(RoofArgs),
}

#[derive(Args, Debug)]
struct StateArgs {
    /// ghz | ghz-lu:seed=N | file:PATH (eight lines of "re im")
    #[arg(long, default_value = "ghz")]
    state: String,
    /// FAMILY:qN[:key=value,...], e.g. bitflip:q3:p=0.25 or pauli:q2:a1=..,a2=..,a3=..,a4=..
    #[arg(long = "channel")]
    channels: Vec<String>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Number of noisy qubits
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
    sides: u8,
    /// Channel family; repeat once per side or give one for all
    #[arg(long = "family", default_value = "bitflip")]
    families: Vec<String>,
    /// Comma-separated qubits, e.g. q1,q3
    #[arg(long, value_delimiter = ',')]
    slots: Option<Vec<String>>,
    /// Grid points per side
    #[arg(long, default_value_t = 101)]
    points: usize,
    #[arg(long, default_value_t = 0.0)]
    min: f64,
    #[arg(long, default_value_t = 1.0)]
    max: f64,
    /// Output format
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// analytic-1sided | two-sided | factorization-2sided | factorization-3sided | evolution | never-vanish | roof-rank4
    campaign: String,
    /// Sample count (grid points for never-vanish)
    #[arg(long)]
    samples: Option<usize>,
    /// Optimizer restarts per decomposition size (roof-rank4)
    #[arg(long)]
    restarts: Option<usize>,
}

#[derive(Args, Debug)]
struct RoofArgs {
    #[command(flatten)]
    input: StateArgs,
    /// Random restarts per decomposition size (default 20)
    #[arg(long)]
    restarts: Option<usize>,
    /// Largest decomposition size tried (default min(2r, 8))
    #[arg(long)]
    max_members: Option<usize>,
}

enum Failure {
    Verification,
    Usage(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

struct Ctx {
    cfg: CliConfig,
    global: Global,
}

impl Ctx {
    fn seed(&self) -> u64 {
        self.global.seed.or(self.cfg.seed).unwrap_or(DEFAULT_SEED)
    }

    fn two_sided_variant(&self) -> Result<TwoSidedVariant, Failure> {
        match &self.global.eq15_variant {
            Some(s) => Ok(s.parse()?),
            None => Ok(self.cfg.two_sided.unwrap_or_default()),
        }
    }

    fn stamp(&self) -> Option<String> {
        self.global
            .stamp_time
            .then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        match &self.global.out {
            Some(out) => write_atomic(&self.cfg.output_path(out), text),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

fn write_atomic(path: &Path, text: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = match &cli.global.config {
        Some(path) => CliConfig::load(path).map_err(Failure::Usage)?,
        None => CliConfig::default(),
    };
    if let Some(t) = cli.global.tol {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Failure::Usage(format!("--tol must be a non-negative number, got {t}")));
        }
    }
    let ctx = Ctx { cfg, global: cli.global };
    match cli.command {
        Command::Compute(args) => compute(&ctx, &args),
        Command::Sweep(args) => cmd_sweep(&ctx, &args),
        Command::Verify(args) => verify(&ctx, &args),
        Command::Roof(args) => roof(&ctx, &args),
    }
}

struct Prepared {
    state: StateSpec,
    channels: Vec<(PauliChannel, Qubit)>,
    labels: Vec<String>,
    psi: PureState,
    rho: DensityMatrix,
}

fn prepare(args: &StateArgs) -> Result<Prepared, Failure> {
    let state = StateSpec::parse(&args.state).map_err(Failure::Usage)?;
    let psi = state.resolve().map_err(Failure::Usage)?;
    let specs = parse_channels(&args.channels).map_err(Failure::Usage)?;
    let channels: Vec<_> = specs.iter().map(|s| (s.channel(), s.slot)).collect();
    let rho = if channels.is_empty() {
        pure_density(&psi)
    } else {
        apply_channels(&pure_density(&psi), &channels)?
    };
    Ok(Prepared {
        state,
        psi,
        channels,
        labels: specs.iter().map(|s| s.to_string()).collect(),
        rho,
    })
}

fn with_stamp(mut v: Value, stamp: Option<String>) -> Value {
    v["version"] = json!(ghzdyn::VERSION);
    if let Some(t) = stamp {
        v["timestamp"] = json!(t);
    }
    v
}

fn to_text(v: &Value) -> Result<String, Failure> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn compute(ctx: &Ctx, args: &StateArgs) -> Result<(), Failure> {
    let p = prepare(args)?;
    let report = if p.channels.is_empty() {
        tau3_pure(&p.psi)?
    } else {
        tau3(&p.rho)?
    };
    let variant = ctx.two_sided_variant()?;
    let mut out = json!({
        "state": p.state.label(),
        "channels": p.labels,
        "two_sided_variant": variant.name(),
        "report": report,
    });
    // closed forms only describe the GHZ state itself
    if p.state == StateSpec::Ghz {
        let pred = ghz_prediction(&p.channels, variant)?;
        let conc_residual = pred.concurrences.map(|c| {
            c.iter()
                .zip(report.triple())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        });
        let tau_sq = report.tau3 * report.tau3;
        out["analytic"] = json!({
            "prediction": pred,
            "residuals": {
                "concurrences": conc_residual,
                "tau3": pred.tau3.map(|t| (t - report.tau3).abs()),
                "factor_tau3_sq": pred.factor_tau3_sq.map(|f| (f - tau_sq).abs()),
            },
        });
    }
    ctx.emit(&to_text(&with_stamp(out, ctx.stamp()))?)
}

fn cmd_sweep(ctx: &Ctx, args: &SweepArgs) -> Result<(), Failure> {
    let families: Vec<ChannelFamily> = args
        .families
        .iter()
        .map(|f| f.parse())
        .collect::<Result<_, _>>()?;
    let slots = match &args.slots {
        Some(list) => Some(
            list.iter()
                .map(|s| {
                    s.strip_prefix('q')
                        .and_then(|d| d.parse::<u8>().ok())
                        .ok_or_else(|| format!("invalid qubit '{s}' (expected q1, q2 or q3)"))
                        .and_then(|d| Qubit::new(d).map_err(|e| e.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(Failure::Usage)?,
        ),
        None => None,
    };
    let spec = SweepSpec {
        sides: args.sides as usize,
        families,
        slots,
        axes: vec![GridAxis { min: args.min, max: args.max, points: args.points }],
        seed: ctx.seed(),
        two_sided: ctx.two_sided_variant()?,
    };
    let table = sweep(&spec)?;
    let text = match args.format.as_str() {
        "json" => {
            let v: Value = serde_json::from_str(&table.to_json()?)?;
            to_text(&with_stamp(v, ctx.stamp()))?
        }
        _ => table.to_csv()?,
    };
    ctx.emit(&text)
}

fn verify(ctx: &Ctx, args: &VerifyArgs) -> Result<(), Failure> {
    let campaign: Campaign = args.campaign.parse()?;
    let mut params = CampaignParams::defaults(campaign, ctx.seed());
    if let Some(tol) = ctx.global.tol.or(ctx.cfg.tolerances.get(&campaign).copied()) {
        params.tolerance = tol;
    }
    if let Some(n) = args.samples {
        params.samples = n;
    }
    if let Some(r) = args.restarts.or(ctx.cfg.restarts) {
        params.restarts = r;
    }
    params.two_sided = ctx.two_sided_variant()?;
    let mut report = run_campaign(campaign, &params)?;
    if let Some(t) = ctx.stamp() {
        report = report.with_timestamp(t);
    }
    ctx.emit(&(report.to_json()? + "\n"))?;
    eprintln!(
        "{}: {} (max residual {:e}, tolerance {:e})",
        report.campaign,
        if report.pass { "PASS" } else { "FAIL" },
        report.residuals.max,
        report.tolerance
    );
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn roof(ctx: &Ctx, args: &RoofArgs) -> Result<(), Failure> {
    let p = prepare(&args.input)?;
    let opts = RoofOptions {
        restarts: args.restarts.or(ctx.cfg.restarts).unwrap_or(20),
        max_members: args.max_members,
        seed: ctx.seed(),
    };
    let est = estimate_convex_roof(&p.rho, &opts)?;
    let t = tau3(&p.rho)?.tau3;
    let bridged = std::f64::consts::SQRT_2 * est.value;
    let out = json!({
        "state": p.state.label(),
        "channels": p.labels,
        "seed": opts.seed,
        "restarts": opts.restarts,
        "max_members": opts.max_members,
        "rank": est.rank,
        "roof": est.value,
        "bridge_factor": std::f64::consts::SQRT_2,
        "sqrt2_roof": bridged,
        "tau3": t,
        "deviation": (bridged - t).abs(),
        "decomposition": est.best,
        "reconstruction_residual": est.best.reconstruction_residual(&p.rho),
        "trace": est.trace,
    });
    ctx.emit(&to_text(&with_stamp(out, ctx.stamp()))?)
}
