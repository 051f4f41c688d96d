use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use gsteer::campaigns::{run_campaign, CampaignConfig, CAMPAIGN_NAMES};
use gsteer::channels::{
    amp_channel, amp_threshold_numeric, apply_channel, loss_channel, loss_threshold, sweep,
    write_sweep_csv, ChannelKind, Direction, Grid,
};
use gsteer::gaussian::{
    build_remark_state, counterexample_state, remark_state_from_cosh, standardize_two_mode,
    symplectic_eigenvalues, tmsv, validate_cm, StandardForm2,
};
use gsteer::higher_order::{reid_higher_order, write_order_csv};
use gsteer::io::{read_state, state_to_json, write_state};
use gsteer::repro::{repro_suite, ReproItem, ReproOptions};
use gsteer::sampling::{random_cm, random_symmetric_tripartite, Purity, SamplerConfig};
use gsteer::steering::{classify_direction, det_condition, ppt_test, steerable_gaussian};
use gsteer::{CovarianceMatrix, Error, ModePartition};

const EXIT_STATE: u8 = 2;
const EXIT_FLAGS: u8 = 3;
const EXIT_INVARIANT: u8 = 4;

#[derive(Parser)]
#[command(
    name = "gsteer",
    version,
    about = "Gaussian steering, PPT and monogamy checks on covariance matrices",
    after_help = "State files are JSON: {\"n_modes\": k, \"ordering\": \"xp-interleaved\", \"matrix\": [[...]]}.\n\
                  Exit codes: 0 success, 2 invalid input state, 3 bad flags, 4 invariant violation."
)]
struct Cli {
    /// Log verbosity (-v info, -vv debug). Logs go to stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a state satisfies the uncertainty relation.
    Validate(StateArgs),
    /// Steering LMI verdict for --from steering --to.
    Steer(PairArgs),
    /// Determinant (purity) condition for --from steering --to.
    Detcond(PairArgs),
    /// Partial-transpose test on the bipartition --from | --to.
    Ppt(PairArgs),
    /// Steering directions of the bipartition --from | --to.
    Classify(PairArgs),
    /// Apply a single-mode loss or amplifier channel and print the output state.
    Channel(ChannelArgs),
    /// Print a named state as JSON.
    #[command(subcommand)]
    Make(MakeCmd),
    /// Parameter sweeps (CSV on stdout).
    #[command(subcommand)]
    Sweep(SweepCmd),
    /// Randomized property campaign (CSV summary on stdout).
    #[command(
        after_help = "CSV columns: campaign,key,value. Keys: base_seed, samples, checked, skipped, violations, then per-campaign counts."
    )]
    Campaign(CampaignArgs),
    /// Run the reproduction items and report measured values.
    Repro(ReproArgs),
}

#[derive(Args)]
struct StateArgs {
    /// State JSON file.
    #[arg(long)]
    file: PathBuf,
    /// Relative PSD tolerance (default 1e-9).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct PairArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Comma-separated 0-based modes of the first (steering) party.
    #[arg(long, value_delimiter = ',', required = true)]
    from: Vec<usize>,
    /// Comma-separated 0-based modes of the second (steered) party.
    #[arg(long, value_delimiter = ',', required = true)]
    to: Vec<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Loss,
    Amp,
}

#[derive(Args)]
struct ChannelArgs {
    #[arg(long)]
    file: PathBuf,
    #[arg(long, value_enum)]
    kind: Kind,
    /// Transmissivity for loss, gain for amp.
    #[arg(long, allow_negative_numbers = true)]
    param: f64,
    /// Comma-separated modes; the channel acts on each independently.
    #[arg(long, value_delimiter = ',', required = true)]
    modes: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OutArg {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum MakeCmd {
    /// Two-mode squeezed vacuum.
    Tmsv {
        #[arg(long, allow_negative_numbers = true)]
        r: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Vacuum on --n modes.
    Vacuum {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Three-mode mixture whose pairs are NPT for 1 < cosh r < 3.
    Remark {
        #[arg(
            long,
            conflicts_with = "coshr",
            required_unless_present = "coshr",
            allow_negative_numbers = true
        )]
        r: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        coshr: Option<f64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Three-mode state satisfying the determinant condition yet steerable from mode 0 to modes 1,2.
    Counterexample {
        #[command(flatten)]
        out: OutArg,
    },
    /// Random state from exp(ΩH); mixed when --ancillas > 0.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        ancillas: usize,
        #[arg(long, default_value_t = gsteer::sampling::DEFAULT_SQUEEZE_SCALE)]
        scale: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Random state invariant under swapping parties of --m modes; third party has --k modes.
    Symmetric {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        ancillas: usize,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args)]
struct ThresholdArgs {
    /// Squeezing of the two-mode squeezed vacuum.
    #[arg(long, allow_negative_numbers = true)]
    r: f64,
    /// AtoB or BtoA (mode 0 is A, the channel acts on mode 1 = B).
    #[arg(long, default_value = "AtoB")]
    direction: String,
    /// Bisect for the threshold and print it to stderr.
    #[arg(long)]
    refine: bool,
}

#[derive(Subcommand)]
enum SweepCmd {
    /// Loss on B over an inclusive eta grid.
    #[command(after_help = "CSV columns: r,eta,direction,margin,steerable")]
    Loss {
        #[command(flatten)]
        t: ThresholdArgs,
        /// start:stop:step, endpoints included.
        #[arg(long, default_value = "0:1:0.05")]
        eta: String,
    },
    /// Amplification of B over an inclusive gain grid.
    #[command(after_help = "CSV columns: r,gain,direction,margin,steerable")]
    Amp {
        #[command(flatten)]
        t: ThresholdArgs,
        #[arg(long, default_value = "1:5:0.1")]
        gain: String,
    },
    /// Higher-order quadrature test per order N on a two-mode state.
    #[command(after_help = "CSV columns: N,lhs,rhs,satisfied")]
    Reid {
        /// Two-mode state file, brought to standard form.
        #[arg(long, conflicts_with = "sf", required_unless_present = "sf")]
        file: Option<PathBuf>,
        /// Standard form a,b,c1,c2.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        sf: Option<Vec<f64>>,
        /// Inclusive order range lo:hi.
        #[arg(long, default_value = "1:6")]
        orders: String,
    },
}

#[derive(Args)]
struct CampaignArgs {
    /// One of: single-mode-equivalence, det-implies-lmi, peres, monogamy-pure,
    /// monogamy-symmetric, higher-order-chain, structural, channel-physicality,
    /// direction-coverage.
    name: String,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ReproArgs {
    /// Comma-separated items (default: all): counterexample, loss, amplifier,
    /// peres, monogamy-pure, monogamy-symmetric, remark, higher-order.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override per-item sample counts.
    #[arg(long)]
    samples: Option<usize>,
    /// Remark item: report PPT verdicts at this cosh r instead of bisecting.
    #[arg(long)]
    coshr: Option<f64>,
    /// Where offending states are written when an item fails.
    #[arg(long, default_value = "gsteer-repro.json")]
    repro_file: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

// A closed stdout (e.g. `| head`) ends the command quietly.
const CLOSED_PIPE: u8 = 0;

fn closed_pipe() -> Failure {
    Failure {
        code: CLOSED_PIPE,
        message: String::new(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let pipe = matches!(&e, Error::Io(io) if io.kind() == std::io::ErrorKind::BrokenPipe);
        if pipe {
            return closed_pipe();
        }
        let code = match &e {
            Error::InvalidParameter(_)
            | Error::InvalidPartition(_)
            | Error::InvalidIndices(_)
            | Error::OutOfScope(_)
            | Error::NotCompletelyPositive { .. }
            | Error::Overflow(_) => EXIT_FLAGS,
            Error::InvariantViolation(_) => EXIT_INVARIANT,
            Error::Csv(_) => EXIT_INVARIANT,
            _ => EXIT_STATE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            return closed_pipe();
        }
        Failure {
            code: EXIT_INVARIANT,
            message: format!("write failed: {e}"),
        }
    }
}

fn flag_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_FLAGS,
        message: message.into(),
    }
}

type CliResult = std::result::Result<(), Failure>;

fn emit_json(value: &impl serde::Serialize) -> CliResult {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| match e.io_error_kind() {
        Some(std::io::ErrorKind::BrokenPipe) => closed_pipe(),
        _ => Failure {
            code: EXIT_INVARIANT,
            message: e.to_string(),
        },
    })?;
    writeln!(out)?;
    Ok(())
}

fn emit_state(g: &CovarianceMatrix, out: Option<&Path>) -> CliResult {
    match out {
        Some(p) => write_state(p, g).map_err(Failure::from),
        None => {
            writeln!(std::io::stdout().lock(), "{}", state_to_json(g))?;
            Ok(())
        }
    }
}

fn load(args: &StateArgs) -> std::result::Result<CovarianceMatrix, Failure> {
    Ok(read_state(&args.file)?)
}

fn pair(args: &PairArgs) -> std::result::Result<(CovarianceMatrix, ModePartition), Failure> {
    let g = load(&args.state)?;
    let p = ModePartition::bipartite(g.n_modes(), &args.from, &args.to)?;
    Ok((g, p))
}

fn parse_direction(s: &str) -> std::result::Result<Direction, Failure> {
    Ok(s.parse::<Direction>()?)
}

fn validate(args: &StateArgs) -> CliResult {
    let g = load(args)?;
    let v = validate_cm(&g, args.tol);
    let nu = if v.is_psd {
        symplectic_eigenvalues(&g).ok()
    } else {
        None
    };
    emit_json(&json!({
        "physical": v.is_psd,
        "margin": v.margin,
        "tolerance": v.tolerance,
        "n_modes": g.n_modes(),
        "symplectic_eigenvalues": nu,
    }))?;
    if v.is_psd {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_STATE,
            message: format!("state is unphysical (margin {:e})", v.margin),
        })
    }
}

fn channel(args: &ChannelArgs) -> CliResult {
    let g = read_state(&args.file)?;
    let ch = match args.kind {
        Kind::Loss => loss_channel(args.param)?,
        Kind::Amp => amp_channel(args.param)?,
    };
    let mut out = g;
    for &m in &args.modes {
        out = apply_channel(&out, &ch, &[m])?;
    }
    emit_state(&out, args.out.as_deref())
}

fn make(cmd: &MakeCmd) -> CliResult {
    let (g, out) = match cmd {
        MakeCmd::Tmsv { r, out } => (tmsv(*r)?, out),
        MakeCmd::Vacuum { n, out } => {
            if *n == 0 {
                return Err(flag_error("--n must be at least 1"));
            }
            (CovarianceMatrix::vacuum(*n), out)
        }
        MakeCmd::Remark { r, coshr, out } => match (r, coshr) {
            (Some(r), _) => (build_remark_state(*r)?, out),
            (None, Some(x)) => (remark_state_from_cosh(*x)?, out),
            (None, None) => return Err(flag_error("one of --r or --coshr is required")),
        },
        MakeCmd::Counterexample { out } => (counterexample_state(), out),
        MakeCmd::Random {
            n,
            seed,
            ancillas,
            scale,
            out,
        } => {
            let cfg = sampler(*seed, *n, *ancillas).with_scale(*scale);
            cfg.validate()?;
            (random_cm(&cfg), out)
        }
        MakeCmd::Symmetric {
            m,
            k,
            seed,
            ancillas,
            out,
        } => {
            let cfg = sampler(*seed, 2 * m + k, *ancillas);
            (random_symmetric_tripartite(&cfg, (*m, *m, *k))?, out)
        }
    };
    emit_state(&g, out.out.as_deref())
}

fn sampler(seed: u64, n: usize, ancillas: usize) -> SamplerConfig {
    let purity = if ancillas == 0 {
        Purity::Pure
    } else {
        Purity::Mixed(ancillas)
    };
    SamplerConfig::new(seed, n).with_purity(purity)
}

fn threshold_sweep(t: &ThresholdArgs, kind: ChannelKind, grid: &str) -> CliResult {
    let dir = parse_direction(&t.direction)?;
    let grid: Grid = grid.parse()?;
    let rows = sweep(t.r, kind, &grid, dir)?;
    write_sweep_csv(std::io::stdout().lock(), kind, &rows)?;
    if t.refine {
        let found = match kind {
            ChannelKind::Loss => loss_threshold(t.r, dir, 1e-9),
            ChannelKind::Amplifier => {
                amp_threshold_numeric(t.r, dir, grid.stop.max(1.0 + 1e-9), 1e-9)
            }
        };
        match found {
            Ok(x) => eprintln!("threshold {}={x}", kind.param_name()),
            Err(e) => eprintln!("no threshold: {e}"),
        }
    }
    Ok(())
}

fn parse_orders(s: &str) -> std::result::Result<(u32, u32), Failure> {
    let bad = || flag_error(format!("--orders {s:?} is not lo:hi with 1 <= lo <= hi"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
    if lo < 1 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn reid(file: Option<&Path>, sf: Option<&[f64]>, orders: &str) -> CliResult {
    let (lo, hi) = parse_orders(orders)?;
    let form = match (file, sf) {
        (Some(f), _) => {
            let g = read_state(f)?;
            gsteer::gaussian::require_physical(&g, None)?;
            standardize_two_mode(&g)?
        }
        (None, Some(v)) => {
            if v.len() != 4 {
                return Err(flag_error(format!(
                    "--sf needs a,b,c1,c2, got {} values",
                    v.len()
                )));
            }
            let f = StandardForm2::new(v[0], v[1], v[2], v[3])?;
            gsteer::gaussian::require_physical(&f.to_cm(), None)?;
            f
        }
        (None, None) => return Err(flag_error("one of --file or --sf is required")),
    };
    let reports = (lo..=hi)
        .map(|n| reid_higher_order(&form, n))
        .collect::<gsteer::Result<Vec<_>>>()?;
    write_order_csv(std::io::stdout().lock(), &reports)?;
    Ok(())
}

fn campaign(args: &CampaignArgs) -> CliResult {
    if !CAMPAIGN_NAMES.contains(&args.name.as_str()) {
        return Err(flag_error(format!(
            "unknown campaign {:?}; expected one of {}",
            args.name,
            CAMPAIGN_NAMES.join(", ")
        )));
    }
    let rep = run_campaign(&args.name, CampaignConfig::new(args.seed, args.samples))?;
    rep.write_csv(std::io::stdout().lock())?;
    if rep.passed() {
        return Ok(());
    }
    for w in rep.violation_witnesses() {
        eprintln!("violation at seed {}: {}", w.seed, w.detail);
    }
    Err(Failure {
        code: EXIT_INVARIANT,
        message: format!("{} violations", rep.violations),
    })
}

fn repro(args: &ReproArgs) -> CliResult {
    let items = if args.only.is_empty() {
        ReproItem::ALL.to_vec()
    } else {
        args.only
            .iter()
            .map(|s| s.parse::<ReproItem>())
            .collect::<gsteer::Result<Vec<_>>>()?
    };
    let opts = ReproOptions {
        seed: args.seed,
        samples: args.samples,
        cosh_r: args.coshr,
    };
    let results = repro_suite(&items, &opts);
    for r in &results {
        eprintln!("{} {}", if r.passed { "PASS" } else { "FAIL" }, r.item);
    }
    let passed = results.iter().all(|r| r.passed);
    emit_json(&json!({ "passed": passed, "items": results }))?;
    if passed {
        return Ok(());
    }
    let offending: Vec<_> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| json!({ "item": r.item, "detail": r.detail, "states": r.offending }))
        .collect();
    let text = serde_json::to_string_pretty(&offending).expect("serializable");
    std::fs::write(&args.repro_file, text + "\n")?;
    Err(Failure {
        code: EXIT_INVARIANT,
        message: format!(
            "reproduction failed; offending states in {}",
            args.repro_file.display()
        ),
    })
}

fn dispatch(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Validate(a) => validate(a),
        Command::Steer(a) => {
            let (g, p) = pair(a)?;
            emit_json(&steerable_gaussian(&g, &p, "A", "B", a.state.tol)?)
        }
        Command::Detcond(a) => {
            let (g, p) = pair(a)?;
            emit_json(&det_condition(&g, &p, "A", "B", a.state.tol)?)
        }
        Command::Ppt(a) => {
            let (g, p) = pair(a)?;
            let v = ppt_test(&g, &p, a.state.tol)?;
            emit_json(&json!({
                "ppt": v.is_psd,
                "margin": v.margin,
                "tolerance": v.tolerance,
                "marginal": v.is_marginal(),
            }))
        }
        Command::Classify(a) => {
            let (g, p) = pair(a)?;
            emit_json(&classify_direction(&g, &p, a.state.tol)?)
        }
        Command::Channel(a) => channel(a),
        Command::Make(m) => make(m),
        Command::Sweep(SweepCmd::Loss { t, eta }) => threshold_sweep(t, ChannelKind::Loss, eta),
        Command::Sweep(SweepCmd::Amp { t, gain }) => {
            threshold_sweep(t, ChannelKind::Amplifier, gain)
        }
        Command::Sweep(SweepCmd::Reid { file, sf, orders }) => {
            reid(file.as_deref(), sf.as_deref(), orders)
        }
        Command::Campaign(a) => campaign(a),
        Command::Repro(a) => repro(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_FLAGS)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) if f.code == CLOSED_PIPE => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
