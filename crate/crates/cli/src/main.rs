//! Command-line front door: load channels and distributions, dispatch to the
//! measure/exponent/LP/protocol evaluators, and emit machine-readable
//! results.
//!
//! Exit codes are fixed for scripting:
//!   0 success, 1 usage error, 2 parse/validation error, 3 convergence
//!   failure, 4 converse or lemma violation, 5 infeasible rate window.

use chanconv_core::capacity::{
    capacity, channel_variance_report, renyi_capacity, renyi_capacity_grid,
};
use chanconv_core::channel::{channel_purified, channel_tv};
use chanconv_core::checks::{run_suite, SuiteOutcome, SUITES};
use chanconv_core::divergence::{dmax, dmax_smooth, fidelity, kl, purified, renyi, tv};
use chanconv_core::exponents::{
    sce_with, variational_sce, AlphaSet, DistanceKind, ExponentQuery, ExponentResult, GridSpec,
};
use chanconv_core::io::{read_channel, read_distribution};
use chanconv_core::lp::{converse_bound, ns_success_tv, sr_success_tv};
use chanconv_core::mutual_info::{augustin, mi, mi_variance, sibson};
use chanconv_core::protocol::{run_pipeline, sweep_csv_header, sweep_csv_row, PipelineMode};
use chanconv_core::{Channel, Config, Distribution, Error as CoreError, LogUnit};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "chanconv",
    about = "Strong converse exponents and finite-blocklength optima for classical channel interconversion",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitArg {
    Bits,
    Nats,
}

impl From<UnitArg> for LogUnit {
    fn from(u: UnitArg) -> LogUnit {
        match u {
            UnitArg::Bits => LogUnit::Bits,
            UnitArg::Nats => LogUnit::Nats,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DistanceArg {
    Tv,
    Pur,
    Renyi,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Mc,
}

#[derive(Clone, Copy, ValueEnum)]
enum AssistArg {
    Ns,
    Sr,
}

#[derive(Subcommand)]
enum Command {
    /// Divergences, mutual informations, capacities and variances.
    Measures(MeasuresArgs),
    /// Strong converse exponent of channel interconversion.
    Exponent(ExponentArgs),
    /// Exponents over a grid of rates, as CSV.
    Sweep(SweepArgs),
    /// Exact finite-blocklength success optimum (LP) and converse margin.
    Lp(LpArgs),
    /// Run the coding-plus-simulation conversion pipeline.
    Simulate(SimulateArgs),
    /// Randomized lemma suites (reverse-chernoff, smooth-max-iid,
    /// fidelity-kl, dpi, concavity).
    Check(CheckArgs),
}

#[derive(Args)]
struct MeasuresArgs {
    #[arg(long, value_enum, default_value = "bits")]
    unit: UnitArg,
    /// KL divergence D(P||Q): two distribution files.
    #[arg(long, num_args = 2, value_names = ["P", "Q"])]
    kl: Option<Vec<PathBuf>>,
    /// Total variation distance: two distribution files.
    #[arg(long, num_args = 2, value_names = ["P", "Q"])]
    tv: Option<Vec<PathBuf>>,
    /// Fidelity (sum sqrt(pq))^2 and purified distance.
    #[arg(long, num_args = 2, value_names = ["P", "Q"])]
    fidelity: Option<Vec<PathBuf>>,
    /// Renyi divergence of order --alpha.
    #[arg(long, num_args = 2, value_names = ["P", "Q"])]
    renyi: Option<Vec<PathBuf>>,
    /// Max-divergence.
    #[arg(long, num_args = 2, value_names = ["P", "Q"])]
    dmax: Option<Vec<PathBuf>>,
    /// Smooth max-divergence at radius --eps.
    #[arg(long, num_args = 2, value_names = ["P", "Q"])]
    dmax_smooth: Option<Vec<PathBuf>>,
    /// Mutual information I(P, W): distribution then channel file.
    #[arg(long, num_args = 2, value_names = ["P", "W"])]
    mi: Option<Vec<PathBuf>>,
    /// Sibson alpha-mutual information.
    #[arg(long, num_args = 2, value_names = ["P", "W"])]
    sibson: Option<Vec<PathBuf>>,
    /// Augustin-Csiszar alpha-mutual information.
    #[arg(long, num_args = 2, value_names = ["P", "W"])]
    augustin: Option<Vec<PathBuf>>,
    /// Mutual-information variance at the given input.
    #[arg(long, num_args = 2, value_names = ["P", "W"])]
    variance: Option<Vec<PathBuf>>,
    /// Shannon capacity (Blahut-Arimoto).
    #[arg(long, value_name = "W")]
    capacity: Option<PathBuf>,
    /// Renyi capacity of order --alpha (Arimoto).
    #[arg(long, value_name = "W")]
    renyi_capacity: Option<PathBuf>,
    /// Grid cross-check of the Renyi capacity (inputs of size <= 3).
    #[arg(long, value_name = "W")]
    renyi_capacity_grid: Option<PathBuf>,
    /// Channel variance at the capacity achiever plus the grid supremum.
    #[arg(long, value_name = "W")]
    channel_variance: Option<PathBuf>,
    /// Worst-case channel TV distance: two channel files.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    channel_tv: Option<Vec<PathBuf>>,
    /// Worst-case channel purified distance: two channel files.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    channel_pur: Option<Vec<PathBuf>>,
    /// Renyi order for --renyi / --sibson / --augustin / --renyi-capacity.
    #[arg(long)]
    alpha: Option<f64>,
    /// Smoothing radius for --dmax-smooth.
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args)]
struct ExponentArgs {
    #[arg(long, value_name = "FILE")]
    w: PathBuf,
    #[arg(long, value_name = "FILE")]
    t: PathBuf,
    /// Target copies of T per use of W.
    #[arg(long, allow_negative_numbers = true)]
    r: f64,
    #[arg(long, value_enum, default_value = "tv")]
    distance: DistanceArg,
    /// Order for --distance renyi, in (0, 1).
    #[arg(long)]
    renyi_alpha: Option<f64>,
    /// Pin the TV optimization to one alpha (e.g. 0.5).
    #[arg(long)]
    alpha_fixed: Option<f64>,
    /// Also evaluate the variational formula and report the gap.
    #[arg(long)]
    variational: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    #[arg(long, value_enum, default_value = "bits")]
    unit: UnitArg,
    /// Simplex mesh denominator for --variational.
    #[arg(long)]
    mesh: Option<usize>,
    /// Coarse grid resolution override.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_name = "FILE")]
    w: PathBuf,
    #[arg(long, value_name = "FILE")]
    t: PathBuf,
    #[arg(long)]
    r_min: f64,
    #[arg(long)]
    r_max: f64,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    #[arg(long, value_enum, default_value = "tv")]
    distance: DistanceArg,
    #[arg(long)]
    renyi_alpha: Option<f64>,
    #[arg(long, value_enum, default_value = "bits")]
    unit: UnitArg,
}

#[derive(Args)]
struct LpArgs {
    #[arg(long, value_name = "FILE")]
    w: PathBuf,
    #[arg(long, value_name = "FILE")]
    t: PathBuf,
    /// Blocklength: the LP runs on W^n against T^ceil(rn).
    #[arg(long)]
    n: usize,
    #[arg(long, allow_negative_numbers = true)]
    r: f64,
    #[arg(long, value_enum, default_value = "ns")]
    assist: AssistArg,
    /// Optional input-marginal constraint (distribution file over X^n).
    #[arg(long, value_name = "FILE")]
    marginal: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "bits")]
    unit: UnitArg,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_name = "FILE")]
    w: PathBuf,
    #[arg(long, value_name = "FILE")]
    t: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    r: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte-Carlo trials (mc mode).
    #[arg(long, default_value_t = 2000)]
    trials: usize,
    /// Input distribution for the coding stage (default uniform).
    #[arg(long, value_name = "FILE")]
    p_x: Option<PathBuf>,
    /// Input distribution for the simulation stage (default uniform).
    #[arg(long, value_name = "FILE")]
    p_s: Option<PathBuf>,
    /// Also sweep blocklengths n, n+step, ..., sweep_to and write CSV here.
    #[arg(long)]
    sweep_to: Option<usize>,
    #[arg(long, default_value_t = 2)]
    sweep_step: usize,
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// One of reverse-chernoff, smooth-max-iid, fidelity-kl, dpi, concavity,
    /// or all.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("INTERCONVERT_THREADS") {
        if let Ok(k) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // keep clap's help/version on stdout with success, everything
            // else is a usage error (exit 1)
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    return ExitCode::SUCCESS;
                }
                _ => {
                    eprint!("{e}");
                    return ExitCode::from(1);
                }
            }
        }
    };
    let result = match cli.command {
        Command::Measures(args) => cmd_measures(args),
        Command::Exponent(args) => cmd_exponent(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Lp(args) => cmd_lp(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Check(args) => cmd_check(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &CoreError) -> u8 {
    match e {
        CoreError::InfeasibleWindow { .. } => 5,
        CoreError::NonConvergence { .. } | CoreError::LpFailure(_) => 3,
        CoreError::Parse(_)
        | CoreError::Io(_)
        | CoreError::InvalidChannel { .. }
        | CoreError::InvalidDistribution { .. } => 2,
        _ => 1,
    }
}

type CmdResult = Result<ExitCode, CoreError>;

fn need_alpha(alpha: Option<f64>) -> Result<f64, CoreError> {
    alpha.ok_or(CoreError::DomainViolation {
        name: "--alpha",
        value: f64::NAN,
        domain: "required for this measure",
    })
}

fn cmd_measures(args: MeasuresArgs) -> CmdResult {
    let unit: LogUnit = args.unit.into();
    let cfg = Config::default();
    let label = unit.label();
    let mut printed = false;
    let d = |p: &PathBuf| read_distribution(p);
    let c = |p: &PathBuf| read_channel(p);

    if let Some(f) = &args.kl {
        println!("kl = {} {label}", kl(&d(&f[0])?, &d(&f[1])?, unit)?);
        printed = true;
    }
    if let Some(f) = &args.tv {
        println!("tv = {}", tv(&d(&f[0])?, &d(&f[1])?)?);
        printed = true;
    }
    if let Some(f) = &args.fidelity {
        let (p, q) = (d(&f[0])?, d(&f[1])?);
        println!("fidelity = {}", fidelity(&p, &q)?);
        println!("purified = {}", purified(&p, &q)?);
        printed = true;
    }
    if let Some(f) = &args.renyi {
        let a = need_alpha(args.alpha)?;
        println!("renyi({a}) = {} {label}", renyi(&d(&f[0])?, &d(&f[1])?, a, unit)?);
        printed = true;
    }
    if let Some(f) = &args.dmax {
        println!("dmax = {} {label}", dmax(&d(&f[0])?, &d(&f[1])?, unit)?);
        printed = true;
    }
    if let Some(f) = &args.dmax_smooth {
        let eps = args.eps.ok_or(CoreError::DomainViolation {
            name: "--eps",
            value: f64::NAN,
            domain: "required for --dmax-smooth",
        })?;
        let v = dmax_smooth(&d(&f[0])?, &d(&f[1])?, eps, unit, cfg.bisect_tol, cfg.bisect_max_iters)?;
        println!("dmax_smooth({eps}) = {v} {label}");
        printed = true;
    }
    if let Some(f) = &args.mi {
        println!("mi = {} {label}", mi(&d(&f[0])?, &c(&f[1])?, unit)?);
        printed = true;
    }
    if let Some(f) = &args.sibson {
        let a = need_alpha(args.alpha)?;
        println!("sibson({a}) = {} {label}", sibson(&d(&f[0])?, &c(&f[1])?, a, unit)?);
        printed = true;
    }
    if let Some(f) = &args.augustin {
        let a = need_alpha(args.alpha)?;
        let res = augustin(&d(&f[0])?, &c(&f[1])?, a, unit, cfg.fixed_point_tol, cfg.fixed_point_max_iters)?;
        if !res.converged {
            return Err(CoreError::NonConvergence {
                iters: res.iters,
                last_change: f64::NAN,
            });
        }
        println!("augustin({a}) = {} {label}", res.value);
        printed = true;
    }
    if let Some(f) = &args.variance {
        println!("variance = {} {label}^2", mi_variance(&d(&f[0])?, &c(&f[1])?, unit)?);
        printed = true;
    }
    if let Some(f) = &args.capacity {
        let res = capacity(&c(f)?, unit, &cfg);
        println!("capacity = {} {label}", res.value);
        printed = true;
    }
    if let Some(f) = &args.renyi_capacity {
        let a = need_alpha(args.alpha)?;
        let res = renyi_capacity(&c(f)?, a, unit, &cfg)?;
        println!("renyi_capacity({a}) = {} {label}", res.value);
        printed = true;
    }
    if let Some(f) = &args.renyi_capacity_grid {
        let a = need_alpha(args.alpha)?;
        println!(
            "renyi_capacity_grid({a}) = {} {label}",
            renyi_capacity_grid(&c(f)?, a, unit, 200)?
        );
        printed = true;
    }
    if let Some(f) = &args.channel_variance {
        let (at_cap, sup) = channel_variance_report(&c(f)?, unit, &cfg);
        println!("channel_variance_at_capacity = {at_cap} {label}^2");
        match sup {
            Some(s) => println!("channel_variance_grid_sup = {s} {label}^2"),
            None => println!("channel_variance_grid_sup = unavailable (input alphabet > 3)"),
        }
        printed = true;
    }
    if let Some(f) = &args.channel_tv {
        println!("channel_tv = {}", channel_tv(&c(&f[0])?, &c(&f[1])?)?);
        printed = true;
    }
    if let Some(f) = &args.channel_pur {
        println!("channel_pur = {}", channel_purified(&c(&f[0])?, &c(&f[1])?)?);
        printed = true;
    }
    if !printed {
        eprintln!("no measure requested; see chanconv measures --help");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn build_query(
    w: Channel,
    t: Channel,
    r: f64,
    distance: DistanceArg,
    renyi_alpha: Option<f64>,
    unit: LogUnit,
    alpha_fixed: Option<f64>,
    grid: Option<usize>,
) -> Result<ExponentQuery, CoreError> {
    let d = match distance {
        DistanceArg::Tv => DistanceKind::Tv,
        DistanceArg::Pur => DistanceKind::Pur,
        DistanceArg::Renyi => DistanceKind::Renyi(renyi_alpha.ok_or(CoreError::DomainViolation {
            name: "--renyi-alpha",
            value: f64::NAN,
            domain: "(0, 1), required for --distance renyi",
        })?),
    };
    let mut q = ExponentQuery::new(w, t, r, d, unit)?;
    q.alpha_fixed = alpha_fixed;
    if let Some(g) = grid {
        q.grid = GridSpec {
            coarse: g,
            ..q.grid
        };
    }
    Ok(q)
}

#[derive(Serialize)]
struct ExponentOutput {
    #[serde(flatten)]
    result: ExponentResult,
    variational: Option<f64>,
    variational_gap: Option<f64>,
    mesh_too_coarse: Option<bool>,
}

fn cmd_exponent(args: ExponentArgs) -> CmdResult {
    let unit: LogUnit = args.unit.into();
    let mut cfg = Config::default();
    if let Some(m) = args.mesh {
        cfg.mesh_denominator = m;
    }
    let q = build_query(
        read_channel(&args.w)?,
        read_channel(&args.t)?,
        args.r,
        args.distance,
        args.renyi_alpha,
        unit,
        args.alpha_fixed,
        args.grid,
    )?;
    let res = sce_with(&q, &cfg)?;
    let mut out = ExponentOutput {
        result: res,
        variational: None,
        variational_gap: None,
        mesh_too_coarse: None,
    };
    let mut exit = ExitCode::SUCCESS;
    if args.variational {
        let set = match (args.distance, args.alpha_fixed) {
            (DistanceArg::Tv, Some(a)) => AlphaSet::Singleton(a),
            (DistanceArg::Tv, None) => AlphaSet::Interval(0.0, 1.0),
            (DistanceArg::Pur, _) => AlphaSet::Singleton(0.5),
            (DistanceArg::Renyi, _) => {
                return Err(CoreError::DomainViolation {
                    name: "--variational",
                    value: f64::NAN,
                    domain: "tv or pur distances",
                })
            }
        };
        let var = variational_sce(&q.w, &q.t, q.rate, set, unit, &cfg)?;
        // the purified exponent is twice the alpha = 1/2 variational value
        let comparable = match args.distance {
            DistanceArg::Pur => 2.0 * var.value,
            _ => var.value,
        };
        out.variational = Some(comparable);
        out.variational_gap = Some(out.result.value_raw - comparable);
        out.mesh_too_coarse = Some(var.mesh_too_coarse);
        if var.mesh_too_coarse {
            exit = ExitCode::from(3);
        }
    }
    match args.format {
        FormatArg::Json => println!("{}", serde_json::to_string(&out).expect("serializable")),
        FormatArg::Csv => {
            println!("{}", ExponentResult::csv_header());
            println!("{}", out.result.csv_row());
        }
    }
    Ok(exit)
}

fn cmd_sweep(args: SweepArgs) -> CmdResult {
    let unit: LogUnit = args.unit.into();
    let cfg = Config::default();
    let w = read_channel(&args.w)?;
    let t = read_channel(&args.t)?;
    println!("{}", ExponentResult::csv_header());
    for i in 0..=args.steps {
        let r = args.r_min + (args.r_max - args.r_min) * i as f64 / args.steps.max(1) as f64;
        let q = build_query(
            w.clone(),
            t.clone(),
            r,
            args.distance,
            args.renyi_alpha,
            unit,
            None,
            None,
        )?;
        println!("{}", sce_with(&q, &cfg)?.csv_row());
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct LpOutput {
    optimum: f64,
    exponent_at_n: f64,
    converse_bound: f64,
    margin: f64,
    assist: String,
    n: usize,
    r: f64,
    max_residual: f64,
}

fn cmd_lp(args: LpArgs) -> CmdResult {
    let unit: LogUnit = args.unit.into();
    let cfg = Config::default();
    let w = read_channel(&args.w)?;
    let t = read_channel(&args.t)?;
    let rn = (args.r * args.n as f64 - 1e-9).ceil().max(1.0) as usize;
    let wn = w.product(args.n, cfg.product_entry_cap)?;
    let trn = t.product(rn, cfg.product_entry_cap)?;
    let marginal = args.marginal.as_ref().map(|p| read_distribution(p)).transpose()?;
    let rep = match args.assist {
        AssistArg::Ns => ns_success_tv(&wn, &trn, &cfg, marginal.as_ref())?,
        AssistArg::Sr => sr_success_tv(&wn, &trn, &cfg)?,
    };
    let q = ExponentQuery::new(w, t, args.r, DistanceKind::Tv, unit)?;
    let bound = converse_bound(&q, &cfg)?;
    let exponent_at_n = unit.from_nats(-(rep.optimum.max(1e-300)).ln()) / args.n as f64;
    let margin = exponent_at_n - bound;
    let out = LpOutput {
        optimum: rep.optimum,
        exponent_at_n,
        converse_bound: bound,
        margin,
        assist: match args.assist {
            AssistArg::Ns => "ns".into(),
            AssistArg::Sr => "sr".into(),
        },
        n: args.n,
        r: args.r,
        max_residual: rep.max_residual,
    };
    println!("{}", serde_json::to_string(&out).expect("serializable"));
    if margin < -1e-9 {
        eprintln!(
            "converse violation: finite-n exponent {} below bound {}",
            exponent_at_n, bound
        );
        return Ok(ExitCode::from(4));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: SimulateArgs) -> CmdResult {
    let cfg = Config::default();
    let w = read_channel(&args.w)?;
    let t = read_channel(&args.t)?;
    let p_x = match &args.p_x {
        Some(p) => read_distribution(p)?,
        None => Distribution::uniform(w.input_size()),
    };
    let p_s = match &args.p_s {
        Some(p) => read_distribution(p)?,
        None => Distribution::uniform(t.input_size()),
    };
    let mode = match args.mode {
        ModeArg::Exact => PipelineMode::Exact,
        ModeArg::Mc => PipelineMode::MonteCarlo,
    };
    let rep = match run_pipeline(&w, &t, args.r, args.n, &p_x, &p_s, args.seed, mode, args.trials, &cfg)
    {
        Ok(rep) => rep,
        Err(CoreError::InfeasibleWindow { lo, hi }) => {
            eprintln!("infeasible rate window: [{lo}, {hi}]");
            return Ok(ExitCode::from(5));
        }
        Err(e) => return Err(e),
    };
    println!("{}", serde_json::to_string(&rep).expect("serializable"));
    if let Some(n_max) = args.sweep_to {
        let mut lines = vec![sweep_csv_header().to_string()];
        let mut n = args.n;
        while n <= n_max {
            let r = run_pipeline(&w, &t, args.r, n, &p_x, &p_s, args.seed, mode, args.trials, &cfg)?;
            lines.push(sweep_csv_row(&r));
            n += args.sweep_step.max(1);
        }
        let text = lines.join("\n") + "\n";
        match &args.csv {
            Some(path) => std::fs::write(path, text)?,
            None => print!("{text}"),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(args: CheckArgs) -> CmdResult {
    let cfg = Config::default();
    let suites: Vec<&str> = if args.suite == "all" {
        SUITES.to_vec()
    } else {
        vec![args.suite.as_str()]
    };
    for suite in suites {
        match run_suite(suite, args.trials, args.seed, &cfg)? {
            SuiteOutcome::Passed(rep) => {
                println!(
                    "{}: PASS ({} trials, worst shortfall {:.3e})",
                    rep.suite, rep.trials, rep.worst_shortfall
                );
            }
            SuiteOutcome::Violated(v) => {
                println!("{}: FAIL at trial {} ({})", v.suite, v.trial, v.detail);
                println!("{}", serde_json::to_string(&v).expect("serializable"));
                return Ok(ExitCode::from(4));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
