use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coordkit::binning::{run_exact, secrecy_scan, ExactConfig, DEFAULT_BUDGET};
use coordkit::polar::{build_sets, ConstructionConfig, Threshold, Thresholds};
use coordkit::prob::FiniteDist;
use coordkit::regions::{check_membership, search_min_r0, sweep_erasure_frontier, sweep_to_csv, RegionKind, RegionPoint, SearchConfig};
use coordkit::sim::{run_with_specs, ExperimentPlan};
use coordkit::{CoordinationTarget, Execution};

#[derive(Parser)]
#[command(name = "coordkit", version, about = "Strong coordination: regions, polar codec, exact binning oracle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a joint distribution against a region, or search for its smallest R0.
    RegionCheck(RegionCheckArgs),
    /// Write the erasure-cascade frontier sweep as CSV.
    RegionSweep(RegionSweepArgs),
    /// Build the polar index sets for a target.
    Construct(ConstructArgs),
    /// Run the chained codec over block lengths and seeds.
    Simulate(SimulateArgs),
    /// Exact random-binning evaluation over seeds.
    BinningScan(BinningScanArgs),
}

#[derive(Args)]
struct RegionCheckArgs {
    #[arg(long)]
    kind: String,
    /// Joint distribution (TOML) over the region's axes.
    #[arg(long)]
    joint: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    r0: f64,
    #[arg(long, default_value_t = 0.0)]
    r: f64,
    /// Treat the joint as observables and search for the smallest R0.
    #[arg(long)]
    search: bool,
    #[arg(long)]
    aux_card: Option<usize>,
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RegionSweepArgs {
    #[arg(long)]
    pe: f64,
    #[arg(long)]
    steps: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ThresholdArgs {
    /// Constant threshold for the very-high-entropy sets.
    #[arg(long, default_value_t = 0.05)]
    delta_v: f64,
    /// Constant threshold for the high-entropy sets.
    #[arg(long, default_value_t = 0.05, conflicts_with = "beta_h")]
    delta_h: f64,
    /// Use the schedule 2^(-n^beta) for the high-entropy sets instead.
    #[arg(long)]
    beta_h: Option<f64>,
}

impl ThresholdArgs {
    fn thresholds(&self) -> Thresholds {
        Thresholds {
            v_set: Threshold::Constant { delta: self.delta_v },
            h_set: match self.beta_h {
                Some(beta) => Threshold::Schedule { beta },
                None => Threshold::Constant { delta: self.delta_h },
            },
        }
    }
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    target: PathBuf,
    /// Block lengths, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long)]
    k: usize,
    /// Seeds, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    construction_seed: u64,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BinningScanArgs {
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r0: f64,
    #[arg(long)]
    rt: f64,
    /// Number of binning seeds, tried as 0..seeds.
    #[arg(long)]
    seeds: u64,
    /// Also compute the secrecy quantity; the target must be separable.
    #[arg(long)]
    separation: bool,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Lib(coordkit::Error),
}

impl From<coordkit::Error> for Failure {
    fn from(e: coordkit::Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn invocation() -> String {
    let args: Vec<String> = std::env::args().skip(1).collect();
    format!("coordkit {}", args.join(" "))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn load_target(path: &Path) -> Result<CoordinationTarget, Failure> {
    Ok(CoordinationTarget::from_text(&read(path)?)?)
}

fn check_power_of_two(n: usize) -> Outcome {
    if n == 0 || !n.is_power_of_two() {
        return Err(usage(format!("block length {n} is not a power of two")));
    }
    Ok(())
}

fn json(value: &impl serde::Serialize) -> String {
    serde_json::to_string(value).expect("reports serialise")
}

fn region_check(a: RegionCheckArgs, exec: Execution) -> Outcome {
    let kind = RegionKind::parse(&a.kind).map_err(|e| usage(e.to_string()))?;
    let joint = FiniteDist::from_text(&read(&a.joint)?)?;
    if a.search {
        let mut cfg = SearchConfig::new(kind);
        cfg.aux_card = a.aux_card;
        cfg.restarts = a.restarts;
        cfg.seed = a.seed;
        cfg.r = a.r;
        cfg.exec = exec;
        println!("{}", json(&search_min_r0(&joint, &cfg)?));
    } else {
        let verdict = check_membership(kind, &RegionPoint { joint, r: a.r, r0: a.r0 })?;
        println!("{}", json(&verdict));
    }
    Ok(())
}

fn region_sweep(a: RegionSweepArgs) -> Outcome {
    if !(a.pe > 0.0 && a.pe < 1.0) {
        return Err(usage(format!("--pe must lie in (0, 1), got {}", a.pe)));
    }
    if a.steps < 2 {
        return Err(usage("--steps must be at least 2"));
    }
    let rows = sweep_erasure_frontier(a.pe, a.steps)?;
    fs::write(&a.out, sweep_to_csv(&rows, &invocation()))?;
    Ok(())
}

fn construct(a: ConstructArgs, exec: Execution) -> Outcome {
    check_power_of_two(a.n)?;
    let target = load_target(&a.target)?;
    let cfg = ConstructionConfig {
        n: a.n,
        samples: a.samples,
        seed: a.seed,
        thresholds: a.thresholds.thresholds(),
    };
    let spec = build_sets(&target, &cfg, exec)?;
    fs::write(&a.out, format!("# {}\n{}", invocation(), spec.to_text()?))?;
    println!(
        "{}",
        json(&serde_json::json!({
            "n": a.n,
            "a1": spec.a1.len(), "a1_prime": spec.a1_prime.len(),
            "a2": spec.a2.len(), "a3": spec.a3.len(), "a4": spec.a4.len(),
        }))
    );
    Ok(())
}

fn simulate(a: SimulateArgs, exec: Execution) -> Outcome {
    for &n in &a.n {
        check_power_of_two(n)?;
    }
    if a.k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    let plan = ExperimentPlan {
        n_list: a.n.clone(),
        k: a.k,
        seeds: a.seeds.clone(),
        samples: a.samples,
        construction_seed: a.construction_seed,
        thresholds: a.thresholds.thresholds(),
    };
    plan.validate().map_err(|e| usage(e.to_string()))?;
    let target = load_target(&a.target)?;
    let verdict = check_membership(
        RegionKind::InnerNoState,
        &RegionPoint {
            joint: target.joint(),
            r: 0.0,
            r0: f64::MAX,
        },
    )?;
    if !verdict.member {
        eprintln!("{}", json(&verdict));
        return Err(Failure::Lib(coordkit::Error::TargetRejected(format!("violates {}", verdict.violations.join(", ")))));
    }
    fs::create_dir_all(&a.out)?;
    let header = format!("# {}\n", invocation());
    let mut specs = Vec::with_capacity(plan.n_list.len());
    for &n in &plan.n_list {
        let spec = build_sets(&target, &plan.construction(n), exec)?;
        fs::write(a.out.join(format!("spec_n{n}.toml")), format!("{header}{}", spec.to_text()?))?;
        specs.push(spec);
    }
    fs::write(a.out.join("plan.toml"), format!("{header}{}", plan.to_text()?))?;
    let report = run_with_specs(&target, &plan, &specs, exec)?;
    fs::write(a.out.join("cells.csv"), format!("{header}{}", report.cells_csv()))?;
    fs::write(a.out.join("summary.csv"), format!("{header}{}", report.summary_csv()))?;
    Ok(())
}

fn binning_scan(a: BinningScanArgs, exec: Execution) -> Outcome {
    if a.n == 0 || a.seeds == 0 {
        return Err(usage("--n and --seeds must be positive"));
    }
    if !(a.r0 >= 0.0 && a.rt >= 0.0) {
        return Err(usage("rates must be non-negative"));
    }
    let target = load_target(&a.target)?;
    let mut cfg = ExactConfig::new(a.n, a.r0, a.rt, (0..a.seeds).collect());
    cfg.budget = a.budget;
    cfg.exec = exec;
    let scan = if a.separation {
        cfg.secrecy = true;
        secrecy_scan(&target, &cfg)?
    } else {
        run_exact(&target, &cfg)?
    };
    fs::write(&a.out, format!("# {}\n{}", invocation(), scan.to_csv()))?;
    let best = scan.best();
    println!("{}", json(&serde_json::json!({ "best_seed": best.seed, "tv": best.tv, "sw_error": best.sw_error_prob })));
    Ok(())
}

fn configure_threads() -> Result<Execution, Failure> {
    match std::env::var("COORDKIT_THREADS") {
        Ok(v) => {
            let n: usize = v
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| usage(format!("COORDKIT_THREADS must be a positive integer, got {v:?}")))?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| usage(e.to_string()))?;
            Ok(if n == 1 { Execution::Sequential } else { Execution::Parallel })
        }
        Err(_) => Ok(Execution::Parallel),
    }
}

fn run(cli: Cli) -> Outcome {
    let exec = configure_threads()?;
    match cli.command {
        Command::RegionCheck(a) => region_check(a, exec),
        Command::RegionSweep(a) => region_sweep(a),
        Command::Construct(a) => construct(a, exec),
        Command::Simulate(a) => simulate(a, exec),
        Command::BinningScan(a) => binning_scan(a, exec),
    }
}

fn report(kind: &str, message: &str) {
    eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            report("usage", e.to_string().trim());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            report("usage", &m);
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            report(e.kind(), &e.to_string());
            ExitCode::FAILURE
        }
    }
}
