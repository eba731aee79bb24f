//! Thin command-line front end: assembles an experiment config from an
//! optional JSON file plus flags, then hands off to the library harness.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use subgauss::ensemble::EnsembleKind;
use subgauss::harness::{
    run_experiment, summarize, ExperimentConfig, ExperimentKind, SetSpec, SummaryOptions,
};

#[derive(Parser)]
#[command(name = "subgauss", version, about = "Subgaussian measurement experiments")]
struct Cli {
    /// Base seed; trial i uses seed + i.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON config file providing defaults for the subcommand flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV and manifest files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    ensemble: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    kgrid: Option<Vec<usize>>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    mgrid: Option<Vec<usize>>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    set: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    c_norm: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    symmetric: bool,
    #[arg(long)]
    strict_lt: bool,
    #[arg(long)]
    sampled: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Per-direction second moments and psi2 estimates of an ensemble.
    EnsembleCheck(CommonArgs),
    /// Monte Carlo Gaussian mean width of a set.
    Width(CommonArgs),
    /// Fixed-point radius of a set, with the closed form when known.
    Rstar(CommonArgs),
    /// Scaling of sup |Z_f| over a canonical-basis class.
    Empirical(CommonArgs),
    /// Exact or approximate reconstruction trials.
    Recover(CommonArgs),
    /// Success-rate matrix over a (k, m) grid.
    Phase(CommonArgs),
    /// Neighborliness scan of random sign polytopes.
    Neighborly(CommonArgs),
    /// Aggregate emitted CSVs: per-key stats and log-log slope.
    Summarize {
        /// Input CSV files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Key column for aggregation cells.
        #[arg(long)]
        key: String,
        /// Value column to aggregate.
        #[arg(long)]
        value: String,
        /// Output file name (under --out).
        #[arg(long, default_value = "summary.csv")]
        output: String,
    },
}

fn assemble(
    kind: ExperimentKind,
    cli_seed: Option<u64>,
    config_path: Option<&PathBuf>,
    args: &CommonArgs,
) -> Result<ExperimentConfig, String> {
    let mut cfg = match config_path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| format!("cannot read {}: {e}", p.display()))?;
            ExperimentConfig::from_json(&text).map_err(|e| e.to_string())?
        }
        None => ExperimentConfig {
            experiment: kind,
            ensemble: EnsembleKind::Gaussian,
            n: 0,
            k: None,
            k_grid: Vec::new(),
            m: None,
            m_grid: Vec::new(),
            theta: 0.5,
            epsilon: None,
            set: None,
            trials: 100,
            samples: 1000,
            seed: 0,
            c_norm: 1.0,
            alpha: 1.0,
            mode: None,
            symmetric: false,
            strict_lt: false,
            sampled_queries: None,
            max_iters: 10_000,
        },
    };
    cfg.experiment = kind;
    let ensemble_arg = args.kind.as_ref().or(args.ensemble.as_ref());
    if let Some(e) = ensemble_arg {
        cfg.ensemble = e.parse().map_err(|e: subgauss::Error| e.to_string())?;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if args.k.is_some() {
        cfg.k = args.k;
    }
    if let Some(g) = &args.kgrid {
        cfg.k_grid = g.clone();
    }
    if args.m.is_some() {
        cfg.m = args.m;
    }
    if let Some(g) = &args.mgrid {
        cfg.m_grid = g.clone();
    }
    if let Some(t) = args.theta {
        cfg.theta = t;
    }
    if args.epsilon.is_some() {
        cfg.epsilon = args.epsilon;
    }
    if let Some(s) = &args.set {
        cfg.set = Some(SetSpec(s.clone()));
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.samples {
        cfg.samples = s;
    }
    if let Some(c) = args.c_norm {
        cfg.c_norm = c;
    }
    if let Some(a) = args.alpha {
        cfg.alpha = a;
    }
    if args.mode.is_some() {
        cfg.mode = args.mode.clone();
    }
    if args.symmetric {
        cfg.symmetric = true;
    }
    if args.strict_lt {
        cfg.strict_lt = true;
    }
    if args.sampled.is_some() {
        cfg.sampled_queries = args.sampled;
    }
    if let Some(mi) = args.max_iters {
        cfg.max_iters = mi;
    }
    if let Some(seed) = cli_seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let (kind, args) = match &cli.command {
        Command::EnsembleCheck(a) => (ExperimentKind::EnsembleCheck, a),
        Command::Width(a) => (ExperimentKind::Width, a),
        Command::Rstar(a) => (ExperimentKind::Rstar, a),
        Command::Empirical(a) => (ExperimentKind::Empirical, a),
        Command::Recover(a) => (ExperimentKind::Recover, a),
        Command::Phase(a) => (ExperimentKind::Phase, a),
        Command::Neighborly(a) => (ExperimentKind::Neighborly, a),
        Command::Summarize {
            inputs,
            key,
            value,
            output,
        } => {
            let paths: Vec<&std::path::Path> = inputs.iter().map(|p| p.as_path()).collect();
            let options = SummaryOptions {
                key: key.clone(),
                value: value.clone(),
            };
            match summarize(&paths, &options) {
                Ok(table) => {
                    if let Err(e) = std::fs::create_dir_all(&cli.out) {
                        eprintln!("{e}");
                        return ExitCode::from(1);
                    }
                    let dest = cli.out.join(output);
                    if let Err(e) = subgauss::harness::write_csv(&table, &dest) {
                        eprintln!("{e}");
                        return ExitCode::from(1);
                    }
                    println!("wrote {}", dest.display());
                    return ExitCode::SUCCESS;
                }
                Err(e) => {
                    eprintln!("summarize: {e}");
                    return ExitCode::from(1);
                }
            }
        }
    };
    let cfg = match assemble(kind, cli.seed, cli.config.as_ref(), args) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("config error: {msg}");
            return ExitCode::from(2);
        }
    };
    match run_experiment(&cfg, &cli.out) {
        Ok(out) => {
            println!("wrote {}", out.metrics_path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
