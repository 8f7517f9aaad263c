use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use scgarch_cli::commands;
use scgarch_cli::{CliError, CliResult, RunConfig, SimKind, TruthSource};

/// Time-varying covariance estimation with Kalman-filtered Cholesky factors
/// and GARCH innovation variances.
#[derive(Parser)]
#[command(name = "scgarch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a simulated panel.
    Simulate {
        #[arg(value_enum)]
        kind: Kind,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Fit a model to a panel CSV.
    Fit {
        panel: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Compare an estimated covariance path with a truth file or a moving-block proxy.
    Evaluate {
        /// Long-format `t,i,j,value` covariance path.
        estimate: PathBuf,
        /// Reference covariance path in the same format.
        #[arg(long, conflicts_with = "proxy_panel", required_unless_present = "proxy_panel")]
        truth: Option<PathBuf>,
        /// Panel whose moving-block proxy serves as the reference.
        #[arg(long)]
        proxy_panel: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Choose the moving-block width for a panel.
    SelectBlock {
        panel: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Strictly increasing odd widths, comma separated.
        #[arg(long)]
        candidates: Option<String>,
        /// Relative stabilization threshold.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Monte-Carlo comparison of SCGARCH and CGARCH on simulated panels.
    Benchmark {
        #[arg(long)]
        replications: Option<usize>,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Sim1,
    Sim2,
}

#[derive(Args)]
struct Common {
    /// `key = value` settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Extra `key=value` overrides, applied after the other flags.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct ModelArgs {
    /// scgarch or cgarch.
    #[arg(long)]
    model: Option<String>,
    /// fixed, bic-exhaustive or bic-sampled.
    #[arg(long)]
    ordering: Option<String>,
    /// Fixed ordering as 1-based column indices.
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    kappa: Option<f64>,
    /// State-noise variance of the coefficient random walk.
    #[arg(long)]
    q: Option<f64>,
    /// Tune the state noise per regression by likelihood over `q_grid`.
    #[arg(long)]
    tune_q: bool,
    #[arg(long)]
    two_pass: bool,
    #[arg(long)]
    garch_max_iter: Option<usize>,
    #[arg(long)]
    garch_grad_tol: Option<f64>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    block_size: Option<usize>,
    /// covariance or correlation.
    #[arg(long)]
    scale: Option<String>,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    q_true: Option<f64>,
    #[arg(long)]
    meas_var: Option<f64>,
}

type Pairs = Vec<(String, String)>;

fn push<T: ToString>(pairs: &mut Pairs, key: &str, value: &Option<T>) {
    if let Some(v) = value {
        pairs.push((key.to_string(), v.to_string()));
    }
}

impl ModelArgs {
    fn pairs(&self, out: &mut Pairs) {
        push(out, "model", &self.model);
        push(out, "ordering", &self.ordering);
        push(out, "order", &self.order);
        push(out, "kappa", &self.kappa);
        push(out, "q", &self.q);
        push(out, "garch_max_iter", &self.garch_max_iter);
        push(out, "garch_grad_tol", &self.garch_grad_tol);
        push(out, "tune_q", &self.tune_q.then_some(true));
        push(out, "two_pass", &self.two_pass.then_some(true));
    }
}

impl SimArgs {
    fn pairs(&self, out: &mut Pairs) {
        push(out, "n", &self.n);
        push(out, "q_true", &self.q_true);
        push(out, "meas_var", &self.meas_var);
    }
}

impl Common {
    fn load(&self, mut flags: Pairs) -> CliResult<RunConfig> {
        push(&mut flags, "seed", &self.seed);
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            flags.push((k.to_string(), v.to_string()));
        }
        RunConfig::load(self.config.as_deref(), &flags)
    }
}

fn run(cli: Cli) -> CliResult<String> {
    let mut flags = Pairs::new();
    match cli.command {
        Command::Simulate { kind, common, sim } => {
            sim.pairs(&mut flags);
            let cfg = common.load(flags)?;
            let kind = match kind {
                Kind::Sim1 => SimKind::Sim1,
                Kind::Sim2 => SimKind::Sim2,
            };
            commands::simulate(kind, &cfg, &common.out)
        }
        Command::Fit { panel, common, model } => {
            model.pairs(&mut flags);
            let cfg = common.load(flags)?;
            commands::fit(&panel, &cfg, &common.out)
        }
        Command::Evaluate {
            estimate,
            truth,
            proxy_panel,
            common,
            eval,
        } => {
            push(&mut flags, "block_size", &eval.block_size);
            push(&mut flags, "scale", &eval.scale);
            let cfg = common.load(flags)?;
            let source = match (truth, proxy_panel) {
                (Some(t), _) => TruthSource::File(t),
                (None, Some(p)) => TruthSource::MovingBlock(p),
                (None, None) => return Err(CliError::Config("need --truth or --proxy-panel".into())),
            };
            commands::evaluate(&estimate, &source, &cfg, &common.out)
        }
        Command::SelectBlock {
            panel,
            common,
            candidates,
            threshold,
        } => {
            push(&mut flags, "candidates", &candidates);
            push(&mut flags, "threshold", &threshold);
            let cfg = common.load(flags)?;
            commands::select_block(&panel, &cfg, &common.out)
        }
        Command::Benchmark {
            replications,
            common,
            sim,
            model,
        } => {
            push(&mut flags, "replications", &replications);
            sim.pairs(&mut flags);
            model.pairs(&mut flags);
            let cfg = common.load(flags)?;
            commands::benchmark(&cfg, &common.out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
