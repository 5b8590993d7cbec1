use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ccb", version, about = "Weighted Markov models, modal checks and choice experiments")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    True,
    Subjective,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model or problem file.
    Validate { path: PathBuf },
    /// Probability of entering the target states within the horizon.
    Reach {
        model: PathBuf,
        /// Start state (label or index).
        #[arg(long)]
        from: String,
        /// Target states (labels or indices), comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        to: Vec<String>,
        #[arg(long, value_parser = parse_horizon)]
        horizon: usize,
    },
    /// Most probable path between two states.
    Viterbi {
        model: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, value_parser = parse_horizon)]
        horizon: usize,
        #[arg(long, value_enum, default_value_t = KernelArg::Subjective)]
        kernel: KernelArg,
    },
    /// Sample state paths as JSON Lines, one array of labels per line.
    Sample {
        model: PathBuf,
        #[arg(long, value_parser = parse_horizon)]
        horizon: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1, value_parser = parse_count)]
        count: usize,
        #[arg(long, value_enum, default_value_t = KernelArg::Subjective)]
        kernel: KernelArg,
    },
    /// Evaluate a formula at every world of a frame.
    Check {
        frame: PathBuf,
        formula: String,
        /// Only report this world.
        #[arg(long)]
        world: Option<String>,
    },
    /// Modal and probabilistic audit of every policy of a problem.
    Audit {
        problem: PathBuf,
        /// Edge threshold: a state edge exists when its probability exceeds theta.
        #[arg(long, default_value_t = 0.0, value_parser = parse_theta, allow_negative_numbers = true)]
        theta: f64,
    },
    /// Run a simulated cohort and emit its choice records.
    Simulate {
        problem: PathBuf,
        #[arg(long, value_parser = parse_count)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Sharpness of the probability-matching choice rule.
        #[arg(long, default_value_t = 1.0, value_parser = parse_gamma, allow_negative_numbers = true)]
        gamma: f64,
        /// Agents use all-ones weights instead of the problem's.
        #[arg(long)]
        neutral: bool,
        /// Write records here instead of stdout and print the summary.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize a choice-record log.
    Summarize {
        log: PathBuf,
        /// Problem file; defaults to the bundled problem named in the records.
        #[arg(long)]
        problem: Option<PathBuf>,
        /// Emit the label/frequency/interval table as TSV.
        #[arg(long)]
        plot_data: bool,
    },
    /// Fit somatic weights to observed state paths.
    FitWeights {
        /// JSON Lines of state paths (arrays of labels or indices).
        log: PathBuf,
        model: PathBuf,
        #[arg(long, default_value_t = 20_000, value_parser = parse_count)]
        max_iterations: usize,
    },
    /// Host live sessions over HTTP.
    Serve {
        #[arg(long, env = "CCB_LISTEN", default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        /// Directory of *.problem.json files; bundled problems when absent.
        #[arg(long, env = "CCB_FIXTURES")]
        fixtures: Option<PathBuf>,
        #[arg(long, env = "CCB_LOG", default_value = "records.jsonl")]
        log: PathBuf,
    },
}

fn parse_horizon(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(h) if h >= 1 => Ok(h),
        _ => Err("must be an integer >= 1".into()),
    }
}

fn parse_count(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err("must be an integer >= 1".into()),
    }
}

fn parse_theta(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if (0.0..1.0).contains(&t) => Ok(t),
        _ => Err("must be a number in [0, 1)".into()),
    }
}

fn parse_gamma(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(g) if g.is_finite() && g > 0.0 => Ok(g),
        _ => Err("must be a positive finite number".into()),
    }
}
