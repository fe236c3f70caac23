//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation error, 2 I/O error, 3 verification
//! mismatch.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::experiments::{
    default_y_grid, emit, read_spec_or_manifest, run, write_manifest, ExperimentKind,
    ExperimentSpec, Format, NSummary, RunOptions,
};
use crate::model::{EdgeDistanceFamily, RggConfig};
use crate::numfmt::g17;
use crate::sampling::{sample_exponential_cloud, write_cloud};
use crate::stats::degree_summary;
use crate::theory;
use crate::verify::verify_oracle;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

/// Environment variable supplying the default for `--threads`.
pub const THREADS_ENV: &str = "EXPRGG_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "exprgg",
    version,
    about = "Random geometric graphs on exponentially distributed points"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a point cloud and dump it as text
    Sample {
        #[arg(long, value_parser = parse_count)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Degree statistics of one graph G_n(y)
    Graph {
        #[arg(long, value_parser = parse_count)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        y: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
        format: String,
    },
    /// Evaluate a closed-form quantity
    Theory {
        #[command(subcommand)]
        quantity: TheoryCommand,
    },
    /// Check the grid index against the brute-force oracle on random instances
    Verify {
        #[arg(long)]
        cases: usize,
        #[arg(long)]
        max_n: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Run a seeded Monte Carlo experiment and write a table plus manifest
    Experiment(Box<ExperimentArgs>),
}

#[derive(Debug, Subcommand)]
enum TheoryCommand {
    /// Pair connection probability (1 - e^{-λy})^d
    P {
        #[arg(long)]
        y: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        d: usize,
    },
    /// Rate function H(t); accepts t = inf
    H {
        #[arg(long)]
        t: f64,
    },
    /// Bound on P[Bin(n,p) >= k], k >= np
    ChernoffUpper(ChernoffArgs),
    /// Bound on P[Bin(n,p) <= k], 0 <= k <= np
    ChernoffLower(ChernoffArgs),
    /// Root of a ln a - a + 1 = 1/(λ^d c) in (0,1)
    AMin(RootArgs),
    /// Root of a ln a - a + 1 = 1/(λ^d c) in [1,inf)
    AMax(RootArgs),
    /// All degree-theorem constants
    Bounds(RootArgs),
    /// Containment radius (1+ε) ln n / (λd)
    Radius {
        #[arg(long)]
        n: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
    },
}

#[derive(Debug, Args)]
struct ChernoffArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    k: f64,
}

#[derive(Debug, Args)]
struct RootArgs {
    /// Regime constant; `inf` allowed
    #[arg(long)]
    c: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    d: usize,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// degree-law | edge-slln | uniform-slln | containment | threshold
    #[arg(value_parser = ["degree-law", "edge-slln", "uniform-slln", "containment", "threshold"])]
    kind: Option<String>,
    /// Read the full experiment from a spec or manifest JSON file
    #[arg(long, conflicts_with_all = ["d", "lambda", "c", "alpha", "beta", "n", "reps", "seed", "epsilon", "y_grid"])]
    spec: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, conflicts_with_all = ["alpha", "beta"])]
    c: Option<f64>,
    #[arg(long, requires = "beta")]
    alpha: Option<f64>,
    #[arg(long, requires = "alpha")]
    beta: Option<f64>,
    /// Comma-separated, strictly increasing list of n
    #[arg(long, value_delimiter = ',', value_parser = parse_count)]
    n: Option<Vec<usize>>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Comma-separated y grid for uniform-slln (default 0.05,0.10,...,1.00)
    #[arg(long, value_delimiter = ',')]
    y_grid: Option<Vec<f64>>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    /// Worker threads, 0 = all cores; never changes results
    #[arg(long)]
    threads: Option<usize>,
}

/// Accepts plain integers and integral floats such as `1e5`.
fn parse_count(s: &str) -> Result<usize, String> {
    if let Ok(v) = s.parse::<usize>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 1e15 => Ok(x as usize),
        _ => Err(format!("`{s}` is not a nonnegative integer")),
    }
}

/// Failure of a CLI command, already mapped to an exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io { .. } => EXIT_IO,
            _ => EXIT_VALIDATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

fn validation(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_VALIDATION,
        message: message.into(),
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_VALIDATION
                }
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Sample {
            n,
            d,
            lambda,
            seed,
            out: path,
        } => {
            let cloud = sample_exponential_cloud(n, d, lambda, seed)?;
            match path {
                Some(p) => {
                    let file = std::fs::File::create(&p).map_err(|e| Error::io(&p, e))?;
                    let mut w = std::io::BufWriter::new(file);
                    write_cloud(&cloud, &mut w)
                        .and_then(|_| w.flush())
                        .map_err(|e| Error::io(&p, e))?;
                }
                None => write_cloud(&cloud, &mut *out)?,
            }
        }
        Command::Graph {
            n,
            d,
            lambda,
            y,
            seed,
            format,
        } => {
            let config = RggConfig::new(n, d, lambda, y, seed)?;
            let cloud = sample_exponential_cloud(n, d, lambda, seed)?;
            let s = degree_summary(&cloud, y)?;
            let head = format!(
                "{},{},{},{},{},{},{},{}",
                config.n,
                config.d,
                g17(config.lambda),
                g17(config.y),
                config.seed,
                s.edge_count(),
                s.min_degree(),
                s.max_degree()
            );
            if format == "csv" {
                writeln!(out, "n,d,lambda,y,seed,edge_count,min_degree,max_degree")?;
                writeln!(out, "{head}")?;
            } else {
                let mut degrees = String::new();
                for (i, deg) in s.degrees().iter().enumerate() {
                    if i > 0 {
                        degrees.push(',');
                    }
                    let _ = write!(degrees, "{deg}");
                }
                writeln!(
                    out,
                    "{{\"n\":{},\"d\":{},\"lambda\":{},\"y\":{},\"seed\":{},\"edge_count\":{},\
                     \"min_degree\":{},\"max_degree\":{},\"degrees\":[{}]}}",
                    config.n,
                    config.d,
                    g17(config.lambda),
                    g17(config.y),
                    config.seed,
                    s.edge_count(),
                    s.min_degree(),
                    s.max_degree(),
                    degrees
                )?;
            }
        }
        Command::Theory { quantity } => theory_command(quantity, out)?,
        Command::Verify { cases, max_n, seed } => {
            let report = verify_oracle(cases, max_n, seed)?;
            for c in report.cases.iter().filter(|c| !c.matched) {
                writeln!(
                    err,
                    "mismatch: case {} n={} d={} y={} grid={} brute={}",
                    c.case,
                    c.n,
                    c.d,
                    g17(c.y),
                    c.grid_edges,
                    c.brute_edges
                )?;
            }
            writeln!(
                out,
                "verified {} cases: {} matched, {} mismatched",
                report.cases.len(),
                report.cases.len() - report.mismatches(),
                report.mismatches()
            )?;
            if !report.all_matched() {
                return Ok(EXIT_MISMATCH);
            }
        }
        Command::Experiment(args) => experiment_command(*args, err)?,
    }
    Ok(EXIT_OK)
}

fn theory_command(quantity: TheoryCommand, out: &mut dyn Write) -> Result<(), Failure> {
    match quantity {
        TheoryCommand::P { y, lambda, d } => {
            RggConfig::new(2, d, lambda, y, 0)?;
            writeln!(out, "{}", g17(theory::pair_connect_prob(y, lambda, d)))?;
        }
        TheoryCommand::H { t } => writeln!(out, "{}", g17(theory::h_function(t)?))?,
        TheoryCommand::ChernoffUpper(a) => {
            let b = theory::chernoff_upper_tail(a.n, a.p, a.k)?;
            if !b.within_validity {
                return Err(validation(format!(
                    "k = {} is below np; the upper-tail bound needs k >= np",
                    a.k
                )));
            }
            writeln!(out, "{}", g17(b.value))?;
        }
        TheoryCommand::ChernoffLower(a) => {
            let b = theory::chernoff_lower_tail(a.n, a.p, a.k)?;
            if !b.within_validity {
                return Err(validation(format!(
                    "k = {} is above np; the lower-tail bound needs k <= np",
                    a.k
                )));
            }
            writeln!(out, "{}", g17(b.value))?;
        }
        TheoryCommand::AMin(a) => {
            let root = theory::a_min(a.c, a.lambda, a.d)?;
            writeln!(out, "{}", g17(root.a))?;
            writeln!(out, "has_root={}", root.has_root)?;
        }
        TheoryCommand::AMax(a) => writeln!(out, "{}", g17(theory::a_max(a.c, a.lambda, a.d)?))?,
        TheoryCommand::Bounds(a) => {
            let b = theory::theory_bounds(a.c, a.lambda, a.d)?;
            for (name, v) in [
                ("lambda_pow_d", b.lambda_pow_d),
                ("a_min", b.a_min),
                ("a_max", b.a_max),
                ("min_liminf_bound", b.min_liminf_bound),
                ("min_limsup_bound", b.min_limsup_bound),
                ("max_liminf_bound", b.max_liminf_bound),
                ("max_limsup_bound", b.max_limsup_bound),
                (
                    "min_limsup_proof_envelope",
                    (2.0 * a.lambda).powi(a.d as i32),
                ),
            ] {
                writeln!(out, "{name}={}", g17(v))?;
            }
            writeln!(out, "a_min_has_root={}", b.a_min_has_root)?;
        }
        TheoryCommand::Radius {
            n,
            lambda,
            d,
            epsilon,
        } => writeln!(
            out,
            "{}",
            g17(theory::containment_radius(n, lambda, d, epsilon)?)
        )?,
    }
    Ok(())
}

fn threads_setting(flag: Option<usize>) -> Result<usize, Failure> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| validation(format!("{THREADS_ENV}={v} is not a thread count"))),
        Err(_) => Ok(0),
    }
}

fn build_spec(args: &ExperimentArgs) -> Result<ExperimentSpec, Failure> {
    if let Some(path) = &args.spec {
        let spec = read_spec_or_manifest(path)?;
        if let Some(kind) = &args.kind {
            if kind != spec.kind.as_str() {
                return Err(validation(format!(
                    "{} holds a {} experiment, not {kind}",
                    path.display(),
                    spec.kind.as_str()
                )));
            }
        }
        return Ok(spec);
    }
    let kind = args
        .kind
        .as_deref()
        .and_then(ExperimentKind::parse)
        .ok_or_else(|| validation("an experiment kind or --spec is required"))?;
    let need = |name: &str| validation(format!("--{name} is required"));
    let d = args.d.ok_or_else(|| need("d"))?;
    let lambda = args.lambda.ok_or_else(|| need("lambda"))?;
    let n_list = args.n.clone().ok_or_else(|| need("n"))?;
    let replications = args.reps.ok_or_else(|| need("reps"))?;
    let base_seed = args.seed.ok_or_else(|| need("seed"))?;

    let family = match (args.c, args.alpha, args.beta) {
        (Some(c), None, None) => Some(EdgeDistanceFamily::log_regime(c, lambda, d)?),
        (None, Some(alpha), Some(beta)) => Some(EdgeDistanceFamily::power(alpha, beta, lambda, d)?),
        _ => None,
    };
    let takes_family = matches!(
        kind,
        ExperimentKind::DegreeLaw | ExperimentKind::EdgeSlln | ExperimentKind::Threshold
    );
    if takes_family && family.is_none() {
        return Err(validation(format!(
            "{} needs --c or --alpha/--beta",
            kind.as_str()
        )));
    }
    if !takes_family && family.is_some() {
        return Err(validation(format!(
            "{} takes no edge-distance family",
            kind.as_str()
        )));
    }
    if args.epsilon.is_some() != (kind == ExperimentKind::Containment) {
        return Err(validation(
            "--epsilon is required by containment and only accepted there",
        ));
    }
    if args.y_grid.is_some() && kind != ExperimentKind::UniformSlln {
        return Err(validation("--y-grid only applies to uniform-slln"));
    }
    let y_grid = (kind == ExperimentKind::UniformSlln)
        .then(|| args.y_grid.clone().unwrap_or_else(default_y_grid));

    let spec = ExperimentSpec {
        kind,
        n_list,
        d,
        lambda,
        family,
        y_grid,
        replications,
        base_seed,
        epsilon: args.epsilon,
    };
    spec.validate()?;
    Ok(spec)
}

fn progress_line(kind: ExperimentKind, s: &NSummary) -> String {
    let mut line = format!("{} n={} reps={}", kind.as_str(), s.n, s.replications);
    let mut add = |name: &str, v: Option<f64>| {
        if let Some(v) = v {
            let _ = write!(line, " {name}={}", g17(v));
        }
    };
    add("y_n", s.y_n);
    add("mean_min_ratio", s.min_ratio.map(|r| r.mean));
    add("mean_max_ratio", s.max_ratio.map(|r| r.mean));
    add("mean_relative_gap", s.mean_relative_gap);
    add("mean_sup_gap", s.sup_gap.map(|r| r.mean));
    add("containment_frequency", s.containment_frequency);
    add("edge_frequency", s.edge_frequency);
    add("expected_edges", s.expected_edges);
    line
}

fn experiment_command(args: ExperimentArgs, err: &mut dyn Write) -> Result<(), Failure> {
    let spec = build_spec(&args)?;
    let threads = threads_setting(args.threads)?;
    let format = Format::parse(&args.format).expect("clap restricts the format");
    let mut log_failed = None;
    let table = run(&spec, RunOptions { threads }, &mut |s| {
        if let Err(e) = writeln!(err, "{}", progress_line(spec.kind, s)) {
            log_failed.get_or_insert(e);
        }
    })?;
    if let Some(e) = log_failed {
        return Err(e.into());
    }
    let out: &Path = &args.out;
    emit(&table, format, out)?;
    let manifest = write_manifest(&table, out, format)?;
    writeln!(
        err,
        "wrote {} rows to {} (manifest {})",
        table.rows.len(),
        out.display(),
        manifest.display()
    )?;
    Ok(())
}
