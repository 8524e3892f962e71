use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;
use rag::format::{self, CountsDump};
use rag::harness::{
    self, CltRun, ExperimentSpec, HarnessError, DEFAULT_CUBATURE_GRID, DEFAULT_MC_SAMPLES,
};
use rag_core::{
    clustering_coefficient, count_edge_list, count_graph, edge_list, limit_for_ratio, sample_positions,
    AnnulusParams, KernelParams, PositionSet, RngSeed, SigmaMethod,
};
use serde::Serialize;

const REGIME_HELP: &str = "\
Model: n uniform points on a circle of circumference 1; i ~ j iff r2 < d(i, j) < r1, with 0 <= r2 < r1 <= 0.5.

CLT regime: 2*r2 < r1 = O(r2), r1 = o(1) and n*r1 = omega(1). Limit quantities need 2*r2 < r1; \
the clt and converge commands additionally require r1 <= 0.1 and n*r1 >= 20.

Exit codes: 0 success, 1 runtime or I/O failure, 2 invalid arguments.";

#[derive(Parser)]
#[command(name = "rag", version, about = "Random annulus graphs: clustering coefficient and its limit theory", after_help = REGIME_HELP)]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true, env = "RAG_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one graph and write edges.txt and positions.csv
    Generate {
        #[command(flatten)]
        model: ModelArgs,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print the global clustering coefficient of a sampled or loaded graph
    Cc {
        #[command(flatten)]
        model: OptionalModelArgs,
        /// Read positions (index,position CSV) instead of sampling; needs --r1
        #[arg(long, conflicts_with = "edges")]
        positions: Option<PathBuf>,
        /// Read an edge list ("i j" lines, optional "# rag n=..." header)
        #[arg(long)]
        edges: Option<PathBuf>,
        /// Node count for --edges when the file has no header
        #[arg(long = "nodes")]
        nodes: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print the limit (3/4)(lambda-2)^2/(lambda-1)^2 of C_n
    Limit {
        #[command(flatten)]
        radii: RadiiArgs,
    },
    /// Estimate sigma^2 = E[h(X1,X2,X3) h(X1,X2,X4)]
    Sigma {
        #[command(flatten)]
        radii: RadiiArgs,
        #[command(flatten)]
        sigma: SigmaArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run replicates and compare the standardised statistic with N(0, 1)
    Clt {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 300)]
        replicates: usize,
        #[command(flatten)]
        sigma: SigmaArgs,
        /// Directory for records.csv and summary.json
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fill the duration_ms column (records then differ between runs)
        #[arg(long)]
        timing: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Tabulate sigma^2 / r1^3 over r1 at fixed lambda
    Sweep {
        #[arg(long, default_value_t = 4.0)]
        lambda: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.02,0.04")]
        r1_values: Vec<f64>,
        /// Estimators to tabulate (comma separated)
        #[arg(long, value_enum, value_delimiter = ',', default_value = "cubature")]
        sigma_method: Vec<MethodArg>,
        /// Cubature grid; Monte Carlo rows use --mc-samples
        #[arg(long, default_value_t = DEFAULT_CUBATURE_GRID)]
        sigma_budget: u64,
        #[arg(long, default_value_t = DEFAULT_MC_SAMPLES)]
        mc_samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Mean |C_n - limit| over replicates for several n at fixed radii
    Converge {
        #[command(flatten)]
        radii: RadiiArgs,
        #[arg(long, value_delimiter = ',', default_value = "10000,20000,40000")]
        n_values: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        replicates: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Args, Clone)]
struct RadiiArgs {
    /// Outer radius, 0 < r1 <= 0.5
    #[arg(long)]
    r1: Option<f64>,
    /// Inner radius, 0 <= r2 < r1
    #[arg(long, conflicts_with = "lambda")]
    r2: Option<f64>,
    /// Ratio r1 / r2 (alternative to --r2; "inf" gives r2 = 0)
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Number of nodes
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    radii: RadiiArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Clone)]
struct OptionalModelArgs {
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    radii: RadiiArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Clone)]
struct SigmaArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Cubature)]
    sigma_method: MethodArg,
    /// Cubature grid or Monte Carlo samples (default 4000 or 10^7)
    #[arg(long)]
    sigma_budget: Option<u64>,
}

impl SigmaArgs {
    fn method(&self) -> SigmaMethod {
        self.sigma_method.into()
    }

    fn budget(&self) -> u64 {
        self.sigma_budget.unwrap_or(match self.method() {
            SigmaMethod::Cubature => DEFAULT_CUBATURE_GRID,
            SigmaMethod::MonteCarlo => DEFAULT_MC_SAMPLES,
        })
    }
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum MethodArg {
    #[value(name = "cubature")]
    Cubature,
    #[value(name = "monte_carlo", alias = "mc")]
    MonteCarlo,
}

impl From<MethodArg> for SigmaMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Cubature => SigmaMethod::Cubature,
            MethodArg::MonteCarlo => SigmaMethod::MonteCarlo,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] rag_core::Error),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Model(_) => 2,
            CliError::Harness(e) if e.is_validation() => 2,
            _ => 1,
        }
    }
}

type Result<T, E = CliError> = std::result::Result<T, E>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |source| CliError::Csv { path: path.to_path_buf(), source }
}

impl RadiiArgs {
    fn r1(&self) -> Result<f64> {
        self.r1.ok_or_else(|| CliError::Usage("--r1 is required".into()))
    }

    fn params(&self, n: usize) -> Result<AnnulusParams> {
        let r1 = self.r1()?;
        let p = match (self.r2, self.lambda) {
            (Some(r2), None) => AnnulusParams::new(n, r1, r2)?,
            (None, Some(lambda)) => AnnulusParams::with_ratio(n, r1, lambda)?,
            _ => return Err(CliError::Usage("give exactly one of --r2 and --lambda".into())),
        };
        Ok(p)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.threads == Some(0) {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(2);
    }
    let threads = cli.threads;
    let result = harness::with_threads(threads, move || run(cli.command)).map_err(CliError::from);
    match result.and_then(|r| r) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate { model, out } => cmd_generate(&model, &out),
        Command::Cc { model, positions, edges, nodes, format } => cmd_cc(&model, positions, edges, nodes, format),
        Command::Limit { radii } => cmd_limit(&radii),
        Command::Sigma { radii, sigma, seed } => cmd_sigma(&radii, &sigma, seed),
        Command::Clt { model, replicates, sigma, out, timing, format } => {
            cmd_clt(&model, replicates, &sigma, out, timing, format)
        }
        Command::Sweep { lambda, r1_values, sigma_method, sigma_budget, mc_samples, seed, out, format } => {
            cmd_sweep(lambda, &r1_values, &sigma_method, sigma_budget, mc_samples, seed, out, format)
        }
        Command::Converge { radii, n_values, replicates, seed, out, format } => {
            cmd_converge(&radii, &n_values, replicates, seed, out, format)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn cmd_generate(model: &ModelArgs, out: &Path) -> Result<()> {
    let params = model.radii.params(model.n)?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let ps = sample_positions(&params, RngSeed::new(model.seed, 0));
    let edges = edge_list(&ps, &params);

    let edge_path = out.join("edges.txt");
    format::write_edge_list(create(&edge_path)?, &params, model.seed, &edges).map_err(io_err(&edge_path))?;
    let pos_path = out.join("positions.csv");
    format::write_positions(create(&pos_path)?, &ps).map_err(csv_err(&pos_path))?;
    let counts_path = out.join("counts.json");
    let counts = CountsDump::new(&params, &count_graph(&ps, &params));
    format::write_json(create(&counts_path)?, &counts).map_err(io_err(&counts_path))?;
    println!("wrote {} edges to {} and {} positions to {}", edges.len(), edge_path.display(), ps.len(), pos_path.display());
    Ok(())
}

#[derive(Serialize)]
struct CcReport {
    n: usize,
    r1: Option<f64>,
    r2: Option<f64>,
    ordered_triangles: u64,
    ordered_paths: u64,
    max_degree: u32,
    cn: Option<f64>,
}

fn cmd_cc(
    model: &OptionalModelArgs,
    positions: Option<PathBuf>,
    edges: Option<PathBuf>,
    nodes: Option<usize>,
    format: Format,
) -> Result<()> {
    let (n, radii, counts) = if let Some(path) = edges {
        let file = File::open(&path).map_err(io_err(&path))?;
        let list = format::read_edge_list(BufReader::new(file)).map_err(io_err(&path))?;
        let n = nodes.or(list.n).ok_or_else(|| CliError::Usage("edge list has no n= header; pass --nodes".into()))?;
        (n, None, count_edge_list(n, &list.edges)?)
    } else {
        let (params, ps) = if let Some(path) = positions {
            let file = File::open(&path).map_err(io_err(&path))?;
            let xs = format::read_positions(BufReader::new(file)).map_err(csv_err(&path))?;
            let params = model.radii.params(xs.len())?;
            (params, PositionSet::from_positions(xs)?)
        } else {
            let n = model.n.ok_or_else(|| CliError::Usage("--n is required when sampling".into()))?;
            let params = model.radii.params(n)?;
            let ps = sample_positions(&params, RngSeed::new(model.seed, 0));
            (params, ps)
        };
        (params.n(), Some((params.r1(), params.r2())), count_graph(&ps, &params))
    };
    let report = CcReport {
        n,
        r1: radii.map(|r| r.0),
        r2: radii.map(|r| r.1),
        ordered_triangles: counts.ordered_triangles,
        ordered_paths: counts.ordered_paths,
        max_degree: counts.max_degree(),
        cn: clustering_coefficient(&counts),
    };
    let stdout = io::stdout();
    let console = Path::new("<stdout>");
    match format {
        Format::Json => format::write_json(stdout.lock(), &report).map_err(io_err(console))?,
        Format::Csv => format::write_csv_rows(stdout.lock(), &[report]).map_err(csv_err(console))?,
        Format::Text => {
            match report.cn {
                Some(c) => println!("C_n = {}", format::fmt_f64(c)),
                None => println!("C_n = undefined (no 2-paths)"),
            }
            println!(
                "ordered_triangles = {}\nordered_paths = {}\nmax_degree = {}",
                report.ordered_triangles, report.ordered_paths, report.max_degree
            );
        }
    }
    Ok(())
}

fn cmd_limit(radii: &RadiiArgs) -> Result<()> {
    let value = match (radii.r1, radii.r2, radii.lambda) {
        (None, None, Some(lambda)) => {
            if !(lambda >= 1.0) || lambda.is_nan() {
                return Err(CliError::Usage(format!("lambda = {lambda} must be at least 1")));
            }
            if !(lambda > 2.0) {
                warn!("lambda = {lambda} is outside the CLT regime (needs lambda > 2); the formula is shown for reference");
            }
            limit_for_ratio(lambda)
        }
        _ => {
            let params = radii.params(1)?;
            if !params.clt_regime() {
                warn!("2*r2 < r1 fails; the limit formula does not apply here");
                limit_for_ratio(params.r1() / params.r2())
            } else {
                KernelParams::from_params(&params)?.limit
            }
        }
    };
    println!("{}", format::fmt_f64(value));
    Ok(())
}

fn cmd_sigma(radii: &RadiiArgs, sigma: &SigmaArgs, seed: u64) -> Result<()> {
    let kp = KernelParams::from_params(&radii.params(1)?)?;
    let est = harness::estimate_sigma(&kp, sigma.method(), sigma.budget(), seed)?;
    format::write_json(io::stdout().lock(), &est).map_err(io_err(Path::new("<stdout>")))
}

#[derive(Serialize)]
struct CltReport<'a> {
    params: &'a AnnulusParams,
    master_seed: u64,
    #[serde(flatten)]
    run: &'a CltRun,
    verdict: harness::CltVerdict,
}

fn cmd_clt(
    model: &ModelArgs,
    replicates: usize,
    sigma: &SigmaArgs,
    out: Option<PathBuf>,
    timing: bool,
    format: Format,
) -> Result<()> {
    let params = model.radii.params(model.n)?;
    let mut spec = ExperimentSpec::new(params, replicates, model.seed);
    spec.sigma_method = sigma.method();
    spec.sigma_budget = sigma.budget();
    spec.record_timing = timing;
    if let Some(dir) = &out {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        spec.output_path = Some(dir.join("records.csv"));
    }
    let run = harness::run_clt_experiment(&spec)?;
    let report = CltReport { params: &spec.params, master_seed: spec.master_seed, run: &run, verdict: run.summary.verdict() };
    if let Some(dir) = &out {
        let path = dir.join("summary.json");
        format::write_json(create(&path)?, &report).map_err(io_err(&path))?;
    }
    let stdout = io::stdout();
    match format {
        Format::Json => format::write_json(stdout.lock(), &report).map_err(io_err(Path::new("<stdout>")))?,
        Format::Csv => write_summary_csv(&report).map_err(io_err(Path::new("<stdout>")))?,
        Format::Text => {
            let s = &run.summary;
            println!("samples {} (excluded {})", s.sample_count, s.excluded_count);
            println!("mean {:.4}  sd {:.4}  ks {:.4}", s.mean, s.sd, s.ks_distance);
        }
    }
    let v = report.verdict;
    let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
    eprintln!(
        "verdict: {} (ks {:.4} <= {:.4}: {}; |mean| <= 0.2: {}; 0.8 <= sd <= 1.2: {})",
        if v.pass { "PASS" } else { "FAIL" },
        run.summary.ks_distance,
        v.ks_critical,
        mark(v.ks_ok),
        mark(v.mean_ok),
        mark(v.sd_ok)
    );
    Ok(())
}

/// `field,value` rows, one per scalar of the report.
fn write_summary_csv(report: &CltReport) -> io::Result<()> {
    let value = serde_json::to_value(report)?;
    let mut out = io::stdout().lock();
    writeln!(out, "field,value")?;
    let mut stack = vec![(String::new(), &value)];
    while let Some((prefix, v)) = stack.pop() {
        match v {
            serde_json::Value::Object(map) => {
                for (k, child) in map.iter().rev() {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    stack.push((key, child));
                }
            }
            serde_json::Value::Number(num) => match num.as_f64() {
                Some(x) if !num.is_u64() && !num.is_i64() => writeln!(out, "{prefix},{}", format::fmt_f64(x))?,
                _ => writeln!(out, "{prefix},{num}")?,
            },
            serde_json::Value::String(text) => writeln!(out, "{prefix},{text}")?,
            other => writeln!(out, "{prefix},{other}")?,
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    lambda: f64,
    r1_values: &[f64],
    methods: &[MethodArg],
    grid: u64,
    mc_samples: u64,
    seed: u64,
    out: Option<PathBuf>,
    format: Format,
) -> Result<()> {
    let mut rows = Vec::new();
    for &m in methods {
        let method: SigmaMethod = m.into();
        let budget = if method == SigmaMethod::Cubature { grid } else { mc_samples };
        rows.extend(harness::run_sigma_scaling(lambda, r1_values, method, budget, seed)?);
    }
    write_table(&rows, out, format)
}

fn cmd_converge(
    radii: &RadiiArgs,
    n_values: &[usize],
    replicates: usize,
    seed: u64,
    out: Option<PathBuf>,
    format: Format,
) -> Result<()> {
    let first = *n_values.first().ok_or_else(|| CliError::Usage("--n-values is empty".into()))?;
    let base = ExperimentSpec::new(radii.params(first)?, replicates, seed);
    let rows = harness::run_convergence_experiment(&base, n_values)?;
    write_table(&rows, out, format)
}

fn write_table<T: Serialize>(rows: &[T], out: Option<PathBuf>, format: Format) -> Result<()> {
    let (mut w, path): (Box<dyn Write>, PathBuf) = match &out {
        Some(p) => (Box::new(create(p)?), p.clone()),
        None => (Box::new(io::stdout().lock()), PathBuf::from("<stdout>")),
    };
    match format {
        Format::Json => format::write_json(&mut w, rows).map_err(io_err(&path))?,
        Format::Csv | Format::Text => format::write_csv_rows(&mut w, rows).map_err(csv_err(&path))?,
    }
    w.flush().map_err(io_err(&path))
}
