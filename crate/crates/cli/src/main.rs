use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use skeltop::bench::{run_bench, BenchConfig, PatchSource};
use skeltop::metrics::{evaluate, EvalOptions, DEFAULT_MIN_COMPONENT};
use skeltop::phantom::generate;
use skeltop::volio::{read_binary, write_binary};
use skeltop::{betti_numbers, Dims, Error, Execution, PhantomSpec, SkeletonMethod, ThinningMethod};

const THREADS_ENV: &str = "SKELTOP_THREADS";

#[derive(Parser)]
#[command(name = "skeltop", version, about = "3D skeletonization and topology evaluation")]
struct Cli {
    /// Worker threads; 1 runs sequentially. Falls back to SKELTOP_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Skeletonize a volume and report the topology of input and output.
    Skeletonize(SkeletonizeArgs),
    /// Score a predicted segmentation against ground truth.
    Metrics(MetricsArgs),
    /// Time the skeletonization methods and measure their topological errors.
    Bench(BenchArgs),
    /// Write a synthetic phantom volume.
    Phantom(PhantomArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Soft,
    Euler,
    Boolean,
}

impl Method {
    fn build(self, iterations: usize, endpoints: bool) -> SkeletonMethod {
        match self {
            Method::Soft => SkeletonMethod::soft(iterations),
            Method::Euler => SkeletonMethod::Thinning(ThinningMethod::euler().with_endpoints(endpoints)),
            Method::Boolean => SkeletonMethod::Thinning(ThinningMethod::boolean().with_endpoints(endpoints)),
        }
    }
}

#[derive(Args)]
struct SkeletonizeArgs {
    #[arg(long, value_enum)]
    method: Method,
    /// Soft-skeleton iterations.
    #[arg(long, default_value_t = 10)]
    iterations: usize,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Let thinning delete curve endpoints.
    #[arg(long)]
    no_endpoints: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, value_enum, default_value = "euler")]
    skel: Method,
    #[arg(long, default_value_t = 10)]
    iterations: usize,
    /// Drop prediction components smaller than this; 0 keeps everything.
    #[arg(long, default_value_t = DEFAULT_MIN_COMPONENT)]
    min_component: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct BenchArgs {
    /// Patch size as NX,NY,NZ or a single edge length.
    #[arg(long, default_value = "192,192,64", value_parser = parse_dims)]
    dims: Dims,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "soft,euler,boolean")]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 10)]
    iterations: usize,
    /// Phantom spec to benchmark on; repeatable. Defaults to random vessel trees.
    #[arg(long, value_parser = parse_spec, conflicts_with = "input")]
    phantom: Vec<PhantomSpec>,
    /// Volume file to benchmark on; repeatable.
    #[arg(long)]
    input: Vec<PathBuf>,
    /// Tube radius of the default vessel trees.
    #[arg(long, default_value_t = 3.0)]
    radius: f64,
    /// Branch count of the default vessel trees.
    #[arg(long, default_value_t = 16)]
    branches: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the summary as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct PhantomArgs {
    /// Spec such as "kind=torus radius=2 dims=64,64,64".
    spec: String,
    #[arg(long)]
    out: PathBuf,
}

fn parse_dims(s: &str) -> Result<Dims, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| format!("bad dimension {p:?}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [n] => Dims::cube(n),
        [x, y, z] => Dims::new(x, y, z),
        _ => return Err("expected N or NX,NY,NZ".into()),
    }
    .map_err(|e| e.to_string())
}

fn parse_spec(s: &str) -> Result<PhantomSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A failure and the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl fmt::Display) -> Self {
        Failure { code: 2, message: message.to_string() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidSpec(_) | Error::InvalidParameter(_) => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = Result<(), Failure>;

fn with_path(path: &Path) -> impl FnOnce(Error) -> Failure + '_ {
    move |e| {
        let f = Failure::from(e);
        Failure { message: format!("{}: {}", path.display(), f.message), ..f }
    }
}

fn load(path: &Path) -> Result<skeltop::BinaryVolume, Failure> {
    read_binary(path).map(|(v, _)| v).map_err(with_path(path))
}

/// Resolves `--threads`/`SKELTOP_THREADS` into an execution policy.
///
/// Without either, `default` applies.
fn execution(threads: Option<usize>, default: Execution) -> Result<Execution, Failure> {
    let threads = match threads {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) if !v.trim().is_empty() => Some(
                v.trim()
                    .parse()
                    .map_err(|_| Failure::usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?,
            ),
            _ => None,
        },
    };
    match threads {
        None => Ok(default),
        Some(0) => Err(Failure::usage("thread count must be at least 1")),
        Some(1) => Ok(Execution::Sequential),
        Some(n) => {
            init_pool(n)?;
            Ok(Execution::Parallel)
        }
    }
}

#[cfg(feature = "parallel")]
fn init_pool(n: usize) -> Result<(), Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure { code: 1, message: e.to_string() })
}

#[cfg(not(feature = "parallel"))]
fn init_pool(_n: usize) -> Result<(), Failure> {
    Ok(())
}

fn cmd_skeletonize(a: SkeletonizeArgs, exec: Execution) -> CmdResult {
    let method = a.method.build(a.iterations, !a.no_endpoints);
    if a.method == Method::Soft && a.iterations == 0 {
        return Err(Failure::usage("--iterations must be at least 1"));
    }
    let vol = load(&a.input)?;
    let input = betti_numbers(&vol)?;
    let start = Instant::now();
    let skel = method.apply(&vol, exec)?;
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    write_binary(&skel, &a.out).map_err(with_path(&a.out))?;
    let output = betti_numbers(&skel)?;
    let line = json!({
        "method": method.name(),
        "runtime_ms": runtime_ms,
        "input": input,
        "output": output,
        "error": skeltop::topology::BettiError::between(output, input),
    });
    println!("{line}");
    Ok(())
}

fn cmd_metrics(a: MetricsArgs, exec: Execution) -> CmdResult {
    let pred = load(&a.pred)?;
    let gt = load(&a.gt)?;
    let opts = EvalOptions {
        skeleton: a.skel.build(a.iterations, true),
        min_component: (a.min_component > 0).then_some(a.min_component),
        exec,
    };
    let report = evaluate(&pred, &gt, &opts)?;
    match a.format {
        Format::Json => println!("{}", report.to_json()),
        Format::Csv => {
            println!("{}", skeltop::MetricsReport::CSV_HEADER);
            println!("{}", report.to_csv_row());
        }
    }
    Ok(())
}

fn cmd_bench(a: BenchArgs, exec: Execution) -> CmdResult {
    let mut methods: Vec<SkeletonMethod> = Vec::new();
    for m in &a.methods {
        let m = m.build(a.iterations, true);
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    let source = if !a.input.is_empty() {
        let vols = a.input.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
        PatchSource::Volumes(vols)
    } else if !a.phantom.is_empty() {
        PatchSource::Phantoms(a.phantom)
    } else {
        PatchSource::VesselTrees { radius: a.radius, branches: a.branches }
    };
    let mut cfg = BenchConfig::new(methods);
    cfg.patch_dims = a.dims;
    cfg.repeats = a.repeats;
    cfg.source = source;
    cfg.seed = a.seed;
    cfg.exec = exec;
    let report = run_bench(&cfg)?;
    print!("{}", report.render_table());
    if let Some(path) = a.csv {
        std::fs::write(&path, report.render_csv()).map_err(|e| with_path(&path)(e.into()))?;
    }
    Ok(())
}

fn cmd_phantom(a: PhantomArgs) -> CmdResult {
    let spec: PhantomSpec = a.spec.parse()?;
    let phantom = generate(&spec)?;
    write_binary(&phantom.volume, &a.out).map_err(with_path(&a.out))?;
    let e = phantom.expected;
    println!("{}", json!({ "spec": spec.to_string(), "expected": e }));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Skeletonize(a) => execution(cli.threads, Execution::default()).and_then(|e| cmd_skeletonize(a, e)),
        Command::Metrics(a) => execution(cli.threads, Execution::default()).and_then(|e| cmd_metrics(a, e)),
        // timings are single-threaded unless threads are requested
        Command::Bench(a) => execution(cli.threads, Execution::Sequential).and_then(|e| cmd_bench(a, e)),
        Command::Phantom(a) => cmd_phantom(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("skeltop: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
