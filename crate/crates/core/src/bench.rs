//! Accuracy-versus-runtime comparison of skeletonization methods.
//!
//! Each method runs once untimed on the first patch, then once per repeat on
//! every patch. Only the skeletonization itself is timed; patch generation,
//! loading and the topology measurements are not. Topological errors compare
//! the skeleton with the volume it was computed from.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::error::Result;
use crate::grid::{BinaryVolume, Dims};
use crate::metrics::SkeletonMethod;
use crate::par::Execution;
use crate::phantom::{generate, PhantomKind, PhantomSpec};
use crate::topology::{betti_numbers, BettiError, BettiTriple};

/// Where benchmark patches come from.
#[derive(Debug, Clone)]
pub enum PatchSource {
    /// Random vessel trees of `patch_dims`, seeded with `seed + repeat`.
    VesselTrees { radius: f64, branches: usize },
    /// Fixed phantom specs, cycled over repeats.
    Phantoms(Vec<PhantomSpec>),
    /// Preloaded volumes, cycled over repeats.
    Volumes(Vec<BinaryVolume>),
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub patch_dims: Dims,
    pub repeats: usize,
    pub methods: Vec<SkeletonMethod>,
    pub source: PatchSource,
    pub seed: u64,
    pub exec: Execution,
}

impl BenchConfig {
    pub const DEFAULT_PATCH: (usize, usize, usize) = (192, 192, 64);

    pub fn new(methods: Vec<SkeletonMethod>) -> Self {
        let (nx, ny, nz) = Self::DEFAULT_PATCH;
        BenchConfig {
            patch_dims: Dims { nx, ny, nz },
            repeats: 5,
            methods,
            source: PatchSource::VesselTrees {
                radius: 3.0,
                branches: 16,
            },
            seed: 0,
            exec: Execution::Sequential,
        }
    }

    fn validate(&self) -> Result<()> {
        use crate::error::Error;
        if self.repeats == 0 {
            return Err(Error::InvalidParameter("repeats must be >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("at least one method is required".into()));
        }
        match &self.source {
            PatchSource::Phantoms(v) if v.is_empty() => {
                Err(Error::InvalidParameter("no phantom specs given".into()))
            }
            PatchSource::Volumes(v) if v.is_empty() => {
                Err(Error::InvalidParameter("no input volumes given".into()))
            }
            _ => Ok(()),
        }
    }

    fn patches(&self) -> Result<Vec<BinaryVolume>> {
        match &self.source {
            PatchSource::VesselTrees { radius, branches } => (0..self.repeats)
                .map(|r| {
                    let kind = PhantomKind::RandomVesselTree {
                        seed: self.seed.wrapping_add(r as u64),
                        branches: *branches,
                    };
                    Ok(generate(&PhantomSpec::new(kind, self.patch_dims, *radius)?)?.volume)
                })
                .collect(),
            PatchSource::Phantoms(specs) => (0..self.repeats)
                .map(|r| Ok(generate(&specs[r % specs.len()])?.volume))
                .collect(),
            PatchSource::Volumes(vols) => Ok((0..self.repeats).map(|r| vols[r % vols.len()].clone()).collect()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub method: &'static str,
    pub repeat: usize,
    pub runtime_ms: f64,
    pub input: BettiTriple,
    pub output: BettiTriple,
    pub error: BettiError,
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len();
        if n == 0 {
            return Stat { mean: 0.0, std: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Stat { mean, std }
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    match v.len() {
        0 => 0.0,
        n if n % 2 == 1 => v[n / 2],
        n => (v[n / 2 - 1] + v[n / 2]) / 2.0,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: &'static str,
    pub runs: usize,
    pub runtime_ms: Stat,
    pub runtime_median_ms: f64,
    pub chi_err: Stat,
    pub b0_err: Stat,
    pub b1_err: Stat,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub records: Vec<RunRecord>,
    pub summaries: Vec<MethodSummary>,
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let patches = cfg.patches()?;
    let inputs: Vec<BettiTriple> = patches.iter().map(betti_numbers).collect::<Result<_>>()?;

    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for method in &cfg.methods {
        method.apply(&patches[0], cfg.exec)?;
        let mut runs = Vec::with_capacity(patches.len());
        for (repeat, (patch, &input)) in patches.iter().zip(&inputs).enumerate() {
            let start = Instant::now();
            let skeleton = method.apply(patch, cfg.exec)?;
            let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
            let output = betti_numbers(&skeleton)?;
            runs.push(RunRecord {
                method: method.name(),
                repeat,
                runtime_ms,
                input,
                output,
                error: BettiError::between(output, input),
            });
        }
        summaries.push(summarize(method.name(), &runs));
        records.extend(runs);
    }
    Ok(BenchReport { records, summaries })
}

fn summarize(method: &'static str, runs: &[RunRecord]) -> MethodSummary {
    let col = |f: &dyn Fn(&RunRecord) -> f64| runs.iter().map(f).collect::<Vec<_>>();
    let times = col(&|r| r.runtime_ms);
    MethodSummary {
        method,
        runs: runs.len(),
        runtime_ms: Stat::of(&times),
        runtime_median_ms: median(&times),
        chi_err: Stat::of(&col(&|r| r.error.chi as f64)),
        b0_err: Stat::of(&col(&|r| r.error.b0 as f64)),
        b1_err: Stat::of(&col(&|r| r.error.b1 as f64)),
    }
}

/// Published figures for the learned skeletonization network; not reproduced here.
pub const LEARNED_NETWORK_REFERENCE: &str =
    "reference (not reproduced): learned skeletonization network  runtime 9 ± 2 ms  chi 412 ± 69  b0 294 ± 48  b1 118 ± 26";

impl BenchReport {
    pub fn summary(&self, method: &str) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }

    /// Human-readable table: mean ± std per column plus median runtime.
    pub fn render_table(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# topological errors: skeleton vs. input volume (26/6 adjacency)").unwrap();
        writeln!(
            s,
            "{:<10} {:>22} {:>12} {:>18} {:>18} {:>18}",
            "method", "runtime ms", "median ms", "chi error", "b0 error", "b1 error"
        )
        .unwrap();
        let pm = |st: &Stat| format!("{:.1} ± {:.1}", st.mean, st.std);
        for m in &self.summaries {
            writeln!(
                s,
                "{:<10} {:>22} {:>12.1} {:>18} {:>18} {:>18}",
                m.method,
                pm(&m.runtime_ms),
                m.runtime_median_ms,
                pm(&m.chi_err),
                pm(&m.b0_err),
                pm(&m.b1_err)
            )
            .unwrap();
        }
        writeln!(s, "{LEARNED_NETWORK_REFERENCE}").unwrap();
        s
    }

    pub const CSV_HEADER: &'static str = "method,runs,runtime_ms_mean,runtime_ms_std,runtime_ms_median,chi_err_mean,chi_err_std,b0_err_mean,b0_err_std,b1_err_mean,b1_err_std";

    pub fn render_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{}", Self::CSV_HEADER).unwrap();
        for m in &self.summaries {
            writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                m.method,
                m.runs,
                m.runtime_ms.mean,
                m.runtime_ms.std,
                m.runtime_median_ms,
                m.chi_err.mean,
                m.chi_err.std,
                m.b0_err.mean,
                m.b0_err.std,
                m.b1_err.mean,
                m.b1_err.std
            )
            .unwrap();
        }
        s
    }
}
