//! Micro-benchmarks driven by a JSON config.
//!
//! ```json
//! {"warmup": 3, "repeats": 10, "seed": 1,
//!  "cases": [{"batch": 64, "d": 4, "depth": 6, "m": 1000,
//!             "mode": "forward", "threads": [1, 4]}]}
//! ```

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::alloc_track;
use crate::backward::signature_backward;
use crate::error::{Result, SigError};
use crate::logsig::LogSigPlan;
use crate::sigcore::{signature_forward, PathBatch};
use crate::wordsets::WordSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchMode {
    Forward,
    Backward,
    Logsig,
}

impl BenchMode {
    fn name(self) -> &'static str {
        match self {
            Self::Forward => "forward",
            Self::Backward => "backward",
            Self::Logsig => "logsig",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchCase {
    pub batch: usize,
    pub d: u32,
    pub depth: u32,
    pub m: usize,
    pub mode: BenchMode,
    #[serde(default = "default_threads")]
    pub threads: Vec<usize>,
}

fn default_threads() -> Vec<usize> {
    vec![1]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default = "default_warmup")]
    pub warmup: usize,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub cases: Vec<BenchCase>,
}

fn default_warmup() -> usize {
    3
}

fn default_repeats() -> usize {
    10
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(SigError::Parse("bench config is empty".into()));
        }
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| SigError::Parse(format!("bench config: {e}")))?;
        if cfg.cases.is_empty() {
            return Err(SigError::Parse("bench config lists no cases".into()));
        }
        if cfg.repeats == 0 {
            return Err(SigError::Parse("bench config needs repeats >= 1".into()));
        }
        if let Some(c) = cfg
            .cases
            .iter()
            .find(|c| c.threads.is_empty() || c.threads.contains(&0))
        {
            return Err(SigError::Parse(format!(
                "bench case {:?} needs positive thread counts",
                c.mode.name()
            )));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub batch: usize,
    pub d: u32,
    pub depth: u32,
    pub m: usize,
    pub mode: BenchMode,
    pub threads: usize,
    pub median_ms: f64,
    pub mean_ms: f64,
    pub peak_alloc_bytes: usize,
}

/// Random walk with uniform increments in `[-1, 1] / sqrt(m)`.
pub fn random_walks(seed: u64, batch: usize, m: usize, d: usize) -> PathBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (m.max(1) as f64).sqrt();
    let mut data = Vec::with_capacity(batch * (m + 1) * d);
    for _ in 0..batch {
        let mut x = vec![0.0; d];
        data.extend_from_slice(&x);
        for _ in 0..m {
            for v in x.iter_mut() {
                *v += rng.gen_range(-1.0..=1.0) * scale;
            }
            data.extend_from_slice(&x);
        }
    }
    PathBatch::new(batch, m + 1, d, data).expect("finite random walk")
}

enum Workload {
    Forward(Arc<WordSet>),
    Backward(Arc<WordSet>, Vec<f64>),
    Logsig(LogSigPlan),
}

impl Workload {
    fn new(case: &BenchCase) -> Result<Self> {
        Ok(match case.mode {
            BenchMode::Forward => Self::Forward(Arc::new(WordSet::truncated(case.d, case.depth)?)),
            BenchMode::Backward => {
                let ws = Arc::new(WordSet::truncated(case.d, case.depth)?);
                let upstream = vec![1.0; case.batch * ws.output_width()];
                Self::Backward(ws, upstream)
            }
            BenchMode::Logsig => Self::Logsig(LogSigPlan::new(case.d, case.depth)?),
        })
    }

    fn run(&self, paths: &PathBatch) -> Result<usize> {
        Ok(match self {
            Self::Forward(ws) => signature_forward(paths, ws)?.values().len(),
            Self::Backward(ws, up) => signature_backward(paths, ws, up)?.values().len(),
            Self::Logsig(plan) => plan.forward(paths)?.values().len(),
        })
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Times every case at every thread count. Peak allocation is recorded on
/// one extra run and is only nonzero when the counting allocator is installed.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for (i, case) in cfg.cases.iter().enumerate() {
        let paths = random_walks(
            cfg.seed.wrapping_add(i as u64),
            case.batch,
            case.m,
            case.d as usize,
        );
        let work = Workload::new(case)?;
        for &threads in &case.threads {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| SigError::Domain(format!("cannot build thread pool: {e}")))?;
            let (times, peak) = pool.install(|| -> Result<(Vec<f64>, usize)> {
                for _ in 0..cfg.warmup {
                    work.run(&paths)?;
                }
                let mut times = Vec::with_capacity(cfg.repeats);
                for _ in 0..cfg.repeats {
                    let t = Instant::now();
                    std::hint::black_box(work.run(&paths)?);
                    times.push(t.elapsed().as_secs_f64() * 1e3);
                }
                let (r, peak) = alloc_track::measure_peak(|| work.run(&paths));
                r?;
                Ok((times, peak))
            })?;
            let mut sorted = times.clone();
            sorted.sort_by(f64::total_cmp);
            rows.push(BenchRow {
                batch: case.batch,
                d: case.d,
                depth: case.depth,
                m: case.m,
                mode: case.mode,
                threads,
                median_ms: median(&sorted),
                mean_ms: times.iter().sum::<f64>() / times.len() as f64,
                peak_alloc_bytes: peak,
            });
        }
    }
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("b,d,depth,m,mode,threads,median_ms,mean_ms,peak_alloc_bytes\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{:.6},{:.6},{}",
            r.batch,
            r.d,
            r.depth,
            r.m,
            r.mode.name(),
            r.threads,
            r.median_ms,
            r.mean_ms,
            r.peak_alloc_bytes
        )
        .unwrap();
    }
    out
}
