//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.
//!
//! Runs without the libtest harness so criteria execute sequentially, their
//! lines are never captured, and the counting allocator sees only the
//! measured work.

mod common;

use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sigkit::alloc_track::{self, CountingAllocator};
use sigkit::cli::bench::{run_bench, BenchCase, BenchConfig, BenchMode};
use sigkit::testkit::{finite_difference_grad, oracle_rows, shuffle_enumerate};
use sigkit::{
    chen_concat, lead_lag, signature_backward, signature_forward, signature_inverse,
    signature_windows, tensor_log, time_reverse, LogSigPlan, PathBatch, WindowSpec, WordSet,
};

use common::*;

#[global_allocator]
static ALLOC: CountingAllocator = CountingAllocator;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_case_paths(rng: &mut ChaCha8Rng, max_d: usize, max_m: usize) -> PathBatch {
    let d = rng.gen_range(1..=max_d);
    let m = rng.gen_range(1..=max_m);
    let b = rng.gen_range(1..=3);
    random_paths(rng, b, m + 1, d)
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn dimension_facts() -> Outcome {
    let t = Instant::now();
    let got = [
        WordSet::truncated(6, 3).unwrap().len(),
        WordSet::truncated(8, 6).unwrap().len(),
        LogSigPlan::new(6, 3).unwrap().lyndon().len(),
        LogSigPlan::new(4, 6).unwrap().lyndon().len(),
    ];
    let e = t.elapsed();
    let pass = got == [258, 299_592, 91, 964] && within(e, 1.0);
    outcome(pass, format!("widths {got:?} in {:.3}s", e.as_secs_f64()))
}

fn oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let paths = random_case_paths(&mut rng, 3, 5);
        let depth = rng.gen_range(1..=4);
        let ws = random_wordset(&mut rng, paths.d() as u32, depth);
        let sig = signature_forward(&paths, &ws).unwrap();
        worst = worst.max(max_rel(sig.values(), &oracle_rows(&paths, &ws).unwrap()));
    }
    let e = t.elapsed();
    outcome(
        worst <= 1e-12 && within(e, 60.0),
        format!(
            "200 cases, max rel error {worst:.2e} in {:.2}s",
            e.as_secs_f64()
        ),
    )
}

fn chen_and_inverse() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let (mut chen, mut inv) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let paths = random_case_paths(&mut rng, 3, 8);
        let ws = Arc::new(WordSet::truncated(paths.d() as u32, rng.gen_range(1..=4)).unwrap());
        let m = paths.segments();
        let k = rng.gen_range(0..=m);
        let a = signature_forward(&paths.slice_samples(0, k).unwrap(), &ws).unwrap();
        let b = signature_forward(&paths.slice_samples(k, m).unwrap(), &ws).unwrap();
        let full = signature_forward(&paths, &ws).unwrap();
        chen = chen.max(max_rel(
            chen_concat(&a, &b).unwrap().values(),
            full.values(),
        ));
        let rev = signature_forward(&time_reverse(&paths), &ws).unwrap();
        inv = inv.max(max_rel(
            signature_inverse(&full).unwrap().values(),
            rev.values(),
        ));
    }
    let e = t.elapsed();
    outcome(
        chen <= 1e-12 && inv <= 1e-10 && within(e, 30.0),
        format!(
            "100 cases, Chen {chen:.2e}, inverse {inv:.2e} in {:.2}s",
            e.as_secs_f64()
        ),
    )
}

fn shuffle_identity() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    let mut worst = 0.0f64;
    let mut pairs = 0usize;
    for d in [2u32, 3] {
        let ws = Arc::new(WordSet::truncated(d, 4).unwrap());
        let short: Vec<Vec<u32>> = (0..ws.len())
            .map(|i| ws.letters(i))
            .filter(|w| w.len() <= 3)
            .collect();
        for _ in 0..20 {
            let m = rng.gen_range(1..=6);
            let paths = random_paths(&mut rng, 1, m + 1, d as usize);
            let sig = signature_forward(&paths, &ws).unwrap();
            for u in &short {
                for v in &short {
                    if u.len() + v.len() > 4 {
                        continue;
                    }
                    let lhs = sig.get(0, u).unwrap() * sig.get(0, v).unwrap();
                    let rhs: f64 = shuffle_enumerate(u, v)
                        .unwrap()
                        .iter()
                        .map(|w| sig.get(0, w).unwrap())
                        .sum();
                    worst = worst.max(rel_err(rhs, lhs));
                    pairs += 1;
                }
            }
        }
    }
    let e = t.elapsed();
    outcome(
        worst <= 1e-10 && within(e, 30.0),
        format!(
            "{pairs} word pairs, max error {worst:.2e} in {:.2}s",
            e.as_secs_f64()
        ),
    )
}

fn gradient_correctness() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(400);
    let mut worst = 0.0f64;
    let mut kinds = [0usize; 3];
    for i in 0..100 {
        let paths = random_case_paths(&mut rng, 3, 8);
        let d = paths.d() as u32;
        let depth = rng.gen_range(1..=4);
        let kind = i % 3;
        kinds[kind] += 1;
        let ws = Arc::new(match kind {
            0 => WordSet::truncated(d, depth as u32).unwrap(),
            1 => random_custom(&mut rng, d, depth, 6),
            _ => random_anisotropic(&mut rng, d, depth),
        });
        let up = random_paths(&mut rng, 1, paths.batch() * ws.output_width(), 1).into_vec();
        let a = signature_backward(&paths, &ws, &up).unwrap();
        let f = finite_difference_grad(&paths, &ws, &up, 1e-5).unwrap();
        worst = worst.max(grad_err(a.values(), &f));
    }
    let e = t.elapsed();
    outcome(
        worst <= 1e-6 && within(e, 120.0),
        format!(
            "100 cases (truncated {}, custom {}, anisotropic {}), max rel error {worst:.2e} in {:.2}s",
            kinds[0],
            kinds[1],
            kinds[2],
            e.as_secs_f64()
        ),
    )
}

fn log_signature() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let (mut fwd, mut seg, mut grad) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let paths = random_case_paths(&mut rng, 3, 5);
        let d = paths.d() as u32;
        let depth = rng.gen_range(1..=4u32);
        let plan = LogSigPlan::new(d, depth).unwrap();
        let ls = plan.forward(&paths).unwrap();
        let full = Arc::new(WordSet::truncated(d, depth).unwrap());
        let log = tensor_log(&signature_forward(&paths, &full).unwrap()).unwrap();
        for b in 0..paths.batch() {
            for i in 0..plan.lyndon().len() {
                let expect = log.get(b, &plan.lyndon().letters(i)).unwrap();
                fwd = fwd.max(rel_err(ls.row(b)[i], expect));
            }
        }

        let one = random_paths(&mut rng, 1, 2, d as usize);
        let ls1 = plan.forward(&one).unwrap();
        for i in 0..plan.lyndon().len() {
            let w = plan.lyndon().letters(i);
            let expect = if w.len() == 1 {
                one.sample(0, 1)[w[0] as usize] - one.sample(0, 0)[w[0] as usize]
            } else {
                0.0
            };
            seg = seg.max((ls1.values()[i] - expect).abs());
        }

        let up = random_paths(&mut rng, 1, paths.batch() * plan.lyndon().len(), 1).into_vec();
        let a = plan.backward(&paths, &up).unwrap();
        let f = fd_gradient(&paths, 1e-5, |p| {
            plan.forward(p)
                .unwrap()
                .values()
                .iter()
                .zip(&up)
                .map(|(x, y)| x * y)
                .sum()
        });
        grad = grad.max(grad_err(a.values(), &f));
    }
    outcome(
        fwd <= 1e-12 && seg <= 1e-14 && grad <= 1e-6,
        format!("forward {fwd:.2e}, single segment {seg:.2e}, gradient {grad:.2e} over 50 cases"),
    )
}

fn windows() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(600);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let paths = random_case_paths(&mut rng, 3, 9);
        let depth = rng.gen_range(1..=4);
        let ws = random_wordset(&mut rng, paths.d() as u32, depth);
        let s = paths.samples();
        let pairs: Vec<(usize, usize)> = (0..rng.gen_range(1..=6))
            .map(|_| {
                let l = rng.gen_range(0..s - 1);
                (l, rng.gen_range(l + 1..s))
            })
            .collect();
        let outs = signature_windows(&paths, &ws, &WindowSpec::new(pairs.clone())).unwrap();
        for (k, &(l, r)) in pairs.iter().enumerate() {
            let direct = signature_forward(&paths.slice_samples(l, r).unwrap(), &ws).unwrap();
            worst = worst.max(max_rel(outs[k].values(), direct.values()));
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let csv: String = {
        let p = random_paths(&mut rng, 3, 13, 3);
        let mut out = String::new();
        for b in 0..3 {
            for j in 0..13 {
                let row: Vec<String> = p.sample(b, j).iter().map(|v| format!("{v:.17e}")).collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
            out.push('\n');
        }
        out
    };
    std::fs::write(dir.path().join("p.csv"), csv).unwrap();
    std::fs::write(dir.path().join("w.csv"), "0,4\n4,9\n9,12\n2,3\n3,11\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_sigkit"))
        .current_dir(dir.path())
        .args([
            "windows",
            "p.csv",
            "--depth",
            "4",
            "--windows",
            "w.csv",
            "--verify",
        ])
        .output()
        .unwrap();
    let verify = String::from_utf8_lossy(&o.stderr).trim().to_string();
    outcome(
        worst <= 1e-14 && o.status.success(),
        format!("50 window sets, max error {worst:.2e}; --verify: {verify}"),
    )
}

fn backward_extra_bytes(m: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(700);
    let paths = random_paths(&mut rng, 8, m + 1, 3);
    let ws = Arc::new(WordSet::truncated(3, 4).unwrap());
    let up = vec![1.0; 8 * ws.output_width()];
    let output_bytes = std::mem::size_of_val(paths.as_slice());
    signature_backward(&paths, &ws, &up).unwrap();
    let (g, peak) = alloc_track::measure_peak(|| signature_backward(&paths, &ws, &up).unwrap());
    drop(g);
    peak.saturating_sub(output_bytes)
}

fn memory_contract() -> Outcome {
    let small = backward_extra_bytes(100);
    let large = backward_extra_bytes(10_000);
    let ratio = small.max(large) as f64 / small.min(large).max(1) as f64;
    outcome(
        ratio < 2.0,
        format!(
            "extra bytes beyond the gradient buffer: M=100 {small}, M=10000 {large}, ratio {ratio:.3}"
        ),
    )
}

fn parallel_scaling() -> Outcome {
    let cfg = BenchConfig {
        warmup: 1,
        repeats: 3,
        seed: 800,
        cases: vec![BenchCase {
            batch: 64,
            d: 4,
            depth: 6,
            m: 1000,
            mode: BenchMode::Forward,
            threads: vec![1, 4],
        }],
    };
    let rows = run_bench(&cfg).unwrap();
    let speedup = rows[0].median_ms / rows[1].median_ms;
    let cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
    outcome(
        speedup >= 2.0,
        format!(
            "1 thread {:.0} ms, 4 threads {:.0} ms, speedup {speedup:.2}x on {cpus} available CPU(s)",
            rows[0].median_ms, rows[1].median_ms
        ),
    )
}

fn lead_lag_variation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(900);
    let mut worst = 0.0f64;
    let mut cross = 0.0f64;
    for _ in 0..50 {
        let dim = rng.gen_range(1..=3usize);
        let m = rng.gen_range(1..=10);
        let paths = random_paths(&mut rng, 1, m + 1, dim);
        let ll = lead_lag(&paths).unwrap();
        let ws = Arc::new(WordSet::truncated(2 * dim as u32, 2).unwrap());
        let sig = signature_forward(&ll, &ws).unwrap();
        let oracle = oracle_rows(&ll, &ws).unwrap();
        cross = cross.max(max_rel(sig.values(), &oracle));
        for i in 0..dim {
            let (lag, lead) = (i as u32, (dim + i) as u32);
            let area = sig.get(0, &[lag, lead]).unwrap() - sig.get(0, &[lead, lag]).unwrap();
            let qv: f64 = (1..=m).map(|k| paths.increment(0, k)[i].powi(2)).sum();
            worst = worst.max(rel_err(area, -qv));
        }
    }
    outcome(
        worst <= 1e-12 && cross <= 1e-12,
        format!("50 paths, area vs -sum(dX^2) {worst:.2e}, oracle {cross:.2e}"),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("dimension facts", dimension_facts),
        ("oracle equivalence", oracle_equivalence),
        ("Chen identity and inverse", chen_and_inverse),
        ("shuffle identity", shuffle_identity),
        ("gradient correctness", gradient_correctness),
        ("log-signature", log_signature),
        ("windows", windows),
        ("memory contract", memory_contract),
        ("parallel scaling", parallel_scaling),
        ("lead-lag quadratic variation", lead_lag_variation),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} {name}: {}", o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
