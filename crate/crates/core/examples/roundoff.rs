//! Error growth with sequence length.
//!
//! Forward: kernel vs the dense oracle. Backward: plain reconstruction vs a
//! checkpointed sweep that reloads exact prefix states at every sample.
//!
//! `cargo run --release -p sigkit --example roundoff`

use std::sync::Arc;

use sigkit::backward::{signature_backward_with, BackwardOptions};
use sigkit::cli::bench::random_walks;
use sigkit::testkit::oracle_rows;
use sigkit::{signature_forward, WordSet};

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
        .fold(0.0, f64::max)
}

fn main() {
    let ws = Arc::new(WordSet::truncated(3, 4).unwrap());
    println!("m,forward_vs_oracle,backward_reconstruction");
    for m in [10, 100, 1_000, 10_000, 100_000] {
        let paths = random_walks(m as u64, 4, m, 3);
        let fwd = signature_forward(&paths, &ws).unwrap();
        let forward_err = if m <= 10_000 {
            format!("{:.2e}", max_rel(fwd.values(), &oracle_rows(&paths, &ws).unwrap()))
        } else {
            "-".into()
        };
        let up: Vec<f64> = (0..paths.batch() * ws.output_width())
            .map(|i| ((i * 7919) % 13) as f64 / 6.0 - 1.0)
            .collect();
        let plain = signature_backward_with(&paths, &ws, &up, BackwardOptions::default()).unwrap();
        let exact = signature_backward_with(
            &paths,
            &ws,
            &up,
            BackwardOptions {
                checkpoint_stride: Some(1),
            },
        )
        .unwrap();
        println!(
            "{m},{forward_err},{:.2e}",
            max_rel(plain.values(), exact.values())
        );
    }
}
