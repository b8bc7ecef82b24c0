#![allow(dead_code)]

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use sigkit::wordsets::AnisotropyWeights;
use sigkit::{PathBatch, WordSet};

pub fn random_paths<R: Rng>(rng: &mut R, batch: usize, samples: usize, d: usize) -> PathBatch {
    let data = (0..batch * samples * d)
        .map(|_| rng.gen_range(-1.0..=1.0))
        .collect();
    PathBatch::new(batch, samples, d, data).unwrap()
}

pub fn random_word<R: Rng>(rng: &mut R, d: u32, len: usize) -> Vec<u32> {
    (0..len).map(|_| rng.gen_range(0..d)).collect()
}

/// Random words of length `1..=max_len`; typically not prefix-closed.
pub fn random_custom<R: Rng>(rng: &mut R, d: u32, max_len: usize, count: usize) -> WordSet {
    let words: Vec<Vec<u32>> = (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            random_word(rng, d, len)
        })
        .collect();
    WordSet::custom(&words, d).unwrap()
}

pub fn random_anisotropic<R: Rng>(rng: &mut R, d: u32, max_len: usize) -> WordSet {
    let mut gamma: Vec<f64> = (0..d).map(|_| rng.gen_range(1..=3) as f64).collect();
    gamma.shuffle(rng);
    gamma[0] = 1.0;
    WordSet::anisotropic(&AnisotropyWeights::new(gamma, max_len as f64).unwrap()).unwrap()
}

/// One of: truncated, custom (non-prefix-closed), anisotropic.
pub fn random_wordset<R: Rng>(rng: &mut R, d: u32, depth: usize) -> Arc<WordSet> {
    let ws = match rng.gen_range(0..3) {
        0 => WordSet::truncated(d, depth as u32).unwrap(),
        1 => random_custom(rng, d, depth, 6),
        _ => random_anisotropic(rng, d, depth),
    };
    Arc::new(ws)
}

/// `|a - b| / max(1, |b|)`.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

pub fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(&x, &y)| rel_err(x, y))
        .fold(0.0, f64::max)
}

/// `|a - f| / max(1, |a|, |f|)`, the gradient-check metric.
pub fn grad_err(a: &[f64], f: &[f64]) -> f64 {
    assert_eq!(a.len(), f.len());
    a.iter()
        .zip(f)
        .map(|(&x, &y)| (x - y).abs() / x.abs().max(y.abs()).max(1.0))
        .fold(0.0, f64::max)
}

/// Central differences of an arbitrary scalar function of the path samples.
pub fn fd_gradient(paths: &PathBatch, h: f64, f: impl Fn(&PathBatch) -> f64) -> Vec<f64> {
    let base = paths.as_slice().to_vec();
    (0..base.len())
        .map(|i| {
            let step = h * base[i].abs().max(1.0);
            let mut p = base.clone();
            p[i] += step;
            let plus =
                f(&PathBatch::new(paths.batch(), paths.samples(), paths.d(), p.clone()).unwrap());
            p[i] = base[i] - step;
            let minus = f(&PathBatch::new(paths.batch(), paths.samples(), paths.d(), p).unwrap());
            (plus - minus) / (2.0 * step)
        })
        .collect()
}

/// Sub-batch of path `b`.
pub fn single(paths: &PathBatch, b: usize) -> PathBatch {
    PathBatch::new(1, paths.samples(), paths.d(), paths.path(b).to_vec()).unwrap()
}
