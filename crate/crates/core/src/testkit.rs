//! Brute-force reference implementations for tests and debugging.
//!
//! Nothing here calls the production kernels: the dense oracle materializes
//! every level and multiplies full tensors, shuffles are enumerated
//! recursively, and finite differences evaluate the dense oracle.

use crate::error::{Result, SigError};
use crate::sigcore::PathBatch;
use crate::wordsets::WordSet;

/// Size guard for the dense oracle: total tensor entries times segments.
pub const ORACLE_WORK_LIMIT: usize = 50_000_000;

/// Full truncated signature of one path: `levels[n][code]` for words of length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSignature {
    pub d: usize,
    pub levels: Vec<Vec<f64>>,
}

impl DenseSignature {
    fn identity(d: usize, depth: usize) -> Self {
        let mut levels = Vec::with_capacity(depth + 1);
        let mut size = 1;
        for n in 0..=depth {
            let mut v = vec![0.0; size];
            if n == 0 {
                v[0] = 1.0;
            }
            levels.push(v);
            size *= d;
        }
        Self { d, levels }
    }

    /// Coefficient at a word given by 0-based letters.
    pub fn get(&self, letters: &[u32]) -> f64 {
        let code = letters
            .iter()
            .fold(0usize, |acc, &l| acc * self.d + l as usize);
        self.levels[letters.len()][code]
    }

    fn product(&self, other: &Self) -> Self {
        let depth = self.levels.len() - 1;
        let mut out = Self::identity(self.d, depth);
        out.levels[0][0] = 0.0;
        for n in 0..=depth {
            for k in 0..=n {
                let a = &self.levels[k];
                let b = &other.levels[n - k];
                for (i, av) in a.iter().enumerate() {
                    for (j, bv) in b.iter().enumerate() {
                        out.levels[n][i * b.len() + j] += av * bv;
                    }
                }
            }
        }
        out
    }

    fn segment(delta: &[f64], depth: usize) -> Self {
        let d = delta.len();
        let mut e = Self::identity(d, depth);
        for n in 1..=depth {
            let prev = e.levels[n - 1].clone();
            for (i, pv) in prev.iter().enumerate() {
                for (c, dv) in delta.iter().enumerate() {
                    e.levels[n][i * d + c] = pv * dv / n as f64;
                }
            }
        }
        e
    }
}

fn guard(d: usize, depth: usize, segments: usize) -> Result<()> {
    let mut size = 0usize;
    let mut p = 1usize;
    for _ in 0..=depth {
        size = size.saturating_add(p);
        p = p.saturating_mul(d);
    }
    if size.saturating_mul(segments.max(1)) > ORACLE_WORK_LIMIT {
        return Err(SigError::Capacity(format!(
            "dense oracle refuses d={d}, depth={depth}, {segments} segments"
        )));
    }
    Ok(())
}

/// Dense truncated signatures `S <- S ⊗ exp(ΔX_j)`, one per path.
pub fn dense_signature_oracle(paths: &PathBatch, depth: usize) -> Result<Vec<DenseSignature>> {
    let d = paths.d();
    guard(d, depth, paths.segments())?;
    (0..paths.batch())
        .map(|b| {
            let mut s = DenseSignature::identity(d, depth);
            for j in 1..paths.samples() {
                let delta: Vec<f64> = paths
                    .sample(b, j)
                    .iter()
                    .zip(paths.sample(b, j - 1))
                    .map(|(x, y)| x - y)
                    .collect();
                s = s.product(&DenseSignature::segment(&delta, depth));
            }
            Ok(s)
        })
        .collect()
}

/// Dense oracle values laid out like a word set's coefficient rows.
pub fn oracle_rows(paths: &PathBatch, ws: &WordSet) -> Result<Vec<f64>> {
    let dense = dense_signature_oracle(paths, ws.max_len() as usize)?;
    let mut out = Vec::with_capacity(paths.batch() * ws.output_width());
    for s in &dense {
        if ws.include_empty() {
            out.push(1.0);
        }
        for i in 0..ws.len() {
            out.push(s.get(&ws.letters(i)));
        }
    }
    Ok(out)
}

/// All interleavings of `u` and `v`, with multiplicity.
pub fn shuffle_enumerate(u: &[u32], v: &[u32]) -> Result<Vec<Vec<u32>>> {
    if u.len() + v.len() > 8 {
        return Err(SigError::Capacity(
            "shuffle enumeration limited to |u| + |v| <= 8".into(),
        ));
    }
    fn rec(u: &[u32], v: &[u32], prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if u.is_empty() && v.is_empty() {
            out.push(prefix.clone());
            return;
        }
        if let Some((&h, rest)) = u.split_first() {
            prefix.push(h);
            rec(rest, v, prefix, out);
            prefix.pop();
        }
        if let Some((&h, rest)) = v.split_first() {
            prefix.push(h);
            rec(u, rest, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(u, v, &mut Vec::new(), &mut out);
    Ok(out)
}

/// Central differences of `sum_w upstream[b, w] * S(X_b, w)` with respect to
/// every sample coordinate, with step `h * max(1, |x|)`.
pub fn finite_difference_grad(
    paths: &PathBatch,
    ws: &WordSet,
    upstream: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    let width = ws.output_width();
    if upstream.len() != paths.batch() * width {
        return Err(SigError::Shape(format!(
            "upstream gradient has {} values, expected {}",
            upstream.len(),
            paths.batch() * width
        )));
    }
    let (samples, d) = (paths.samples(), paths.d());
    let depth = ws.max_len() as usize;
    guard(d, depth, paths.segments().saturating_mul(2 * samples * d))?;
    let letters: Vec<Vec<u32>> = (0..ws.len()).map(|i| ws.letters(i)).collect();
    let off = ws.column_offset();
    let mut out = vec![0.0; paths.as_slice().len()];
    for b in 0..paths.batch() {
        let g = &upstream[b * width + off..(b + 1) * width];
        let base: Vec<f64> = paths.path(b).to_vec();
        let eval = |pts: &[f64]| -> Result<f64> {
            let p = PathBatch::new_propagating_nan(1, samples, d, pts.to_vec())?;
            let s = &dense_signature_oracle(&p, depth)?[0];
            Ok(letters.iter().zip(g).map(|(w, gw)| gw * s.get(w)).sum())
        };
        for idx in 0..base.len() {
            let step = h * base[idx].abs().max(1.0);
            let mut plus = base.clone();
            plus[idx] += step;
            let mut minus = base.clone();
            minus[idx] -= step;
            let actual = plus[idx] - minus[idx];
            out[b * samples * d + idx] = (eval(&plus)? - eval(&minus)?) / actual;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shuffles() {
        let mut s = shuffle_enumerate(&[0], &[1]).unwrap();
        s.sort();
        assert_eq!(s, vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(shuffle_enumerate(&[], &[1, 0]).unwrap(), vec![vec![1, 0]]);
        assert_eq!(shuffle_enumerate(&[0], &[0]).unwrap(), vec![vec![0, 0]; 2]);
        assert_eq!(shuffle_enumerate(&[0, 1], &[2, 3]).unwrap().len(), 6);
        assert!(shuffle_enumerate(&[0; 5], &[0; 4]).is_err());
    }

    #[test]
    fn oracle_basics() {
        let p = PathBatch::new(1, 3, 2, vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0]).unwrap();
        let s = &dense_signature_oracle(&p, 2).unwrap()[0];
        assert_eq!(s.levels[1], [1.0, 1.0]);
        assert_eq!(s.levels[2], [0.5, 1.0, 0.0, 0.5]);

        let c = PathBatch::new(1, 4, 2, vec![0.3; 8]).unwrap();
        let s = &dense_signature_oracle(&c, 3).unwrap()[0];
        assert_eq!(s.levels[0], [1.0]);
        assert!(s.levels[1..].iter().flatten().all(|&v| v == 0.0));

        let seg = PathBatch::new(1, 2, 2, vec![0.0, 0.0, 3.0, 2.0]).unwrap();
        let s = &dense_signature_oracle(&seg, 3).unwrap()[0];
        // (1.1.2): 3*3*2/3!
        assert!((s.get(&[0, 0, 1]) - 3.0).abs() < 1e-15);

        let big = PathBatch::new(1, 2001, 8, vec![0.0; 2001 * 8]).unwrap();
        assert!(dense_signature_oracle(&big, 8).is_err());
    }

    #[test]
    fn fd_level_one() {
        let p = PathBatch::new(1, 3, 2, vec![0.0, 1.0, 0.5, -0.2, 0.1, 0.9]).unwrap();
        let ws = WordSet::truncated(2, 1).unwrap();
        let g = finite_difference_grad(&p, &ws, &[2.0, -3.0], 1e-5).unwrap();
        let expected = [-2.0, 3.0, 0.0, 0.0, 2.0, -3.0];
        for (a, b) in g.iter().zip(expected) {
            assert!((a - b).abs() < 1e-9);
        }
        let z = finite_difference_grad(&p, &ws, &[0.0, 0.0], 1e-5).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
    }
}
