//! Log-signatures reported as tensor-logarithm coefficients at Lyndon words.
//!
//! The forward pass only needs every word of length below the depth plus the
//! Lyndon words at the top level: a top-level word enters the log series
//! through the linear term alone, all other terms being products of shorter
//! words.

use std::sync::Arc;

use rayon::prelude::*;

use crate::backward::{signature_backward, PathGradients};
use crate::error::{Result, SigError};
use crate::sigcore::{signature_forward, CoefficientBatch, PathBatch};
use crate::tensor::{log_chain, TruncatedTensor};
use crate::wordsets::WordSet;

/// Tensor logarithm of each row of a fully truncated signature batch.
pub fn tensor_log(a: &CoefficientBatch) -> Result<CoefficientBatch> {
    let ws = a.wordset();
    ws.full_truncation_depth().ok_or_else(|| {
        SigError::UnsupportedWordSet("tensor_log requires a fully truncated word set".into())
    })?;
    let width = ws.output_width();
    let mut values = vec![0.0; a.values().len()];
    values
        .par_chunks_mut(width.max(1))
        .enumerate()
        .try_for_each(|(b, row)| -> Result<()> {
            let t = TruncatedTensor::from_row(ws, a.row(b), 1.0)?;
            t.log().write_row(ws, row);
            Ok(())
        })?;
    CoefficientBatch::new(Arc::clone(ws), a.batch(), values)
}

/// Word sets and index maps shared by the log-signature forward and backward passes.
#[derive(Debug, Clone)]
pub struct LogSigPlan {
    d: usize,
    depth: usize,
    lyndon: Arc<WordSet>,
    /// All words below `depth`, then the Lyndon words of length `depth`.
    restricted: Arc<WordSet>,
    /// Number of words below `depth`.
    lower_count: usize,
    /// For each Lyndon word: dense index (length < depth) or top index.
    columns: Vec<Column>,
    /// Letters of each top-level Lyndon word, in restricted-set order.
    top_letters: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, Copy)]
enum Column {
    Lower(usize),
    Top(usize),
}

impl LogSigPlan {
    pub fn new(d: u32, depth: u32) -> Result<Self> {
        let lyndon = Arc::new(WordSet::lyndon(d, depth)?);
        let n = depth as usize;
        let mut words: Vec<Vec<u32>> = Vec::new();
        if depth > 1 {
            let lower = WordSet::truncated(d, depth - 1)?;
            words.extend((0..lower.len()).map(|i| lower.letters(i)));
        }
        let lower_count = words.len();
        let top_letters: Vec<Vec<u32>> = (0..lyndon.len())
            .filter(|&i| lyndon.word(i).len() as usize == n)
            .map(|i| lyndon.letters(i))
            .collect();
        words.extend(top_letters.iter().cloned());
        let restricted = Arc::new(WordSet::custom(&words, d)?);

        let mut top_seen = 0;
        let columns = (0..lyndon.len())
            .map(|i| {
                let w = lyndon.word(i);
                if (w.len() as usize) < n {
                    // index into a dense tensor of depth n-1, ε at 0
                    let offset: usize = (0..w.len()).map(|m| (d as usize).pow(m)).sum();
                    Column::Lower(offset + w.code() as usize)
                } else {
                    top_seen += 1;
                    Column::Top(top_seen - 1)
                }
            })
            .collect();
        Ok(Self {
            d: d as usize,
            depth: n,
            lyndon,
            restricted,
            lower_count,
            columns,
            top_letters,
        })
    }

    pub fn lyndon(&self) -> &Arc<WordSet> {
        &self.lyndon
    }

    /// The word set actually passed to the signature kernel.
    pub fn restricted(&self) -> &Arc<WordSet> {
        &self.restricted
    }

    fn split_row(&self, sig_row: &[f64]) -> (TruncatedTensor, Vec<f64>) {
        let mut x = TruncatedTensor::zeros(self.d, self.depth - 1);
        x.as_mut_slice()[1..].copy_from_slice(&sig_row[..self.lower_count]);
        (x, sig_row[self.lower_count..].to_vec())
    }

    /// Value of a dense tensor of depth `depth - 1` at the given letters.
    fn dense_index(&self, letters: &[u32]) -> usize {
        let offset: usize = (0..letters.len()).map(|m| self.d.pow(m as u32)).sum();
        offset
            + letters
                .iter()
                .fold(0usize, |acc, &l| acc * self.d + l as usize)
    }

    fn log_row(&self, sig_row: &[f64], out: &mut [f64]) {
        let (x, top) = self.split_row(sig_row);
        let chain = log_chain(&x, self.depth);
        let lower_log = x.mul(&chain[0]);
        let y1 = chain[0].as_slice();
        let xs = x.as_slice();
        for (slot, col) in out.iter_mut().zip(&self.columns) {
            *slot = match *col {
                Column::Lower(idx) => lower_log.as_slice()[idx],
                Column::Top(t) => {
                    let letters = &self.top_letters[t];
                    let mut v = top[t];
                    for k in 1..self.depth {
                        v += xs[self.dense_index(&letters[..k])]
                            * y1[self.dense_index(&letters[k..])];
                    }
                    v
                }
            };
        }
    }

    /// Gradient of `<grad_out, log-signature>` with respect to the restricted
    /// signature coefficients of one path.
    fn log_row_adjoint(&self, sig_row: &[f64], grad_out: &[f64], grad_sig: &mut [f64]) {
        let (x, _) = self.split_row(sig_row);
        let chain = log_chain(&x, self.depth);
        let lower_depth = self.depth - 1;
        let mut g_log = TruncatedTensor::zeros(self.d, lower_depth);
        let mut gx = TruncatedTensor::zeros(self.d, lower_depth);
        let mut gy = TruncatedTensor::zeros(self.d, lower_depth);
        let mut g_top = vec![0.0; self.top_letters.len()];
        for (&g, col) in grad_out.iter().zip(&self.columns) {
            if g == 0.0 {
                continue;
            }
            match *col {
                Column::Lower(idx) => g_log.as_mut_slice()[idx] += g,
                Column::Top(t) => {
                    g_top[t] += g;
                    let letters = &self.top_letters[t];
                    for k in 1..self.depth {
                        let a = self.dense_index(&letters[..k]);
                        let b = self.dense_index(&letters[k..]);
                        gx.as_mut_slice()[a] += g * chain[0].as_slice()[b];
                        gy.as_mut_slice()[b] += g * x.as_slice()[a];
                    }
                }
            }
        }
        // log = x ⊗ y_1
        TruncatedTensor::mul_adjoint(&g_log, &x, &chain[0], Some(&mut gx), Some(&mut gy));
        // y_k = 1/k - x ⊗ y_{k+1}
        for k in 0..chain.len() - 1 {
            let mut gx_k = TruncatedTensor::zeros(self.d, lower_depth);
            let mut gy_next = TruncatedTensor::zeros(self.d, lower_depth);
            TruncatedTensor::mul_adjoint(
                &gy,
                &x,
                &chain[k + 1],
                Some(&mut gx_k),
                Some(&mut gy_next),
            );
            for (a, b) in gx.as_mut_slice().iter_mut().zip(gx_k.as_slice()) {
                *a -= b;
            }
            for v in gy_next.as_mut_slice() {
                *v = -*v;
            }
            gy = gy_next;
        }
        grad_sig[..self.lower_count].copy_from_slice(&gx.as_slice()[1..]);
        grad_sig[self.lower_count..].copy_from_slice(&g_top);
    }

    pub fn forward(&self, paths: &PathBatch) -> Result<CoefficientBatch> {
        let sig = signature_forward(paths, &self.restricted)?;
        let width = self.lyndon.len();
        let mut values = vec![0.0; paths.batch() * width];
        values
            .par_chunks_mut(width)
            .enumerate()
            .for_each(|(b, out)| self.log_row(sig.row(b), out));
        CoefficientBatch::new(Arc::clone(&self.lyndon), paths.batch(), values)
    }

    pub fn backward(&self, paths: &PathBatch, grad_out: &[f64]) -> Result<PathGradients> {
        let width = self.lyndon.len();
        if grad_out.len() != paths.batch() * width {
            return Err(SigError::Shape(format!(
                "log-signature gradient has {} values, expected {}x{width}",
                grad_out.len(),
                paths.batch()
            )));
        }
        let sig = signature_forward(paths, &self.restricted)?;
        let rwidth = self.restricted.len();
        let mut upstream = vec![0.0; paths.batch() * rwidth];
        upstream
            .par_chunks_mut(rwidth)
            .enumerate()
            .for_each(|(b, g)| {
                self.log_row_adjoint(sig.row(b), &grad_out[b * width..(b + 1) * width], g)
            });
        signature_backward(paths, &self.restricted, &upstream)
    }
}

/// Log-signature of each path at the Lyndon words of length `1..=depth`.
pub fn logsignature_forward(paths: &PathBatch, d: u32, depth: u32) -> Result<CoefficientBatch> {
    if paths.d() != d as usize {
        return Err(SigError::Shape(format!(
            "paths have {} channels, expected {d}",
            paths.d()
        )));
    }
    LogSigPlan::new(d, depth)?.forward(paths)
}

/// Path gradients of `<grad_out, logsignature_forward(paths, d, depth)>`.
pub fn logsignature_backward(
    paths: &PathBatch,
    d: u32,
    depth: u32,
    grad_out: &[f64],
) -> Result<PathGradients> {
    if paths.d() != d as usize {
        return Err(SigError::Shape(format!(
            "paths have {} channels, expected {d}",
            paths.d()
        )));
    }
    LogSigPlan::new(d, depth)?.backward(paths, grad_out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l_path() -> PathBatch {
        PathBatch::from_paths(&[vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]]]).unwrap()
    }

    #[test]
    fn l_path_log() {
        let ws = Arc::new(WordSet::truncated(2, 2).unwrap());
        let sig = signature_forward(&l_path(), &ws).unwrap();
        let log = tensor_log(&sig).unwrap();
        // (1.2) column
        assert!((log.row(0)[3] - 0.5).abs() < 1e-15);
        assert!((log.row(0)[4] + 0.5).abs() < 1e-15);
        let ls = logsignature_forward(&l_path(), 2, 2).unwrap();
        assert_eq!(ls.wordset().labels(), ["1", "2", "1.2"]);
        assert_eq!(ls.row(0), [1.0, 1.0, 0.5]);
    }

    #[test]
    fn identity_log_is_zero() {
        let ws = Arc::new(WordSet::truncated(3, 3).unwrap());
        let sig = signature_forward(&PathBatch::new(1, 1, 3, vec![0.0; 3]).unwrap(), &ws).unwrap();
        assert!(tensor_log(&sig).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_segment() {
        let p = PathBatch::from_paths(&[vec![vec![0.0; 4], vec![0.3, -1.1, 0.7, 2.0]]]).unwrap();
        let ls = logsignature_forward(&p, 4, 3).unwrap();
        assert_eq!(&ls.row(0)[..4], &[0.3, -1.1, 0.7, 2.0]);
        assert!(ls.row(0)[4..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn depth_one_and_widths() {
        let ls = logsignature_forward(&l_path(), 2, 1).unwrap();
        assert_eq!(ls.row(0), [1.0, 1.0]);
        let p = PathBatch::new(1, 2, 6, vec![0.5; 12]).unwrap();
        assert_eq!(logsignature_forward(&p, 6, 3).unwrap().width(), 91);
    }

    #[test]
    fn level_one_gradient_closed_form() {
        let p = PathBatch::from_paths(&[vec![
            vec![0.0, 1.0],
            vec![0.5, -0.2],
            vec![0.1, 0.9],
            vec![0.3, 0.3],
        ]])
        .unwrap();
        let mut g = vec![0.0; 5];
        g[0] = 1.5;
        g[1] = -0.5;
        let grads = logsignature_backward(&p, 2, 3, &g).unwrap();
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
        assert!(close(grads.sample(0, 0), &[-1.5, 0.5]));
        assert!(close(grads.sample(0, 1), &[0.0, 0.0]));
        assert!(close(grads.sample(0, 3), &[1.5, -0.5]));
        let zero = logsignature_backward(&p, 2, 3, &[0.0; 5]).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
        assert!(matches!(
            logsignature_backward(&p, 2, 3, &[0.0; 4]),
            Err(SigError::Shape(_))
        ));
    }
}
