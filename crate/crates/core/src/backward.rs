//! Reverse-mode gradients of signature coefficients with respect to path samples.
//!
//! For each word `w` the sweep runs backwards over the segments, carrying the
//! prefix values `S_{0,t_j}(u)` for `u` in `P_w` and the suffix values
//! `S_{t_j,T}(v)` for `v` in `S_w`. Prefix values start from the terminal
//! signature and are stepped back by multiplying with `exp(-ΔX_j)`; suffix
//! values start from the identity and are stepped back by left-multiplying with
//! `exp(ΔX_j)`. Nothing proportional to the number of segments is stored per
//! word unless a checkpoint stride is requested.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Result, SigError};
use crate::sigcore::{advance_prefixes, reciprocals, PathBatch, WindowSpec};
use crate::wordsets::WordSet;

/// Gradients with respect to path samples, laid out like the input batch.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGradients {
    batch: usize,
    samples: usize,
    d: usize,
    values: Vec<f64>,
}

impl PathGradients {
    fn zeros(batch: usize, samples: usize, d: usize) -> Self {
        Self {
            batch,
            samples,
            d,
            values: vec![0.0; batch * samples * d],
        }
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Gradient with respect to sample `j` of path `b`.
    pub fn sample(&self, b: usize, j: usize) -> &[f64] {
        let base = (b * self.samples + j) * self.d;
        &self.values[base..base + self.d]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BackwardOptions {
    /// Store prefix values every `stride` segments during the per-word forward
    /// pass and reset to them during the sweep. `None` keeps only the terminal values.
    pub checkpoint_stride: Option<usize>,
}

/// Derivative of the segment exponential coefficient `prod_r delta[b_r] / n!`
/// with respect to `delta[channel]`.
pub fn exp_coeff_grad(delta: &[f64], letters: &[u32], channel: u32) -> f64 {
    let n = letters.len();
    let mut fact = 1.0;
    for m in 2..=n {
        fact *= m as f64;
    }
    let mut total = 0.0;
    for (r, &l) in letters.iter().enumerate() {
        if l != channel {
            continue;
        }
        let prod: f64 = letters
            .iter()
            .enumerate()
            .filter(|&(s, _)| s != r)
            .map(|(_, &ls)| delta[ls as usize])
            .product();
        total += prod;
    }
    total / fact
}

/// Steps prefix values `left[k] = S_{0,t_{j+1}}(w_[k])` back to `t_j`, where
/// `delta = ΔX_{j+1}`.
pub fn left_step(left: &mut [f64], delta: &[f64], letters: &[u32]) {
    let neg: Vec<f64> = letters.iter().map(|&l| -delta[l as usize]).collect();
    let recip = reciprocals::<f64>(letters.len());
    advance_prefixes(left, &neg, &recip);
}

/// Steps suffix values `right[m] = S_{t_{j+1},T}(last m letters of w)` back to
/// `t_j`, where `delta = ΔX_{j+1}`.
pub fn right_step(right: &mut [f64], delta: &[f64], letters: &[u32]) {
    let dl: Vec<f64> = letters.iter().map(|&l| delta[l as usize]).collect();
    let recip = reciprocals::<f64>(letters.len());
    retreat_suffixes(right, &dl, &recip);
}

#[inline]
fn retreat_suffixes(right: &mut [f64], dl: &[f64], recip: &[f64]) {
    let n = dl.len();
    for m in (1..=n).rev() {
        let start = n - m;
        let mut h = 0.0;
        for t in (0..m).rev() {
            h = dl[start + t] * recip[t + 1] * (right[m - 1 - t] + h);
        }
        right[m] += h;
    }
}

/// Per-word state of the backward sweep over samples `lo..=hi` of one path.
///
/// After construction the state sits at `j = hi` with the terminal prefix
/// values and identity suffix values; each [`step_back`](Self::step_back)
/// moves it one sample earlier.
#[derive(Debug, Clone)]
pub struct ReconstructionState {
    letters: Vec<u32>,
    lo: usize,
    j: usize,
    left: Vec<f64>,
    right: Vec<f64>,
    coef: Vec<f64>,
    dl: Vec<f64>,
    neg: Vec<f64>,
    suffix_prod: Vec<f64>,
    recip: Vec<f64>,
    inv_fact: Vec<f64>,
    stride: Option<usize>,
    checkpoints: Vec<f64>,
}

impl ReconstructionState {
    pub fn new(
        path: &[f64],
        d: usize,
        letters: &[u32],
        lo: usize,
        hi: usize,
        checkpoint_stride: Option<usize>,
    ) -> Self {
        let mut s = Self::with_capacity(letters.len(), checkpoint_stride);
        s.reset(path, d, letters, lo, hi);
        s
    }

    fn with_capacity(max_len: usize, stride: Option<usize>) -> Self {
        let mut inv_fact = vec![1.0; max_len + 1];
        for m in 1..=max_len {
            inv_fact[m] = inv_fact[m - 1] / m as f64;
        }
        Self {
            letters: Vec::with_capacity(max_len),
            lo: 0,
            j: 0,
            left: Vec::with_capacity(max_len + 1),
            right: Vec::with_capacity(max_len + 1),
            coef: Vec::with_capacity(max_len),
            dl: Vec::with_capacity(max_len),
            neg: Vec::with_capacity(max_len),
            suffix_prod: Vec::with_capacity(max_len + 1),
            recip: reciprocals::<f64>(max_len),
            inv_fact,
            stride: stride.filter(|&s| s > 0),
            checkpoints: Vec::new(),
        }
    }

    fn reset(&mut self, path: &[f64], d: usize, letters: &[u32], lo: usize, hi: usize) {
        let n = letters.len();
        if self.recip.len() < n + 1 {
            *self = Self::with_capacity(n, self.stride);
        }
        self.letters.clear();
        self.letters.extend_from_slice(letters);
        self.lo = lo;
        self.j = hi;
        self.left.clear();
        self.left.resize(n + 1, 0.0);
        self.left[0] = 1.0;
        self.right.clear();
        self.right.resize(n + 1, 0.0);
        self.right[0] = 1.0;
        self.coef.clear();
        self.coef.resize(n, 0.0);
        self.dl.clear();
        self.dl.resize(n, 0.0);
        self.neg.clear();
        self.neg.resize(n, 0.0);
        self.checkpoints.clear();

        for j in lo + 1..=hi {
            if let Some(stride) = self.stride {
                if (j - 1 - lo).is_multiple_of(stride) {
                    self.checkpoints.extend_from_slice(&self.left);
                }
            }
            self.load_increment(path, d, j);
            advance_prefixes(&mut self.left, &self.dl, &self.recip);
        }
    }

    #[inline]
    fn load_increment(&mut self, path: &[f64], d: usize, j: usize) {
        let cur = &path[j * d..(j + 1) * d];
        let prev = &path[(j - 1) * d..j * d];
        for (slot, &l) in self.dl.iter_mut().zip(&self.letters) {
            *slot = cur[l as usize] - prev[l as usize];
        }
    }

    /// Current sample index `j`.
    pub fn position(&self) -> usize {
        self.j
    }

    /// `left()[k]` is the signature of the length-`k` prefix over samples `lo..=j`.
    pub fn left(&self) -> &[f64] {
        &self.left
    }

    /// `right()[m]` is the signature of the length-`m` suffix over samples `j..=hi`.
    pub fn right(&self) -> &[f64] {
        &self.right
    }

    /// Derivatives of the word's coefficient with respect to `ΔX_j` computed
    /// by the last step, one entry per letter position (the channel is that
    /// position's letter).
    pub fn position_grads(&self) -> &[f64] {
        &self.coef
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    /// Moves from `j` to `j - 1`, recording the gradient with respect to `ΔX_j`.
    /// Returns `false` (and does nothing) once `j` reaches the window start.
    pub fn step_back(&mut self, path: &[f64], d: usize) -> bool {
        if self.j <= self.lo {
            return false;
        }
        let j = self.j;
        let n = self.letters.len();
        self.load_increment(path, d, j);
        for (ng, &v) in self.neg.iter_mut().zip(&self.dl) {
            *ng = -v;
        }
        advance_prefixes(&mut self.left, &self.neg, &self.recip);
        if let Some(stride) = self.stride {
            let t = j - 1 - self.lo;
            if t.is_multiple_of(stride) {
                let base = (t / stride) * (n + 1);
                self.left
                    .copy_from_slice(&self.checkpoints[base..base + n + 1]);
            }
        }

        // d S(w) / d ΔX_j at letter position r:
        //   sum over p <= r < k of left[p] * right[n-k] / (k-p)! * prod_{s in p..k, s != r} dl[s]
        self.coef.iter_mut().for_each(|c| *c = 0.0);
        for p in 0..n {
            let lp = self.left[p];
            if lp == 0.0 {
                continue;
            }
            for k in p + 1..=n {
                let base = lp * self.right[n - k] * self.inv_fact[k - p];
                if base == 0.0 {
                    continue;
                }
                self.suffix_prod.clear();
                self.suffix_prod.resize(k - p + 1, 1.0);
                for s in (p..k).rev() {
                    self.suffix_prod[s - p] = self.suffix_prod[s - p + 1] * self.dl[s];
                }
                let mut prefix = 1.0;
                for r in p..k {
                    self.coef[r] += base * prefix * self.suffix_prod[r - p + 1];
                    prefix *= self.dl[r];
                }
            }
        }

        retreat_suffixes(&mut self.right, &self.dl, &self.recip);
        self.j -= 1;
        true
    }
}

fn check_upstream(paths: &PathBatch, ws: &WordSet, upstream: &[f64], windows: usize) -> Result<()> {
    if paths.d() != ws.d() as usize {
        return Err(SigError::Shape(format!(
            "paths have {} channels, word set is over {} letters",
            paths.d(),
            ws.d()
        )));
    }
    let expected = windows * paths.batch() * ws.output_width();
    if upstream.len() != expected {
        return Err(SigError::Shape(format!(
            "upstream gradient has {} values, expected {expected}",
            upstream.len()
        )));
    }
    Ok(())
}

/// Accumulates `sum_w g_w dS(w)/dΔX_j` for one path into `sink(j, channel, value)`.
#[allow(clippy::too_many_arguments)]
fn sweep_path(
    path: &[f64],
    d: usize,
    ws: &WordSet,
    upstream_row: &[f64],
    lo: usize,
    hi: usize,
    state: &mut ReconstructionState,
    letters: &mut Vec<u32>,
    sink: &mut impl FnMut(usize, usize, f64),
) {
    let off = ws.column_offset();
    for (i, &g) in upstream_row[off..].iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        let packed = ws.packed(i);
        letters.clear();
        letters.extend(packed.letters());
        state.reset(path, d, letters, lo, hi);
        while state.j > lo {
            let j = state.j;
            state.step_back(path, d);
            for (&c, &l) in state.coef.iter().zip(&state.letters) {
                sink(j, l as usize, g * c);
            }
        }
    }
}

/// Gradients of `sum_w upstream[b, w] * S(X_b, w)` with respect to every
/// sample of every path. `upstream` is `B x ws.output_width()`; an exposed ε
/// column is ignored.
pub fn signature_backward(
    paths: &PathBatch,
    ws: &Arc<WordSet>,
    upstream: &[f64],
) -> Result<PathGradients> {
    signature_backward_with(paths, ws, upstream, BackwardOptions::default())
}

pub fn signature_backward_with(
    paths: &PathBatch,
    ws: &Arc<WordSet>,
    upstream: &[f64],
    opts: BackwardOptions,
) -> Result<PathGradients> {
    check_upstream(paths, ws, upstream, 1)?;
    let (batch, samples, d) = (paths.batch(), paths.samples(), paths.d());
    let width = ws.output_width();
    let mut out = PathGradients::zeros(batch, samples, d);
    let max_len = ws.max_len() as usize;
    out.values
        .par_chunks_mut((samples * d).max(1))
        .enumerate()
        .for_each(|(b, grads)| {
            let mut state = ReconstructionState::with_capacity(max_len, opts.checkpoint_stride);
            let mut letters = Vec::with_capacity(max_len);
            sweep_path(
                paths.path(b),
                d,
                ws,
                &upstream[b * width..(b + 1) * width],
                0,
                samples - 1,
                &mut state,
                &mut letters,
                &mut |j, c, v| {
                    grads[j * d + c] += v;
                    grads[(j - 1) * d + c] -= v;
                },
            );
        });
    Ok(out)
}

/// Gradients with respect to the increments `ΔX_j`, laid out `B x M x d`.
pub fn increment_gradients(
    paths: &PathBatch,
    ws: &Arc<WordSet>,
    upstream: &[f64],
) -> Result<Vec<f64>> {
    check_upstream(paths, ws, upstream, 1)?;
    let (batch, m, d) = (paths.batch(), paths.segments(), paths.d());
    let width = ws.output_width();
    let mut out = vec![0.0; batch * m * d];
    let max_len = ws.max_len() as usize;
    if m > 0 {
        out.par_chunks_mut(m * d)
            .enumerate()
            .for_each(|(b, grads)| {
                let mut state = ReconstructionState::with_capacity(max_len, None);
                let mut letters = Vec::with_capacity(max_len);
                sweep_path(
                    paths.path(b),
                    d,
                    ws,
                    &upstream[b * width..(b + 1) * width],
                    0,
                    m,
                    &mut state,
                    &mut letters,
                    &mut |j, c, v| grads[(j - 1) * d + c] += v,
                );
            });
    }
    Ok(out)
}

/// Chain rule from increment gradients (`B x M x d`) to sample gradients
/// (`B x (M+1) x d`): `g_X[j] = g_Δ[j] - g_Δ[j+1]`.
pub fn increment_to_sample_grads(increment_grads: &[f64], batch: usize, d: usize) -> Vec<f64> {
    if batch == 0 || d == 0 {
        return Vec::new();
    }
    let m = increment_grads.len() / (batch * d);
    let mut out = vec![0.0; batch * (m + 1) * d];
    for b in 0..batch {
        let inc = &increment_grads[b * m * d..(b + 1) * m * d];
        let dst = &mut out[b * (m + 1) * d..(b + 1) * (m + 1) * d];
        for j in 1..=m {
            for c in 0..d {
                let v = inc[(j - 1) * d + c];
                dst[j * d + c] += v;
                dst[(j - 1) * d + c] -= v;
            }
        }
    }
    out
}

/// Gradients through [`signature_windows`](crate::sigcore::signature_windows):
/// `upstream` is `K x B x width` in the same order as the windowed outputs.
/// Per-window contributions are summed.
pub fn signature_windows_backward(
    paths: &PathBatch,
    ws: &Arc<WordSet>,
    win: &WindowSpec,
    upstream: &[f64],
) -> Result<PathGradients> {
    win.validate(paths.samples())?;
    check_upstream(paths, ws, upstream, win.len())?;
    let (batch, samples, d) = (paths.batch(), paths.samples(), paths.d());
    let width = ws.output_width();
    let mut out = PathGradients::zeros(batch, samples, d);
    let max_len = ws.max_len() as usize;
    out.values
        .par_chunks_mut((samples * d).max(1))
        .enumerate()
        .for_each(|(b, grads)| {
            let mut state = ReconstructionState::with_capacity(max_len, None);
            let mut letters = Vec::with_capacity(max_len);
            for (k, &(lo, hi)) in win.pairs().iter().enumerate() {
                let row = &upstream[(k * batch + b) * width..(k * batch + b + 1) * width];
                sweep_path(
                    paths.path(b),
                    d,
                    ws,
                    row,
                    lo,
                    hi,
                    &mut state,
                    &mut letters,
                    &mut |j, c, v| {
                        grads[j * d + c] += v;
                        grads[(j - 1) * d + c] -= v;
                    },
                );
            }
        });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigcore::{segment_exp_coeff, signature_forward};

    #[test]
    fn exp_coeff_grad_examples() {
        let delta = [0.7, -1.9];
        assert!((exp_coeff_grad(&delta, &[0, 0], 0) - 0.7).abs() < 1e-15);
        assert_eq!(exp_coeff_grad(&delta, &[], 0), 0.0);
        assert!((exp_coeff_grad(&delta, &[0, 1], 0) - (-1.9 / 2.0)).abs() < 1e-15);
        assert_eq!(exp_coeff_grad(&delta, &[1, 1], 0), 0.0);
    }

    #[test]
    fn right_step_examples() {
        let delta = [0.4, -0.3];
        let letters = [1u32, 0];
        let mut right = vec![1.0, 0.0, 0.0];
        right_step(&mut right, &delta, &letters);
        // suffix of length 1 is (1) -> delta[0]; full word (2.1) -> exp coefficient.
        assert_eq!(right[1], 0.4);
        assert!((right[2] - segment_exp_coeff(&delta, &letters)).abs() < 1e-16);
        let before = right.clone();
        right_step(&mut right, &[0.0, 0.0], &letters);
        assert_eq!(right, before);
    }

    #[test]
    fn left_step_undoes_single_segment() {
        let delta = [0.4, -0.3, 1.2];
        let letters = [2u32, 0, 2];
        let mut left: Vec<f64> = (0..=3)
            .map(|k| segment_exp_coeff(&delta, &letters[..k]))
            .collect();
        left_step(&mut left, &delta, &letters);
        assert_eq!(left[0], 1.0);
        assert!(left[1..].iter().all(|v| v.abs() < 1e-15));
        let mut same = vec![1.0, 0.2, 0.3, 0.4];
        left_step(&mut same, &[0.0; 3], &letters);
        assert_eq!(same, [1.0, 0.2, 0.3, 0.4]);
    }

    #[test]
    fn full_back_recursion_recovers_signature() {
        let p = PathBatch::from_paths(&[vec![
            vec![0.0, 0.0],
            vec![0.5, -0.2],
            vec![0.1, 0.9],
            vec![-0.4, 0.3],
        ]])
        .unwrap();
        let ws = Arc::new(WordSet::truncated(2, 3).unwrap());
        let sig = signature_forward(&p, &ws).unwrap();
        for i in 0..ws.len() {
            let letters = ws.letters(i);
            let n = letters.len();
            let mut st = ReconstructionState::new(p.path(0), 2, &letters, 0, 3, None);
            assert!((st.left()[n] - sig.row(0)[i]).abs() < 1e-15);
            while st.step_back(p.path(0), 2) {}
            assert!((st.right()[n] - sig.row(0)[i]).abs() < 1e-14);
            assert!(st.left()[1..].iter().all(|v| v.abs() < 1e-14));
        }
    }

    #[test]
    fn level_one_closed_form() {
        let p = PathBatch::from_paths(&[vec![vec![0.0, 1.0], vec![0.5, -0.2], vec![0.1, 0.9]]])
            .unwrap();
        let ws = Arc::new(WordSet::truncated(2, 1).unwrap());
        let g = signature_backward(&p, &ws, &[2.0, -3.0]).unwrap();
        assert_eq!(g.sample(0, 0), [-2.0, 3.0]);
        assert_eq!(g.sample(0, 1), [0.0, 0.0]);
        assert_eq!(g.sample(0, 2), [2.0, -3.0]);
    }

    #[test]
    fn zero_upstream_and_shape_errors() {
        let p = PathBatch::new(2, 3, 2, vec![0.3; 12]).unwrap();
        let ws = Arc::new(WordSet::truncated(2, 2).unwrap());
        let g = signature_backward(&p, &ws, &[0.0; 12]).unwrap();
        assert!(g.values().iter().all(|&v| v == 0.0));
        assert!(matches!(
            signature_backward(&p, &ws, &[0.0; 11]),
            Err(SigError::Shape(_))
        ));
    }

    #[test]
    fn increment_chain_rule() {
        assert_eq!(
            increment_to_sample_grads(&[1.5, -2.0], 1, 2),
            [-1.5, 2.0, 1.5, -2.0]
        );
        assert_eq!(
            increment_to_sample_grads(&[0.7; 3], 1, 1),
            [-0.7, 0.0, 0.0, 0.7]
        );
        assert!(increment_to_sample_grads(&[0.0; 6], 2, 1)
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn sample_grads_telescope_from_increment_grads() {
        let p = PathBatch::from_paths(&[
            vec![
                vec![0.0, 0.0],
                vec![0.5, -0.2],
                vec![0.1, 0.9],
                vec![0.2, 0.2],
            ],
            vec![
                vec![1.0, 0.0],
                vec![0.3, 0.2],
                vec![-0.1, 0.4],
                vec![0.0, -0.6],
            ],
        ])
        .unwrap();
        let ws = Arc::new(WordSet::truncated(2, 3).unwrap());
        let up: Vec<f64> = (0..2 * ws.len())
            .map(|i| ((i * 7) % 5) as f64 - 2.0)
            .collect();
        let inc = increment_gradients(&p, &ws, &up).unwrap();
        let direct = signature_backward(&p, &ws, &up).unwrap();
        let via = increment_to_sample_grads(&inc, 2, 2);
        for (a, b) in direct.values().iter().zip(&via) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn checkpointing_matches_plain_sweep() {
        let samples: Vec<Vec<f64>> = (0..30)
            .map(|j| vec![(j as f64 * 0.3).sin(), (j as f64 * 0.17).cos()])
            .collect();
        let p = PathBatch::from_paths(&[samples]).unwrap();
        let ws = Arc::new(WordSet::truncated(2, 3).unwrap());
        let up: Vec<f64> = (0..ws.len()).map(|i| 1.0 / (i + 1) as f64).collect();
        let plain = signature_backward(&p, &ws, &up).unwrap();
        let ck = signature_backward_with(
            &p,
            &ws,
            &up,
            BackwardOptions {
                checkpoint_stride: Some(4),
            },
        )
        .unwrap();
        for (a, b) in plain.values().iter().zip(ck.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
