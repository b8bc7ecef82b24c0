//! Dense elements of the truncated tensor algebra, laid out level by level.
//!
//! Coefficient of a word of length `n` and code `c` lives at
//! `offset(n) + c`, with `offset(n) = sum_{m<n} d^m`; index 0 is ε. For a
//! fully truncated [`WordSet`] this is the word-set column order shifted by one.

use crate::error::{Result, SigError};
use crate::wordsets::WordSet;

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedTensor {
    d: usize,
    depth: usize,
    offsets: Vec<usize>,
    data: Vec<f64>,
}

fn level_offsets(d: usize, depth: usize) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(depth + 2);
    let mut acc = 0usize;
    let mut size = 1usize;
    for _ in 0..=depth {
        offsets.push(acc);
        acc += size;
        size *= d;
    }
    offsets.push(acc);
    offsets
}

impl TruncatedTensor {
    pub fn zeros(d: usize, depth: usize) -> Self {
        let offsets = level_offsets(d, depth);
        let len = offsets[depth + 1];
        Self {
            d,
            depth,
            offsets,
            data: vec![0.0; len],
        }
    }

    pub fn identity(d: usize, depth: usize) -> Self {
        let mut t = Self::zeros(d, depth);
        t.data[0] = 1.0;
        t
    }

    /// Reads one coefficient row of a fully truncated word set; ε is set to `epsilon`.
    pub fn from_row(ws: &WordSet, row: &[f64], epsilon: f64) -> Result<Self> {
        let depth = ws.full_truncation_depth().ok_or_else(|| {
            SigError::UnsupportedWordSet("operation requires a fully truncated word set".into())
        })?;
        if row.len() != ws.output_width() {
            return Err(SigError::Shape(format!(
                "row has {} values, word set has {} columns",
                row.len(),
                ws.output_width()
            )));
        }
        let mut t = Self::zeros(ws.d() as usize, depth as usize);
        t.data[0] = epsilon;
        t.data[1..].copy_from_slice(&row[ws.column_offset()..]);
        Ok(t)
    }

    /// Writes non-ε coefficients (and ε when the word set exposes it) into `row`.
    pub fn write_row(&self, ws: &WordSet, row: &mut [f64]) {
        let off = ws.column_offset();
        if off == 1 {
            row[0] = self.data[0];
        }
        row[off..].copy_from_slice(&self.data[1..]);
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn level(&self, n: usize) -> &[f64] {
        &self.data[self.offsets[n]..self.offsets[n + 1]]
    }

    #[inline]
    pub fn level_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.data[self.offsets[n]..self.offsets[n + 1]]
    }

    #[inline]
    pub fn index(&self, len: usize, code: usize) -> usize {
        self.offsets[len] + code
    }

    #[inline]
    pub fn get(&self, len: usize, code: usize) -> f64 {
        self.data[self.offsets[len] + code]
    }

    /// Truncated tensor product `self ⊗ other`.
    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!((self.d, self.depth), (other.d, other.depth));
        let mut out = Self::zeros(self.d, self.depth);
        for n in 0..=self.depth {
            let dst = &mut out.data[self.offsets[n]..self.offsets[n + 1]];
            for k in 0..=n {
                let a = self.level(k);
                let b = other.level(n - k);
                let stride = b.len();
                for (ca, &av) in a.iter().enumerate() {
                    if av == 0.0 {
                        continue;
                    }
                    let row = &mut dst[ca * stride..(ca + 1) * stride];
                    for (o, &bv) in row.iter_mut().zip(b) {
                        *o += av * bv;
                    }
                }
            }
        }
        out
    }

    /// Adjoint of `(a, b) -> a ⊗ b`: adds `∂/∂a <grad, a⊗b>` into `grad_a`
    /// and `∂/∂b <grad, a⊗b>` into `grad_b`.
    pub fn mul_adjoint(
        grad: &Self,
        a: &Self,
        b: &Self,
        grad_a: Option<&mut Self>,
        grad_b: Option<&mut Self>,
    ) {
        let depth = grad.depth;
        if let Some(ga) = grad_a {
            for n in 0..=depth {
                let g = grad.level(n);
                for k in 0..=n {
                    let bl = b.level(n - k);
                    let stride = bl.len();
                    let gal = ga.level_mut(k);
                    for (ca, slot) in gal.iter_mut().enumerate() {
                        let row = &g[ca * stride..(ca + 1) * stride];
                        *slot += row.iter().zip(bl).map(|(x, y)| x * y).sum::<f64>();
                    }
                }
            }
        }
        if let Some(gb) = grad_b {
            for n in 0..=depth {
                let g = grad.level(n);
                for k in 0..=n {
                    let al = a.level(k);
                    let stride = gb.level(n - k).len();
                    let gbl = gb.level_mut(n - k);
                    for (ca, &av) in al.iter().enumerate() {
                        if av == 0.0 {
                            continue;
                        }
                        let row = &g[ca * stride..(ca + 1) * stride];
                        for (slot, &gv) in gbl.iter_mut().zip(row) {
                            *slot += av * gv;
                        }
                    }
                }
            }
        }
    }

    /// Antipode: `(-1)^|w|` times the coefficient of the reversed word. For
    /// group-like elements this is the inverse.
    pub fn antipode(&self) -> Self {
        let mut out = Self::zeros(self.d, self.depth);
        let mut letters = vec![0usize; self.depth];
        for n in 0..=self.depth {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let src = self.level(n);
            for (code, &v) in src.iter().enumerate() {
                let mut c = code;
                for slot in letters[..n].iter_mut().rev() {
                    *slot = c % self.d;
                    c /= self.d;
                }
                let rev = letters[..n]
                    .iter()
                    .rev()
                    .fold(0usize, |acc, &l| acc * self.d + l);
                out.data[self.offsets[n] + rev] = sign * v;
            }
        }
        out
    }

    /// Truncated exponential of an element with zero ε coefficient,
    /// nested as `1 + x(1 + x/2 (1 + x/3 (...)))`.
    pub fn exp(&self) -> Self {
        let mut x = self.clone();
        x.data[0] = 0.0;
        let mut r = Self::identity(self.d, self.depth);
        for k in (1..=self.depth).rev() {
            let mut next = x.mul(&r);
            let inv = 1.0 / k as f64;
            next.data.iter_mut().for_each(|v| *v *= inv);
            next.data[0] += 1.0;
            r = next;
        }
        r
    }

    /// Truncated logarithm of an element with ε coefficient 1.
    pub fn log(&self) -> Self {
        let mut x = self.clone();
        x.data[0] = 0.0;
        let chain = log_chain(&x, self.depth);
        x.mul(&chain[0])
    }
}

/// Nested factors of the log series for `x` (ε coefficient 0) with `terms`
/// terms: `y_terms = 1/terms`, `y_k = 1/k - x ⊗ y_{k+1}`, so that
/// `log(1 + x) = x ⊗ y_1` up to level `terms`. Returns `[y_1, ..., y_terms]`,
/// each truncated at the depth of `x`.
pub(crate) fn log_chain(x: &TruncatedTensor, terms: usize) -> Vec<TruncatedTensor> {
    let top = terms.max(1);
    let mut ys: Vec<TruncatedTensor> = Vec::with_capacity(top);
    let mut y = TruncatedTensor::zeros(x.d, x.depth);
    y.data[0] = 1.0 / top as f64;
    ys.push(y);
    for k in (1..top).rev() {
        let prev = ys.last().unwrap();
        let mut y = x.mul(prev);
        y.data.iter_mut().for_each(|v| *v = -*v);
        y.data[0] += 1.0 / k as f64;
        ys.push(y);
    }
    ys.reverse();
    ys
}
