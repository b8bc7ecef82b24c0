//! Forward signature kernels over arbitrary word sets.
//!
//! One work unit is a `(path, word)` pair (or `(path, window, word)` for
//! windowed signatures). Each unit keeps the `|w| + 1` running values of the
//! prefixes of its word and advances them one linear segment at a time with
//! the Horner form of Chen's relation, so words of a custom set need not have
//! their prefixes in the set.

use std::ops::{Add, Mul};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Result, SigError};
use crate::tensor::TruncatedTensor;
use crate::wordsets::WordSet;

/// `B` paths of `M + 1` samples in `R^d`, stored row-major as `[path][sample][channel]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBatch {
    batch: usize,
    samples: usize,
    d: usize,
    data: Vec<f64>,
}

impl PathBatch {
    /// Rejects non-finite samples.
    pub fn new(batch: usize, samples: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        let p = Self::new_propagating_nan(batch, samples, d, data)?;
        if let Some(pos) = p.data.iter().position(|v| !v.is_finite()) {
            let per_path = samples * d;
            return Err(SigError::Domain(format!(
                "non-finite sample at path {}, sample {}, channel {}",
                pos / per_path,
                (pos % per_path) / d,
                pos % d + 1
            )));
        }
        Ok(p)
    }

    /// Like [`PathBatch::new`] but lets NaN and infinities flow through the kernels.
    pub fn new_propagating_nan(
        batch: usize,
        samples: usize,
        d: usize,
        data: Vec<f64>,
    ) -> Result<Self> {
        if samples == 0 {
            return Err(SigError::Shape("a path needs at least one sample".into()));
        }
        if d == 0 {
            return Err(SigError::Shape("a path needs at least one channel".into()));
        }
        let expected = batch
            .checked_mul(samples)
            .and_then(|v| v.checked_mul(d))
            .ok_or_else(|| SigError::Capacity("path batch size overflows".into()))?;
        if data.len() != expected {
            return Err(SigError::Shape(format!(
                "expected {batch}x{samples}x{d} = {expected} values, got {}",
                data.len()
            )));
        }
        Ok(Self {
            batch,
            samples,
            d,
            data,
        })
    }

    /// Builds a batch from per-path sample rows; all paths must share a shape.
    pub fn from_paths(paths: &[Vec<Vec<f64>>]) -> Result<Self> {
        let samples = paths.first().map_or(1, |p| p.len());
        let d = paths.first().and_then(|p| p.first()).map_or(1, |s| s.len());
        let mut data = Vec::with_capacity(paths.len() * samples * d);
        for (b, p) in paths.iter().enumerate() {
            if p.len() != samples {
                return Err(SigError::Shape(format!(
                    "path {b} has {} samples, expected {samples}",
                    p.len()
                )));
            }
            for (j, s) in p.iter().enumerate() {
                if s.len() != d {
                    return Err(SigError::Shape(format!(
                        "path {b} sample {j} has {} channels, expected {d}",
                        s.len()
                    )));
                }
                data.extend_from_slice(s);
            }
        }
        Self::new(paths.len(), samples, d, data)
    }

    #[inline]
    pub fn batch(&self) -> usize {
        self.batch
    }

    /// `M + 1`.
    #[inline]
    pub fn samples(&self) -> usize {
        self.samples
    }

    /// `M`.
    #[inline]
    pub fn segments(&self) -> usize {
        self.samples - 1
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Samples of path `b`, flattened `[sample][channel]`.
    #[inline]
    pub fn path(&self, b: usize) -> &[f64] {
        let n = self.samples * self.d;
        &self.data[b * n..(b + 1) * n]
    }

    #[inline]
    pub fn sample(&self, b: usize, j: usize) -> &[f64] {
        &self.path(b)[j * self.d..(j + 1) * self.d]
    }

    /// `X_j - X_{j-1}` for `j` in `1..=M`.
    pub fn increment(&self, b: usize, j: usize) -> Vec<f64> {
        let cur = self.sample(b, j);
        let prev = self.sample(b, j - 1);
        cur.iter().zip(prev).map(|(c, p)| c - p).collect()
    }

    /// Samples `lo..=hi` of every path as a new batch.
    pub fn slice_samples(&self, lo: usize, hi: usize) -> Result<Self> {
        if lo > hi || hi >= self.samples {
            return Err(SigError::Shape(format!(
                "sample range {lo}..={hi} out of bounds for {} samples",
                self.samples
            )));
        }
        let mut data = Vec::with_capacity(self.batch * (hi - lo + 1) * self.d);
        for b in 0..self.batch {
            data.extend_from_slice(&self.path(b)[lo * self.d..(hi + 1) * self.d]);
        }
        Ok(Self {
            batch: self.batch,
            samples: hi - lo + 1,
            d: self.d,
            data,
        })
    }
}

/// Signature (or log-signature) coefficients of a batch, one row per path,
/// columns in the order of the owning word set.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientBatch {
    wordset: Arc<WordSet>,
    batch: usize,
    values: Vec<f64>,
}

impl CoefficientBatch {
    pub fn new(wordset: Arc<WordSet>, batch: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != batch * wordset.output_width() {
            return Err(SigError::Shape(format!(
                "expected {batch}x{} coefficients, got {}",
                wordset.output_width(),
                values.len()
            )));
        }
        Ok(Self {
            wordset,
            batch,
            values,
        })
    }

    pub fn wordset(&self) -> &Arc<WordSet> {
        &self.wordset
    }

    #[inline]
    pub fn batch(&self) -> usize {
        self.batch
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.wordset.output_width()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn row(&self, b: usize) -> &[f64] {
        let w = self.width();
        &self.values[b * w..(b + 1) * w]
    }

    /// Coefficient of a word given by 0-based letters, if it is in the set.
    pub fn get(&self, b: usize, letters: &[u32]) -> Option<f64> {
        if letters.is_empty() {
            return Some(1.0);
        }
        self.wordset
            .index_of_letters(letters)
            .map(|i| self.row(b)[i + self.wordset.column_offset()])
    }
}

/// Index pairs `(l, r)` into the sample axis; window `i` covers samples `l..=r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSpec {
    pairs: Vec<(usize, usize)>,
}

impl WindowSpec {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        Self { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Checks `0 <= l < r <= M` for every pair.
    pub fn validate(&self, samples: usize) -> Result<()> {
        for (index, &(left, right)) in self.pairs.iter().enumerate() {
            if left >= right || right >= samples {
                return Err(SigError::Window {
                    index,
                    left,
                    right,
                    samples,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    Double,
    Single,
}

pub(crate) trait Real: Copy + Add<Output = Self> + Mul<Output = Self> + Send + Sync {
    const ZERO: Self;
    const ONE: Self;
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Real for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}

impl Real for f32 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

/// Tensor-exponential coefficient of one linear segment: `prod_r delta[i_r] / n!`.
pub fn segment_exp_coeff(delta: &[f64], letters: &[u32]) -> f64 {
    letters
        .iter()
        .enumerate()
        .fold(1.0, |acc, (k, &l)| acc * delta[l as usize] / (k + 1) as f64)
}

/// One Chen/Horner update of the coefficient of `letters` (length `n`),
/// given the previous values `prev[k]` of its prefixes of length `k = 0..=n`.
pub fn horner_update(prev: &[f64], delta: &[f64], letters: &[u32]) -> f64 {
    let n = letters.len();
    debug_assert_eq!(prev.len(), n + 1);
    let mut h = 0.0;
    for k in 0..n {
        h = delta[letters[k] as usize] / (n - k) as f64 * (prev[k] + h);
    }
    prev[n] + h
}

/// `1/m` for `m = 0..=len`, index 0 unused.
pub(crate) fn reciprocals<T: Real>(len: usize) -> Vec<T> {
    (0..=len)
        .map(|m| {
            if m == 0 {
                T::ZERO
            } else {
                T::from_f64(1.0 / m as f64)
            }
        })
        .collect()
}

/// Advances all prefix values `state[0..=n]` across one segment whose
/// increments along the word's letters are `dl`. Longest prefix first so
/// shorter prefixes still hold their previous values.
#[inline]
pub(crate) fn advance_prefixes<T: Real>(state: &mut [T], dl: &[T], recip: &[T]) {
    let n = dl.len();
    for k in (1..=n).rev() {
        let mut h = T::ZERO;
        for i in 0..k {
            h = dl[i] * recip[k - i] * (state[i] + h);
        }
        state[k] = state[k] + h;
    }
}

/// Runs the forward recursion for one word over samples `lo..=hi` of a flattened path.
/// On return `state[k]` holds the coefficient of the length-`k` prefix.
#[inline]
#[allow(clippy::too_many_arguments)]
pub(crate) fn forward_word<T: Real>(
    path: &[f64],
    d: usize,
    lo: usize,
    hi: usize,
    letters: &[u32],
    recip: &[T],
    state: &mut [T],
    dl: &mut [T],
) {
    let n = letters.len();
    state[0] = T::ONE;
    state[1..=n].iter_mut().for_each(|v| *v = T::ZERO);
    for j in lo + 1..=hi {
        let cur = &path[j * d..(j + 1) * d];
        let prev = &path[(j - 1) * d..j * d];
        let mut moving = false;
        for (slot, &l) in dl.iter_mut().zip(letters) {
            let inc = cur[l as usize] - prev[l as usize];
            moving |= inc != 0.0;
            *slot = T::from_f64(inc);
        }
        // A zero increment leaves every coefficient unchanged, bit for bit.
        if moving {
            advance_prefixes(state, &dl[..n], recip);
        }
    }
}

struct UnitScratch<T> {
    letters: Vec<u32>,
    state: Vec<T>,
    dl: Vec<T>,
}

impl<T: Real> UnitScratch<T> {
    fn new(max_len: usize) -> Self {
        Self {
            letters: vec![0; max_len],
            state: vec![T::ZERO; max_len + 1],
            dl: vec![T::ZERO; max_len],
        }
    }
}

fn check_dims(paths: &PathBatch, ws: &WordSet) -> Result<()> {
    if paths.d() != ws.d() as usize {
        return Err(SigError::Shape(format!(
            "paths have {} channels, word set is over {} letters",
            paths.d(),
            ws.d()
        )));
    }
    Ok(())
}

fn fill_row<T: Real>(
    paths: &PathBatch,
    ws: &WordSet,
    b: usize,
    lo: usize,
    hi: usize,
    row: &mut [f64],
    recip: &[T],
) {
    let d = paths.d();
    let path = paths.path(b);
    let off = ws.column_offset();
    if off == 1 {
        row[0] = 1.0;
    }
    let max_len = ws.max_len() as usize;
    row[off..].par_iter_mut().enumerate().for_each_init(
        || UnitScratch::<T>::new(max_len),
        |s, (i, out)| {
            let packed = ws.packed(i);
            let n = packed.len() as usize;
            packed.unpack_into(&mut s.letters[..n]);
            forward_word(
                path,
                d,
                lo,
                hi,
                &s.letters[..n],
                recip,
                &mut s.state,
                &mut s.dl,
            );
            *out = s.state[n].to_f64();
        },
    );
}

/// Signature coefficients `S_{0,T}(X, w)` of the piecewise-linear interpolation
/// of each path, for every word `w` of `ws`, in double precision.
pub fn signature_forward(paths: &PathBatch, ws: &Arc<WordSet>) -> Result<CoefficientBatch> {
    signature_forward_with(paths, ws, Precision::Double)
}

pub fn signature_forward_with(
    paths: &PathBatch,
    ws: &Arc<WordSet>,
    precision: Precision,
) -> Result<CoefficientBatch> {
    check_dims(paths, ws)?;
    let width = ws.output_width();
    let mut values = vec![0.0; paths.batch() * width];
    let hi = paths.segments();
    let max_len = ws.max_len() as usize;
    match precision {
        Precision::Double => {
            let recip = reciprocals::<f64>(max_len);
            values
                .par_chunks_mut(width.max(1))
                .enumerate()
                .for_each(|(b, row)| fill_row(paths, ws, b, 0, hi, row, &recip));
        }
        Precision::Single => {
            let recip = reciprocals::<f32>(max_len);
            values
                .par_chunks_mut(width.max(1))
                .enumerate()
                .for_each(|(b, row)| fill_row(paths, ws, b, 0, hi, row, &recip));
        }
    }
    CoefficientBatch::new(Arc::clone(ws), paths.batch(), values)
}

/// Signatures over each window `(l, r)` of `win`, recomputed from the raw
/// samples `l..=r`. Output `i` corresponds to window `i`.
pub fn signature_windows(
    paths: &PathBatch,
    ws: &Arc<WordSet>,
    win: &WindowSpec,
) -> Result<Vec<CoefficientBatch>> {
    signature_windows_with(paths, ws, win, Precision::Double)
}

pub fn signature_windows_with(
    paths: &PathBatch,
    ws: &Arc<WordSet>,
    win: &WindowSpec,
    precision: Precision,
) -> Result<Vec<CoefficientBatch>> {
    check_dims(paths, ws)?;
    win.validate(paths.samples())?;
    let width = ws.output_width();
    let batch = paths.batch();
    let per_window = batch * width;
    let mut values = vec![0.0; win.len() * per_window];
    let max_len = ws.max_len() as usize;
    if per_window > 0 {
        macro_rules! run {
            ($t:ty) => {{
                let recip = reciprocals::<$t>(max_len);
                values
                    .par_chunks_mut(width)
                    .enumerate()
                    .for_each(|(idx, row)| {
                        let (k, b) = (idx / batch, idx % batch);
                        let (lo, hi) = win.pairs()[k];
                        fill_row(paths, ws, b, lo, hi, row, &recip);
                    });
            }};
        }
        match precision {
            Precision::Double => run!(f64),
            Precision::Single => run!(f32),
        }
    }
    let mut out = Vec::with_capacity(win.len());
    let mut rest = values;
    for _ in 0..win.len() {
        let tail = rest.split_off(per_window);
        out.push(CoefficientBatch::new(Arc::clone(ws), batch, rest)?);
        rest = tail;
    }
    Ok(out)
}

fn same_wordset(a: &CoefficientBatch, b: &CoefficientBatch) -> Result<()> {
    if !(Arc::ptr_eq(a.wordset(), b.wordset()) || a.wordset() == b.wordset()) {
        return Err(SigError::Shape(
            "coefficient batches use different word sets".into(),
        ));
    }
    if a.batch() != b.batch() {
        return Err(SigError::Shape(format!(
            "batch sizes differ: {} vs {}",
            a.batch(),
            b.batch()
        )));
    }
    Ok(())
}

fn map_rows(
    a: &CoefficientBatch,
    f: impl Fn(usize, TruncatedTensor) -> Result<TruncatedTensor> + Sync,
) -> Result<CoefficientBatch> {
    let ws = a.wordset();
    let width = ws.output_width();
    let mut values = vec![0.0; a.values().len()];
    values
        .par_chunks_mut(width)
        .enumerate()
        .try_for_each(|(b, row)| -> Result<()> {
            let t = TruncatedTensor::from_row(ws, a.row(b), 1.0)?;
            f(b, t)?.write_row(ws, row);
            Ok(())
        })?;
    CoefficientBatch::new(Arc::clone(ws), a.batch(), values)
}

/// Chen product `a ⊗ b` per path, over a fully truncated word set.
pub fn chen_concat(a: &CoefficientBatch, b: &CoefficientBatch) -> Result<CoefficientBatch> {
    same_wordset(a, b)?;
    let ws = a.wordset();
    ws.full_truncation_depth().ok_or_else(|| {
        SigError::UnsupportedWordSet("chen_concat requires a fully truncated word set".into())
    })?;
    map_rows(a, |i, ta| {
        let tb = TruncatedTensor::from_row(ws, b.row(i), 1.0)?;
        Ok(ta.mul(&tb))
    })
}

/// Inverse of group-like signatures: the signature of the time-reversed path.
pub fn signature_inverse(a: &CoefficientBatch) -> Result<CoefficientBatch> {
    a.wordset().full_truncation_depth().ok_or_else(|| {
        SigError::UnsupportedWordSet("signature_inverse requires a fully truncated word set".into())
    })?;
    map_rows(a, |_, t| Ok(t.antipode()))
}
