//! Lead-lag and time-reversal path transforms.

use crate::error::{Result, SigError};
use crate::sigcore::PathBatch;

/// Lead-lag embedding in `2d` channels (lag block `1..=d`, then lead block
/// `d+1..=2d`) with `2M + 1` points:
/// `(X_k, X_k)`, `(X_k, X_{k+1})`, ..., `(X_M, X_M)`.
pub fn lead_lag(paths: &PathBatch) -> Result<PathBatch> {
    let m = paths.segments();
    if m == 0 {
        return Err(SigError::Domain(
            "lead-lag transform needs at least one segment".into(),
        ));
    }
    let d = paths.d();
    let points = 2 * m + 1;
    let mut data = Vec::with_capacity(paths.batch() * points * 2 * d);
    for b in 0..paths.batch() {
        for k in 0..m {
            let cur = paths.sample(b, k);
            let next = paths.sample(b, k + 1);
            data.extend_from_slice(cur);
            data.extend_from_slice(cur);
            data.extend_from_slice(cur);
            data.extend_from_slice(next);
        }
        let last = paths.sample(b, m);
        data.extend_from_slice(last);
        data.extend_from_slice(last);
    }
    PathBatch::new_propagating_nan(paths.batch(), points, 2 * d, data)
}

/// Reverses the sample order of every path.
pub fn time_reverse(paths: &PathBatch) -> PathBatch {
    let d = paths.d();
    let mut data = Vec::with_capacity(paths.as_slice().len());
    for b in 0..paths.batch() {
        for j in (0..paths.samples()).rev() {
            data.extend_from_slice(paths.sample(b, j));
        }
    }
    PathBatch::new_propagating_nan(paths.batch(), paths.samples(), d, data)
        .expect("reversal preserves shape")
}
