//! C ABI for sigkit.
//!
//! Every function returns a [`SigkitStatus`]; on failure the message is
//! available from [`sigkit_last_error_message`] on the same thread. Arrays are
//! row-major `f64`: paths are `batch x samples x d`, coefficients are
//! `batch x width`. Callers own all buffers; the library never retains them.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::Arc;

use sigkit::{
    logsignature_backward, logsignature_forward, signature_backward, signature_forward,
    signature_windows, LogSigPlan, PathBatch, SigError, WindowSpec, WordSet, WordSetDescriptor,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigkitStatus {
    Ok = 0,
    NullPointer = 1,
    Parse = 2,
    InvalidLetter = 3,
    Capacity = 4,
    Shape = 5,
    Domain = 6,
    Window = 7,
    Unsupported = 8,
    BufferSize = 9,
    Panic = 10,
}

/// Opaque word-set handle.
pub struct SigkitWordSet {
    inner: Arc<WordSet>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &SigError) -> SigkitStatus {
    match e {
        SigError::Parse(_) => SigkitStatus::Parse,
        SigError::InvalidLetter { .. } => SigkitStatus::InvalidLetter,
        SigError::Capacity(_) => SigkitStatus::Capacity,
        SigError::CorruptWord { .. } | SigError::Range { .. } | SigError::Domain(_) => {
            SigkitStatus::Domain
        }
        SigError::Shape(_) => SigkitStatus::Shape,
        SigError::Window { .. } => SigkitStatus::Window,
        SigError::UnsupportedWordSet(_) => SigkitStatus::Unsupported,
    }
}

struct Fail(SigkitStatus, String);

impl From<SigError> for Fail {
    fn from(e: SigError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SigkitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SigkitStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SigkitStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(SigkitStatus::NullPointer, format!("{what} is null"))
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, needed: usize) -> Result<&'a mut [f64], Fail> {
    if len != needed {
        return Err(Fail(
            SigkitStatus::BufferSize,
            format!("output buffer holds {len} values, {needed} required"),
        ));
    }
    if needed == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null("output buffer"));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn wordset<'a>(ws: *const SigkitWordSet) -> Result<&'a Arc<WordSet>, Fail> {
    ws.as_ref()
        .map(|w| &w.inner)
        .ok_or_else(|| null("word set"))
}

unsafe fn paths_from(
    data: *const f64,
    batch: usize,
    samples: usize,
    d: usize,
) -> Result<PathBatch, Fail> {
    let len = batch
        .checked_mul(samples)
        .and_then(|v| v.checked_mul(d))
        .ok_or_else(|| Fail(SigkitStatus::Capacity, "path dimensions overflow".into()))?;
    let values = input(data, len, "paths")?;
    Ok(PathBatch::new(batch, samples, d, values.to_vec())?)
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn sigkit_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a word set from a JSON descriptor. `data_dim` fills in a missing
/// `"d"`; pass 0 when the descriptor names it.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sigkit_wordset_from_json(
    json: *const c_char,
    data_dim: u32,
    out: *mut *mut SigkitWordSet,
) -> SigkitStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Fail(SigkitStatus::Parse, "descriptor is not UTF-8".into()))?;
        let desc = WordSetDescriptor::from_json(text)?;
        let dim = (data_dim > 0).then_some(data_dim);
        let ws = WordSet::from_descriptor(&desc, dim)?;
        *out = Box::into_raw(Box::new(SigkitWordSet {
            inner: Arc::new(ws),
        }));
        Ok(())
    })
}

/// Number of output columns, including the ε column when present.
/// Returns 0 for a null handle.
///
/// # Safety
/// `ws` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sigkit_wordset_len(ws: *const SigkitWordSet) -> usize {
    ws.as_ref().map_or(0, |w| w.inner.output_width())
}

/// Alphabet size of the word set, or 0 for a null handle.
///
/// # Safety
/// `ws` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sigkit_wordset_dim(ws: *const SigkitWordSet) -> u32 {
    ws.as_ref().map_or(0, |w| w.inner.d())
}

/// Writes the NUL-terminated label of column `index` (such as `"1.2"`) into
/// `buf`, which must hold `buf_len` bytes.
///
/// # Safety
/// `ws` must be a live handle and `buf` valid for `buf_len` bytes.
#[no_mangle]
pub unsafe extern "C" fn sigkit_wordset_label(
    ws: *const SigkitWordSet,
    index: usize,
    buf: *mut c_char,
    buf_len: usize,
) -> SigkitStatus {
    guard(|| {
        let ws = wordset(ws)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let labels = ws.labels();
        let label = labels.get(index).ok_or_else(|| {
            Fail(
                SigkitStatus::Domain,
                format!("column {index} out of range for width {}", labels.len()),
            )
        })?;
        if label.len() + 1 > buf_len {
            return Err(Fail(
                SigkitStatus::BufferSize,
                format!("label needs {} bytes", label.len() + 1),
            ));
        }
        ptr::copy_nonoverlapping(label.as_ptr() as *const c_char, buf, label.len());
        *buf.add(label.len()) = 0;
        Ok(())
    })
}

/// Releases a word set. Null is ignored.
///
/// # Safety
/// `ws` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sigkit_wordset_free(ws: *mut SigkitWordSet) {
    if !ws.is_null() {
        drop(Box::from_raw(ws));
    }
}

/// Signatures of `batch` paths into `out` (`batch x width`).
///
/// # Safety
/// `paths` must hold `batch*samples*d` values and `out` `out_len` values.
#[no_mangle]
pub unsafe extern "C" fn sigkit_signature(
    ws: *const SigkitWordSet,
    paths: *const f64,
    batch: usize,
    samples: usize,
    d: usize,
    out: *mut f64,
    out_len: usize,
) -> SigkitStatus {
    guard(|| {
        let ws = wordset(ws)?;
        let p = paths_from(paths, batch, samples, d)?;
        let sig = signature_forward(&p, ws)?;
        output(out, out_len, sig.values().len())?.copy_from_slice(sig.values());
        Ok(())
    })
}

/// Windowed signatures. `windows` holds `num_windows` pairs `(l, r)` of
/// 0-based sample indices; `out` is `num_windows x batch x width`.
///
/// # Safety
/// Buffers must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn sigkit_signature_windows(
    ws: *const SigkitWordSet,
    paths: *const f64,
    batch: usize,
    samples: usize,
    d: usize,
    windows: *const usize,
    num_windows: usize,
    out: *mut f64,
    out_len: usize,
) -> SigkitStatus {
    guard(|| {
        let ws = wordset(ws)?;
        let p = paths_from(paths, batch, samples, d)?;
        let flat = input(windows, 2 * num_windows, "windows")?;
        let spec = WindowSpec::new(flat.chunks_exact(2).map(|c| (c[0], c[1])).collect());
        let outs = signature_windows(&p, ws, &spec)?;
        let per = batch * ws.output_width();
        let dst = output(out, out_len, per * outs.len())?;
        for (chunk, o) in dst.chunks_exact_mut(per.max(1)).zip(&outs) {
            chunk.copy_from_slice(o.values());
        }
        Ok(())
    })
}

/// Gradients of `sum upstream * signature` with respect to the path samples;
/// `upstream` is `batch x width`, `out` is `batch x samples x d`.
///
/// # Safety
/// Buffers must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn sigkit_signature_backward(
    ws: *const SigkitWordSet,
    paths: *const f64,
    batch: usize,
    samples: usize,
    d: usize,
    upstream: *const f64,
    upstream_len: usize,
    out: *mut f64,
    out_len: usize,
) -> SigkitStatus {
    guard(|| {
        let ws = wordset(ws)?;
        let p = paths_from(paths, batch, samples, d)?;
        let up = input(upstream, upstream_len, "upstream")?;
        let g = signature_backward(&p, ws, up)?;
        output(out, out_len, g.values().len())?.copy_from_slice(g.values());
        Ok(())
    })
}

/// Number of Lyndon words of length `1..=depth` over `d` letters.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sigkit_logsignature_width(
    d: u32,
    depth: u32,
    out: *mut usize,
) -> SigkitStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = LogSigPlan::new(d, depth)?.lyndon().len();
        Ok(())
    })
}

/// Log-signatures at Lyndon words into `out` (`batch x width`).
///
/// # Safety
/// Buffers must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn sigkit_logsignature(
    paths: *const f64,
    batch: usize,
    samples: usize,
    d: usize,
    depth: u32,
    out: *mut f64,
    out_len: usize,
) -> SigkitStatus {
    guard(|| {
        let p = paths_from(paths, batch, samples, d)?;
        let ls = logsignature_forward(&p, d as u32, depth)?;
        output(out, out_len, ls.values().len())?.copy_from_slice(ls.values());
        Ok(())
    })
}

/// Path gradients of `sum upstream * logsignature`.
///
/// # Safety
/// Buffers must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn sigkit_logsignature_backward(
    paths: *const f64,
    batch: usize,
    samples: usize,
    d: usize,
    depth: u32,
    upstream: *const f64,
    upstream_len: usize,
    out: *mut f64,
    out_len: usize,
) -> SigkitStatus {
    guard(|| {
        let p = paths_from(paths, batch, samples, d)?;
        let up = input(upstream, upstream_len, "upstream")?;
        let g = logsignature_backward(&p, d as u32, depth, up)?;
        output(out, out_len, g.values().len())?.copy_from_slice(g.values());
        Ok(())
    })
}
