//! Path signatures over arbitrary word sets.
//!
//! A [`WordSet`] names the coefficients to compute; [`signature_forward`]
//! evaluates them for a batch of piecewise-linear paths with one independent
//! Horner recursion per word, and [`signature_backward`] returns gradients
//! with respect to the path samples. Log-signatures, sliding windows, Chen
//! products and the lead-lag transform are built on the same kernels.

pub mod alloc_track;
pub mod backward;
#[cfg(feature = "cli")]
pub mod cli;
pub mod error;
pub mod logsig;
pub mod sigcore;
pub mod tensor;
#[cfg(feature = "testkit")]
pub mod testkit;
pub mod transforms;
pub mod words;
pub mod wordsets;

pub use backward::{
    signature_backward, signature_backward_with, signature_windows_backward, BackwardOptions,
    PathGradients,
};
pub use error::{Result, SigError};
pub use logsig::{logsignature_backward, logsignature_forward, tensor_log, LogSigPlan};
pub use sigcore::{
    chen_concat, signature_forward, signature_forward_with, signature_inverse, signature_windows,
    signature_windows_with, CoefficientBatch, PathBatch, Precision, WindowSpec,
};
pub use transforms::{lead_lag, time_reverse};
pub use words::{Alphabet, Word};
pub use wordsets::{WordSet, WordSetDescriptor, WordSetKind};
