//! Isolated-word command recognition: MFCC features (floating- and
//! fixed-point), per-utterance feature compression, and two classifiers,
//! a one-vs-rest ANFIS ensemble and an MLP baseline.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anfis;
pub mod audio;
pub mod error;
pub mod features;
pub mod fixed;
pub mod frontend;
pub mod harness;
pub mod mlp;
pub mod model_file;
pub mod vocab;

pub use error::{Error, Result};
pub use vocab::Vocabulary;
