//! Orchestration behind the command-line tool: settings, corpus synthesis,
//! feature preparation, training, evaluation and precision comparison.

pub mod config;
pub mod eval;
pub mod pipeline;
pub mod precision;
pub mod synth;

pub use config::{ClassifierKind, FrontendKind, Settings};
pub use eval::{evaluate_two_step, render_json, render_text, ClassifierTrainer, EvaluationReport, Protocol, TwoStep};
pub use pipeline::{prepare, recognize, Dataset, PrepareOutcome, Recognition, Sample, TrainedModel};
pub use precision::{compare_frontends, compare_precision, PrecisionReport};
pub use synth::{synth_corpus, SynthConfig, MANIFEST_NAME};
