//! Two-step swap evaluation: train on one half, test on the other, then
//! exchange the halves and retrain. Results are tallied per step and per
//! speaker.

use std::fmt::Write;

use serde::Serialize;

use super::config::{ClassifierKind, Settings};
use super::pipeline::{Dataset, Sample, TrainedModel};
use crate::anfis::AnfisEnsemble;
use crate::audio::Split;
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::mlp::MlpClassifier;
use crate::vocab::Vocabulary;

pub trait Classifier {
    fn predict(&self, f: &FeatureVector) -> Result<usize>;
}

/// Builds a classifier from training samples only.
pub trait Trainer {
    type Model: Classifier;

    fn name(&self) -> String;

    fn train(&self, samples: &[&Sample], vocabulary: &Vocabulary) -> Result<Self::Model>;
}

impl Classifier for TrainedModel {
    fn predict(&self, f: &FeatureVector) -> Result<usize> {
        Ok(self.classify(f)?.0)
    }
}

impl Classifier for AnfisEnsemble {
    fn predict(&self, f: &FeatureVector) -> Result<usize> {
        Ok(self.classify(f.values())?.0)
    }
}

impl Classifier for MlpClassifier {
    fn predict(&self, f: &FeatureVector) -> Result<usize> {
        Ok(self.classify(f)?.0)
    }
}

/// Trains one of the built-in classifiers with the given settings.
pub struct ClassifierTrainer<'a> {
    pub kind: ClassifierKind,
    pub settings: &'a Settings,
}

impl Trainer for ClassifierTrainer<'_> {
    type Model = TrainedModel;

    fn name(&self) -> String {
        self.kind.as_str().to_string()
    }

    fn train(&self, samples: &[&Sample], vocabulary: &Vocabulary) -> Result<TrainedModel> {
        TrainedModel::train(self.kind, samples, vocabulary, self.settings)
    }
}

/// How the data is halved for the two steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// Manifest train/test splits; both speakers appear in both halves and
    /// are tallied separately.
    SplitSwap,
    /// One speaker per half (exactly two speakers required).
    SpeakerHoldout,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::SplitSwap => "split-swap",
            Self::SpeakerHoldout => "speaker-holdout",
        }
    }
}

impl std::str::FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "split-swap" => Ok(Self::SplitSwap),
            "speaker-holdout" => Ok(Self::SpeakerHoldout),
            _ => Err(Error::config(format!("protocol must be split-swap or speaker-holdout, got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub correct: usize,
    pub total: usize,
    /// `correct / total`; absent for an empty cell.
    pub accuracy: Option<f64>,
}

impl Cell {
    fn from_confusion(m: &[Vec<usize>]) -> Self {
        let correct = (0..m.len()).map(|i| m[i][i]).sum();
        let total = m.iter().flatten().sum();
        Self {
            correct,
            total,
            accuracy: (total > 0).then(|| correct as f64 / total as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeakerResult {
    pub speaker: String,
    pub cell: Cell,
    /// Rows are true classes, columns predicted classes.
    pub confusion: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepResult {
    pub step: usize,
    pub trained_on: String,
    pub tested_on: String,
    pub overall: Cell,
    pub confusion: Vec<Vec<usize>>,
    pub speakers: Vec<SpeakerResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub classifier: String,
    pub protocol: String,
    pub labels: Vec<String>,
    pub steps: Vec<StepResult>,
}

impl EvaluationReport {
    /// Smallest accuracy over all non-empty (step, speaker) cells.
    pub fn min_cell_accuracy(&self) -> f64 {
        self.steps
            .iter()
            .flat_map(|s| &s.speakers)
            .filter_map(|s| s.cell.accuracy)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Report plus the model trained in each step.
pub struct TwoStep<M> {
    pub report: EvaluationReport,
    pub models: Vec<M>,
}

fn halves(data: &Dataset, protocol: Protocol) -> Result<[(String, Vec<&Sample>); 2]> {
    match protocol {
        Protocol::SplitSwap => Ok([
            (Split::Train.to_string(), data.split(Split::Train)),
            (Split::Test.to_string(), data.split(Split::Test)),
        ]),
        Protocol::SpeakerHoldout => {
            let speakers = data.speakers();
            if speakers.len() != 2 {
                return Err(Error::config(format!(
                    "speaker hold-out needs exactly 2 speakers, found {}",
                    speakers.len()
                )));
            }
            let of = |spk: &str| data.samples.iter().filter(|s| s.speaker == spk).collect();
            Ok([
                (format!("speaker {}", speakers[0]), of(&speakers[0])),
                (format!("speaker {}", speakers[1]), of(&speakers[1])),
            ])
        }
    }
}

/// Step 1 trains on the first half and tests on the second; step 2 swaps.
/// The trainer only ever sees the training half of each step.
pub fn evaluate_two_step<T: Trainer>(data: &Dataset, trainer: &T, protocol: Protocol) -> Result<TwoStep<T::Model>> {
    let [a, b] = halves(data, protocol)?;
    for (name, half) in [&a, &b] {
        if half.is_empty() {
            return Err(Error::Empty(format!("evaluation half '{name}' has no samples")));
        }
    }
    let speakers = data.speakers();
    let n = data.vocabulary.len();
    let mut steps = Vec::new();
    let mut models = Vec::new();
    for (step, (train, test)) in [(&a, &b), (&b, &a)].into_iter().enumerate() {
        let model = trainer.train(&train.1, &data.vocabulary)?;
        let mut overall = vec![vec![0; n]; n];
        let mut per_speaker = vec![vec![vec![0; n]; n]; speakers.len()];
        for s in &test.1 {
            let predicted = model.predict(&s.features)?;
            overall[s.label][predicted] += 1;
            let k = speakers.iter().position(|p| *p == s.speaker).expect("known speaker");
            per_speaker[k][s.label][predicted] += 1;
        }
        steps.push(StepResult {
            step: step + 1,
            trained_on: train.0.clone(),
            tested_on: test.0.clone(),
            overall: Cell::from_confusion(&overall),
            confusion: overall,
            speakers: speakers
                .iter()
                .zip(per_speaker)
                .map(|(spk, m)| SpeakerResult {
                    speaker: spk.clone(),
                    cell: Cell::from_confusion(&m),
                    confusion: m,
                })
                .collect(),
        });
        models.push(model);
    }
    Ok(TwoStep {
        report: EvaluationReport {
            classifier: trainer.name(),
            protocol: protocol.as_str().into(),
            labels: data.vocabulary.labels().to_vec(),
            steps,
        },
        models,
    })
}

fn pct(c: &Cell) -> String {
    c.accuracy.map_or_else(|| "-".into(), |a| format!("{:.1}%", 100.0 * a))
}

fn render_confusion(out: &mut String, labels: &[String], m: &[Vec<usize>]) {
    let w = labels.iter().map(String::len).max().unwrap_or(1).max(5);
    let _ = write!(out, "  {:w$}", "");
    for l in labels {
        let _ = write!(out, " {l:>w$}");
    }
    out.push('\n');
    for (l, row) in labels.iter().zip(m) {
        let _ = write!(out, "  {l:w$}");
        for v in row {
            let _ = write!(out, " {v:>w$}");
        }
        out.push('\n');
    }
}

/// Aligned text: an accuracy table (speakers x steps) per classifier, then
/// the confusion matrices.
pub fn render_text(reports: &[EvaluationReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let _ = writeln!(out, "classifier {} ({})", r.classifier, r.protocol);
        let _ = write!(out, "  {:12}", "");
        for s in &r.steps {
            let _ = write!(out, " {:>10}", format!("step {}", s.step));
        }
        out.push('\n');
        let speakers: Vec<&str> = r.steps[0].speakers.iter().map(|s| s.speaker.as_str()).collect();
        for (k, spk) in speakers.iter().enumerate() {
            let _ = write!(out, "  {:12}", format!("speaker {spk}"));
            for s in &r.steps {
                let _ = write!(out, " {:>10}", pct(&s.speakers[k].cell));
            }
            out.push('\n');
        }
        let _ = write!(out, "  {:12}", "overall");
        for s in &r.steps {
            let _ = write!(out, " {:>10}", pct(&s.overall));
        }
        out.push_str("\n\n");
        for s in &r.steps {
            let _ = writeln!(
                out,
                "  step {}: trained on {}, tested on {} ({}/{} correct); rows true, columns predicted",
                s.step, s.trained_on, s.tested_on, s.overall.correct, s.overall.total
            );
            render_confusion(&mut out, &r.labels, &s.confusion);
            out.push('\n');
        }
    }
    out
}

pub fn render_json(reports: &[EvaluationReport]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports serialize");
    s.push('\n');
    s
}
