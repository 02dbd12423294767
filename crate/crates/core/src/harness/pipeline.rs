//! File-level pipeline: WAV -> longest speech segment -> MFCC -> compressed
//! feature vector, plus the training/recognition plumbing around it.

use std::path::Path;

use rayon::prelude::*;

use super::config::{ClassifierKind, FrontendKind, Settings};
use crate::anfis::{train_ensemble, AnfisEnsemble};
use crate::audio::{energy_vad, longest_segment, parse_wav, DatasetManifest, Split, Utterance};
use crate::error::{Error, Result};
use crate::features::{compress_features, CacheEntry, FeatureVector};
use crate::fixed::fixed_mfcc;
use crate::frontend::{mfcc, CepstralMatrix};
use crate::mlp::MlpClassifier;
use crate::model_file::{model_kind, ModelKind};
use crate::vocab::Vocabulary;

pub fn load_utterance(path: &Path, source_id: &str) -> Result<Utterance> {
    let bytes = std::fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
    parse_wav(&bytes, source_id).map_err(|e| e.in_file(path))
}

/// The longest VAD segment of `u`.
pub fn speech_segment(u: &Utterance, settings: &Settings) -> Result<Utterance> {
    let segments = energy_vad(u, &settings.vad)?;
    let seg = longest_segment(&segments).ok_or_else(|| Error::NoSpeech(u.source_id.clone()))?;
    u.slice(seg)
}

pub fn cepstra(speech: &Utterance, settings: &Settings, frontend: FrontendKind) -> Result<CepstralMatrix> {
    match frontend {
        FrontendKind::Float => mfcc(speech, &settings.frontend),
        FrontendKind::Fixed => fixed_mfcc(speech, &settings.frontend, &settings.fixed),
    }
}

pub fn utterance_features(u: &Utterance, settings: &Settings, frontend: FrontendKind) -> Result<FeatureVector> {
    compress_features(&cepstra(&speech_segment(u, settings)?, settings, frontend)?)
}

pub fn file_features(path: &Path, source_id: &str, settings: &Settings, frontend: FrontendKind) -> Result<FeatureVector> {
    let u = load_utterance(path, source_id)?;
    utterance_features(&u, settings, frontend).map_err(|e| match e {
        Error::File { .. } => e,
        other => other.in_file(path),
    })
}

/// Cache lines in manifest order plus the files that failed.
#[derive(Debug)]
pub struct PrepareOutcome {
    pub entries: Vec<CacheEntry>,
    pub failures: Vec<Error>,
}

/// Extracts features for every manifest entry (files in parallel, output in
/// manifest order). Failing files are reported and skipped.
pub fn prepare(manifest: &DatasetManifest, settings: &Settings, frontend: FrontendKind) -> PrepareOutcome {
    let results: Vec<Result<CacheEntry>> = manifest
        .entries
        .par_iter()
        .map(|e| {
            let features = file_features(&manifest.resolve(e), &e.path, settings, frontend)?;
            Ok(CacheEntry {
                source_id: e.path.clone(),
                label: e.label.clone(),
                features,
            })
        })
        .collect();
    let mut out = PrepareOutcome {
        entries: Vec::new(),
        failures: Vec::new(),
    };
    for r in results {
        match r {
            Ok(e) => out.entries.push(e),
            Err(e) => out.failures.push(e),
        }
    }
    out
}

/// One cached utterance joined with its manifest metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub source_id: String,
    pub label: usize,
    pub speaker: String,
    pub split: Split,
    pub features: FeatureVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub vocabulary: Vocabulary,
    pub samples: Vec<Sample>,
}

impl Dataset {
    /// Joins cache lines to manifest entries by path. Entries missing from
    /// the cache (failed extraction) are simply absent.
    pub fn join(cache: &[CacheEntry], manifest: &DatasetManifest) -> Result<Self> {
        let vocabulary = manifest.vocabulary.clone();
        let samples = cache
            .iter()
            .map(|c| {
                let entry = manifest
                    .find(&c.source_id)
                    .ok_or_else(|| Error::Model(format!("cache entry '{}' is not in the manifest", c.source_id)))?;
                if entry.label != c.label {
                    return Err(Error::Model(format!(
                        "cache label '{}' for '{}' disagrees with manifest label '{}'",
                        c.label, c.source_id, entry.label
                    )));
                }
                Ok(Sample {
                    source_id: c.source_id.clone(),
                    label: vocabulary.index_of(&c.label).expect("manifest labels are in the vocabulary"),
                    speaker: entry.speaker_id.clone(),
                    split: entry.split,
                    features: c.features.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { vocabulary, samples })
    }

    pub fn split(&self, split: Split) -> Vec<&Sample> {
        self.samples.iter().filter(|s| s.split == split).collect()
    }

    /// Speaker ids in order of first appearance.
    pub fn speakers(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for s in &self.samples {
            if !out.contains(&s.speaker) {
                out.push(s.speaker.clone());
            }
        }
        out
    }
}

/// A trained classifier of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Anfis(AnfisEnsemble),
    Mlp(MlpClassifier),
}

impl TrainedModel {
    pub fn train(kind: ClassifierKind, samples: &[&Sample], vocabulary: &Vocabulary, settings: &Settings) -> Result<Self> {
        Ok(Self::train_logged(kind, samples, vocabulary, settings)?.0)
    }

    /// Like [`TrainedModel::train`], also returning a short training log:
    /// per-class rule counts and losses (ANFIS) or the loss curve (MLP).
    pub fn train_logged(
        kind: ClassifierKind,
        samples: &[&Sample],
        vocabulary: &Vocabulary,
        settings: &Settings,
    ) -> Result<(Self, String)> {
        let labels: Vec<usize> = samples.iter().map(|s| s.label).collect();
        match kind {
            ClassifierKind::Anfis => {
                let xs: Vec<Vec<f64>> = samples.iter().map(|s| s.features.values().to_vec()).collect();
                let t = train_ensemble(&xs, &labels, vocabulary, &settings.clustering, &settings.anfis)?;
                let mut log = format!("anfis: {} training vectors\n", xs.len());
                for ((label, m), h) in vocabulary.labels().iter().zip(t.ensemble.models()).zip(&t.histories) {
                    log.push_str(&format!(
                        "  {label}: {} rules, mse {:.3e} -> {:.3e} ({} rollbacks)\n",
                        m.num_rules(),
                        h.initial_loss,
                        h.final_loss(),
                        h.rollbacks
                    ));
                }
                Ok((Self::Anfis(t.ensemble), log))
            }
            ClassifierKind::Mlp => {
                let features: Vec<FeatureVector> = samples.iter().map(|s| s.features.clone()).collect();
                let (model, history) = MlpClassifier::train(&features, &labels, vocabulary, &settings.mlp)?;
                let sizes: Vec<String> = model.model.sizes().iter().map(usize::to_string).collect();
                let mut log = format!(
                    "mlp: layers {}, {} epochs, cross-entropy",
                    sizes.join("-"),
                    history.len()
                );
                let marks = [0, history.len() / 4, history.len() / 2, 3 * history.len() / 4, history.len() - 1];
                for i in marks {
                    log.push_str(&format!(" [{}] {:.4}", i + 1, history[i]));
                }
                log.push('\n');
                Ok((Self::Mlp(model), log))
            }
            ClassifierKind::Both => Err(Error::config("train one classifier kind at a time")),
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            Self::Anfis(_) => ClassifierKind::Anfis,
            Self::Mlp(_) => ClassifierKind::Mlp,
        }
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        match self {
            Self::Anfis(e) => e.vocabulary(),
            Self::Mlp(m) => &m.vocabulary,
        }
    }

    /// Class index and per-class scores (ANFIS outputs or MLP probabilities).
    pub fn classify(&self, f: &FeatureVector) -> Result<(usize, Vec<f64>)> {
        match self {
            Self::Anfis(e) => e.classify(f.values()),
            Self::Mlp(m) => m.classify(f),
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            Self::Anfis(e) => e.to_text(),
            Self::Mlp(m) => m.to_text(),
        }
    }

    pub fn from_text(text: &str) -> Result<Self> {
        match model_kind(text)? {
            ModelKind::Anfis => AnfisEnsemble::from_text(text).map(Self::Anfis),
            ModelKind::Mlp => MlpClassifier::from_text(text).map(Self::Mlp),
        }
    }
}

/// Result of recognizing one file.
#[derive(Debug, Clone, PartialEq)]
pub struct Recognition {
    pub label: String,
    pub scores: Vec<f64>,
}

pub fn recognize(model: &TrainedModel, wav: &Path, settings: &Settings, frontend: FrontendKind) -> Result<Recognition> {
    let f = file_features(wav, &wav.to_string_lossy(), settings, frontend)?;
    let (idx, scores) = model.classify(&f)?;
    Ok(Recognition {
        label: model.vocabulary().label(idx).to_string(),
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{encode_wav_i16, parse_manifest, to_pcm16};

    fn write_wav(dir: &Path, name: &str, samples: &[f64]) {
        std::fs::write(dir.join(name), encode_wav_i16(&to_pcm16(samples), 16_000)).unwrap();
    }

    fn burst(freq: f64) -> Vec<f64> {
        (0..16_000)
            .map(|n| {
                if (4_000..12_000).contains(&n) {
                    0.4 * (2.0 * std::f64::consts::PI * freq * n as f64 / 16_000.0).sin()
                } else {
                    0.0
                }
            })
            .collect()
    }

    #[test]
    fn prepare_isolates_failures_and_keeps_order() {
        let dir = tempfile::tempdir().unwrap();
        write_wav(dir.path(), "a.wav", &burst(300.0));
        write_wav(dir.path(), "silent.wav", &vec![0.0; 16_000]);
        write_wav(dir.path(), "b.wav", &burst(900.0));
        let vocab = Vocabulary::commands();
        let text = "a.wav,left,s1,train\nsilent.wav,up,s1,train\nb.wav,right,s2,test\nmissing.wav,down,s2,test\n";
        let manifest = parse_manifest(text, &vocab, dir.path()).unwrap();
        let out = prepare(&manifest, &Settings::default(), FrontendKind::Float);
        let ids: Vec<&str> = out.entries.iter().map(|e| e.source_id.as_str()).collect();
        assert_eq!(ids, ["a.wav", "b.wav"]);
        assert_eq!(out.failures.len(), 2);
        assert!(out.failures.iter().any(|e| matches!(e, Error::File { source, .. } if matches!(**source, Error::NoSpeech(_)))));
        assert!(out.failures.iter().all(|e| e.to_string().contains(".wav")));

        let again = prepare(&manifest, &Settings::default(), FrontendKind::Float);
        assert_eq!(again.entries, out.entries);

        let data = Dataset::join(&out.entries, &manifest).unwrap();
        assert_eq!(data.samples[1].speaker, "s2");
        assert_eq!(data.samples[1].label, 1);
        assert_eq!(data.split(Split::Test).len(), 1);
    }

    #[test]
    fn join_rejects_unknown_entries() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = parse_manifest("a.wav,left,s1,train\n", &Vocabulary::commands(), dir.path()).unwrap();
        let entry = |id: &str, label: &str| CacheEntry {
            source_id: id.into(),
            label: label.into(),
            features: FeatureVector::new(vec![0.0; 13]).unwrap(),
        };
        assert!(Dataset::join(&[entry("b.wav", "left")], &manifest).is_err());
        assert!(Dataset::join(&[entry("a.wav", "up")], &manifest).is_err());
    }

    #[test]
    fn recognize_silence_is_no_speech() {
        let dir = tempfile::tempdir().unwrap();
        write_wav(dir.path(), "silent.wav", &vec![0.0; 16_000]);
        let model = TrainedModel::from_text(&crate::anfis::AnfisEnsemble::new(
            Vocabulary::commands(),
            (0..4).map(|_| crate::anfis::init_from_centers(&[vec![0.0; 13]], &[vec![0.0; 13]], 0.2).unwrap()).collect(),
        )
        .unwrap()
        .to_text())
        .unwrap();
        let err = recognize(&model, &dir.path().join("silent.wav"), &Settings::default(), FrontendKind::Float).unwrap_err();
        assert!(matches!(err, Error::File { source, .. } if matches!(*source, Error::NoSpeech(_))));
    }
}
