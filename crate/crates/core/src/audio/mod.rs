//! Audio input: WAV decoding, energy-based endpointing and dataset manifests.

mod manifest;
mod vad;
mod wav;

pub use manifest::{load_manifest, parse_manifest, DatasetManifest, ManifestEntry, Split};
pub use vad::{energy_vad, longest_segment, Segment, VadConfig};
pub use wav::{encode_wav_i16, parse_wav, to_pcm16};

use crate::error::{Error, Result};

/// A mono recording of one spoken command.
#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    samples: Vec<f64>,
    sample_rate_hz: u32,
    pub label: Option<String>,
    pub source_id: String,
}

impl Utterance {
    /// Builds an utterance, checking that it is non-empty, has a positive
    /// rate and that every sample lies in `[-1, 1)`.
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32, source_id: impl Into<String>) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::config("sample rate must be positive"));
        }
        if samples.is_empty() {
            return Err(Error::Empty("utterance has no samples".into()));
        }
        if let Some(i) = samples.iter().position(|s| !(-1.0..1.0).contains(s)) {
            return Err(Error::config(format!(
                "sample {i} = {} lies outside [-1, 1)",
                samples[i]
            )));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            label: None,
            source_id: source_id.into(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    /// Copy of the samples in `seg` as a new utterance with the same metadata.
    pub fn slice(&self, seg: Segment) -> Result<Self> {
        let mut u = Utterance::new(
            self.samples[seg.start..seg.end].to_vec(),
            self.sample_rate_hz,
            self.source_id.clone(),
        )?;
        u.label = self.label.clone();
        Ok(u)
    }
}
