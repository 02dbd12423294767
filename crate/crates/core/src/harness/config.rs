//! Run settings and `key = value` override files.
//!
//! ```text
//! # comment
//! vocabulary = left,right,up,down
//! vad.energy_threshold_ratio = 0.05
//! frontend.num_mel_filters = 26
//! anfis.radius = 0.2
//! mlp.hidden = 16
//! ```

use std::fmt;
use std::str::FromStr;

use crate::anfis::{ClusteringConfig, HybridTrainConfig};
use crate::audio::VadConfig;
use crate::error::{Error, Result};
use crate::fixed::FixedPipelineConfig;
use crate::frontend::FrontendConfig;
use crate::mlp::MlpTrainConfig;
use crate::vocab::Vocabulary;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontendKind {
    Float,
    Fixed,
}

impl FromStr for FrontendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "float" => Ok(Self::Float),
            "fixed" => Ok(Self::Fixed),
            _ => Err(Error::config(format!("frontend must be 'float' or 'fixed', got '{s}'"))),
        }
    }
}

impl fmt::Display for FrontendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Float => "float",
            Self::Fixed => "fixed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierKind {
    Anfis,
    Mlp,
    Both,
}

impl ClassifierKind {
    /// The concrete classifiers this choice expands to.
    pub fn expand(self) -> &'static [ClassifierKind] {
        match self {
            Self::Anfis => &[Self::Anfis],
            Self::Mlp => &[Self::Mlp],
            Self::Both => &[Self::Anfis, Self::Mlp],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Anfis => "anfis",
            Self::Mlp => "mlp",
            Self::Both => "both",
        }
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "anfis" => Ok(Self::Anfis),
            "mlp" => Ok(Self::Mlp),
            "both" => Ok(Self::Both),
            _ => Err(Error::config(format!("classifier must be anfis, mlp or both, got '{s}'"))),
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Every tunable of the pipeline, with the documented defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub vocabulary: Vocabulary,
    pub vad: VadConfig,
    pub frontend: FrontendConfig,
    pub fixed: FixedPipelineConfig,
    pub clustering: ClusteringConfig,
    pub anfis: HybridTrainConfig,
    pub mlp: MlpTrainConfig,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("{key}: cannot parse '{value}'")))
}

fn parse_opt<T: FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    if value == "auto" {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

impl Settings {
    /// Sets one value; `auto` resets optional frontend values.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value;
        match key {
            "vocabulary" => self.vocabulary = Vocabulary::parse(v)?,
            "vad.frame_ms" => self.vad.frame_ms = parse(key, v)?,
            "vad.energy_threshold_ratio" => self.vad.energy_threshold_ratio = parse(key, v)?,
            "vad.hangover_frames" => self.vad.hangover_frames = parse(key, v)?,
            "vad.min_segment_ms" => self.vad.min_segment_ms = parse(key, v)?,
            "frontend.frame_length_ms" => self.frontend.frame_length_ms = parse(key, v)?,
            "frontend.hop_ms" => self.frontend.hop_ms = parse(key, v)?,
            "frontend.fft_size" => self.frontend.fft_size = parse_opt(key, v)?,
            "frontend.num_mel_filters" => self.frontend.num_mel_filters = parse(key, v)?,
            "frontend.low_freq_hz" => self.frontend.low_freq_hz = parse(key, v)?,
            "frontend.high_freq_hz" => self.frontend.high_freq_hz = parse_opt(key, v)?,
            "frontend.pre_emphasis" => self.frontend.pre_emphasis = parse(key, v)?,
            "frontend.energy_floor" => self.frontend.energy_floor = parse(key, v)?,
            "fixed.log_lut_bits" => self.fixed.log_lut_bits = parse(key, v)?,
            "fixed.cos_table_size" => self.fixed.cos_table_size = parse_opt(key, v)?,
            "anfis.radius" => self.clustering.radius = parse(key, v)?,
            "anfis.squash_factor" => self.clustering.squash_factor = parse(key, v)?,
            "anfis.accept_ratio" => self.clustering.accept_ratio = parse(key, v)?,
            "anfis.reject_ratio" => self.clustering.reject_ratio = parse(key, v)?,
            "anfis.epochs" => self.anfis.epochs = parse(key, v)?,
            "anfis.learning_rate" => self.anfis.learning_rate = parse(key, v)?,
            "mlp.hidden" => self.mlp.hidden = parse(key, v)?,
            "mlp.epochs" => self.mlp.epochs = parse(key, v)?,
            "mlp.learning_rate" => self.mlp.learning_rate = parse(key, v)?,
            "mlp.seed" => self.mlp.seed = parse(key, v)?,
            _ => return Err(Error::config(format!("unknown setting '{key}'"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of an override file.
    pub fn apply_overrides(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected 'key = value'", idx + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::config(format!("line {}: {e}", idx + 1)))?;
        }
        self.validate()
    }

    /// Checks everything that does not depend on the sample rate.
    pub fn validate(&self) -> Result<()> {
        self.vad.validate()?;
        self.clustering.validate()?;
        self.anfis.validate()?;
        self.mlp.validate()?;
        if self.frontend.num_mel_filters < self.frontend.num_cepstra {
            return Err(Error::config("frontend.num_mel_filters must be at least the cepstrum count"));
        }
        Ok(())
    }
}
