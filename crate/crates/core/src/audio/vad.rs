//! Frame-energy voice activity detection with a threshold relative to the
//! loudest frame.

use super::Utterance;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VadConfig {
    pub frame_ms: f64,
    /// A frame is speech when its energy reaches this fraction of the peak
    /// frame energy.
    pub energy_threshold_ratio: f64,
    pub hangover_frames: usize,
    pub min_segment_ms: f64,
}

impl Default for VadConfig {
    fn default() -> Self {
        Self {
            frame_ms: 10.0,
            energy_threshold_ratio: 0.05,
            hangover_frames: 5,
            min_segment_ms: 100.0,
        }
    }
}

impl VadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.frame_ms > 0.0) {
            return Err(Error::config("vad.frame_ms must be positive"));
        }
        if !(self.energy_threshold_ratio > 0.0 && self.energy_threshold_ratio < 1.0) {
            return Err(Error::config("vad.energy_threshold_ratio must lie in (0, 1)"));
        }
        if self.hangover_frames == 0 {
            return Err(Error::config("vad.hangover_frames must be positive"));
        }
        if !(self.min_segment_ms > 0.0) {
            return Err(Error::config("vad.min_segment_ms must be positive"));
        }
        Ok(())
    }

    pub fn frame_len(&self, sample_rate_hz: u32) -> usize {
        ((self.frame_ms * f64::from(sample_rate_hz) / 1000.0).round() as usize).max(1)
    }
}

/// Half-open sample range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Mean-square energy of consecutive non-overlapping frames; the trailing
/// partial frame is kept.
pub(crate) fn frame_energies(samples: &[f64], frame_len: usize) -> Vec<f64> {
    samples
        .chunks(frame_len)
        .map(|c| c.iter().map(|s| s * s).sum::<f64>() / c.len() as f64)
        .collect()
}

/// Returns the speech segments of `u`, sorted and disjoint. All-silent input
/// yields an empty list.
pub fn energy_vad(u: &Utterance, cfg: &VadConfig) -> Result<Vec<Segment>> {
    cfg.validate()?;
    let frame_len = cfg.frame_len(u.sample_rate_hz());
    let energies = frame_energies(u.samples(), frame_len);
    let peak = energies.iter().copied().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Ok(Vec::new());
    }
    let threshold = cfg.energy_threshold_ratio * peak;
    let n_frames = energies.len();

    // Runs of speech frames, as [first, last] frame indices.
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, &e) in energies.iter().enumerate() {
        if e < threshold {
            continue;
        }
        match runs.last_mut() {
            // gap = number of silent frames between the run and frame i
            Some(last) if i - last.1 - 1 <= cfg.hangover_frames => last.1 = i,
            _ => runs.push((i, i)),
        }
    }

    let mut padded: Vec<(usize, usize)> = Vec::with_capacity(runs.len());
    for (first, last) in runs {
        let lo = first.saturating_sub(cfg.hangover_frames);
        let hi = (last + cfg.hangover_frames).min(n_frames - 1);
        match padded.last_mut() {
            Some(prev) if lo <= prev.1 + 1 => prev.1 = prev.1.max(hi),
            _ => padded.push((lo, hi)),
        }
    }

    let min_len = (cfg.min_segment_ms * f64::from(u.sample_rate_hz()) / 1000.0).ceil() as usize;
    Ok(padded
        .into_iter()
        .map(|(lo, hi)| Segment {
            start: lo * frame_len,
            end: ((hi + 1) * frame_len).min(u.len()),
        })
        .filter(|s| s.len() >= min_len)
        .collect())
}

/// The longest segment; the earliest wins ties.
pub fn longest_segment(segments: &[Segment]) -> Option<Segment> {
    segments
        .iter()
        .copied()
        .reduce(|best, s| if s.len() > best.len() { s } else { best })
}
