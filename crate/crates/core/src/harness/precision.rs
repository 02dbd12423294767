//! Front-end comparison: per-coefficient frame-level error between two
//! MFCC front-ends (normally float vs fixed point) and the label agreement
//! of a classifier fed with either.

use std::fmt::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ClassifierKind, FrontendKind, Settings};
use super::pipeline::{cepstra, load_utterance, speech_segment, Sample, TrainedModel};
use crate::audio::{DatasetManifest, Split};
use crate::error::{Error, Result};
use crate::features::{compress_features, FeatureVector};

/// |Delta C_k| bound for k >= 1.
pub const CEPSTRUM_ABS_BOUND: f64 = 0.05;
/// Relative bound on C_0.
pub const C0_REL_BOUND: f64 = 0.01;
pub const AGREEMENT_BOUND: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelError {
    pub channel: usize,
    pub max_abs: f64,
    pub mean_abs: f64,
    /// Largest `|a - b| / |a|` over frames.
    pub max_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agreement {
    pub agree: usize,
    pub total: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecisionReport {
    pub reference: String,
    pub candidate: String,
    pub files: usize,
    pub frames: usize,
    /// Frame-level errors per cepstral channel.
    pub channels: Vec<ChannelError>,
    /// Errors of the compressed per-utterance features.
    pub features: Vec<ChannelError>,
    /// Test-split label agreement of an ANFIS ensemble trained on reference
    /// features of the train split; absent when the train split is unusable.
    pub agreement: Option<Agreement>,
    pub failures: Vec<String>,
    pub pass: bool,
}

struct FileResult {
    frames: usize,
    abs_sum: Vec<f64>,
    abs_max: Vec<f64>,
    rel_max: Vec<f64>,
    reference: FeatureVector,
    candidate: FeatureVector,
}

fn compare_file(manifest: &DatasetManifest, idx: usize, settings: &Settings, a: FrontendKind, b: FrontendKind) -> Result<FileResult> {
    let e = &manifest.entries[idx];
    let path = manifest.resolve(e);
    let u = load_utterance(&path, &e.path)?;
    let run = || -> Result<FileResult> {
        let speech = speech_segment(&u, settings)?;
        let ca = cepstra(&speech, settings, a)?;
        let cb = cepstra(&speech, settings, b)?;
        let k = ca.num_cepstra();
        let mut r = FileResult {
            frames: ca.num_frames(),
            abs_sum: vec![0.0; k],
            abs_max: vec![0.0; k],
            rel_max: vec![0.0; k],
            reference: compress_features(&ca)?,
            candidate: compress_features(&cb)?,
        };
        for (x, y) in ca.columns().zip(cb.columns()) {
            for ch in 0..k {
                let d = (x[ch] - y[ch]).abs();
                r.abs_sum[ch] += d;
                r.abs_max[ch] = r.abs_max[ch].max(d);
                let rel = if d == 0.0 { 0.0 } else { d / x[ch].abs() };
                r.rel_max[ch] = r.rel_max[ch].max(rel);
            }
        }
        Ok(r)
    };
    run().map_err(|err| err.in_file(&path))
}

fn feature_errors(pairs: &[(&FeatureVector, &FeatureVector)]) -> Vec<ChannelError> {
    let k = pairs.first().map_or(0, |p| p.0.len());
    (0..k)
        .map(|ch| {
            let diffs: Vec<(f64, f64)> = pairs
                .iter()
                .map(|(a, b)| {
                    let d = (a.values()[ch] - b.values()[ch]).abs();
                    (d, if d == 0.0 { 0.0 } else { d / a.values()[ch].abs() })
                })
                .collect();
            ChannelError {
                channel: ch,
                max_abs: diffs.iter().map(|d| d.0).fold(0.0, f64::max),
                mean_abs: diffs.iter().map(|d| d.0).sum::<f64>() / diffs.len() as f64,
                max_rel: diffs.iter().map(|d| d.1).fold(0.0, f64::max),
            }
        })
        .collect()
}

/// Runs both front-ends on every manifest file (in parallel, aggregated in
/// manifest order). Per-file failures are listed, not fatal.
pub fn compare_frontends(manifest: &DatasetManifest, settings: &Settings, reference: FrontendKind, candidate: FrontendKind) -> Result<PrecisionReport> {
    let results: Vec<Result<FileResult>> = (0..manifest.entries.len())
        .into_par_iter()
        .map(|i| compare_file(manifest, i, settings, reference, candidate))
        .collect();
    let mut ok: Vec<(usize, FileResult)> = Vec::new();
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(r) => ok.push((i, r)),
            Err(e) => failures.push(e.to_string()),
        }
    }
    if ok.is_empty() {
        return Err(Error::Empty(format!("no file could be compared ({} failures)", failures.len())));
    }
    let k = ok[0].1.abs_sum.len();
    let frames: usize = ok.iter().map(|(_, r)| r.frames).sum();
    let channels = (0..k)
        .map(|ch| ChannelError {
            channel: ch,
            max_abs: ok.iter().map(|(_, r)| r.abs_max[ch]).fold(0.0, f64::max),
            mean_abs: ok.iter().map(|(_, r)| r.abs_sum[ch]).sum::<f64>() / frames as f64,
            max_rel: ok.iter().map(|(_, r)| r.rel_max[ch]).fold(0.0, f64::max),
        })
        .collect::<Vec<_>>();
    let pairs: Vec<(&FeatureVector, &FeatureVector)> = ok.iter().map(|(_, r)| (&r.reference, &r.candidate)).collect();
    let features = feature_errors(&pairs);

    let sample = |i: usize, f: &FeatureVector| {
        let e = &manifest.entries[i];
        Sample {
            source_id: e.path.clone(),
            label: manifest.vocabulary.index_of(&e.label).expect("validated label"),
            speaker: e.speaker_id.clone(),
            split: e.split,
            features: f.clone(),
        }
    };
    let train: Vec<Sample> = ok
        .iter()
        .filter(|(i, _)| manifest.entries[*i].split == Split::Train)
        .map(|(i, r)| sample(*i, &r.reference))
        .collect();
    let train_refs: Vec<&Sample> = train.iter().collect();
    let agreement = match TrainedModel::train(ClassifierKind::Anfis, &train_refs, &manifest.vocabulary, settings) {
        Ok(model) => {
            let mut agree = 0;
            let mut total = 0;
            for (i, r) in &ok {
                if manifest.entries[*i].split != Split::Test {
                    continue;
                }
                total += 1;
                if model.classify(&r.reference)?.0 == model.classify(&r.candidate)?.0 {
                    agree += 1;
                }
            }
            (total > 0).then(|| Agreement {
                agree,
                total,
                rate: agree as f64 / total as f64,
            })
        }
        Err(Error::MissingClass(_)) | Err(Error::Empty(_)) => None,
        Err(e) => return Err(e),
    };

    let bounds_ok = channels[0].max_rel <= C0_REL_BOUND && channels[1..].iter().all(|c| c.max_abs <= CEPSTRUM_ABS_BOUND);
    let pass = bounds_ok && agreement.as_ref().is_none_or(|a| a.rate >= AGREEMENT_BOUND);
    Ok(PrecisionReport {
        reference: reference.to_string(),
        candidate: candidate.to_string(),
        files: ok.len(),
        frames,
        channels,
        features,
        agreement,
        failures,
        pass,
    })
}

/// Float reference against the fixed-point front-end.
pub fn compare_precision(manifest: &DatasetManifest, settings: &Settings) -> Result<PrecisionReport> {
    compare_frontends(manifest, settings, FrontendKind::Float, FrontendKind::Fixed)
}

impl PrecisionReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} vs {} front-end: {} files, {} frames",
            self.reference, self.candidate, self.files, self.frames
        );
        let _ = writeln!(
            out,
            "  {:>7} {:>12} {:>12} {:>12} {:>12}  bound",
            "channel", "max |d|", "mean |d|", "max rel", "feat max|d|"
        );
        for (c, f) in self.channels.iter().zip(&self.features) {
            let bound = if c.channel == 0 {
                format!("rel <= {C0_REL_BOUND}")
            } else {
                format!("abs <= {CEPSTRUM_ABS_BOUND}")
            };
            let _ = writeln!(
                out,
                "  {:>7} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}  {bound}",
                format!("C{}", c.channel),
                c.max_abs,
                c.mean_abs,
                c.max_rel,
                f.max_abs
            );
        }
        match &self.agreement {
            Some(a) => {
                let _ = writeln!(
                    out,
                    "  label agreement {}/{} = {:.1}% (bound {:.0}%)",
                    a.agree,
                    a.total,
                    100.0 * a.rate,
                    100.0 * AGREEMENT_BOUND
                );
            }
            None => out.push_str("  label agreement not measured (train split lacks a class)\n"),
        }
        for f in &self.failures {
            let _ = writeln!(out, "  failed: {f}");
        }
        let _ = writeln!(out, "{}", if self.pass { "PASS" } else { "FAIL" });
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::synth::{synth_corpus, SynthConfig};

    #[test]
    fn self_comparison_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SynthConfig {
            per_class: 4,
            sample_rate_hz: 16_000,
            ..Default::default()
        };
        let m = synth_corpus(dir.path(), &cfg).unwrap();
        let r = compare_frontends(&m, &Settings::default(), FrontendKind::Float, FrontendKind::Float).unwrap();
        assert!(r.channels.iter().chain(&r.features).all(|c| c.max_abs == 0.0 && c.max_rel == 0.0));
        assert_eq!(r.agreement.as_ref().unwrap().rate, 1.0);
        assert!(r.pass);
        assert!(r.to_text().ends_with("PASS\n"));
    }
}
