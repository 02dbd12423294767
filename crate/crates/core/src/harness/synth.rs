//! Deterministic pseudo-speech corpus: four command classes built from
//! gliding three-formant harmonic templates, two speakers, random jitter,
//! white noise and silence padding.

use std::f64::consts::PI;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::audio::{encode_wav_i16, to_pcm16, DatasetManifest, ManifestEntry, Split};
use crate::error::{Error, Result};
use crate::vocab::Vocabulary;

pub const MANIFEST_NAME: &str = "manifest.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    /// Utterances per class, split evenly between the two speakers.
    pub per_class: usize,
    pub sample_rate_hz: u32,
    /// Standard deviation of the additive white noise.
    pub noise_std: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            per_class: 24,
            sample_rate_hz: 48_000,
            noise_std: 0.02,
        }
    }
}

/// Formant targets (F1, F2, F3) at the start and end of each word. Features
/// are time averages, so the classes differ in their mean formant positions,
/// not only in glide direction.
const TEMPLATES: [[[f64; 3]; 2]; 4] = [
    [[300.0, 2200.0, 3000.0], [400.0, 1900.0, 2800.0]],
    [[750.0, 1200.0, 2500.0], [650.0, 1400.0, 2600.0]],
    [[600.0, 1000.0, 2400.0], [350.0, 800.0, 2300.0]],
    [[450.0, 1500.0, 2500.0], [700.0, 1700.0, 2700.0]],
];
const FORMANT_GAIN: [f64; 3] = [1.0, 0.7, 0.4];
const FORMANT_BW: [f64; 3] = [90.0, 110.0, 140.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Speaker {
    pub id: &'static str,
    pub f0_hz: f64,
    pub formant_scale: f64,
}

pub const SPEAKERS: [Speaker; 2] = [
    Speaker {
        id: "s1",
        f0_hz: 115.0,
        formant_scale: 1.0,
    },
    Speaker {
        id: "s2",
        f0_hz: 205.0,
        formant_scale: 1.12,
    },
];

fn harmonic_gain(f: f64, formants: &[f64; 3]) -> f64 {
    formants
        .iter()
        .zip(FORMANT_GAIN.iter().zip(&FORMANT_BW))
        .map(|(&fc, (&g, &bw))| g * (-(f - fc) * (f - fc) / (2.0 * bw * bw)).exp())
        .sum::<f64>()
        + 0.02
}

/// One utterance of `class` (0..4) by `speaker`, samples in [-1, 1).
pub fn synth_utterance(class: usize, speaker: &Speaker, fs: u32, noise_std: f64, rng: &mut impl Rng) -> Vec<f64> {
    let fs_f = f64::from(fs);
    let f0 = speaker.f0_hz * rng.random_range(0.94..1.06);
    let mut ends = TEMPLATES[class];
    for end in ends.iter_mut() {
        for f in end.iter_mut() {
            *f *= speaker.formant_scale * rng.random_range(0.96..1.04);
        }
    }
    let word = (rng.random_range(0.45..0.65) * fs_f) as usize;
    let lead = (rng.random_range(0.2..0.4) * fs_f) as usize;
    let trail = (rng.random_range(0.2..0.4) * fs_f) as usize;
    let amplitude = rng.random_range(0.25..0.4);

    let max_harmonics = (5000.0 / (f0 * 0.85)).floor() as usize;
    let block = (fs / 1000) as usize;
    let mut gains = vec![0.0; max_harmonics];
    let mut voiced = vec![0.0; word];
    let mut phase = 0.0;
    for (n, v) in voiced.iter_mut().enumerate() {
        let u = n as f64 / word as f64;
        let pitch = f0 * (1.0 - 0.12 * u);
        if n % block == 0 {
            let w = u * u * (3.0 - 2.0 * u);
            let formants = [0, 1, 2].map(|i| ends[0][i] + w * (ends[1][i] - ends[0][i]));
            for (h, g) in gains.iter_mut().enumerate() {
                let f = (h + 1) as f64 * pitch;
                *g = if f < 5000.0 { harmonic_gain(f, &formants) } else { 0.0 };
            }
        }
        phase = (phase + 2.0 * PI * pitch / fs_f) % (2.0 * PI);
        *v = gains.iter().enumerate().map(|(h, g)| g * ((h + 1) as f64 * phase).sin()).sum();
    }
    let peak = voiced.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let attack = 0.04 * fs_f;
    let release = 0.06 * fs_f;
    for (n, v) in voiced.iter_mut().enumerate() {
        let t = n as f64;
        let rise = (t / attack).min(1.0);
        let fall = ((word - n) as f64 / release).min(1.0);
        let env = 0.5 - 0.5 * (PI * rise.min(fall)).cos();
        *v *= amplitude * env / peak;
    }

    let half_width = noise_std * 3f64.sqrt();
    let mut out = vec![0.0; lead];
    out.extend(voiced);
    out.resize(lead + word + trail, 0.0);
    for s in out.iter_mut() {
        let noise = if half_width > 0.0 { rng.random_range(-half_width..half_width) } else { 0.0 };
        *s = (*s + noise).clamp(-1.0, 1.0 - 1.0 / 32768.0);
    }
    out
}

/// Writes `per_class` WAV files per command plus [`MANIFEST_NAME`] into
/// `out_dir`. Each (class, speaker) group is split at random, half train and
/// half test. Output is fully determined by the config.
pub fn synth_corpus(out_dir: &Path, cfg: &SynthConfig) -> Result<DatasetManifest> {
    if cfg.per_class < 4 || !cfg.per_class.is_multiple_of(2) {
        return Err(Error::config(format!("per-class count must be even and at least 4, got {}", cfg.per_class)));
    }
    if !(cfg.noise_std >= 0.0 && cfg.noise_std < 0.1) {
        return Err(Error::config("noise std must lie in [0, 0.1)"));
    }
    if cfg.sample_rate_hz < 16_000 {
        return Err(Error::config("synthetic corpus needs at least 16 kHz"));
    }
    let vocabulary = Vocabulary::commands();
    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let per_speaker = cfg.per_class / 2;

    struct Job {
        class: usize,
        speaker: usize,
        path: String,
        seed: u64,
        split: Split,
    }
    let mut jobs = Vec::new();
    for class in 0..vocabulary.len() {
        for (s, spk) in SPEAKERS.iter().enumerate() {
            let mut order: Vec<usize> = (0..per_speaker).collect();
            order.shuffle(&mut master);
            for i in 0..per_speaker {
                let rank = order.iter().position(|&o| o == i).expect("permutation");
                jobs.push(Job {
                    class,
                    speaker: s,
                    path: format!("{}_{}_{:02}.wav", vocabulary.label(class), spk.id, i + 1),
                    seed: master.next_u64(),
                    split: if rank < per_speaker / 2 { Split::Train } else { Split::Test },
                });
            }
        }
    }

    std::fs::create_dir_all(out_dir).map_err(|e| Error::from(e).in_file(out_dir))?;
    jobs.par_iter()
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(j.seed);
            let samples = synth_utterance(j.class, &SPEAKERS[j.speaker], cfg.sample_rate_hz, cfg.noise_std, &mut rng);
            let path = out_dir.join(&j.path);
            std::fs::write(&path, encode_wav_i16(&to_pcm16(&samples), cfg.sample_rate_hz))
                .map_err(|e| Error::from(e).in_file(path))
        })
        .collect::<Result<()>>()?;

    let manifest = DatasetManifest {
        vocabulary: vocabulary.clone(),
        entries: jobs
            .iter()
            .map(|j| ManifestEntry {
                path: j.path.clone(),
                label: vocabulary.label(j.class).to_string(),
                speaker_id: SPEAKERS[j.speaker].id.to_string(),
                split: j.split,
            })
            .collect(),
        base_dir: out_dir.to_path_buf(),
    };
    let manifest_path = out_dir.join(MANIFEST_NAME);
    std::fs::write(&manifest_path, manifest.to_text()).map_err(|e| Error::from(e).in_file(manifest_path))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::load_manifest;

    #[test]
    fn small_corpus_is_balanced_and_reproducible() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let cfg = SynthConfig {
            per_class: 4,
            sample_rate_hz: 16_000,
            ..Default::default()
        };
        let m = synth_corpus(a.path(), &cfg).unwrap();
        synth_corpus(b.path(), &cfg).unwrap();
        assert_eq!(m.entries.len(), 16);
        assert_eq!(m.count(Split::Train), 8);
        for e in &m.entries {
            let x = std::fs::read(a.path().join(&e.path)).unwrap();
            assert_eq!(x, std::fs::read(b.path().join(&e.path)).unwrap());
        }
        let loaded = load_manifest(&a.path().join(MANIFEST_NAME), &Vocabulary::commands()).unwrap();
        assert_eq!(loaded.entries, m.entries);
        let other = synth_corpus(b.path(), &SynthConfig { seed: 2, ..cfg.clone() }).unwrap();
        assert_ne!(
            std::fs::read(a.path().join(&m.entries[0].path)).unwrap(),
            std::fs::read(b.path().join(&other.entries[0].path)).unwrap()
        );
        assert!(synth_corpus(a.path(), &SynthConfig { per_class: 5, ..cfg }).unwrap_err().is_config());
    }

    #[test]
    fn utterance_has_silence_around_speech() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = synth_utterance(0, &SPEAKERS[0], 16_000, 0.0, &mut rng);
        assert!(s.iter().all(|v| (-1.0..1.0).contains(v)));
        assert!(s[..3000].iter().all(|&v| v == 0.0));
        assert!(s[s.len() - 3000..].iter().all(|&v| v == 0.0));
        assert!(s.iter().any(|v| v.abs() > 0.2));
    }
}
