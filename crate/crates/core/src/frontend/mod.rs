//! Floating-point MFCC front-end: pre-emphasis, framing, Hamming window,
//! FFT power spectrum, mel filterbank and the cepstral cosine transform.

mod dct;
mod framing;
mod mel;
mod spectrum;

pub use dct::{dct_cepstrum, DctTable};
pub use framing::{apply_window, frame_count, frame_samples, hamming, pre_emphasis, FrameMatrix};
pub use mel::{filterbank_energies, hz_to_mel, mel_to_hz, FilterBank};
pub use spectrum::{fft_complex, fft_power_spectrum, SpectrumAnalyzer};

use crate::audio::Utterance;
use crate::error::{Error, Result};

pub const NUM_CEPSTRA: usize = 13;
pub const DEFAULT_ENERGY_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FrontendConfig {
    pub frame_length_ms: f64,
    pub hop_ms: f64,
    /// `None` picks the next power of two at or above the frame length.
    pub fft_size: Option<usize>,
    pub num_mel_filters: usize,
    pub num_cepstra: usize,
    pub low_freq_hz: f64,
    /// `None` means the Nyquist frequency of the input.
    pub high_freq_hz: Option<f64>,
    /// 0 disables pre-emphasis.
    pub pre_emphasis: f64,
    /// Lower clamp applied to filterbank energies before the logarithm.
    pub energy_floor: f64,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        Self {
            frame_length_ms: 25.0,
            hop_ms: 10.0,
            fft_size: None,
            num_mel_filters: 26,
            num_cepstra: NUM_CEPSTRA,
            low_freq_hz: 0.0,
            high_freq_hz: None,
            pre_emphasis: 0.97,
            energy_floor: DEFAULT_ENERGY_FLOOR,
        }
    }
}

/// A [`FrontendConfig`] bound to one sample rate, in samples and bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameGeometry {
    pub sample_rate_hz: u32,
    pub frame_len: usize,
    pub hop: usize,
    pub fft_size: usize,
    pub low_hz: f64,
    pub high_hz: f64,
}

impl FrontendConfig {
    pub fn geometry(&self, sample_rate_hz: u32) -> Result<FrameGeometry> {
        if sample_rate_hz == 0 {
            return Err(Error::config("sample rate must be positive"));
        }
        if !(self.hop_ms > 0.0 && self.frame_length_ms >= self.hop_ms) {
            return Err(Error::config("need frame_length_ms >= hop_ms > 0"));
        }
        if self.num_cepstra == 0 || self.num_cepstra > self.num_mel_filters {
            return Err(Error::config(format!(
                "num_cepstra {} must lie in 1..={}",
                self.num_cepstra, self.num_mel_filters
            )));
        }
        if !(0.0..1.0).contains(&self.pre_emphasis) {
            return Err(Error::config("pre_emphasis must lie in [0, 1)"));
        }
        if !(self.energy_floor > 0.0) {
            return Err(Error::config("energy_floor must be positive"));
        }
        let fs = f64::from(sample_rate_hz);
        let frame_len = (self.frame_length_ms * fs / 1000.0).round() as usize;
        let hop = (self.hop_ms * fs / 1000.0).round() as usize;
        if frame_len < 2 || hop == 0 {
            return Err(Error::config(format!(
                "frame of {frame_len} samples / hop of {hop} samples at {sample_rate_hz} Hz is too small"
            )));
        }
        let fft_size = self.fft_size.unwrap_or_else(|| frame_len.next_power_of_two());
        spectrum::check_fft_size(fft_size, frame_len)?;
        let high_hz = self.high_freq_hz.unwrap_or(fs / 2.0);
        if !(self.low_freq_hz >= 0.0 && self.low_freq_hz < high_hz && high_hz <= fs / 2.0) {
            return Err(Error::config(format!(
                "need 0 <= low_freq_hz < high_freq_hz <= {}",
                fs / 2.0
            )));
        }
        Ok(FrameGeometry {
            sample_rate_hz,
            frame_len,
            hop,
            fft_size,
            low_hz: self.low_freq_hz,
            high_hz,
        })
    }

    pub fn filterbank(&self, g: &FrameGeometry) -> Result<FilterBank> {
        FilterBank::mel(
            self.num_mel_filters,
            g.fft_size,
            f64::from(g.sample_rate_hz),
            g.low_hz,
            g.high_hz,
        )
    }
}

/// `K x N` cepstra: row k is channel `C_k`, column j is frame j.
#[derive(Debug, Clone, PartialEq)]
pub struct CepstralMatrix {
    num_cepstra: usize,
    /// Column-major: frame j occupies `data[j*K..(j+1)*K]`.
    data: Vec<f64>,
}

impl CepstralMatrix {
    pub fn from_columns(num_cepstra: usize, columns: &[Vec<f64>]) -> Result<Self> {
        if num_cepstra == 0 {
            return Err(Error::config("cepstral matrix needs at least one channel"));
        }
        let mut data = Vec::with_capacity(num_cepstra * columns.len());
        for c in columns {
            if c.len() != num_cepstra {
                return Err(Error::Dimension {
                    expected: num_cepstra,
                    got: c.len(),
                });
            }
            data.extend_from_slice(c);
        }
        Ok(Self { num_cepstra, data })
    }

    pub fn num_cepstra(&self) -> usize {
        self.num_cepstra
    }

    pub fn num_frames(&self) -> usize {
        self.data.len() / self.num_cepstra
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.data[j * self.num_cepstra + k]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.num_cepstra..(j + 1) * self.num_cepstra]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.num_cepstra)
    }

    pub fn row(&self, k: usize) -> Vec<f64> {
        self.columns().map(|c| c[k]).collect()
    }

    /// One frame per line, values separated by spaces.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in self.columns() {
            let line: Vec<String> = c.iter().map(|v| format!("{v:.6}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Precomputed window, filterbank, FFT plan and cosine table for one
/// configuration and sample rate.
#[derive(Clone)]
pub struct MfccExtractor {
    cfg: FrontendConfig,
    geometry: FrameGeometry,
    window: Vec<f64>,
    filterbank: FilterBank,
    analyzer: SpectrumAnalyzer,
    dct: DctTable,
}

impl MfccExtractor {
    pub fn new(cfg: &FrontendConfig, sample_rate_hz: u32) -> Result<Self> {
        let geometry = cfg.geometry(sample_rate_hz)?;
        Ok(Self {
            window: hamming(geometry.frame_len),
            filterbank: cfg.filterbank(&geometry)?,
            analyzer: SpectrumAnalyzer::new(geometry.fft_size)?,
            dct: DctTable::new(cfg.num_mel_filters, cfg.num_cepstra)?,
            cfg: cfg.clone(),
            geometry,
        })
    }

    pub fn geometry(&self) -> &FrameGeometry {
        &self.geometry
    }

    pub fn filterbank(&self) -> &FilterBank {
        &self.filterbank
    }

    pub fn config(&self) -> &FrontendConfig {
        &self.cfg
    }

    pub fn frame_cepstra(&self, frame: &[f64]) -> Result<Vec<f64>> {
        let windowed: Vec<f64> = frame.iter().zip(&self.window).map(|(x, w)| x * w).collect();
        let power = self.analyzer.power(&windowed)?;
        let energies = filterbank_energies(&power, &self.filterbank, self.cfg.energy_floor)?;
        let logs: Vec<f64> = energies.iter().map(|e| e.ln()).collect();
        self.dct.apply(&logs)
    }

    pub fn extract(&self, samples: &[f64]) -> Result<CepstralMatrix> {
        let emphasized = pre_emphasis(samples, self.cfg.pre_emphasis);
        let frames = frame_samples(&emphasized, self.geometry.frame_len, self.geometry.hop)?;
        let columns = frames
            .frames()
            .map(|f| self.frame_cepstra(f))
            .collect::<Result<Vec<_>>>()?;
        CepstralMatrix::from_columns(self.cfg.num_cepstra, &columns)
    }
}

/// Full floating-point MFCC of one utterance.
pub fn mfcc(u: &Utterance, cfg: &FrontendConfig) -> Result<CepstralMatrix> {
    MfccExtractor::new(cfg, u.sample_rate_hz())?.extract(u.samples())
}
