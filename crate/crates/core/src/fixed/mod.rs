//! Fixed-point replica of the MFCC front-end.
//!
//! Formats along the pipeline:
//!
//! | stage                 | format                                  |
//! |-----------------------|-----------------------------------------|
//! | input samples         | Q0.15                                   |
//! | pre-emphasis          | Q1.30 (exact: Q0.15 x Q0.15 products)   |
//! | windowed frame        | Q1.30 (window gains Q1.30)              |
//! | FFT data              | Q1.30 + block exponent, twiddles Q1.30  |
//! | power spectrum        | unsigned, 60 fractional bits + exponent |
//! | filterbank gains      | Q1.15, energies accumulated in 128 bits |
//! | log energies          | Q.24 (log2 LUT + interpolation, x ln 2) |
//! | cepstral cosines      | Q1.14                                   |
//!
//! Every stage is integer-only and therefore bit-deterministic.

mod fft;
mod qformat;
mod tables;

pub use fft::{fixed_fft_power, FixedFft, FixedSpectrum};
pub use qformat::{dequantize, q_add, q_mul, q_sub, quantize, round_shift, QFormat, QValue, Q15, Q16_15, Q1_14};
pub use tables::{f64_to_log_q, log2_to_ln, log_q_to_f64, CosTable, Log2Table, LOG_FRAC};

use crate::audio::Utterance;
use crate::error::{Error, Result};
use crate::frontend::{frame_count, hamming, CepstralMatrix, FrameGeometry, FrontendConfig};

pub const SAMPLE_FORMAT: QFormat = Q15;
/// Pre-emphasized and windowed frames entering the FFT.
pub const FRAME_FORMAT: QFormat = QFormat::new(1, 30);
/// Window gains. Q0.15 gains put a coherent ~1e-4 relative error on every
/// band, which sums into C_0.
const WINDOW_FORMAT: QFormat = QFormat::new(1, 30);
const WEIGHT_FRAC: u32 = 15;
const COS_FRAC: u32 = 14;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedPipelineConfig {
    /// Address width of the log2 mantissa table.
    pub log_lut_bits: u32,
    /// Cosine table length; `None` means `4 * num_mel_filters`.
    pub cos_table_size: Option<usize>,
}

impl Default for FixedPipelineConfig {
    fn default() -> Self {
        Self {
            log_lut_bits: 10,
            cos_table_size: None,
        }
    }
}

/// Tables and quantized constants for one front-end configuration.
#[derive(Debug, Clone)]
pub struct FixedMfcc {
    geometry: FrameGeometry,
    num_cepstra: usize,
    pre_emphasis_q15: i64,
    window_q30: Vec<i64>,
    fft: FixedFft,
    /// Per filter: first bin and Q1.15 gains over its support.
    filters: Vec<(usize, Vec<u64>)>,
    log: Log2Table,
    log_floor: i64,
    cos: CosTable,
}

impl FixedMfcc {
    pub fn new(cfg: &FrontendConfig, fp: &FixedPipelineConfig, sample_rate_hz: u32) -> Result<Self> {
        let geometry = cfg.geometry(sample_rate_hz)?;
        let fb = cfg.filterbank(&geometry)?;
        let filters = fb
            .weights()
            .iter()
            .map(|row| {
                let q: Vec<u64> = row
                    .iter()
                    .map(|&w| (w * f64::from(WEIGHT_FRAC).exp2()).round_ties_even() as u64)
                    .collect();
                let first = q.iter().position(|&w| w > 0).unwrap_or(0);
                let last = q.iter().rposition(|&w| w > 0).unwrap_or(0);
                (first, q[first..=last].to_vec())
            })
            .collect();
        let n = cfg.num_mel_filters;
        if cfg.num_cepstra > n {
            return Err(Error::config("num_cepstra exceeds num_mel_filters"));
        }
        Ok(Self {
            num_cepstra: cfg.num_cepstra,
            pre_emphasis_q15: quantize(cfg.pre_emphasis, Q15).raw(),
            window_q30: hamming(geometry.frame_len)
                .iter()
                .map(|&w| quantize(w, WINDOW_FORMAT).raw())
                .collect(),
            fft: FixedFft::new(geometry.fft_size)?,
            filters,
            log: Log2Table::new(fp.log_lut_bits)?,
            log_floor: f64_to_log_q(cfg.energy_floor.ln()),
            cos: CosTable::new(n, fp.cos_table_size.unwrap_or(4 * n))?,
            geometry,
        })
    }

    pub fn geometry(&self) -> &FrameGeometry {
        &self.geometry
    }

    /// Q1.30 pre-emphasized signal from Q0.15 samples. `|y| < 1 + alpha`, so
    /// the result always fits.
    fn emphasize(&self, samples: &[i64]) -> Vec<i64> {
        let alpha = i128::from(self.pre_emphasis_q15);
        let mut prev = 0i128;
        samples
            .iter()
            .map(|&x| {
                let x = i128::from(x);
                let y = (x << 15) - alpha * prev;
                prev = x;
                FRAME_FORMAT.saturate(y).0
            })
            .collect()
    }

    /// Natural-log filterbank energies in Q.24 for one Q1.30 frame.
    pub fn frame_log_energies(&self, frame: &[i64]) -> Result<Vec<i64>> {
        let windowed: Vec<i32> = frame
            .iter()
            .zip(&self.window_q30)
            .map(|(&x, &w)| FRAME_FORMAT.saturate(round_shift(i128::from(x) * i128::from(w), WINDOW_FORMAT.frac_bits)).0 as i32)
            .collect();
        let spectrum = self.fft.power(&windowed, FRAME_FORMAT.frac_bits)?;
        let energy_frac = spectrum.frac_bits + WEIGHT_FRAC;
        let exp_shift = (2 * spectrum.exponent) << LOG_FRAC;
        Ok(self
            .filters
            .iter()
            .map(|(first, gains)| {
                let acc: u128 = gains
                    .iter()
                    .zip(&spectrum.power[*first..])
                    .map(|(&g, &p)| u128::from(g) * u128::from(p))
                    .sum();
                match self.log.log2(acc, energy_frac) {
                    Some(l2) => log2_to_ln(l2 + i64::from(exp_shift)).max(self.log_floor),
                    None => self.log_floor,
                }
            })
            .collect())
    }

    /// Cepstra of one frame in Q.38 (Q.24 logs times Q1.14 cosines).
    fn cepstra(&self, logs: &[i64]) -> Vec<i64> {
        (0..self.num_cepstra)
            .map(|k| {
                logs.iter()
                    .enumerate()
                    .map(|(i0, &l)| l * i64::from(self.cos.get(k, i0 + 1)))
                    .sum()
            })
            .collect()
    }

    pub fn extract(&self, samples: &[f64]) -> Result<CepstralMatrix> {
        let g = &self.geometry;
        if samples.len() < g.frame_len {
            return Err(Error::TooShort {
                len: samples.len(),
                frame: g.frame_len,
            });
        }
        let q: Vec<i64> = samples.iter().map(|&s| quantize(s, SAMPLE_FORMAT).raw()).collect();
        let emphasized = self.emphasize(&q);
        let out_scale = (-f64::from(LOG_FRAC + COS_FRAC)).exp2();
        let columns = (0..frame_count(samples.len(), g.frame_len, g.hop))
            .map(|j| {
                let frame = &emphasized[j * g.hop..j * g.hop + g.frame_len];
                let logs = self.frame_log_energies(frame)?;
                Ok(self.cepstra(&logs).iter().map(|&c| c as f64 * out_scale).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        CepstralMatrix::from_columns(self.num_cepstra, &columns)
    }
}

/// Fixed-point MFCC of one utterance, dequantized to real values.
pub fn fixed_mfcc(u: &Utterance, cfg: &FrontendConfig, fp: &FixedPipelineConfig) -> Result<CepstralMatrix> {
    FixedMfcc::new(cfg, fp, u.sample_rate_hz())?.extract(u.samples())
}
