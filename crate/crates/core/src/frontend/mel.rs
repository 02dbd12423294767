use crate::error::{Error, Result};

pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular filters evaluated at FFT bin centres.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    /// `num_filters` rows of `fft_size/2 + 1` gains.
    weights: Vec<Vec<f64>>,
    center_bins: Vec<usize>,
    center_hz: Vec<f64>,
}

impl FilterBank {
    /// `num_filters` triangles whose vertices are equally spaced in mel
    /// between `low_hz` and `high_hz`. Filter m rises from vertex m to a
    /// peak of 1 at vertex m+1 and falls to zero at vertex m+2.
    pub fn mel(num_filters: usize, fft_size: usize, sample_rate_hz: f64, low_hz: f64, high_hz: f64) -> Result<Self> {
        if num_filters == 0 {
            return Err(Error::config("need at least one mel filter"));
        }
        if !(low_hz >= 0.0 && low_hz < high_hz && high_hz <= sample_rate_hz / 2.0) {
            return Err(Error::config(format!(
                "filterbank band [{low_hz}, {high_hz}] Hz is not inside [0, {}]",
                sample_rate_hz / 2.0
            )));
        }
        let (mel_lo, mel_hi) = (hz_to_mel(low_hz), hz_to_mel(high_hz));
        let step = (mel_hi - mel_lo) / (num_filters + 1) as f64;
        let vertices: Vec<f64> = (0..num_filters + 2)
            .map(|i| mel_to_hz(mel_lo + step * i as f64))
            .collect();

        let bin_hz = sample_rate_hz / fft_size as f64;
        let vertex_bins: Vec<usize> = vertices.iter().map(|f| (f / bin_hz).round() as usize).collect();
        if let Some(w) = vertex_bins.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Resolution(format!(
                "mel vertices {w} and {} ({:.1} Hz, {:.1} Hz) share FFT bin {} at fft size {fft_size}",
                w + 1,
                vertices[w],
                vertices[w + 1],
                vertex_bins[w]
            )));
        }

        let n_bins = fft_size / 2 + 1;
        let weights = (0..num_filters)
            .map(|m| {
                let (lo, mid, hi) = (vertices[m], vertices[m + 1], vertices[m + 2]);
                (0..n_bins)
                    .map(|b| {
                        let f = b as f64 * bin_hz;
                        if f <= lo || f >= hi {
                            0.0
                        } else if f <= mid {
                            (f - lo) / (mid - lo)
                        } else {
                            (hi - f) / (hi - mid)
                        }
                    })
                    .collect()
            })
            .collect();

        Ok(Self {
            weights,
            center_bins: vertex_bins[1..=num_filters].to_vec(),
            center_hz: vertices[1..=num_filters].to_vec(),
        })
    }

    pub fn num_filters(&self) -> usize {
        self.weights.len()
    }

    pub fn num_bins(&self) -> usize {
        self.weights[0].len()
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn center_bins(&self) -> &[usize] {
        &self.center_bins
    }

    pub fn center_hz(&self) -> &[f64] {
        &self.center_hz
    }
}

/// `E_m = sum_b w[m][b] power[b]`, clamped below at `floor`.
pub fn filterbank_energies(power: &[f64], fb: &FilterBank, floor: f64) -> Result<Vec<f64>> {
    if power.len() != fb.num_bins() {
        return Err(Error::Dimension {
            expected: fb.num_bins(),
            got: power.len(),
        });
    }
    Ok(fb
        .weights
        .iter()
        .map(|row| row.iter().zip(power).map(|(w, p)| w * p).sum::<f64>().max(floor))
        .collect())
}
