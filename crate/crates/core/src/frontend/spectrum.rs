use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub(crate) fn check_fft_size(fft_size: usize, frame_len: usize) -> Result<()> {
    if !fft_size.is_power_of_two() {
        return Err(Error::config(format!("fft size {fft_size} is not a power of two")));
    }
    if fft_size < frame_len {
        return Err(Error::config(format!(
            "fft size {fft_size} is shorter than the {frame_len}-sample frame"
        )));
    }
    Ok(())
}

/// Forward DFT of a real frame zero-padded to `fft_size`, reusing one plan.
#[derive(Clone)]
pub struct SpectrumAnalyzer {
    fft: Arc<dyn Fft<f64>>,
    size: usize,
}

impl SpectrumAnalyzer {
    pub fn new(fft_size: usize) -> Result<Self> {
        check_fft_size(fft_size, 0)?;
        Ok(Self {
            fft: FftPlanner::new().plan_fft_forward(fft_size),
            size: fft_size,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn transform(&self, frame: &[f64]) -> Result<Vec<Complex64>> {
        check_fft_size(self.size, frame.len())?;
        let mut buf: Vec<Complex64> = frame.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        buf.resize(self.size, Complex64::new(0.0, 0.0));
        self.fft.process(&mut buf);
        Ok(buf)
    }

    /// `|X[b]|^2` for bins `0..=fft_size/2`.
    pub fn power(&self, frame: &[f64]) -> Result<Vec<f64>> {
        let spec = self.transform(frame)?;
        Ok(spec[..=self.size / 2].iter().map(|c| c.norm_sqr()).collect())
    }
}

/// Full two-sided complex spectrum of `frame` zero-padded to `fft_size`.
pub fn fft_complex(frame: &[f64], fft_size: usize) -> Result<Vec<Complex64>> {
    check_fft_size(fft_size, frame.len())?;
    SpectrumAnalyzer::new(fft_size)?.transform(frame)
}

/// One-sided power spectrum, `fft_size/2 + 1` bins, unnormalized.
pub fn fft_power_spectrum(frame: &[f64], fft_size: usize) -> Result<Vec<f64>> {
    check_fft_size(fft_size, frame.len())?;
    SpectrumAnalyzer::new(fft_size)?.power(frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn impulse_is_flat() {
        let mut x = [0.0; 8];
        x[0] = 1.0;
        assert!(fft_power_spectrum(&x, 8).unwrap().iter().all(|&p| close(p, 1.0)));
    }

    #[test]
    fn dc_lands_in_bin_zero() {
        let p = fft_power_spectrum(&[1.0; 8], 8).unwrap();
        assert_eq!(p.len(), 5);
        assert!(close(p[0], 64.0));
        assert!(p[1..].iter().all(|&v| close(v, 0.0)));
    }

    #[test]
    fn single_tone_lands_in_its_bin() {
        let x: Vec<f64> = (0..8).map(|n| (2.0 * PI * 2.0 * n as f64 / 8.0).cos()).collect();
        let p = fft_power_spectrum(&x, 8).unwrap();
        for (b, &v) in p.iter().enumerate() {
            assert!(close(v, if b == 2 { 16.0 } else { 0.0 }), "bin {b}: {v}");
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(fft_power_spectrum(&[0.0; 6], 12), Err(Error::Config(_))));
        assert!(matches!(fft_power_spectrum(&[0.0; 9], 8), Err(Error::Config(_))));
    }

    proptest! {
        #[test]
        fn parseval(frame in prop::collection::vec(-1.0f64..1.0, 1..256), extra in 0u32..2) {
            let size = frame.len().next_power_of_two() << extra;
            let spec = fft_complex(&frame, size).unwrap();
            let time: f64 = frame.iter().map(|x| x * x).sum();
            let freq: f64 = spec.iter().map(|c| c.norm_sqr()).sum::<f64>() / size as f64;
            prop_assert!((time - freq).abs() <= 1e-9 * time.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn linearity(
            pair in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..128),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pair.into_iter().unzip();
            let size = x.len().next_power_of_two();
            let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let (fx, fy, fm) = (fft_complex(&x, size).unwrap(), fft_complex(&y, size).unwrap(), fft_complex(&mix, size).unwrap());
            for k in 0..size {
                let expect = fx[k] * a + fy[k] * b;
                prop_assert!((fm[k] - expect).norm() <= 1e-9 * (1.0 + expect.norm()));
            }
        }
    }
}
