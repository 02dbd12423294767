//! Radix-2 decimation-in-time FFT on 32-bit integers with conditional
//! block scaling. Data carry a caller-chosen number of fractional bits
//! (15 for Q16.15, 30 for Q1.30); twiddles are Q1.30.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;

use super::qformat::round_shift;
use crate::error::{Error, Result};

const TWIDDLE_FRAC: u32 = 30;
/// A stage whose largest input component reaches this magnitude is
/// pre-scaled by 1/2. One butterfly grows a component by at most
/// `1 + sqrt(2)`, so inputs below 2^29 cannot leave the i32 range.
const GUARD: i64 = 1 << 29;

pub type CQ = Complex<i32>;

#[derive(Debug, Clone)]
pub struct FixedFft {
    size: usize,
    log2_size: u32,
    twiddles: Vec<Complex<i64>>,
}

/// Block-scaled one-sided power spectrum. True power of bin b is
/// `power[b] * 2^(2 * exponent) / 2^frac_bits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedSpectrum {
    pub power: Vec<u64>,
    pub exponent: u32,
    /// Fractional bits of `power`, twice those of the input data.
    pub frac_bits: u32,
    /// Butterfly outputs clamped at the i32 rails (expected to stay zero).
    pub saturations: u32,
}

impl FixedSpectrum {
    pub fn to_f64(&self) -> Vec<f64> {
        let scale = (2.0 * f64::from(self.exponent) - f64::from(self.frac_bits)).exp2();
        self.power.iter().map(|&p| p as f64 * scale).collect()
    }
}

fn sat_i32(v: i64, saturations: &mut u32) -> i32 {
    if v > i64::from(i32::MAX) {
        *saturations += 1;
        i32::MAX
    } else if v < i64::from(i32::MIN) {
        *saturations += 1;
        i32::MIN
    } else {
        v as i32
    }
}

impl FixedFft {
    pub fn new(size: usize) -> Result<Self> {
        if !size.is_power_of_two() || size < 2 {
            return Err(Error::config(format!("fixed FFT size {size} is not a power of two >= 2")));
        }
        let scale = f64::from(TWIDDLE_FRAC).exp2();
        let twiddles = (0..size / 2)
            .map(|k| {
                let a = -2.0 * PI * k as f64 / size as f64;
                Complex::new(
                    (a.cos() * scale).round_ties_even() as i64,
                    (a.sin() * scale).round_ties_even() as i64,
                )
            })
            .collect();
        Ok(Self {
            size,
            log2_size: size.trailing_zeros(),
            twiddles,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// In-place forward transform. Returns (exponent, saturations): the true
    /// spectrum is `buf * 2^exponent`.
    pub fn process(&self, buf: &mut [CQ]) -> (u32, u32) {
        assert_eq!(buf.len(), self.size, "buffer length must equal FFT size");
        let n = self.size;
        let bits = self.log2_size;
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }

        let mut exponent = 0;
        let mut saturations = 0;
        let mut len = 2;
        while len <= n {
            loop {
                let peak = buf
                    .iter()
                    .map(|c| i64::from(c.re).abs().max(i64::from(c.im).abs()))
                    .max()
                    .unwrap_or(0);
                if peak < GUARD {
                    break;
                }
                for c in buf.iter_mut() {
                    c.re = round_shift(c.re.into(), 1) as i32;
                    c.im = round_shift(c.im.into(), 1) as i32;
                }
                exponent += 1;
            }

            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for j in 0..half {
                    let w = self.twiddles[j * stride];
                    let a = buf[start + j];
                    let b = buf[start + j + half];
                    let (br, bi) = (i128::from(b.re), i128::from(b.im));
                    let tr = round_shift(br * i128::from(w.re) - bi * i128::from(w.im), TWIDDLE_FRAC) as i64;
                    let ti = round_shift(br * i128::from(w.im) + bi * i128::from(w.re), TWIDDLE_FRAC) as i64;
                    let (ar, ai) = (i64::from(a.re), i64::from(a.im));
                    buf[start + j] = Complex::new(sat_i32(ar + tr, &mut saturations), sat_i32(ai + ti, &mut saturations));
                    buf[start + j + half] =
                        Complex::new(sat_i32(ar - tr, &mut saturations), sat_i32(ai - ti, &mut saturations));
                }
            }
            len *= 2;
        }
        (exponent, saturations)
    }

    /// Power spectrum of a real frame with `frac_bits` fractional bits,
    /// zero-padded to the FFT size.
    pub fn power(&self, frame: &[i32], frac_bits: u32) -> Result<FixedSpectrum> {
        if frame.len() > self.size {
            return Err(Error::config(format!(
                "fft size {} is shorter than the {}-sample frame",
                self.size,
                frame.len()
            )));
        }
        let mut buf: Vec<CQ> = frame.iter().map(|&x| Complex::new(x, 0)).collect();
        buf.resize(self.size, Complex::new(0, 0));
        let (exponent, saturations) = self.process(&mut buf);
        let power = buf[..=self.size / 2]
            .iter()
            .map(|c| {
                let (re, im) = (i64::from(c.re), i64::from(c.im));
                (re * re) as u64 + (im * im) as u64
            })
            .collect();
        Ok(FixedSpectrum {
            power,
            exponent,
            frac_bits: 2 * frac_bits,
            saturations,
        })
    }
}

/// Power spectrum of a frame of Q16.15 raw values (Q0.15 samples are a
/// subset), zero-padded to `fft_size`.
pub fn fixed_fft_power(frame: &[i32], fft_size: usize) -> Result<FixedSpectrum> {
    FixedFft::new(fft_size)?.power(frame, 15)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{fft_complex, fft_power_spectrum};
    use proptest::prelude::*;

    fn dequantize(frame: &[i32]) -> Vec<f64> {
        frame.iter().map(|&r| f64::from(r) / 32768.0).collect()
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn impulse_is_flat_and_matches_float() {
        let mut frame = vec![0i32; 64];
        frame[0] = 32767;
        let fixed = fixed_fft_power(&frame, 64).unwrap();
        let float = fft_power_spectrum(&dequantize(&frame), 64).unwrap();
        for (f, e) in fixed.to_f64().iter().zip(&float) {
            assert!(rel_err(*f, *e) <= 2f64.powi(-12));
        }
    }

    #[test]
    fn full_scale_dc_does_not_saturate() {
        let frame = vec![32767i32; 2048];
        let fixed = fixed_fft_power(&frame, 2048).unwrap();
        assert_eq!(fixed.saturations, 0);
        let float = fft_power_spectrum(&dequantize(&frame), 2048).unwrap();
        assert!(rel_err(fixed.to_f64()[0], float[0]) <= 2f64.powi(-12));
    }

    #[test]
    fn zero_frame_is_zero_with_no_shift() {
        let fixed = fixed_fft_power(&[0; 256], 512).unwrap();
        assert!(fixed.power.iter().all(|&p| p == 0));
        assert_eq!(fixed.exponent, 0);
    }

    #[test]
    fn large_inputs_are_block_scaled() {
        // Q16.15 values near 2^28 force shifts on the later stages.
        let frame: Vec<i32> = (0..256).map(|n| if n % 3 == 0 { 1 << 28 } else { -(1 << 27) }).collect();
        let mut buf: Vec<CQ> = frame.iter().map(|&x| Complex::new(x, 0)).collect();
        let fft = FixedFft::new(256).unwrap();

        let (exponent, saturations) = fft.process(&mut buf);
        assert!(exponent > 0);
        assert_eq!(saturations, 0);
        let float = fft_complex(&frame.iter().map(|&x| f64::from(x)).collect::<Vec<_>>(), 256).unwrap();
        let scale = f64::from(exponent).exp2();
        let peak = float.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (q, f) in buf.iter().zip(&float) {
            let err = ((f64::from(q.re) * scale - f.re).powi(2) + (f64::from(q.im) * scale - f.im).powi(2)).sqrt();
            assert!(err <= 1e-6 * peak, "error {err} vs peak {peak}");
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(fixed_fft_power(&[0; 10], 12).is_err());
        assert!(fixed_fft_power(&[0; 10], 8).is_err());
    }

    proptest! {
        #[test]
        fn energy_never_exceeds_float_beyond_rounding(
            frame in prop::collection::vec(-32768i32..=32767, 16..512),
            amp_shift in 0u32..6,
        ) {
            let frame: Vec<i32> = frame.into_iter().map(|x| x >> amp_shift).collect();
            let size = frame.len().next_power_of_two();
            let fixed: f64 = fixed_fft_power(&frame, size).unwrap().to_f64().iter().sum();
            let float: f64 = fft_power_spectrum(&dequantize(&frame), size).unwrap().iter().sum();
            prop_assume!(float > 1.0);
            prop_assert!(fixed <= float * (1.0 + 2f64.powi(-12)), "fixed {} float {}", fixed, float);
        }

        #[test]
        fn bins_track_float_spectrum(frame in prop::collection::vec(-32768i32..=32767, 64..=1024)) {
            let size = frame.len().next_power_of_two();
            let stages = f64::from(size.trailing_zeros());
            let fixed = fixed_fft_power(&frame, size).unwrap();
            // Each stage rounds to half an LSB of the (block-scaled) data;
            // errors add at most linearly across stages.
            let lsb = f64::from(fixed.exponent).exp2() / 32768.0;
            let bound = stages * (size as f64).sqrt() * lsb;
            let float = fft_power_spectrum(&dequantize(&frame), size).unwrap();
            for (f, e) in fixed.to_f64().iter().zip(&float) {
                prop_assert!((f.sqrt() - e.sqrt()).abs() <= bound, "{} vs {}", f, e);
            }
        }

        #[test]
        fn q30_input_keeps_more_precision(frame in prop::collection::vec(-32768i32..=32767, 64..=512)) {
            let size = frame.len().next_power_of_two();
            let wide: Vec<i32> = frame.iter().map(|&x| x << 15).collect();
            let fixed = FixedFft::new(size).unwrap().power(&wide, 30).unwrap();
            prop_assert_eq!(fixed.saturations, 0);
            let float = fft_power_spectrum(&dequantize(&frame), size).unwrap();
            let lsb = f64::from(fixed.exponent).exp2() / 2f64.powi(30);
            let bound = f64::from(size.trailing_zeros()) * (size as f64).sqrt() * lsb;
            for (f, e) in fixed.to_f64().iter().zip(&float) {
                prop_assert!((f.sqrt() - e.sqrt()).abs() <= bound);
            }
        }
    }
}
