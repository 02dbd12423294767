//! Lookup tables: piecewise-linear log2 and one-period cosine table.

use std::f64::consts::PI;
#[cfg(test)]
use std::f64::consts::LN_2;

use super::qformat::{quantize, round_shift, Q1_14};
use crate::error::{Error, Result};

/// Fractional bits of log-domain values.
pub const LOG_FRAC: u32 = 24;

/// `log2(1 + j / 2^bits)` for `j = 0..=2^bits`, interpolated linearly
/// between entries.
#[derive(Debug, Clone)]
pub struct Log2Table {
    bits: u32,
    entries: Vec<i64>,
}

const LN2_Q30: i128 = 744_261_118; // round(ln 2 * 2^30)

impl Log2Table {
    pub fn new(bits: u32) -> Result<Self> {
        if !(1..=20).contains(&bits) {
            return Err(Error::config(format!("log table address width {bits} outside 1..=20")));
        }
        let n = 1usize << bits;
        let scale = f64::from(LOG_FRAC).exp2();
        let entries = (0..=n)
            .map(|j| ((1.0 + j as f64 / n as f64).log2() * scale).round_ties_even() as i64)
            .collect();
        Ok(Self { bits, entries })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// log2 of `raw / 2^frac_bits` in Q.24, or `None` for zero.
    pub fn log2(&self, raw: u128, frac_bits: u32) -> Option<i64> {
        if raw == 0 {
            return None;
        }
        let msb = 127 - raw.leading_zeros();
        let (index, frac) = if msb >= self.bits {
            let drop = msb - self.bits;
            let index = ((raw >> drop) as usize) & ((1 << self.bits) - 1);
            let rem = raw & ((1u128 << drop) - 1);
            let frac = if drop >= LOG_FRAC {
                (rem >> (drop - LOG_FRAC)) as i64
            } else {
                (rem << (LOG_FRAC - drop)) as i64
            };
            (index, frac)
        } else {
            let index = ((raw << (self.bits - msb)) as usize) & ((1 << self.bits) - 1);
            (index, 0)
        };
        let lo = self.entries[index];
        let hi = self.entries[index + 1];
        let mantissa = lo + round_shift(i128::from(hi - lo) * i128::from(frac), LOG_FRAC) as i64;
        Some(((i64::from(msb) - i64::from(frac_bits)) << LOG_FRAC) + mantissa)
    }

    /// Natural log in Q.24 via `log2 * ln 2`.
    pub fn ln(&self, raw: u128, frac_bits: u32) -> Option<i64> {
        self.log2(raw, frac_bits).map(log2_to_ln)
    }
}

pub fn log2_to_ln(log2_q: i64) -> i64 {
    round_shift(i128::from(log2_q) * LN2_Q30, 30) as i64
}

pub fn log_q_to_f64(q: i64) -> f64 {
    q as f64 / f64::from(LOG_FRAC).exp2()
}

pub fn f64_to_log_q(x: f64) -> i64 {
    (x * f64::from(LOG_FRAC).exp2()).round_ties_even() as i64
}

/// One period of `cos` in Q1.14, sized as a multiple of `4N` so that every
/// cepstral cosine `cos(pi k (i - 1/2) / N)` is an exact table entry.
#[derive(Debug, Clone)]
pub struct CosTable {
    n: usize,
    step: usize,
    entries: Vec<i32>,
}

impl CosTable {
    pub fn new(n: usize, size: usize) -> Result<Self> {
        if n == 0 || size == 0 || !size.is_multiple_of(4 * n) {
            return Err(Error::config(format!(
                "cosine table of {size} entries is not a positive multiple of 4 * {n}"
            )));
        }
        let entries = (0..size)
            .map(|j| quantize((2.0 * PI * j as f64 / size as f64).cos(), Q1_14).raw() as i32)
            .collect();
        Ok(Self {
            n,
            step: size / (4 * n),
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Q1.14 value of `cos(pi k (i - 1/2) / N)`, `i` 1-based.
    pub fn get(&self, k: usize, i: usize) -> i32 {
        let idx = (k * (2 * i - 1) * self.step) % self.entries.len();
        self.entries[idx]
    }

    pub fn num_inputs(&self) -> usize {
        self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln2_constant() {
        assert_eq!(LN2_Q30, (LN_2 * 2f64.powi(30)).round() as i128);
    }

    #[test]
    fn exact_powers_of_two() {
        let t = Log2Table::new(10).unwrap();
        assert_eq!(t.log2(1, 0), Some(0));
        assert_eq!(t.log2(1 << 20, 0), Some(20 << LOG_FRAC));
        assert_eq!(t.log2(1, 16), Some(-16 << LOG_FRAC));
        assert_eq!(t.log2(0, 0), None);
    }

    #[test]
    fn log2_error_bound_over_every_segment() {
        // Sweep [2^-16, 1) in Q.32: every table segment at every octave, with
        // interior points of each segment.
        for bits in [6u32, 8, 10, 12] {
            let t = Log2Table::new(bits).unwrap();
            let bound = 2f64.powi(-(bits as i32 - 2));
            let mut worst = 0.0f64;
            for octave in 16..32u32 {
                // values 2^octave .. 2^(octave+1) with frac 32 -> [2^-16, 1)
                for seg in 0..(1u128 << bits) {
                    for sub in 0..4u128 {
                        let offset = (seg << (octave - bits)) + ((sub << (octave - bits)) >> 2);
                        let raw = (1u128 << octave) + offset;
                        let got = log_q_to_f64(t.log2(raw, 32).unwrap());
                        let want = (raw as f64 / 2f64.powi(32)).log2();
                        worst = worst.max((got - want).abs());
                    }
                }
            }
            assert!(worst <= bound, "bits {bits}: worst {worst} > {bound}");
        }
    }

    #[test]
    fn ln_matches_float() {
        let t = Log2Table::new(10).unwrap();
        for raw in [3u128, 12345, 1 << 40, 987_654_321_987] {
            let got = log_q_to_f64(t.ln(raw, 20).unwrap());
            let want = (raw as f64 / 2f64.powi(20)).ln();
            assert!((got - want).abs() < 1e-5, "{got} vs {want}");
        }
    }

    #[test]
    fn cosine_table_entries() {
        let t = CosTable::new(26, 104).unwrap();
        for k in 0..13 {
            for i in 1..=26 {
                let want = (PI * k as f64 * (i as f64 - 0.5) / 26.0).cos();
                let got = f64::from(t.get(k, i)) / 16384.0;
                assert!((got - want).abs() <= 0.5 / 16384.0 + 1e-15);
            }
        }
        let doubled = CosTable::new(26, 208).unwrap();
        assert_eq!(doubled.get(5, 7), t.get(5, 7));
        assert!(CosTable::new(26, 100).is_err());
    }
}
