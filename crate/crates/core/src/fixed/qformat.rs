//! Signed Qm.n values with round-half-to-even and saturating arithmetic.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QFormat {
    pub int_bits: u32,
    pub frac_bits: u32,
}

impl QFormat {
    /// Total width, sign bit included, must not exceed 64.
    pub const fn new(int_bits: u32, frac_bits: u32) -> Self {
        assert!(int_bits + frac_bits < 64, "Q format wider than 64 bits");
        Self { int_bits, frac_bits }
    }

    pub const fn max_raw(self) -> i64 {
        ((1u64 << (self.int_bits + self.frac_bits)) - 1) as i64
    }

    pub const fn min_raw(self) -> i64 {
        -(1i64 << (self.int_bits + self.frac_bits))
    }

    pub fn lsb(self) -> f64 {
        (-f64::from(self.frac_bits)).exp2()
    }

    pub fn saturate(self, raw: i128) -> (i64, bool) {
        if raw > i128::from(self.max_raw()) {
            (self.max_raw(), true)
        } else if raw < i128::from(self.min_raw()) {
            (self.min_raw(), true)
        } else {
            (raw as i64, false)
        }
    }
}

impl fmt::Display for QFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}.{}", self.int_bits, self.frac_bits)
    }
}

/// Q0.15, the 16-bit sample format.
pub const Q15: QFormat = QFormat::new(0, 15);
/// Q16.15, 32-bit spectrum data.
pub const Q16_15: QFormat = QFormat::new(16, 15);
/// Q1.14, cosine table entries.
pub const Q1_14: QFormat = QFormat::new(1, 14);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QValue {
    raw: i64,
    format: QFormat,
}

impl QValue {
    /// Panics if `raw` is outside the format's range.
    pub fn from_raw(raw: i64, format: QFormat) -> Self {
        assert!(
            (format.min_raw()..=format.max_raw()).contains(&raw),
            "raw {raw} outside {format}"
        );
        Self { raw, format }
    }

    pub fn raw(self) -> i64 {
        self.raw
    }

    pub fn format(self) -> QFormat {
        self.format
    }

    pub fn to_f64(self) -> f64 {
        self.raw as f64 * self.format.lsb()
    }
}

/// `v / 2^shift`, rounded to nearest with ties to even.
pub fn round_shift(v: i128, shift: u32) -> i128 {
    if shift == 0 {
        return v;
    }
    let q = v >> shift;
    let rem = v - (q << shift);
    let half = 1i128 << (shift - 1);
    if rem > half || (rem == half && q & 1 == 1) {
        q + 1
    } else {
        q
    }
}

/// Nearest representable value (ties to even), saturating at the format
/// bounds. NaN maps to zero.
pub fn quantize(x: f64, format: QFormat) -> QValue {
    if x.is_nan() {
        return QValue { raw: 0, format };
    }
    let scaled = (x * f64::from(format.frac_bits).exp2()).round_ties_even();
    let raw = if scaled >= format.max_raw() as f64 {
        format.max_raw()
    } else if scaled <= format.min_raw() as f64 {
        format.min_raw()
    } else {
        scaled as i64
    };
    QValue { raw, format }
}

pub fn dequantize(q: QValue) -> f64 {
    q.to_f64()
}

/// Full-width product rounded into `out`, saturating.
pub fn q_mul(a: QValue, b: QValue, out: QFormat) -> QValue {
    let product = i128::from(a.raw) * i128::from(b.raw);
    let frac = a.format.frac_bits + b.format.frac_bits;
    let aligned = if frac >= out.frac_bits {
        round_shift(product, frac - out.frac_bits)
    } else {
        product << (out.frac_bits - frac)
    };
    QValue {
        raw: out.saturate(aligned).0,
        format: out,
    }
}

/// Saturating sum; both operands must share a format.
pub fn q_add(a: QValue, b: QValue) -> QValue {
    assert_eq!(a.format, b.format, "q_add operands differ in format");
    QValue {
        raw: a.format.saturate(i128::from(a.raw) + i128::from(b.raw)).0,
        format: a.format,
    }
}

pub fn q_sub(a: QValue, b: QValue) -> QValue {
    assert_eq!(a.format, b.format, "q_sub operands differ in format");
    QValue {
        raw: a.format.saturate(i128::from(a.raw) - i128::from(b.raw)).0,
        format: a.format,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize(0.5, Q15).raw(), 16384);
        assert_eq!(quantize(1.0, Q15).raw(), 32767);
        assert_eq!(quantize(-1.0, Q15).raw(), -32768);
        assert_eq!(quantize(-7.0, Q15).raw(), -32768);
        assert_eq!(quantize(f64::NAN, Q15).raw(), 0);
        // ties to even: 1.5 and 2.5 LSB
        assert_eq!(quantize(1.5 * Q15.lsb(), Q15).raw(), 2);
        assert_eq!(quantize(2.5 * Q15.lsb(), Q15).raw(), 2);
    }

    #[test]
    fn round_shift_ties_to_even() {
        assert_eq!(round_shift(3, 1), 2); // 1.5 -> 2
        assert_eq!(round_shift(5, 1), 2); // 2.5 -> 2
        assert_eq!(round_shift(-3, 1), -2); // -1.5 -> -2
        assert_eq!(round_shift(-5, 1), -2); // -2.5 -> -2
        assert_eq!(round_shift(7, 2), 2); // 1.75 -> 2
    }

    #[test]
    fn q_mul_examples() {
        let half = quantize(0.5, Q15);
        assert_eq!(q_mul(half, half, Q15).to_f64(), 0.25);
        let p = q_mul(quantize(0.9, Q15), quantize(0.9, Q15), Q15).to_f64();
        assert!((p - 0.81).abs() <= Q15.lsb());
        let x = quantize(-0.3, Q15);
        assert_eq!(q_mul(x, quantize(0.0, Q15), Q15).raw(), 0);
        // -1 * -1 saturates in Q0.15
        let m = quantize(-1.0, Q15);
        assert_eq!(q_mul(m, m, Q15).raw(), Q15.max_raw());
    }

    proptest! {
        #[test]
        fn quantize_dequantize_round_trip(raw in Q16_15.min_raw()..=Q16_15.max_raw()) {
            let q = QValue::from_raw(raw, Q16_15);
            prop_assert_eq!(quantize(dequantize(q), Q16_15), q);
        }

        #[test]
        fn arithmetic_never_wraps(a in any::<i16>(), b in any::<i16>(), c in any::<i32>(), d in any::<i32>()) {
            let (a, b) = (QValue::from_raw(a.into(), Q15), QValue::from_raw(b.into(), Q15));
            let exact_sum = a.raw() + b.raw();
            let s = q_add(a, b).raw();
            prop_assert_eq!(s, exact_sum.clamp(Q15.min_raw(), Q15.max_raw()));
            let diff = q_sub(a, b).raw();
            prop_assert_eq!(diff, (a.raw() - b.raw()).clamp(Q15.min_raw(), Q15.max_raw()));

            let wide = QFormat::new(31, 0);
            let (c, d) = (QValue::from_raw(c.into(), wide), QValue::from_raw(d.into(), wide));
            let p = q_mul(c, d, wide).raw();
            let exact = i128::from(c.raw()) * i128::from(d.raw());
            prop_assert_eq!(i128::from(p), exact.clamp(wide.min_raw().into(), wide.max_raw().into()));
        }

        #[test]
        fn q_mul_error_is_half_lsb(a in any::<i16>(), b in any::<i16>()) {
            let (a, b) = (QValue::from_raw(a.into(), Q15), QValue::from_raw(b.into(), Q15));
            let exact = a.to_f64() * b.to_f64();
            let got = q_mul(a, b, Q15).to_f64();
            if exact < 1.0 - Q15.lsb() {
                prop_assert!((got - exact).abs() <= 0.5 * Q15.lsb());
            }
        }
    }
}
