//! Parametric fixed-point numbers.
//!
//! A [`QFormat`] describes a two's-complement (or unsigned) word with a
//! given number of integer and fractional bits; an [`Fx`] is a raw code in
//! such a format. All arithmetic here is exact up to an explicit rescale
//! into a caller-chosen output format, and saturates instead of wrapping.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Widest supported word. Products of two such words still fit in `i128`.
pub const MAX_WIDTH: u32 = 62;

/// Fixed-point layout: optional sign bit, `int_bits` integer bits and
/// `frac_bits` fractional bits.
///
/// * `s3.12` is `[-8, 8 - 2^-12]`
/// * `s.15` is `[-1, 1 - 2^-15]`
/// * `u0.18` is `[0, 1 - 2^-18]`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QFormat {
    signed: bool,
    int_bits: u32,
    frac_bits: u32,
}

impl QFormat {
    pub fn new(signed: bool, int_bits: u32, frac_bits: u32) -> Result<Self> {
        let width = u32::from(signed) + int_bits + frac_bits;
        if width == 0 {
            return Err(Error::InvalidFormat("total width must be at least 1 bit".into()));
        }
        if width > MAX_WIDTH {
            return Err(Error::InvalidFormat(format!(
                "total width {width} exceeds {MAX_WIDTH} bits"
            )));
        }
        Ok(Self {
            signed,
            int_bits,
            frac_bits,
        })
    }

    /// Signed format literal. Panics on an invalid layout.
    pub fn s(int_bits: u32, frac_bits: u32) -> Self {
        Self::new(true, int_bits, frac_bits).expect("valid signed format")
    }

    /// Unsigned format literal. Panics on an invalid layout.
    pub fn u(int_bits: u32, frac_bits: u32) -> Self {
        Self::new(false, int_bits, frac_bits).expect("valid unsigned format")
    }

    pub fn is_signed(&self) -> bool {
        self.signed
    }

    pub fn int_bits(&self) -> u32 {
        self.int_bits
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn width(&self) -> u32 {
        u32::from(self.signed) + self.int_bits + self.frac_bits
    }

    /// Weight of the least significant bit.
    pub fn ulp(&self) -> f64 {
        (-(self.frac_bits as f64)).exp2()
    }

    pub fn max_code(&self) -> i64 {
        (1i64 << (self.int_bits + self.frac_bits)) - 1
    }

    pub fn min_code(&self) -> i64 {
        if self.signed {
            -(1i64 << (self.int_bits + self.frac_bits))
        } else {
            0
        }
    }

    pub fn max_value(&self) -> f64 {
        self.max_code() as f64 * self.ulp()
    }

    pub fn min_value(&self) -> f64 {
        self.min_code() as f64 * self.ulp()
    }

    pub fn contains(&self, code: i128) -> bool {
        code >= i128::from(self.min_code()) && code <= i128::from(self.max_code())
    }

    pub fn saturate(&self, code: i128) -> i64 {
        code.clamp(i128::from(self.min_code()), i128::from(self.max_code())) as i64
    }

    /// True for unsigned formats without integer bits, i.e. values in `[0, 1)`.
    pub fn is_unsigned_fraction(&self) -> bool {
        !self.signed && self.int_bits == 0
    }

    /// The unsigned format with the same integer and fractional bits.
    pub fn unsigned_counterpart(&self) -> QFormat {
        QFormat { signed: false, ..*self }
    }

    /// Every code of the format, in ascending order.
    pub fn codes(&self) -> std::ops::RangeInclusive<i64> {
        self.min_code()..=self.max_code()
    }
}

impl fmt::Display for QFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.signed, self.int_bits) {
            (true, 0) => write!(f, "s.{}", self.frac_bits),
            (true, i) => write!(f, "s{}.{}", i, self.frac_bits),
            (false, i) => write!(f, "u{}.{}", i, self.frac_bits),
        }
    }
}

impl FromStr for QFormat {
    type Err = Error;

    /// Parses `[s|u]<int>.<frac>`; a missing prefix means signed and a
    /// missing integer count means zero.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParseFormat(s.to_string());
        let (signed, rest) = match s.as_bytes().first() {
            Some(b's' | b'S') => (true, &s[1..]),
            Some(b'u' | b'U') => (false, &s[1..]),
            Some(c) if c.is_ascii_digit() || *c == b'.' => (true, s),
            _ => return Err(bad()),
        };
        let (int_part, frac_part) = rest.split_once('.').ok_or_else(bad)?;
        let digits = |t: &str| !t.is_empty() && t.bytes().all(|c| c.is_ascii_digit());
        if !(int_part.is_empty() || digits(int_part)) || !digits(frac_part) {
            return Err(bad());
        }
        let int_bits = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| bad())?
        };
        let frac_bits = frac_part.parse().map_err(|_| bad())?;
        QFormat::new(signed, int_bits, frac_bits)
    }
}

/// Rounding applied whenever low-order bits are discarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RoundMode {
    /// Drop the low bits (round toward negative infinity).
    Truncate,
    #[default]
    NearestEven,
}

impl fmt::Display for RoundMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RoundMode::Truncate => "truncate",
            RoundMode::NearestEven => "nearest-even",
        })
    }
}

/// A fixed-point value: raw code plus its format. `value = code * 2^-frac_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fx {
    code: i64,
    fmt: QFormat,
}

impl Fx {
    pub fn new(code: i64, fmt: QFormat) -> Result<Self> {
        if !fmt.contains(i128::from(code)) {
            return Err(Error::OutOfRange {
                code: i128::from(code),
                fmt,
            });
        }
        Ok(Self { code, fmt })
    }

    /// Builds a value from an arbitrary-width code, saturating into `fmt`.
    pub fn saturating(code: i128, fmt: QFormat) -> Self {
        Self {
            code: fmt.saturate(code),
            fmt,
        }
    }

    pub fn zero(fmt: QFormat) -> Self {
        Self { code: 0, fmt }
    }

    pub fn max(fmt: QFormat) -> Self {
        Self {
            code: fmt.max_code(),
            fmt,
        }
    }

    pub fn min(fmt: QFormat) -> Self {
        Self {
            code: fmt.min_code(),
            fmt,
        }
    }

    pub fn code(&self) -> i64 {
        self.code
    }

    pub fn fmt(&self) -> QFormat {
        self.fmt
    }

    pub fn is_zero(&self) -> bool {
        self.code == 0
    }

    pub fn to_real(&self) -> f64 {
        to_real(*self)
    }

    /// Negation, saturating at the format's most positive code.
    pub fn neg(&self) -> Fx {
        Fx::saturating(-i128::from(self.code), self.fmt)
    }

    /// Code as a `width`-bit two's-complement bit pattern.
    pub fn bit_pattern(&self) -> u64 {
        let w = self.fmt.width();
        (self.code as u64) & (u64::MAX >> (64 - w))
    }
}

impl fmt::Display for Fx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}:{:#x})", self.to_real(), self.fmt, self.bit_pattern())
    }
}

/// Rescales `code` from `from_frac` to `to_frac` fractional bits.
pub(crate) fn rescale(code: i128, from_frac: u32, to_frac: u32, mode: RoundMode) -> i128 {
    if to_frac >= from_frac {
        return code << (to_frac - from_frac);
    }
    let shift = from_frac - to_frac;
    let q = code >> shift;
    match mode {
        RoundMode::Truncate => q,
        RoundMode::NearestEven => {
            let rem = code - (q << shift);
            let half = 1i128 << (shift - 1);
            if rem > half || (rem == half && q & 1 == 1) {
                q + 1
            } else {
                q
            }
        }
    }
}

/// Nearest in-range value to `x` under `mode`; out-of-range inputs saturate
/// and NaN maps to zero.
pub fn quantize(x: f64, fmt: QFormat, mode: RoundMode) -> Fx {
    if x.is_nan() {
        return Fx::zero(fmt);
    }
    let scaled = x * (fmt.frac_bits as f64).exp2();
    let rounded = match mode {
        RoundMode::Truncate => scaled.floor(),
        RoundMode::NearestEven => scaled.round_ties_even(),
    };
    Fx::saturating(rounded as i128, fmt)
}

pub fn to_real(v: Fx) -> f64 {
    v.code as f64 * v.fmt.ulp()
}

/// Rounds `v` into another format.
pub fn requantize(v: Fx, fmt: QFormat, mode: RoundMode) -> Fx {
    let code = rescale(i128::from(v.code), v.fmt.frac_bits, fmt.frac_bits, mode);
    Fx::saturating(code, fmt)
}

/// Fixed-width multiplier: the full double-width product is formed and then
/// rounded once into `out_fmt`.
pub fn mul_fx(a: Fx, b: Fx, out_fmt: QFormat, mode: RoundMode) -> Fx {
    let product = i128::from(a.code) * i128::from(b.code);
    let frac = a.fmt.frac_bits + b.fmt.frac_bits;
    Fx::saturating(rescale(product, frac, out_fmt.frac_bits, mode), out_fmt)
}

fn aligned(a: Fx, b: Fx) -> (i128, i128, u32) {
    let frac = a.fmt.frac_bits.max(b.fmt.frac_bits);
    let ra = i128::from(a.code) << (frac - a.fmt.frac_bits);
    let rb = i128::from(b.code) << (frac - b.fmt.frac_bits);
    (ra, rb, frac)
}

pub fn add_fx(a: Fx, b: Fx, out_fmt: QFormat, mode: RoundMode) -> Fx {
    let (ra, rb, frac) = aligned(a, b);
    Fx::saturating(rescale(ra + rb, frac, out_fmt.frac_bits, mode), out_fmt)
}

pub fn sub_fx(a: Fx, b: Fx, out_fmt: QFormat, mode: RoundMode) -> Fx {
    let (ra, rb, frac) = aligned(a, b);
    Fx::saturating(rescale(ra - rb, frac, out_fmt.frac_bits, mode), out_fmt)
}

/// Multiplies by `2^k` by moving the binary point; the code is unchanged.
pub fn scale_pow2(v: Fx, k: i32) -> Result<Fx> {
    let frac = v.fmt.frac_bits as i64 - i64::from(k);
    if frac < 0 {
        return Err(Error::InvalidFormat(format!(
            "cannot scale {} by 2^{k}: fractional bits would go negative",
            v.fmt
        )));
    }
    let int = (v.fmt.int_bits as i64 + i64::from(k)).max(0);
    let fmt = QFormat::new(v.fmt.signed, int as u32, frac as u32)?;
    Fx::new(v.code, fmt)
}

/// `1 - f` approximated by inverting every bit of `f`. The result is exactly
/// one ulp below the true difference.
pub fn ones_complement_sub1(f: Fx) -> Result<Fx> {
    if !f.fmt.is_unsigned_fraction() {
        return Err(Error::RequiresUnsignedFraction(f.fmt));
    }
    Ok(Fx {
        code: f.fmt.max_code() ^ f.code,
        fmt: f.fmt,
    })
}

/// Splits a signed value into `(is_negative, |x|)`, the magnitude in the
/// unsigned counterpart format. The most negative code saturates to the
/// largest magnitude.
pub fn abs_split(x: Fx) -> Result<(bool, Fx)> {
    if !x.fmt.signed {
        return Err(Error::RequiresSigned(x.fmt));
    }
    let mag_fmt = x.fmt.unsigned_counterpart();
    let mag = Fx::saturating(i128::from(x.code).abs(), mag_fmt);
    Ok((x.code < 0, mag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s3_12() -> QFormat {
        QFormat::s(3, 12)
    }

    #[test]
    fn format_ranges() {
        let f = s3_12();
        assert_eq!(f.width(), 16);
        assert_eq!(f.max_code(), 32767);
        assert_eq!(f.min_code(), -32768);
        assert_eq!(f.min_value(), -8.0);
        assert_eq!(f.max_value(), 8.0 - 2f64.powi(-12));
        let u = QFormat::u(0, 18);
        assert_eq!(u.min_value(), 0.0);
        assert_eq!(u.max_code(), (1 << 18) - 1);
        assert!(QFormat::new(false, 0, 0).is_err());
        assert!(QFormat::new(true, 40, 40).is_err());
        assert!(QFormat::new(true, 0, 0).is_ok());
    }

    #[test]
    fn format_parse_and_display() {
        assert_eq!("s3.12".parse::<QFormat>().unwrap(), QFormat::s(3, 12));
        assert_eq!("s.15".parse::<QFormat>().unwrap(), QFormat::s(0, 15));
        assert_eq!("u0.18".parse::<QFormat>().unwrap(), QFormat::u(0, 18));
        assert_eq!("3.5".parse::<QFormat>().unwrap(), QFormat::s(3, 5));
        for bad in ["x9.9", "s3", "s3.", "s.x", "", "u-1.2", "s3.12.1"] {
            assert!(bad.parse::<QFormat>().is_err(), "{bad} should fail");
        }
        for f in [
            QFormat::s(3, 12),
            QFormat::s(0, 15),
            QFormat::u(0, 18),
            QFormat::u(2, 16),
        ] {
            assert_eq!(f.to_string().parse::<QFormat>().unwrap(), f);
        }
        assert_eq!(QFormat::s(0, 15).to_string(), "s.15");
    }

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize(0.0, s3_12(), RoundMode::NearestEven).code(), 0);
        assert_eq!(quantize(1.0, QFormat::s(0, 15), RoundMode::NearestEven).code(), 32767);
        // floor(0.3 * 4096) = floor(1228.8)
        let v = quantize(0.3, s3_12(), RoundMode::Truncate);
        assert_eq!(v.code(), 1228);
        assert!((v.to_real() - 0.299_805).abs() < 1e-6);
        assert_eq!(quantize(-100.0, s3_12(), RoundMode::NearestEven).code(), -32768);
        assert_eq!(quantize(f64::NAN, s3_12(), RoundMode::NearestEven).code(), 0);
        // ties go to even
        let f = QFormat::s(3, 0);
        assert_eq!(quantize(2.5, f, RoundMode::NearestEven).code(), 2);
        assert_eq!(quantize(3.5, f, RoundMode::NearestEven).code(), 4);
        assert_eq!(quantize(-2.5, f, RoundMode::Truncate).code(), -3);
    }

    #[test]
    fn to_real_examples() {
        assert_eq!(Fx::zero(s3_12()).to_real(), 0.0);
        assert_eq!(Fx::new(4096, s3_12()).unwrap().to_real(), 1.0);
        assert_eq!(Fx::new(-4096, s3_12()).unwrap().to_real(), -1.0);
        assert!(Fx::new(40000, s3_12()).is_err());
    }

    #[test]
    fn mul_examples() {
        let one = Fx::new(1 << 16, QFormat::u(1, 16)).unwrap();
        let v = quantize(0.123_456, QFormat::u(0, 18), RoundMode::NearestEven);
        let out = QFormat::u(0, 16);
        assert_eq!(
            mul_fx(one, v, out, RoundMode::NearestEven),
            requantize(v, out, RoundMode::NearestEven)
        );
        assert!(mul_fx(Fx::zero(out), v, out, RoundMode::Truncate).is_zero());
        let half = Fx::new(1 << 17, QFormat::u(0, 18)).unwrap();
        let q = mul_fx(half, half, QFormat::u(0, 18), RoundMode::NearestEven);
        assert_eq!(q.code(), 65536);
        assert_eq!(q.to_real(), 0.25);
    }

    #[test]
    fn mul_saturates() {
        let a = quantize(7.9, s3_12(), RoundMode::NearestEven);
        let p = mul_fx(a, a, s3_12(), RoundMode::NearestEven);
        assert_eq!(p.code(), s3_12().max_code());
        let n = mul_fx(a, a.neg(), s3_12(), RoundMode::NearestEven);
        assert_eq!(n.code(), s3_12().min_code());
    }

    #[test]
    fn ones_complement_examples() {
        let f = QFormat::u(0, 18);
        let r = ones_complement_sub1(Fx::zero(f)).unwrap();
        assert_eq!(r.code(), (1 << 18) - 1);
        assert!(ones_complement_sub1(Fx::max(f)).unwrap().is_zero());
        let half = Fx::new(1 << 17, f).unwrap();
        assert_eq!(ones_complement_sub1(half).unwrap().to_real(), 0.5 - 2f64.powi(-18));
        assert!(ones_complement_sub1(Fx::zero(QFormat::s(0, 15))).is_err());
        assert!(ones_complement_sub1(Fx::zero(QFormat::u(1, 15))).is_err());
    }

    #[test]
    fn abs_split_examples() {
        let (neg, mag) = abs_split(Fx::zero(s3_12())).unwrap();
        assert!(!neg);
        assert!(mag.is_zero());
        assert_eq!(mag.fmt(), QFormat::u(3, 12));

        let (neg, mag) = abs_split(quantize(-1.5, s3_12(), RoundMode::NearestEven)).unwrap();
        assert!(neg);
        assert_eq!(mag.to_real(), 1.5);

        let (neg, mag) = abs_split(Fx::min(s3_12())).unwrap();
        assert!(neg);
        assert_eq!(mag.to_real(), 8.0 - 2f64.powi(-12));

        assert!(abs_split(Fx::zero(QFormat::u(3, 12))).is_err());
    }

    #[test]
    fn scale_pow2_moves_binary_point() {
        let v = Fx::new(3 << 15, QFormat::u(1, 16)).unwrap();
        let h = scale_pow2(v, -1).unwrap();
        assert_eq!(h.code(), v.code());
        assert_eq!(h.to_real(), v.to_real() / 2.0);
        assert_eq!(h.fmt(), QFormat::u(0, 17));
        assert!(scale_pow2(Fx::zero(QFormat::u(3, 0)), 1).is_err());
    }

    #[test]
    fn round_trip_exhaustive_16_bit() {
        for fmt in [s3_12(), QFormat::s(0, 15), QFormat::u(0, 16)] {
            for code in fmt.codes() {
                let v = Fx::new(code, fmt).unwrap();
                for mode in [RoundMode::Truncate, RoundMode::NearestEven] {
                    assert_eq!(quantize(v.to_real(), fmt, mode), v);
                }
            }
        }
    }

    #[test]
    fn ones_complement_is_truncated_one_minus_f_minus_ulp() {
        let fmt = QFormat::u(0, 12);
        for code in fmt.codes() {
            let f = Fx::new(code, fmt).unwrap();
            let expect = quantize(1.0 - f.to_real() - fmt.ulp(), fmt, RoundMode::Truncate);
            assert_eq!(ones_complement_sub1(f).unwrap(), expect);
        }
    }

    #[test]
    fn abs_split_then_sign_is_identity() {
        let fmt = s3_12();
        for code in fmt.codes() {
            let x = Fx::new(code, fmt).unwrap();
            let (neg, mag) = abs_split(x).unwrap();
            let back = if neg { -mag.code() } else { mag.code() };
            if code == fmt.min_code() {
                assert_eq!(back, -fmt.max_code());
            } else {
                assert_eq!(back, code);
            }
        }
    }

    proptest! {
        #[test]
        fn mul_error_bounds(a in 0i64..(1 << 18), b in 0i64..(1 << 16), frac in 4u32..20) {
            let fa = Fx::new(a, QFormat::u(0, 18)).unwrap();
            let fb = Fx::new(b, QFormat::u(0, 16)).unwrap();
            let out = QFormat::u(1, frac);
            let exact = fa.to_real() * fb.to_real();
            let ulp = out.ulp();
            let ne = mul_fx(fa, fb, out, RoundMode::NearestEven).to_real();
            prop_assert!((ne - exact).abs() <= ulp / 2.0);
            let tr = mul_fx(fa, fb, out, RoundMode::Truncate).to_real();
            prop_assert!(exact - tr >= 0.0 && exact - tr < ulp);
        }

        #[test]
        fn signed_mul_truncates_toward_negative_infinity(a in -32768i64..32768, b in -32768i64..32768) {
            let fa = Fx::new(a, s3_12()).unwrap();
            let fb = Fx::new(b, s3_12()).unwrap();
            let out = QFormat::s(7, 10);
            let exact = fa.to_real() * fb.to_real();
            let tr = mul_fx(fa, fb, out, RoundMode::Truncate).to_real();
            prop_assert!(exact - tr >= 0.0 && exact - tr < out.ulp());
        }

        #[test]
        fn add_sub_are_exact_when_wide_enough(a in -32768i64..32768, b in -32768i64..32768) {
            let fa = Fx::new(a, s3_12()).unwrap();
            let fb = Fx::new(b, QFormat::s(0, 15)).unwrap();
            let out = QFormat::s(4, 15);
            prop_assert_eq!(add_fx(fa, fb, out, RoundMode::Truncate).to_real(), fa.to_real() + fb.to_real());
            prop_assert_eq!(sub_fx(fa, fb, out, RoundMode::Truncate).to_real(), fa.to_real() - fb.to_real());
        }
    }
}
