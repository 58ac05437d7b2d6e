//! Small numeric building blocks shared by the evaluators.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// A real number stored as `mantissa * 2^exp2`.
///
/// Discrete Bessel values overflow or underflow `f64` long before the
/// asymptotic regime is reached (e.g. `1.5^5000`), so the evaluators carry an
/// explicit binary scale. Integral `exp2` values come from exact rescaling and
/// convert back without rounding; fractional ones come from logarithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub exp2: f64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled { mantissa: 0.0, exp2: 0.0 };

    pub fn new(mantissa: f64, exp2: f64) -> Self {
        if mantissa == 0.0 {
            return Self::ZERO;
        }
        Scaled { mantissa, exp2 }
    }

    pub fn from_f64(x: f64) -> Self {
        Scaled::new(x, 0.0)
    }

    /// Build from a sign and the natural log of the magnitude.
    pub fn from_ln(sign: f64, ln_abs: f64) -> Self {
        if sign == 0.0 || ln_abs == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let e = (ln_abs / std::f64::consts::LN_2).floor();
        let m = (ln_abs - e * std::f64::consts::LN_2).exp();
        Scaled { mantissa: sign.signum() * m, exp2: e }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    pub fn signum(&self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa.signum()
        }
    }

    /// Natural log of `|self|` (`-inf` for zero).
    pub fn ln_abs(&self) -> f64 {
        if self.mantissa == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.mantissa.abs().ln() + self.exp2 * std::f64::consts::LN_2
        }
    }

    /// Nearest `f64`; saturates to `±inf` or `0` outside the representable range.
    pub fn to_f64(&self) -> f64 {
        if self.mantissa == 0.0 || self.exp2 == 0.0 {
            return self.mantissa;
        }
        self.mantissa * pow2(self.exp2)
    }

    /// `self / other` as a plain number; meaningful whenever the ratio itself is representable.
    pub fn ratio(&self, other: &Scaled) -> f64 {
        (self.mantissa / other.mantissa) * pow2(self.exp2 - other.exp2)
    }

    pub fn mul(&self, other: &Scaled) -> Scaled {
        Scaled::new(self.mantissa * other.mantissa, self.exp2 + other.exp2).normalized()
    }

    pub fn scale_by(&self, factor: f64) -> Scaled {
        Scaled::new(self.mantissa * factor, self.exp2).normalized()
    }

    pub fn neg(&self) -> Scaled {
        Scaled::new(-self.mantissa, self.exp2)
    }

    pub fn abs(&self) -> Scaled {
        Scaled::new(self.mantissa.abs(), self.exp2)
    }

    /// Bring the mantissa back near unit magnitude using exact power-of-two steps.
    pub fn normalized(&self) -> Scaled {
        if self.mantissa == 0.0 || !self.mantissa.is_finite() {
            return *self;
        }
        let e = binary_exponent(self.mantissa);
        if e.abs() < 256 {
            return *self;
        }
        Scaled::new(self.mantissa * pow2(-(e as f64)), self.exp2 + e as f64)
    }
}

/// `2^e`, exact for integral `e` whenever the result is a normal number.
pub(crate) fn pow2(e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() <= 2000.0 {
        let k = e as i32;
        let half = k / 2;
        2f64.powi(half) * 2f64.powi(k - half)
    } else {
        e.exp2()
    }
}

/// `floor(log2 |x|)` for a finite nonzero `x`.
pub(crate) fn binary_exponent(x: f64) -> i64 {
    x.abs().log2().floor() as i64
}

/// Residual of an identity together with the magnitude it should be judged against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub value: f64,
    /// Largest magnitude among the individual products that make up the identity.
    pub scale: f64,
}

impl Residual {
    /// Build from the signed products whose sum should vanish.
    pub fn from_terms(terms: &[f64]) -> Self {
        let value = terms.iter().sum();
        let scale = terms.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        Residual { value, scale }
    }

    /// `|value| / scale`, with the absolute value when every term vanished.
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.value.abs()
        } else {
            self.value.abs() / self.scale
        }
    }
}

/// Arithmetic shared by the `f64` and double-double evaluation paths.
pub(crate) trait Field:
    Copy
    + PartialOrd
    + From<f64>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn sqrt(self) -> Self;
    fn to_f64(self) -> f64;
    /// Multiply by `2^k` (exact barring underflow).
    fn ldexp(self, k: i64) -> Self {
        self * Self::from(pow2(k as f64))
    }
}

impl Field for f64 {
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl Field for Dd {
    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::from(0.0);
        }
        let s = self.hi.sqrt();
        let (p, e) = two_prod(s, s);
        let r = ((self.hi - p) - e) + self.lo;
        fast_two_sum(s, r / (2.0 * s))
    }
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Unevaluated sum `hi + lo` carrying about 106 significant bits.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn fast_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        match self.hi.partial_cmp(&o.hi) {
            Some(std::cmp::Ordering::Equal) => self.lo.partial_cmp(&o.lo),
            other => other,
        }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let r = fast_two_sum(s, e + t);
        fast_two_sum(r.hi, r.lo + f)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        fast_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::from(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::from(q2);
        let q3 = r.hi / o.hi;
        fast_two_sum(q1, q2) + Dd::from(q3)
    }
}

/// `m * 2^e` with an exactly tracked integer exponent, for intermediate
/// products whose magnitude leaves the `f64` range.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Wide<T> {
    pub m: T,
    pub e: i64,
}

const WIDE_LIMIT: i64 = 300;

impl<T: Field> Wide<T> {
    pub fn new(m: T) -> Self {
        Wide { m, e: 0 }.norm()
    }

    pub fn norm(self) -> Self {
        let hi = self.m.to_f64();
        if hi == 0.0 || !hi.is_finite() {
            return self;
        }
        let k = binary_exponent(hi);
        if k.abs() < WIDE_LIMIT {
            return self;
        }
        Wide { m: self.m.ldexp(-k), e: self.e + k }
    }

    pub fn mul(self, x: T) -> Self {
        Wide { m: self.m * x, e: self.e }.norm()
    }

    pub fn mul_wide(self, o: Wide<T>) -> Self {
        Wide { m: self.m * o.m, e: self.e + o.e }.norm()
    }

    /// `x^k` by repeated squaring, rescaling as it goes.
    pub fn powi(x: T, k: u64) -> Self {
        let mut base = Wide::new(x);
        let mut acc = Wide::new(T::from(1.0));
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul_wide(base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul_wide(base);
            }
        }
        acc
    }

    /// `x^p` for `x > 0` and `p` an integer or half-integer.
    pub fn pow_half(x: T, p: f64) -> Self {
        debug_assert!(is_half_integer(p));
        let whole = p.abs().floor() as u64;
        let mut out = Wide::powi(x, whole);
        if p.abs() != p.abs().floor() {
            out = out.mul(x.sqrt());
        }
        if p < 0.0 {
            Wide { m: T::from(1.0) / out.m, e: -out.e }.norm()
        } else {
            out
        }
    }

    pub fn to_scaled(self) -> Scaled {
        Scaled::new(self.m.to_f64(), self.e as f64).normalized()
    }
}

/// Whether `x` is an integer or half-integer of moderate size.
pub(crate) fn is_half_integer(x: f64) -> bool {
    let twice = 2.0 * x;
    twice == twice.round() && twice.abs() < 1e9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_round_trip_and_ratio() {
        let a = Scaled::new(3.0, 1000.0);
        let b = Scaled::new(1.5, 999.0);
        assert_eq!(a.ratio(&b), 4.0);
        assert_eq!(Scaled::from_f64(2.5).to_f64(), 2.5);
        assert_eq!(a.to_f64(), 3.0 * 2f64.powi(1000));
        assert_eq!(Scaled::new(1.0, 5000.0).to_f64(), f64::INFINITY);
        let n = Scaled::new(1e300, 0.0).normalized();
        assert_eq!(n.to_f64(), 1e300);
        let l = Scaled::from_ln(-1.0, 10.0);
        assert!((l.to_f64() + 10f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn residual_relative_uses_largest_term() {
        let r = Residual::from_terms(&[1e6, -1e6, 1e-4]);
        assert!((r.relative() - 1e-10).abs() < 1e-20);
        assert_eq!(Residual::from_terms(&[0.0, 0.0]).relative(), 0.0);
    }

    #[test]
    fn wide_powers_stay_exact_under_rescaling() {
        let w = Wide::<f64>::powi(2.0, 3000);
        assert_eq!(w.m * pow2((w.e - 3000) as f64), 1.0);
        let h = Wide::<f64>::pow_half(4.0, -1.5);
        assert_eq!(h.to_scaled().to_f64(), 0.125);
        let d = Wide::<Dd>::pow_half(Dd::from(2.0), 0.5);
        let back = d.m * d.m - Dd::from(2.0);
        assert!(back.to_f64().abs() < 1e-30);
    }

    #[test]
    fn double_double_arithmetic_keeps_106_bits() {
        let third = Dd::from(1.0) / Dd::from(3.0);
        let err = third * Dd::from(3.0) - Dd::from(1.0);
        assert!(err.to_f64().abs() < 1e-31);
        let a = Dd::from(-5.302188637743093);
        let q = a / (a - Dd::from(1.0));
        let back = q * (a - Dd::from(1.0)) - a;
        assert!(back.to_f64().abs() < 1e-30);
        let s = (Dd::from(1.0) + Dd::from(1e-20)) - Dd::from(1.0);
        assert!((s.to_f64() - 1e-20).abs() < 1e-35);
    }
}
