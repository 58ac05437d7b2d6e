//! Independent reference values in exact rational arithmetic.
//!
//! Nothing here calls into [`crate::bessel`] or [`crate::hyper`]. Polynomial
//! forms are summed exactly. Nonterminating series are summed as
//! midpoint-radius balls over the rationals, with a proven geometric tail.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::bessel::{Direction, Kind};
use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Exact rational value of a finite `f64`.
pub fn rat_from_f64(x: f64) -> Rat {
    Rat::from_float(x).expect("finite float")
}

/// `log2 |x|` for a nonzero rational, accurate to a few ulps.
pub fn log2_abs(x: &Rat) -> f64 {
    let top = |v: &BigInt| -> (f64, i64) {
        let bits = v.bits() as i64;
        let shift = (bits - 60).max(0);
        let lead: BigInt = v.abs() >> shift as usize;
        (lead.to_f64().unwrap_or(f64::NAN), shift)
    };
    let (n, ns) = top(x.numer());
    let (d, ds) = top(x.denom());
    (n / d).log2() + (ns - ds) as f64
}

/// Enclosure `[mid - rad, mid + rad]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HpReal {
    pub mid: Rat,
    pub rad: Rat,
}

impl HpReal {
    pub fn exact(mid: Rat) -> Self {
        HpReal { mid, rad: Rat::zero() }
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64().unwrap_or(f64::NAN)
    }

    pub fn contains(&self, x: &Rat) -> bool {
        (x - &self.mid).abs() <= self.rad
    }

    /// `-log2(rad / |mid|)`; infinite for exact values.
    pub fn precision_bits(&self) -> f64 {
        if self.rad.is_zero() {
            return f64::INFINITY;
        }
        if self.mid.is_zero() {
            return f64::NEG_INFINITY;
        }
        log2_abs(&self.mid) - log2_abs(&self.rad)
    }

    /// Worst-case relative agreement of `x` with every point of the ball, in bits.
    pub fn agreement_bits(&self, x: f64) -> f64 {
        let diff = (rat_from_f64(x) - &self.mid).abs() + &self.rad;
        if diff.is_zero() {
            return f64::INFINITY;
        }
        if self.mid.is_zero() {
            return -log2_abs(&diff);
        }
        log2_abs(&self.mid) - log2_abs(&diff)
    }

    /// Round the midpoint to `bits` significant bits, widening the radius to cover it.
    pub fn rounded(&self, bits: u32) -> HpReal {
        let (mid, err) = round_dyadic(&self.mid, bits);
        HpReal { mid, rad: round_up_dyadic(&(&self.rad + err)) }
    }

    pub fn add(&self, o: &HpReal) -> HpReal {
        HpReal { mid: &self.mid + &o.mid, rad: &self.rad + &o.rad }
    }

    pub fn scale(&self, k: &Rat) -> HpReal {
        HpReal { mid: &self.mid * k, rad: &self.rad * k.abs() }
    }

    /// Distance between two enclosures' worst-case points, in bits relative to `self`.
    pub fn agreement_with(&self, o: &HpReal) -> f64 {
        let diff = (&self.mid - &o.mid).abs() + &self.rad + &o.rad;
        if diff.is_zero() {
            return f64::INFINITY;
        }
        log2_abs(&self.mid) - log2_abs(&diff)
    }
}

/// Round to `bits` significant bits; returns the value and the exact rounding error.
fn round_dyadic(x: &Rat, bits: u32) -> (Rat, Rat) {
    if x.is_zero() {
        return (Rat::zero(), Rat::zero());
    }
    let shift = bits as i64 - log2_abs(x).floor() as i64;
    let (num, den) = shifted_parts(x, shift);
    let (q, r) = num.div_rem(&den);
    let mut m = q;
    if r.abs() * 2u32 >= den {
        m += if num.sign() == Sign::Minus { -1 } else { 1 };
    }
    let out = from_shifted(m, shift);
    let err = (x - &out).abs();
    (out, err)
}

/// Numerator and denominator of `x * 2^shift`, unreduced.
fn shifted_parts(x: &Rat, shift: i64) -> (BigInt, BigInt) {
    if shift >= 0 {
        (x.numer() << shift as usize, x.denom().clone())
    } else {
        (x.numer().clone(), x.denom() << (-shift) as usize)
    }
}

fn from_shifted(m: BigInt, shift: i64) -> Rat {
    if shift >= 0 {
        Rat::new(m, BigInt::one() << shift as usize)
    } else {
        Rat::from_integer(m << (-shift) as usize)
    }
}

/// Smallest 40-bit dyadic rational `>= r` for `r >= 0`; keeps radii cheap to add.
fn round_up_dyadic(r: &Rat) -> Rat {
    if r.is_zero() {
        return Rat::zero();
    }
    let shift = 40 - log2_abs(r).floor() as i64;
    let (num, den) = shifted_parts(r, shift);
    let (q, rem) = num.div_rem(&den);
    from_shifted(if rem.is_zero() { q } else { q + 1 }, shift)
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Exact value of the polynomial form: forward families at `t >= 0`,
/// backward families at `t < 0`. Orders above `|t|` give zero.
pub fn oracle_poly_eval(kind: Kind, direction: Direction, n: u32, t: i64, c: &Rat) -> Result<Rat> {
    let m = match direction {
        Direction::Forward if t >= 0 => t as u64,
        Direction::Backward if t < 0 => t.unsigned_abs(),
        _ => return Err(Error::Precondition(format!("{direction} {kind} at t = {t} is not a polynomial"))),
    };
    let n = n as u64;
    if n > m {
        return Ok(Rat::zero());
    }
    let half = c / Rat::from_integer(2.into());
    let tf = Rat::from_integer(factorial(m));
    let mut sum = Rat::zero();
    for k in 0..=(m - n) / 2 {
        let denom = factorial(k) * factorial(m - 2 * k - n) * factorial(n + k);
        let mut term = &tf / Rat::from_integer(denom) * num_traits::pow::pow(half.clone(), (2 * k + n) as usize);
        let negative = match (kind, direction) {
            (Kind::J, Direction::Forward) => k % 2 == 1,
            (Kind::I, Direction::Forward) => false,
            (Kind::J, Direction::Backward) => (k + n) % 2 == 1,
            (Kind::I, Direction::Backward) => n % 2 == 1,
        };
        if negative {
            term = -term;
        }
        sum += term;
    }
    Ok(sum)
}

const ORACLE_MAX_TERMS: usize = 200_000;

/// Ball sum of `2F1(a, b; g; w)` for rational `w` in `(-1, 1)`, stopping once the
/// proven tail is below `2^-bits` relative to the partial sum.
fn ball_series(a: &Rat, b: &Rat, g: &Rat, w: &Rat, bits: u32) -> Result<HpReal> {
    let work = bits + 64;
    let one = Rat::one();
    let mut term = HpReal::exact(one.clone());
    let mut sum = HpReal::exact(one.clone());
    let mut k = Rat::zero();
    for _ in 0..ORACLE_MAX_TERMS {
        let ratio = (a + &k) * (b + &k) / ((g + &k) * (&k + &one)) * w;
        term = term.scale(&ratio).rounded(work);
        k += &one;
        if term.mid.is_zero() && term.rad.is_zero() {
            return Ok(sum.rounded(work));
        }
        // term now holds index k; bound everything from index k on
        let positive = (a + &k).is_positive() && (b + &k).is_positive() && (g + &k).is_positive();
        // cheap float screen before the exact tail bound
        let near = term.mid.is_zero()
            || sum.mid.is_zero()
            || log2_abs(&term.mid) - log2_abs(&sum.mid) < 8.0 - bits as f64;
        if positive && near && !sum.mid.is_zero() {
            let f1 = ((a + &k) / (&k + &one)).max(one.clone());
            let f2 = ((b + &k) / (g + &k)).max(one.clone());
            let rho = w.abs() * f1 * f2;
            if rho < one {
                let tail = (term.mid.abs() + &term.rad) / (&one - &rho);
                let rel = &tail / sum.mid.abs();
                if !rel.is_zero() && log2_abs(&rel) < -(bits as f64) {
                    return Ok(HpReal { mid: sum.mid, rad: sum.rad + tail }.rounded(work));
                }
            }
        }
        sum = sum.add(&term);
    }
    Err(Error::Convergence { partial: sum.to_f64(), terms: ORACLE_MAX_TERMS })
}

/// Backward family at `t >= 0` to about `precision_bits` bits.
///
/// Backward `J` uses the Pfaff map with the integer one of `(n+t)/2` and
/// `(n+t+1)/2` as the prefactor exponent, so every quantity stays rational.
/// Backward `I` sums its all-positive series at `c^2` directly.
pub fn oracle_backward_series(kind: Kind, n: u32, t: i64, c: &Rat, precision_bits: u32) -> Result<HpReal> {
    if t < 0 {
        return Err(Error::Precondition(format!("backward series needs t >= 0, got {t}")));
    }
    if c.is_zero() {
        return Err(Error::Domain("c must be nonzero".into()));
    }
    let one = Rat::one();
    if kind == Kind::I && c.abs() >= one {
        return Err(Error::Domain("backward I needs |c| < 1".into()));
    }
    let (n, t) = (n as i64, t);
    if t == 0 {
        return Ok(HpReal::exact(if n == 0 { one } else { Rat::zero() }));
    }
    let two = Rat::from_integer(2.into());
    let mut pref = num_traits::pow::pow(c / &two, n as usize);
    for j in 1..=n {
        pref = pref * rat(t + j - 1, j);
    }
    let c2 = c * c;
    let g = Rat::from_integer((n + 1).into());
    let s = match kind {
        Kind::I => {
            let a = rat(n + t, 2);
            let b = &a + rat(1, 2);
            ball_series(&a, &b, &g, &c2, precision_bits)?
        }
        Kind::J => {
            // F(A, A+1/2; g; -c^2) with A = (n+t)/2; take `a` as the integer of A, A+1/2
            let a = Rat::from_integer(((n + t + 1) / 2).into());
            let b = if (n + t) % 2 == 0 { &a + rat(1, 2) } else { &a - rat(1, 2) };
            let w = &c2 / (&one + &c2);
            let pfaff = num_traits::pow::pow(&one / (&one + &c2), a.to_integer().to_usize().expect("small exponent"));
            ball_series(&a, &(&g - &b), &g, &w, precision_bits)?.scale(&pfaff)
        }
    };
    Ok(s.scale(&pref).rounded(precision_bits + 64))
}

/// Whether the backward family vanishes exactly at `t`. Negative `t` is
/// decided by the polynomial; otherwise the ball must contain zero with a
/// radius below `2^-150`.
pub fn backward_certified_zero(kind: Kind, n: u32, t: i64, c: &Rat) -> Result<bool> {
    if t < 0 {
        return Ok(oracle_poly_eval(kind, Direction::Backward, n, t, c)?.is_zero());
    }
    let ball = oracle_backward_series(kind, n, t, c, 160)?;
    Ok(ball.contains(&Rat::zero()) && (ball.rad.is_zero() || log2_abs(&ball.rad) < -150.0))
}

/// March the backward recurrence
/// `s(s+1)(1 +- c^2) y(s+2) = s(2s+1) y(s+1) + (n^2 - s^2) y(s)` from
/// `y(1)` and `y(2)` up to `y(t_max)`; element `i` is `y(i+1)`.
///
/// The step at `s = 0` has a vanishing leading coefficient, so the march
/// needs both seeds at `t = 1, 2`. The radius is propagated through absolute
/// values, which for the oscillating `J` family costs roughly one bit per
/// step; supply seeds and `precision_bits` at several times the target.
pub fn oracle_recurrence_extend(
    kind: Kind,
    n: u32,
    c: &Rat,
    y1: &HpReal,
    y2: &HpReal,
    t_max: u64,
    precision_bits: u32,
) -> Vec<HpReal> {
    let mut out = vec![y1.clone(), y2.clone()];
    let one = Rat::one();
    let c2 = c * c;
    let k = match kind {
        Kind::J => &one + &c2,
        Kind::I => &one - &c2,
    };
    let n2 = Rat::from_integer((n as i64 * n as i64).into());
    let work = precision_bits + 64;
    let mut s = 1i64;
    while (out.len() as u64) < t_max {
        let sr = Rat::from_integer(s.into());
        let den = &sr * (&sr + &one) * &k;
        let a = &sr * (&sr + &sr + &one) / &den;
        let b = (&n2 - &sr * &sr) / &den;
        let len = out.len();
        let next = out[len - 1].scale(&a).add(&out[len - 2].scale(&b)).rounded(work);
        out.push(next);
        s += 1;
    }
    out.truncate(t_max as usize);
    out
}

/// Exact residual of the expanded forward equation
/// `(t^2-n^2) y(t) - t(2t-1) y(t-1) + t(t-1)(1 +- c^2) y(t-2)` at `t >= 0`.
pub fn oracle_residual_forward(kind: Kind, n: u32, t: i64, c: &Rat) -> Result<Rat> {
    if t < 0 {
        return Err(Error::Precondition(format!("forward residual needs t >= 0, got {t}")));
    }
    let one = Rat::one();
    let tr = Rat::from_integer(t.into());
    let c2 = c * c;
    let k = match kind {
        Kind::J => &one + &c2,
        Kind::I => &one - &c2,
    };
    let n2 = Rat::from_integer((n as i64 * n as i64).into());
    let mut out = (&tr * &tr - n2) * oracle_poly_eval(kind, Direction::Forward, n, t, c)?;
    if t >= 1 {
        out -= &tr * (&tr + &tr - &one) * oracle_poly_eval(kind, Direction::Forward, n, t - 1, c)?;
    }
    if t >= 2 {
        out += &tr * (&tr - &one) * k * oracle_poly_eval(kind, Direction::Forward, n, t - 2, c)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_examples() {
        assert_eq!(oracle_poly_eval(Kind::J, Direction::Forward, 0, 2, &rat(1, 1)).unwrap(), rat(1, 2));
        assert_eq!(oracle_poly_eval(Kind::J, Direction::Forward, 1, 2, &rat(1, 1)).unwrap(), rat(1, 1));
        assert_eq!(oracle_poly_eval(Kind::I, Direction::Forward, 0, 0, &rat(7, 3)).unwrap(), rat(1, 1));
        assert_eq!(oracle_poly_eval(Kind::J, Direction::Backward, 1, -2, &rat(1, 1)).unwrap(), rat(-1, 1));
        assert!(oracle_poly_eval(Kind::J, Direction::Forward, 0, -2, &rat(1, 1)).is_err());
    }

    #[test]
    fn series_examples() {
        let v = oracle_backward_series(Kind::J, 0, 1, &rat(1, 1), 100).unwrap();
        // 2^(-1/2): check v^2 = 1/2 inside the enclosure squared
        assert!(v.precision_bits() > 100.0);
        let sq = &v.mid * &v.mid;
        assert!(log2_abs(&(sq - rat(1, 2))) < -99.0);
        let v = oracle_backward_series(Kind::I, 0, 2, &rat(1, 2), 100).unwrap();
        // (3/4)^(-3/2): v^2 = 64/27
        assert!(log2_abs(&(&v.mid * &v.mid - rat(64, 27))) < -95.0);
        let v = oracle_backward_series(Kind::J, 0, 0, &rat(5, 7), 100).unwrap();
        assert_eq!(v, HpReal::exact(rat(1, 1)));
        assert!(oracle_backward_series(Kind::I, 0, 2, &rat(1, 1), 100).is_err());
    }

    #[test]
    fn recurrence_examples() {
        let c = rat(1, 2);
        let seed = |t| oracle_backward_series(Kind::I, 0, t, &c, 200).unwrap();
        let ys = oracle_recurrence_extend(Kind::I, 0, &c, &seed(1), &seed(2), 4, 200);
        assert_eq!(ys.len(), 4);
        // y(3) = (3/4)^(-5/2) (1 + 1/8); y(3)^2 = (4/3)^5 (9/8)^2
        let target = num_traits::pow::pow(rat(4, 3), 5) * rat(81, 64);
        assert!(log2_abs(&(&ys[2].mid * &ys[2].mid - target)) < -150.0);
        let c = rat(1, 1);
        let seed = |t| oracle_backward_series(Kind::J, 0, t, &c, 200).unwrap();
        let ys = oracle_recurrence_extend(Kind::J, 0, &c, &seed(1), &seed(2), 10, 200);
        for (i, y) in ys.iter().enumerate() {
            let direct = oracle_backward_series(Kind::J, 0, i as i64 + 1, &c, 200).unwrap();
            assert!(y.agreement_with(&direct) > 180.0, "t={}", i + 1);
        }
    }

    #[test]
    fn forward_residual_is_exactly_zero() {
        assert!(oracle_residual_forward(Kind::J, 2, 2, &rat(1, 1)).unwrap().is_zero());
        for n in 0..6 {
            for t in 0..20 {
                for c in [rat(1, 3), rat(-5, 2)] {
                    assert!(oracle_residual_forward(Kind::J, n, t, &c).unwrap().is_zero());
                    assert!(oracle_residual_forward(Kind::I, n, t, &c).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn rounding_keeps_enclosure() {
        let x = rat(1, 3);
        let b = HpReal::exact(x.clone()).rounded(80);
        assert!(b.contains(&x));
        assert!(b.precision_bits() > 79.0);
        assert!(HpReal::exact(rat(-7, 5)).rounded(60).contains(&rat(-7, 5)));
    }
}
