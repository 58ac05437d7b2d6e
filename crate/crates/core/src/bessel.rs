//! The four discrete Bessel families.
//!
//! Forward families solve the forward-difference Bessel equation and are
//! polynomials in `c` for `t >= 0`; backward families solve the
//! backward-difference equation and are polynomials for `t < 0`. Each
//! direction at negative `t` is the other direction reflected:
//! `J_n(t) = (-1)^n Jbar_n(-t)` and likewise for `I`.
//!
//! Evaluation routes, for `t >= 0` in the family's own direction:
//!
//! * forward, `t <= n + 80`: polynomial summed in double-double;
//! * forward `I` beyond that: the same all-positive polynomial in `f64` with rescaling;
//! * forward `J` beyond that: three-term recurrence seeded from the polynomial;
//! * backward `J`, `t <= n + 40`: Pfaff-mapped series in double-double,
//!   then the recurrence;
//! * backward `I`: the direct series at `c^2`, whose terms are all positive.
//!
//! The recurrences for `J` in either direction have two solutions of equal
//! growth, so marching in `f64` keeps relative-to-envelope accuracy.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyper::{self, Hyp2F1Request};
use crate::numeric::{pow2, Dd, Field, Residual, Scaled, Wide};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Kind {
    J,
    I,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

impl FromStr for Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "J" | "j" => Ok(Kind::J),
            "I" | "i" => Ok(Kind::I),
            _ => Err(Error::Config(format!("unknown kind {s:?}, expected J or I"))),
        }
    }
}

impl FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "forward" => Ok(Direction::Forward),
            "backward" => Ok(Direction::Backward),
            _ => Err(Error::Config(format!("unknown direction {s:?}, expected forward or backward"))),
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::J => "J",
            Kind::I => "I",
        })
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        })
    }
}

/// Family, order and parameter of one discrete Bessel function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesselSpec {
    pub kind: Kind,
    pub direction: Direction,
    pub n: u32,
    pub c: f64,
}

impl BesselSpec {
    pub fn new(kind: Kind, direction: Direction, n: u32, c: f64) -> Result<Self> {
        let spec = BesselSpec { kind, direction, n, c };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.c.is_finite() || self.c == 0.0 {
            return Err(Error::Domain(format!("c must be finite and nonzero, got {}", self.c)));
        }
        if self.kind == Kind::I && self.direction == Direction::Backward && self.c.abs() >= 1.0 {
            return Err(Error::Domain(format!("backward I needs |c| < 1, got c = {}", self.c)));
        }
        Ok(())
    }

    pub fn with_order(&self, n: u32) -> BesselSpec {
        BesselSpec { n, ..*self }
    }

    pub fn with_direction(&self, direction: Direction) -> BesselSpec {
        BesselSpec { direction, ..*self }
    }
}

/// How a value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    Polynomial,
    PfaffSeries,
    Series,
    Recurrence,
    Reflection,
    Zero,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Polynomial => "polynomial",
            Method::PfaffSeries => "pfaff-series",
            Method::Series => "series",
            Method::Recurrence => "recurrence",
            Method::Reflection => "reflection",
            Method::Zero => "zero",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            Method::Polynomial,
            Method::PfaffSeries,
            Method::Series,
            Method::Recurrence,
            Method::Reflection,
            Method::Zero,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
        .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

/// A value with its provenance and an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub scaled: Scaled,
    pub method: Method,
    pub est_error: f64,
}

impl Evaluation {
    fn zero() -> Self {
        Evaluation { value: 0.0, scaled: Scaled::ZERO, method: Method::Zero, est_error: 0.0 }
    }

    fn from_scaled(scaled: Scaled, method: Method, rel_error: f64) -> Self {
        let value = scaled.to_f64();
        Evaluation { value, scaled, method, est_error: rel_error * value.abs() }
    }
}

const FORWARD_POLY_SPAN: u64 = 80;
const BACKWARD_SERIES_SPAN: u64 = 40;
const POSITIVE_DD_SPAN: u64 = 200;
const DD_TOL: f64 = 1e-30;
const DD_EPS: f64 = 1e-31;
const EPS: f64 = f64::EPSILON;

pub fn eval(spec: &BesselSpec, t: i64) -> Result<f64> {
    Ok(eval_detailed(spec, t)?.value)
}

/// Overflow-safe value, for arguments where the function leaves the `f64` range.
pub fn eval_scaled(spec: &BesselSpec, t: i64) -> Result<Scaled> {
    Ok(eval_detailed(spec, t)?.scaled)
}

pub fn eval_detailed(spec: &BesselSpec, t: i64) -> Result<Evaluation> {
    spec.validate()?;
    if t >= 0 {
        return own_direction(spec, t as u64);
    }
    let m = t.unsigned_abs();
    let other = spec.with_direction(spec.direction.flip());
    other
        .validate()
        .map_err(|_| Error::Domain(format!("{} I at t = {t} reflects to backward I, which needs |c| < 1", spec.direction)))?;
    let inner = own_direction(&other, m)?;
    let sign = parity(spec.n);
    Ok(Evaluation {
        value: sign * inner.value,
        scaled: inner.scaled.scale_by(sign),
        method: Method::Reflection,
        est_error: inner.est_error,
    })
}

/// Values at `t0..=t1`, sharing one recurrence march where the recurrence is used.
pub fn sequence(spec: &BesselSpec, t0: i64, t1: i64) -> Result<Vec<Evaluation>> {
    spec.validate()?;
    let mut out = Vec::with_capacity((t1 - t0 + 1).max(0) as usize);
    let mut marcher: Option<Marcher> = None;
    for t in t0..=t1 {
        let threshold = recurrence_start(spec);
        match threshold {
            Some(start) if t >= 0 && t as u64 > start => {
                let m = match marcher.as_mut() {
                    Some(m) if m.t < t as u64 => m,
                    _ => marcher.insert(Marcher::seeded(spec)?),
                };
                while m.t < t as u64 {
                    m.advance();
                }
                out.push(m.evaluation());
            }
            _ => out.push(eval_detailed(spec, t)?),
        }
    }
    Ok(out)
}

fn parity(n: u32) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Last `t` evaluated directly before the recurrence takes over, if the family uses one.
fn recurrence_start(spec: &BesselSpec) -> Option<u64> {
    let n = spec.n as u64;
    match (spec.kind, spec.direction) {
        (Kind::J, Direction::Forward) => Some(n + FORWARD_POLY_SPAN),
        (Kind::J, Direction::Backward) => Some(n + BACKWARD_SERIES_SPAN),
        _ => None,
    }
}

fn own_direction(spec: &BesselSpec, t: u64) -> Result<Evaluation> {
    let n = spec.n as u64;
    match spec.direction {
        Direction::Forward => {
            if n > t {
                return Ok(Evaluation::zero());
            }
            if t <= n + FORWARD_POLY_SPAN {
                let (w, cond) = forward_poly::<Dd>(spec.kind, spec.n, t, spec.c);
                return Ok(Evaluation::from_scaled(w.to_scaled(), Method::Polynomial, EPS + cond * DD_EPS));
            }
            match spec.kind {
                Kind::I => {
                    let (w, _) = forward_poly::<f64>(Kind::I, spec.n, t, spec.c);
                    Ok(Evaluation::from_scaled(w.to_scaled(), Method::Polynomial, (t - n) as f64 * EPS))
                }
                Kind::J => marched(spec, t),
            }
        }
        Direction::Backward => {
            if t == 0 {
                return Ok(if n == 0 {
                    Evaluation { value: 1.0, scaled: Scaled::from_f64(1.0), method: Method::PfaffSeries, est_error: 0.0 }
                } else {
                    Evaluation::zero()
                });
            }
            match spec.kind {
                Kind::J if t <= n + BACKWARD_SERIES_SPAN => {
                    let s = backward_series::<Dd>(spec, t, DD_TOL)?;
                    Ok(Evaluation::from_scaled(s.0.to_scaled(), Method::PfaffSeries, EPS + s.1))
                }
                Kind::J => marched(spec, t),
                Kind::I if t <= n + POSITIVE_DD_SPAN => {
                    let s = backward_series::<Dd>(spec, t, DD_TOL)?;
                    Ok(Evaluation::from_scaled(s.0.to_scaled(), Method::Series, EPS + s.1))
                }
                Kind::I => {
                    let s = backward_series::<f64>(spec, t, 1e-17)?;
                    Ok(Evaluation::from_scaled(s.0.to_scaled(), Method::Series, s.1))
                }
            }
        }
    }
}

fn marched(spec: &BesselSpec, t: u64) -> Result<Evaluation> {
    let mut m = Marcher::seeded(spec)?;
    while m.t < t {
        m.advance();
    }
    Ok(m.evaluation())
}

/// `sum_{k=0}^{count} r_k` with `r_0 = 1` and `r_{k+1} = r_k * ratio(k)`, rescaled
/// by exact powers of two; also returns `sum |r_k| / |sum r_k|`.
fn sum_ratios<T: Field>(count: u64, mut ratio: impl FnMut(u64) -> T) -> (Wide<T>, f64) {
    let mut term = T::from(1.0);
    let mut sum = T::from(1.0);
    let mut abs_sum = 1.0;
    let mut e = 0i64;
    for k in 0..count {
        term = term * ratio(k);
        sum = sum + term;
        abs_sum += term.to_f64().abs();
        if sum.to_f64().abs().max(term.to_f64().abs()) > 1e200 {
            term = term.ldexp(-600);
            sum = sum.ldexp(-600);
            abs_sum *= pow2(-600.0);
            e += 600;
        }
    }
    let s = sum.to_f64().abs();
    let cond = if s == 0.0 { f64::INFINITY } else { abs_sum / s };
    (Wide { m: sum, e }.norm(), cond)
}

/// `binom(top, n) (c/2)^n` as a wide number.
fn binomial_times_power<T: Field>(top: u64, n: u32, c: f64) -> Wide<T> {
    let n64 = n as u64;
    let mut pref = Wide::new(T::from(1.0));
    for j in 1..=n64 {
        pref = pref.mul(T::from((top - n64 + j) as f64) / T::from(j as f64));
    }
    pref.mul_wide(Wide::powi(T::from(c / 2.0), n64))
}

/// Forward polynomial at `t >= n`:
/// `sum_k s^k t! / (k! (t-2k-n)! (n+k)!) (c/2)^(2k+n)` with `s = -1` for `J`.
fn forward_poly<T: Field>(kind: Kind, n: u32, t: u64, c: f64) -> (Wide<T>, f64) {
    let n64 = n as u64;
    let l = (t - n64) / 2;
    let half = T::from(c / 2.0);
    let q = match kind {
        Kind::J => -(half * half),
        Kind::I => half * half,
    };
    let (sum, cond) = sum_ratios::<T>(l, |k| {
        let top = (t - 2 * k - n64) as f64;
        T::from(top) * T::from(top - 1.0) / (T::from((k + 1) as f64) * T::from((n64 + k + 1) as f64)) * q
    });
    (binomial_times_power::<T>(t, n, c).mul_wide(sum), cond)
}

/// Backward family at `t >= 1`: `(c/2)^n (t)_n / n! * 2F1(A, A+1/2; n+1; -+c^2)`,
/// `A = (n+t)/2`. For `J` the Pfaff map is applied with the parameter order that
/// makes the mapped series terminate whenever possible.
fn backward_series<T: Field>(spec: &BesselSpec, t: u64, tol: f64) -> Result<(Wide<T>, f64)> {
    let n = spec.n as u64;
    let pref = binomial_times_power::<T>(t + n - 1, spec.n, spec.c);
    let big_a = (n + t) as f64 / 2.0;
    let (a, b) = if (n + t) % 2 == 1 { (big_a, big_a + 0.5) } else { (big_a + 0.5, big_a) };
    let c2 = T::from(spec.c) * T::from(spec.c);
    let (z, zf) = match spec.kind {
        Kind::J => (-c2, -spec.c * spec.c),
        Kind::I => (c2, spec.c * spec.c),
    };
    let req = Hyp2F1Request::new(a, b, (n + 1) as f64, zf).with_tol(tol);
    let g = hyper::evaluate_at::<T>(&req, z)?;
    let rel = g.rel_bound + g.condition * tol.max(DD_EPS);
    Ok((pref.mul_wide(g.value), rel))
}

/// Three-term recurrence march for the `J` families in `f64` with a shared binary scale.
#[derive(Debug, Clone)]
struct Marcher {
    forward: bool,
    n2: f64,
    one_plus_c2: f64,
    /// Index of `cur`.
    t: u64,
    prev: f64,
    cur: f64,
    e: f64,
    err: f64,
}

impl Marcher {
    /// Seeds `y(t0-1)` and `y(t0)` from the direct route at the hand-over point `t0`.
    fn seeded(spec: &BesselSpec) -> Result<Marcher> {
        let direct = |t: u64| -> Result<Scaled> {
            let s = if spec.direction == Direction::Forward {
                forward_poly::<Dd>(Kind::J, spec.n, t, spec.c).0.to_scaled()
            } else {
                backward_series::<Dd>(spec, t, DD_TOL)?.0.to_scaled()
            };
            Ok(s)
        };
        let t0 = recurrence_start(spec).expect("family without a recurrence route");
        let y0 = direct(t0 - 1)?;
        let y1 = direct(t0)?;
        let e = y0.exp2.max(y1.exp2);
        let prev = y0.mantissa * pow2(y0.exp2 - e);
        let cur = y1.mantissa * pow2(y1.exp2 - e);
        Ok(Marcher {
            forward: spec.direction == Direction::Forward,
            n2: (spec.n as f64).powi(2),
            one_plus_c2: 1.0 + spec.c * spec.c,
            t: t0,
            prev,
            cur,
            e,
            err: EPS * prev.abs().max(cur.abs()),
        })
    }

    fn advance(&mut self) {
        let (p, q, den) = if self.forward {
            // (s^2 - n^2) y(s) = s(2s-1) y(s-1) - s(s-1)(1+c^2) y(s-2)
            let s = (self.t + 1) as f64;
            (s * (2.0 * s - 1.0) * self.cur, -s * (s - 1.0) * self.one_plus_c2 * self.prev, s * s - self.n2)
        } else {
            // s(s+1)(1+c^2) y(s+2) = s(2s+1) y(s+1) + (n^2 - s^2) y(s)
            let s = (self.t - 1) as f64;
            (s * (2.0 * s + 1.0) * self.cur, (self.n2 - s * s) * self.prev, s * (s + 1.0) * self.one_plus_c2)
        };
        let next = (p + q) / den;
        self.err += 2.0 * EPS * (p.abs() + q.abs()) / den.abs();
        self.prev = self.cur;
        self.cur = next;
        self.t += 1;
        let big = self.cur.abs().max(self.prev.abs());
        if big > 1e150 || (big < 1e-150 && big > 0.0) {
            let k = crate::numeric::binary_exponent(big) as f64;
            let f = pow2(-k);
            self.cur *= f;
            self.prev *= f;
            self.err *= f;
            self.e += k;
        }
    }

    fn evaluation(&self) -> Evaluation {
        let scaled = Scaled::new(self.cur, self.e).normalized();
        Evaluation {
            value: scaled.to_f64(),
            scaled,
            method: Method::Recurrence,
            est_error: Scaled::new(self.err, self.e).to_f64(),
        }
    }
}

/// Exact coefficients of a polynomial in `c`, keyed by exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPoly {
    pub coefficients: BTreeMap<u32, BigRational>,
}

impl RationalPoly {
    pub fn get(&self, exponent: u32) -> BigRational {
        self.coefficients.get(&exponent).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn eval_rational(&self, c: &BigRational) -> BigRational {
        let mut out = BigRational::zero();
        for (&e, coef) in &self.coefficients {
            out += coef * num_traits::pow::pow(c.clone(), e as usize);
        }
        out
    }

    pub fn eval_f64(&self, c: f64) -> f64 {
        self.coefficients
            .iter()
            .map(|(&e, coef)| num_traits::ToPrimitive::to_f64(coef).unwrap_or(f64::NAN) * c.powi(e as i32))
            .sum()
    }
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Coefficients of the polynomial form: forward families at `t >= n`,
/// backward families at `t <= -n`.
pub fn poly_coeffs(kind: Kind, direction: Direction, n: u32, t: i64) -> Result<RationalPoly> {
    let m = match direction {
        Direction::Forward if t >= 0 => t as u64,
        Direction::Backward if t < 0 => t.unsigned_abs(),
        _ => {
            return Err(Error::Precondition(format!(
                "{direction} {kind} is a polynomial in c only for {} t",
                if direction == Direction::Forward { "nonnegative" } else { "negative" }
            )))
        }
    };
    let n64 = n as u64;
    if n64 > m {
        return Err(Error::Precondition(format!("order {n} exceeds |t| = {m}; the function vanishes")));
    }
    let l = (m - n64) / 2;
    let tf = factorial(m);
    let mut coefficients = BTreeMap::new();
    for k in 0..=l {
        let denom = factorial(k) * factorial(m - 2 * k - n64) * factorial(n64 + k) * (BigInt::one() << (2 * k + n64) as usize);
        let mut coef = BigRational::new(tf.clone(), denom);
        let negative = match (kind, direction) {
            (Kind::J, Direction::Forward) => k % 2 == 1,
            (Kind::I, Direction::Forward) => false,
            (Kind::J, Direction::Backward) => (k + n64) % 2 == 1,
            (Kind::I, Direction::Backward) => n64 % 2 == 1,
        };
        if negative {
            coef = -coef;
        }
        coefficients.insert((2 * k + n64) as u32, coef);
    }
    Ok(RationalPoly { coefficients })
}

/// Coefficient-level form of `I_n^c(t) = (-i)^n J_n^{ic}(t)`: the coefficient
/// of `c^(2k+n)` in `I` is `(-1)^k` times that in `J`.
pub fn imaginary_identity_coeffs(n: u32, t: i64) -> Result<bool> {
    let j = poly_coeffs(Kind::J, Direction::Forward, n, t)?;
    let i = poly_coeffs(Kind::I, Direction::Forward, n, t)?;
    if j.coefficients.len() != i.coefficients.len() {
        return Ok(false);
    }
    Ok(j.coefficients.iter().all(|(&e, cj)| {
        let k = (e - n) / 2;
        let expected = if k % 2 == 0 { cj.clone() } else { -cj.clone() };
        i.coefficients.get(&e) == Some(&expected)
    }))
}

/// Scale a set of values to a common binary exponent so products stay finite.
fn common_scale(values: &[Scaled]) -> (Vec<f64>, f64) {
    let e = values.iter().filter(|v| !v.is_zero()).map(|v| v.exp2).fold(f64::NEG_INFINITY, f64::max);
    let e = if e.is_finite() { e } else { 0.0 };
    (values.iter().map(|v| v.mantissa * pow2(v.exp2 - e)).collect(), e)
}

fn residual_from(coefs: &[f64], values: &[Scaled]) -> Residual {
    let (ys, e) = common_scale(values);
    let terms: Vec<f64> = coefs.iter().zip(&ys).filter(|(c, _)| **c != 0.0).map(|(c, y)| c * y).collect();
    let r = Residual::from_terms(&terms);
    let f = pow2(e);
    if (r.scale * f).is_finite() {
        Residual { value: r.value * f, scale: r.scale * f }
    } else {
        r
    }
}

/// `(t^2-n^2) y(t) - t(2t-1) y(t-1) + t(t-1)(1 +- c^2) y(t-2)` for the forward
/// family, `+` for `J` and `-` for `I`; the expanded forward-difference equation.
///
/// When the values overflow `f64` the residual is reported in units of a
/// common power of two; [`Residual::relative`] is unaffected.
pub fn residual_forward(kind: Kind, n: u32, t: i64, c: f64) -> Result<Residual> {
    if t < 0 {
        return Err(Error::Precondition(format!("forward residual needs t >= 0, got {t}")));
    }
    let spec = BesselSpec { kind, direction: Direction::Forward, n, c };
    spec.validate()?;
    let tf = t as f64;
    let sign = if kind == Kind::J { 1.0 } else { -1.0 };
    let coefs = [tf * tf - (n as f64).powi(2), -tf * (2.0 * tf - 1.0), tf * (tf - 1.0) * (1.0 + sign * c * c)];
    let mut values = Vec::with_capacity(3);
    for (i, coef) in coefs.iter().enumerate() {
        values.push(if *coef == 0.0 { Scaled::ZERO } else { eval_scaled(&spec, t - i as i64)? });
    }
    Ok(residual_from(&coefs, &values))
}

/// `t(t+1)(1 +- c^2) y(t+2) - t(2t+1) y(t+1) - (n^2 - t^2) y(t)` for the backward
/// family, `+` for `J` and `-` for `I`.
pub fn residual_backward(kind: Kind, n: u32, t: i64, c: f64) -> Result<Residual> {
    if t < 1 {
        return Err(Error::Precondition(format!("backward residual needs t >= 1, got {t}")));
    }
    let spec = BesselSpec { kind, direction: Direction::Backward, n, c };
    spec.validate()?;
    let tf = t as f64;
    let sign = if kind == Kind::J { 1.0 } else { -1.0 };
    let coefs = [tf * (tf + 1.0) * (1.0 + sign * c * c), -tf * (2.0 * tf + 1.0), -((n as f64).powi(2) - tf * tf)];
    let values = [eval_scaled(&spec, t + 2)?, eval_scaled(&spec, t + 1)?, eval_scaled(&spec, t)?];
    Ok(residual_from(&coefs, &values))
}

/// The five difference identities satisfied by backward `J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LemmaPart {
    /// `Jbar_0(0) = 1`
    I,
    /// `Jbar_0(t) - Jbar_0(t-1) = -c Jbar_1(t)`, `t >= 1`
    II,
    /// `t (Jbar_n(t+1) - Jbar_n(t)) = n Jbar_n(t) - c t Jbar_{n+1}(t+1)`, `t >= 0`
    III,
    /// `t (Jbar_n(t+1) - Jbar_n(t)) = -n Jbar_n(t) + c t Jbar_{n-1}(t+1)`, `n >= 1`, `t >= 0`
    IV,
    /// `Jbar_n(t) - Jbar_n(t-1) = (c/2)(Jbar_{n-1}(t) - Jbar_{n+1}(t))`, `n >= 1`, `t >= 1`
    V,
}

/// Residuals of every identity that applies at `(n, t)`.
pub fn lemma_residuals(n: u32, t: i64, c: f64) -> Result<Vec<(LemmaPart, Residual)>> {
    if t < 0 {
        return Err(Error::Precondition(format!("identities hold for t >= 0, got {t}")));
    }
    let spec = BesselSpec::new(Kind::J, Direction::Backward, n, c)?;
    let y = |order: u32, s: i64| eval(&spec.with_order(order), s);
    let tf = t as f64;
    let nf = n as f64;
    let mut out = vec![(LemmaPart::I, Residual::from_terms(&[y(0, 0)?, -1.0]))];
    if t >= 1 {
        out.push((LemmaPart::II, Residual::from_terms(&[y(0, t)?, -y(0, t - 1)?, c * y(1, t)?])));
    }
    let next = y(n, t + 1)?;
    let here = y(n, t)?;
    out.push((LemmaPart::III, Residual::from_terms(&[tf * next, -tf * here, -nf * here, c * tf * y(n + 1, t + 1)?])));
    if n >= 1 {
        out.push((LemmaPart::IV, Residual::from_terms(&[tf * next, -tf * here, nf * here, -c * tf * y(n - 1, t + 1)?])));
        if t >= 1 {
            let half = c / 2.0;
            out.push((
                LemmaPart::V,
                Residual::from_terms(&[here, -y(n, t - 1)?, -half * y(n - 1, t)?, half * y(n + 1, t)?]),
            ));
        }
    }
    Ok(out)
}

/// Forward family at any integer `t` straight from its hypergeometric
/// definition, `((-c/2)^n (-t)_n / n!) 2F1((n-t)/2, (n-t)/2 + 1/2; n+1; -+c^2)`,
/// in double-double through the generic hypergeometric routes.
fn forward_by_definition(kind: Kind, n: u32, t: i64, c: f64) -> Result<f64> {
    let n64 = n as i64;
    let mut pref = Wide::new(Dd::from(1.0));
    for j in 0..n64 {
        pref = pref.mul(Dd::from((j - t) as f64) / Dd::from((j + 1) as f64));
    }
    if pref.m.to_f64() == 0.0 {
        return Ok(0.0);
    }
    pref = pref.mul_wide(Wide::powi(Dd::from(-c / 2.0), n as u64));
    let a = (n64 - t) as f64 / 2.0;
    let c2 = Dd::from(c) * Dd::from(c);
    let (z, zf) = match kind {
        Kind::J => (-c2, -c * c),
        Kind::I => (c2, c * c),
    };
    let req = Hyp2F1Request::new(a, a + 0.5, (n + 1) as f64, zf).with_tol(DD_TOL);
    let g = hyper::evaluate_at::<Dd>(&req, z)?;
    Ok(pref.mul_wide(g.value).to_scaled().to_f64())
}

/// `Jbar_n(t) - (-1)^n J_n(-t)` (or the `I` analogue), where the right side is
/// computed from the forward definition rather than through [`eval`].
///
/// Both sides are roundoff where the family has an exact zero (backward `J`
/// at `c = 2, n = 5, t = 9` is one), so there the residual is measured
/// against the neighbouring values instead.
pub fn reflection_check(kind: Kind, n: u32, t: i64, c: f64) -> Result<Residual> {
    let spec = BesselSpec::new(kind, Direction::Backward, n, c)?;
    let lhs = eval(&spec, t)?;
    let rhs = parity(n) * forward_by_definition(kind, n, -t, c)?;
    let mut scale = lhs.abs().max(rhs.abs());
    let local = eval(&spec, t - 1)?.abs().max(eval(&spec, t + 1)?.abs());
    if scale < 1e-8 * local && crate::oracle::backward_certified_zero(kind, n, t, &crate::oracle::rat_from_f64(c))? {
        scale = local;
    }
    Ok(Residual { value: lhs - rhs, scale })
}

/// Which closed-form asymptotic an [`AsympEval`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FormulaId {
    FwdJ,
    BwdJ,
    BwdI,
    FwdI,
    LargeNJ,
    LargeNI,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsympEval {
    pub value: f64,
    pub scaled: Scaled,
    /// Angle with `cos theta = (1+c^2)^(-1/2)`, for the oscillatory formulas.
    pub theta: Option<f64>,
    pub formula_id: FormulaId,
    /// The cosine factor of the oscillatory formulas; callers mask near its zeros.
    pub cos_factor: Option<f64>,
}

/// Large-`t` asymptotic of the family at `t`.
///
/// The oscillatory phases are `(t +- 1/2) theta - pi/4 - n pi/2`.
pub fn asymp_value(spec: &BesselSpec, t: i64) -> Result<AsympEval> {
    spec.validate()?;
    if t <= 0 {
        return Err(Error::Domain(format!("asymptotic formulas need t >= 1, got {t}")));
    }
    let tf = t as f64;
    let ac = spec.c.abs();
    let sign = if spec.c < 0.0 { parity(spec.n) } else { 1.0 };
    let nf = spec.n as f64;
    let pi = std::f64::consts::PI;
    let (formula_id, ln_mag, theta, cos_factor) = match (spec.kind, spec.direction) {
        (Kind::J, dir) => {
            let theta = ac.atan();
            let (shift, power) = match dir {
                Direction::Forward => (0.5, tf / 2.0 + 0.25),
                Direction::Backward => (-0.5, -tf / 2.0 + 0.25),
            };
            let phase = (tf + shift) * theta - pi / 4.0 - nf * pi / 2.0;
            let ln_mag = 0.5 * (2.0 / (pi * tf * ac)).ln() + power * (spec.c * spec.c).ln_1p();
            let id = if dir == Direction::Forward { FormulaId::FwdJ } else { FormulaId::BwdJ };
            (id, ln_mag, Some(theta), Some(phase.cos()))
        }
        (Kind::I, Direction::Forward) => {
            (FormulaId::FwdI, (tf + 0.5) * ac.ln_1p() - 0.5 * (2.0 * pi * tf * ac).ln(), None, None)
        }
        (Kind::I, Direction::Backward) => {
            (FormulaId::BwdI, (0.5 - tf) * (-ac).ln_1p() - 0.5 * (2.0 * pi * tf * ac).ln(), None, None)
        }
    };
    let cosf = cos_factor.unwrap_or(1.0);
    let scaled = Scaled::from_ln(sign * cosf.signum(), ln_mag + cosf.abs().ln());
    Ok(AsympEval { value: scaled.to_f64(), scaled, theta, formula_id, cos_factor })
}

/// Large-order asymptotic of a backward family at fixed `t`:
/// `sgn(c)^n n^(t-1) (1 +- c^2)^(-t/2) / Gamma(t) / ((1 + sqrt(1 +- c^2))/|c|)^n`.
/// Returns zero at `n = 0`, where the formula degenerates.
pub fn asymp_large_n(spec: &BesselSpec, t: i64) -> Result<AsympEval> {
    spec.validate()?;
    if spec.direction != Direction::Backward {
        return Err(Error::Precondition("large-order asymptotic is for backward families".into()));
    }
    if t <= 0 {
        return Err(Error::Domain(format!("large-order asymptotic needs t >= 1, got {t}")));
    }
    let formula_id = if spec.kind == Kind::J { FormulaId::LargeNJ } else { FormulaId::LargeNI };
    if spec.n == 0 {
        return Ok(AsympEval { value: 0.0, scaled: Scaled::ZERO, theta: None, formula_id, cos_factor: None });
    }
    let c2 = spec.c * spec.c;
    let base = if spec.kind == Kind::J { 1.0 + c2 } else { 1.0 - c2 };
    let tf = t as f64;
    let nf = spec.n as f64;
    let ln_mag = (tf - 1.0) * nf.ln() - 0.5 * tf * base.ln() - hyper::ln_gamma_ratio(&[tf], &[])?
        - nf * ((1.0 + base.sqrt()) / spec.c.abs()).ln();
    let sign = if spec.c < 0.0 { parity(spec.n) } else { 1.0 };
    let scaled = Scaled::from_ln(sign, ln_mag);
    Ok(AsympEval { value: scaled.to_f64(), scaled, theta: None, formula_id, cos_factor: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(kind: Kind, direction: Direction, n: u32, c: f64) -> BesselSpec {
        BesselSpec::new(kind, direction, n, c).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn spec_validation() {
        assert!(BesselSpec::new(Kind::J, Direction::Forward, 0, 0.0).is_err());
        assert!(BesselSpec::new(Kind::I, Direction::Backward, 0, 1.0).is_err());
        assert!(BesselSpec::new(Kind::I, Direction::Backward, 0, -0.99).is_ok());
        assert!(BesselSpec::new(Kind::J, Direction::Backward, 3, 7.0).is_ok());
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval(&spec(Kind::J, Direction::Forward, 0, 1.0), 2).unwrap(), 0.5);
        let z = eval_detailed(&spec(Kind::J, Direction::Forward, 5, 0.3), 3).unwrap();
        assert_eq!((z.value, z.method), (0.0, Method::Zero));
        let v = eval(&spec(Kind::J, Direction::Backward, 0, 1.0), 1).unwrap();
        assert!(close(v, std::f64::consts::FRAC_1_SQRT_2, 1e-15));
        let r = eval_detailed(&spec(Kind::J, Direction::Backward, 1, 1.0), -2).unwrap();
        assert_eq!((r.value, r.method), (-1.0, Method::Reflection));
        let v = eval(&spec(Kind::I, Direction::Backward, 0, 0.5), 2).unwrap();
        assert!(close(v, 0.75f64.powf(-1.5), 1e-15));
    }

    #[test]
    fn forward_i_reflection_needs_small_c() {
        let s = spec(Kind::I, Direction::Forward, 0, 1.5);
        assert!(eval(&s, 3).is_ok());
        assert!(matches!(eval(&s, -3), Err(Error::Domain(_))));
    }

    #[test]
    fn poly_coeff_examples() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let p = poly_coeffs(Kind::J, Direction::Forward, 1, 2).unwrap();
        assert_eq!(p.coefficients, BTreeMap::from([(1, r(1, 1))]));
        let p = poly_coeffs(Kind::J, Direction::Forward, 2, 3).unwrap();
        assert_eq!(p.coefficients, BTreeMap::from([(2, r(3, 4))]));
        let p = poly_coeffs(Kind::I, Direction::Forward, 0, 2).unwrap();
        assert_eq!(p.coefficients, BTreeMap::from([(0, r(1, 1)), (2, r(1, 2))]));
        let p = poly_coeffs(Kind::J, Direction::Backward, 1, -2).unwrap();
        assert_eq!(p.eval_rational(&r(1, 1)), r(-1, 1));
        assert!(poly_coeffs(Kind::J, Direction::Backward, 1, 2).is_err());
        assert!(poly_coeffs(Kind::J, Direction::Forward, 3, 2).is_err());
    }

    #[test]
    fn imaginary_identity_examples() {
        assert!(imaginary_identity_coeffs(0, 2).unwrap());
        assert!(imaginary_identity_coeffs(1, 1).unwrap());
        assert!(imaginary_identity_coeffs(0, 0).unwrap());
        for n in 0..6 {
            for t in n as i64..25 {
                assert!(imaginary_identity_coeffs(n, t).unwrap());
            }
        }
    }

    #[test]
    fn residual_examples() {
        assert!(residual_forward(Kind::J, 1, 5, 0.7).unwrap().relative() < 1e-12);
        assert!(residual_forward(Kind::I, 0, 3, 0.2).unwrap().relative() < 1e-12);
        assert!(residual_backward(Kind::J, 0, 1, 1.0).unwrap().relative() < 1e-12);
        assert!(residual_backward(Kind::J, 3, 2, 0.4).unwrap().relative() < 1e-12);
        let r = residual_backward(Kind::I, 0, 1, 0.5).unwrap();
        assert!(r.relative() < 1e-12);
        // y(3) = 0.75^(-5/2) (1 + c^2/2)
        let y3 = eval(&spec(Kind::I, Direction::Backward, 0, 0.5), 3).unwrap();
        assert!(close(y3, 0.75f64.powf(-2.5) * 1.125, 1e-15));
    }

    #[test]
    fn lemma_examples() {
        let parts = lemma_residuals(1, 2, 0.5).unwrap();
        assert_eq!(parts.len(), 5);
        for (_, r) in parts {
            assert!(r.relative() < 1e-12);
        }
        let parts = lemma_residuals(0, 0, 0.5).unwrap();
        assert_eq!(parts[0], (LemmaPart::I, Residual { value: 0.0, scale: 1.0 }));
        let iii = parts.iter().find(|(p, _)| *p == LemmaPart::III).unwrap().1;
        assert_eq!(iii.value, 0.0);
    }

    #[test]
    fn reflection_examples() {
        assert_eq!(reflection_check(Kind::J, 1, -2, 1.0).unwrap().relative(), 0.0);
        assert_eq!(reflection_check(Kind::I, 0, 0, 0.5).unwrap().relative(), 0.0);
        assert!(reflection_check(Kind::J, 2, 3, 0.3).unwrap().relative() < 1e-12);
        assert!(reflection_check(Kind::I, 2, 7, -0.6).unwrap().relative() < 1e-12);
    }

    #[test]
    fn asymptotic_examples() {
        let a = asymp_value(&spec(Kind::I, Direction::Forward, 0, 1.0), 100).unwrap();
        assert!(close(a.value, 2f64.powf(100.5) / (200.0 * std::f64::consts::PI).sqrt(), 1e-13));
        let a = asymp_value(&spec(Kind::I, Direction::Backward, 0, 0.5), 4).unwrap();
        assert!(close(a.value, 0.5f64.powf(-3.5) / (4.0 * std::f64::consts::PI).sqrt(), 1e-13));
        assert!(close(a.value, 3.1916, 1e-4));
        let a = asymp_value(&spec(Kind::J, Direction::Forward, 0, 1.0), 10).unwrap();
        let theta = a.theta.unwrap();
        assert!((theta.cos() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(asymp_value(&spec(Kind::J, Direction::Forward, 0, 1.0), 0).is_err());
    }

    #[test]
    fn large_order_examples() {
        let s = spec(Kind::J, Direction::Backward, 7, 1.0);
        let a = asymp_large_n(&s, 1).unwrap();
        assert!(close(a.value, (1.0 + 2f64.sqrt()).powi(-7) * 0.5f64.sqrt(), 1e-13));
        let s = spec(Kind::I, Direction::Backward, 5, 0.5);
        let a = asymp_large_n(&s, 1).unwrap();
        assert!(close(a.value, ((1.0 + 0.75f64.sqrt()) / 0.5).powi(-5) * 0.75f64.powf(-0.5), 1e-13));
        let s = spec(Kind::J, Direction::Backward, 0, 1.0);
        assert_eq!(asymp_large_n(&s, 2).unwrap().value, 0.0);
        let s = spec(Kind::J, Direction::Backward, 3, -1.0);
        assert!(asymp_large_n(&s, 1).unwrap().value < 0.0);
    }

    #[test]
    fn recurrence_route_matches_direct_route_at_the_seam() {
        for (dir, span) in [(Direction::Forward, FORWARD_POLY_SPAN), (Direction::Backward, BACKWARD_SERIES_SPAN)] {
            for &c in &[0.5, -1.0, 2.0] {
                let s = spec(Kind::J, dir, 2, c);
                let t = 2 + span + 5;
                let marched = eval_detailed(&s, t as i64).unwrap();
                assert_eq!(marched.method, Method::Recurrence);
                let direct = if dir == Direction::Forward {
                    forward_poly::<Dd>(Kind::J, 2, t, c).0.to_scaled()
                } else {
                    backward_series::<Dd>(&s, t, DD_TOL).unwrap().0.to_scaled()
                };
                assert!((marched.scaled.ratio(&direct) - 1.0).abs() < 1e-12, "{dir:?} c={c}");
            }
        }
    }

    #[test]
    fn sequence_matches_pointwise_evaluation() {
        let s = spec(Kind::J, Direction::Forward, 1, 0.8);
        let seq = sequence(&s, -5, 140).unwrap();
        for (i, e) in seq.iter().enumerate() {
            let t = i as i64 - 5;
            let p = eval_detailed(&s, t).unwrap();
            assert!((e.value - p.value).abs() <= 1e-13 * p.value.abs().max(1e-300), "t={t}");
        }
    }

    #[test]
    fn large_arguments_stay_finite_in_scaled_form() {
        let s = spec(Kind::I, Direction::Forward, 0, 1.0);
        let v = eval_scaled(&s, 5000).unwrap();
        assert!(v.to_f64().is_infinite() && v.ln_abs().is_finite());
        let a = asymp_value(&s, 5000).unwrap();
        assert!((v.ratio(&a.scaled) - 1.0).abs() < 1e-3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn forward_vanishes_below_order(n in 1u32..30, t in 0i64..30, c in -3.0f64..3.0) {
            prop_assume!(c != 0.0 && (n as i64) > t);
            for kind in [Kind::J, Kind::I] {
                prop_assert_eq!(eval(&spec(kind, Direction::Forward, n, c), t).unwrap(), 0.0);
            }
            prop_assert_eq!(eval(&spec(Kind::J, Direction::Backward, n, c), -t).unwrap(), 0.0);
        }

        #[test]
        fn forward_double_path_matches_rational_polynomial(n in 0u32..8, t in 0i64..30, num in -8i64..8) {
            prop_assume!(num != 0 && n as i64 <= t);
            let c = num as f64 / 4.0;
            let p = poly_coeffs(Kind::J, Direction::Forward, n, t).unwrap();
            let exact = p.eval_rational(&BigRational::new(num.into(), 4.into()));
            let exact = num_traits::ToPrimitive::to_f64(&exact).unwrap();
            let v = eval(&spec(Kind::J, Direction::Forward, n, c), t).unwrap();
            prop_assert!((v - exact).abs() <= 1e-14 * exact.abs(), "{} vs {}", v, exact);
        }

        #[test]
        fn backward_residuals_small(n in 0u32..10, t in 1i64..50, c in -0.95f64..0.95) {
            prop_assume!(c.abs() > 0.05);
            prop_assert!(residual_backward(Kind::J, n, t, c).unwrap().relative() < 1e-10);
            prop_assert!(residual_backward(Kind::I, n, t, c).unwrap().relative() < 1e-10);
        }
    }
}
