//! Gauss hypergeometric function on the real line.
//!
//! Terminating parameters are summed as finite polynomials. Nonterminating
//! series are summed directly for `0 <= z < 1` and after the Pfaff map
//! `w = z/(z-1)` for `z < 0`.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numeric::{is_half_integer, Dd, Field, Residual, Scaled, Wide};

pub const DEFAULT_TOL: f64 = 1e-14;
pub const DEFAULT_MAX_TERMS: usize = 100_000;

/// Parameters of `2F1(a, b; gamma; z)` plus series controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyp2F1Request {
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
    pub z: f64,
    pub tol: f64,
    pub max_terms: usize,
}

impl Hyp2F1Request {
    pub fn new(a: f64, b: f64, gamma: f64, z: f64) -> Self {
        Hyp2F1Request { a, b, gamma, z, tol: DEFAULT_TOL, max_terms: DEFAULT_MAX_TERMS }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.max_terms = max_terms;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("gamma", self.gamma), ("z", self.z)] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        if nonpositive_integer(self.gamma).is_some() {
            return Err(Error::Domain(format!("gamma = {} is a nonpositive integer", self.gamma)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Domain(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_terms == 0 {
            return Err(Error::Domain("max_terms must be at least 1".into()));
        }
        Ok(())
    }

    /// Degree of the polynomial when `a` or `b` is a nonpositive integer.
    pub fn terminating_degree(&self) -> Option<u64> {
        match (nonpositive_integer(self.a), nonpositive_integer(self.b)) {
            (Some(m), Some(k)) => Some(m.min(k)),
            (Some(m), None) | (None, Some(m)) => Some(m),
            (None, None) => None,
        }
    }
}

/// Series value with the number of terms summed and a bound on the dropped tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesResult {
    pub value: f64,
    pub terms_used: usize,
    pub truncation_bound: f64,
}

/// Like [`SeriesResult`] but with an overflow-safe value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledSeries {
    pub value: Scaled,
    pub terms_used: usize,
    /// Tail bound divided by `|value|`.
    pub rel_bound: f64,
    /// `sum |term| / |sum term|`; how many digits the summation may have lost.
    pub condition: f64,
}

/// `-x` when `x` is a nonpositive integer.
pub fn nonpositive_integer(x: f64) -> Option<u64> {
    if x <= 0.0 && x == x.round() && x > -1e15 {
        Some((-x) as u64)
    } else {
        None
    }
}

/// Rising factorial `x (x+1) ... (x+k-1)` by direct product, so zeros stay exact.
pub fn pochhammer(x: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (x + j as f64))
}

/// `sum ln Gamma(num_i) - sum ln Gamma(den_j)` for positive arguments.
pub fn ln_gamma_ratio(num: &[f64], den: &[f64]) -> Result<f64> {
    let mut out = 0.0;
    for (sign, list) in [(1.0, num), (-1.0, den)] {
        for &x in list {
            if !(x > 0.0) || !x.is_finite() {
                return Err(Error::Domain(format!("log-gamma argument must be positive, got {x}")));
            }
            out += sign * libm::lgamma(x);
        }
    }
    Ok(out)
}

/// Finite sum for a nonpositive-integer `a` or `b`.
pub fn hyp2f1_terminating(a: f64, b: f64, gamma: f64, z: f64) -> Result<f64> {
    let req = Hyp2F1Request::new(a, b, gamma, z);
    let m = terminating_precondition(&req)?;
    Ok(terminating_sum::<f64>(a, b, gamma, z, m).to_scaled().to_f64())
}

/// Exact finite sum over the rationals.
pub fn hyp2f1_terminating_exact(
    a: &BigRational,
    b: &BigRational,
    gamma: &BigRational,
    z: &BigRational,
) -> Result<BigRational> {
    let nonpos = |x: &BigRational| x.is_integer() && *x <= BigRational::zero();
    let degree = |x: &BigRational| -> u64 {
        let v: i64 = num_traits::ToPrimitive::to_i64(&x.to_integer()).unwrap_or(i64::MIN);
        (-v) as u64
    };
    let m = match (nonpos(a), nonpos(b)) {
        (true, true) => degree(a).min(degree(b)),
        (true, false) => degree(a),
        (false, true) => degree(b),
        _ => return Err(Error::Precondition("neither a nor b is a nonpositive integer".into())),
    };
    if gamma.is_integer() && *gamma <= BigRational::zero() && -gamma.to_integer() < m.into() {
        return Err(Error::Domain("gamma is a nonpositive integer inside the sum".into()));
    }
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    for k in 0..m {
        let kk = BigRational::from_integer(k.into());
        term = term * (a + &kk) * (b + &kk) * z / ((gamma + &kk) * (&kk + BigRational::one()));
        sum += &term;
    }
    Ok(sum)
}

/// `(1-z)^(-a) 2F1(a, gamma-b; gamma; z/(z-1))` for `z < 0`.
pub fn hyp2f1_pfaff(req: &Hyp2F1Request) -> Result<SeriesResult> {
    req.validate()?;
    if !(req.z < 0.0) {
        return Err(Error::Precondition(format!("Pfaff route needs z < 0, got {}", req.z)));
    }
    to_series_result(pfaff::<f64>(req)?)
}

/// Dispatch between the terminating, Pfaff and direct routes.
pub fn hyp2f1(req: &Hyp2F1Request) -> Result<SeriesResult> {
    to_series_result(evaluate::<f64>(req)?)
}

/// Same routes as [`hyp2f1`] with an overflow-safe result.
pub fn hyp2f1_scaled(req: &Hyp2F1Request) -> Result<ScaledSeries> {
    evaluate::<f64>(req).map(|g| g.to_scaled())
}

/// Same routes as [`hyp2f1`] carried out in double-double arithmetic.
pub(crate) fn hyp2f1_dd(req: &Hyp2F1Request) -> Result<Generic<Dd>> {
    evaluate::<Dd>(req)
}

/// Residuals of the four contiguous relations at `(a, b; gamma; z)`.
///
/// (i) `g F(a,b;g) - g F(a,b+1;g) + a z F(a+1,b+1;g+1)`
/// (ii) `g F(a,b;g) - g F(a+1,b;g) + b z F(a+1,b+1;g+1)`
/// (iii) `g F(a,b;g) - (g-a) F(a,b;g+1) - a F(a+1,b;g+1)`
/// (iv) `(g-a-b) F(a,b;g) - (g-a) F(a-1,b;g) + b (1-z) F(a,b+1;g)`
pub fn contiguous_residuals(a: f64, b: f64, gamma: f64, z: f64) -> Result<[Residual; 4]> {
    let f = |a: f64, b: f64, g: f64| -> Result<f64> {
        let r = hyp2f1_dd(&Hyp2F1Request::new(a, b, g, z))?;
        Ok(r.value.to_scaled().to_f64())
    };
    let g = gamma;
    let f0 = f(a, b, g)?;
    let f_b1 = f(a, b + 1.0, g)?;
    let f_a1 = f(a + 1.0, b, g)?;
    let f_ab1g1 = f(a + 1.0, b + 1.0, g + 1.0)?;
    let f_g1 = f(a, b, g + 1.0)?;
    let f_a1g1 = f(a + 1.0, b, g + 1.0)?;
    let f_am1 = f(a - 1.0, b, g)?;
    Ok([
        Residual::from_terms(&[g * f0, -g * f_b1, a * z * f_ab1g1]),
        Residual::from_terms(&[g * f0, -g * f_a1, b * z * f_ab1g1]),
        Residual::from_terms(&[g * f0, -(g - a) * f_g1, -a * f_a1g1]),
        Residual::from_terms(&[(g - a - b) * f0, -(g - a) * f_am1, b * (1.0 - z) * f_b1]),
    ])
}

/// Series outcome in the working precision `T`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Generic<T> {
    pub value: Wide<T>,
    pub terms_used: usize,
    pub rel_bound: f64,
    pub condition: f64,
}

impl<T: Field> Generic<T> {
    fn to_scaled(self) -> ScaledSeries {
        ScaledSeries {
            value: self.value.to_scaled(),
            terms_used: self.terms_used,
            rel_bound: self.rel_bound,
            condition: self.condition,
        }
    }
}

fn to_series_result(g: Generic<f64>) -> Result<SeriesResult> {
    let value = g.value.to_scaled().to_f64();
    Ok(SeriesResult { value, terms_used: g.terms_used, truncation_bound: g.rel_bound * value.abs() })
}

fn terminating_precondition(req: &Hyp2F1Request) -> Result<u64> {
    let m = req
        .terminating_degree()
        .ok_or_else(|| Error::Precondition("neither a nor b is a nonpositive integer".into()))?;
    if let Some(g) = nonpositive_integer(req.gamma) {
        if g < m {
            return Err(Error::Domain(format!("gamma = {} is a nonpositive integer", req.gamma)));
        }
    }
    Ok(m)
}

pub(crate) fn evaluate<T: Field>(req: &Hyp2F1Request) -> Result<Generic<T>> {
    evaluate_at(req, T::from(req.z))
}

/// [`evaluate`] with the argument supplied in the working precision; `req.z`
/// only steers the routing.
pub(crate) fn evaluate_at<T: Field>(req: &Hyp2F1Request, z: T) -> Result<Generic<T>> {
    if let Some(m) = req.terminating_degree() {
        if req.gamma.is_finite() && req.z.is_finite() {
            terminating_precondition(req)?;
            let (sum, condition) = terminating_sum_with_condition::<T>(req.a, req.b, req.gamma, z, m);
            return Ok(Generic { value: sum, terms_used: m as usize + 1, rel_bound: 0.0, condition });
        }
    }
    req.validate()?;
    if req.z < 0.0 {
        pfaff_at::<T>(req, z)
    } else if req.z < 1.0 {
        let core = series_core::<T>(req.a, req.b, req.gamma, z, req.tol, req.max_terms)?;
        Ok(core)
    } else {
        Err(Error::UnsupportedDomain(format!("nonterminating series at z = {} >= 1", req.z)))
    }
}

fn pfaff<T: Field>(req: &Hyp2F1Request) -> Result<Generic<T>> {
    pfaff_at(req, T::from(req.z))
}

fn pfaff_at<T: Field>(req: &Hyp2F1Request, z: T) -> Result<Generic<T>> {
    let one = T::from(1.0);
    let w = z / (z - one);
    let core = series_core::<T>(req.a, req.gamma - req.b, req.gamma, w, req.tol, req.max_terms)?;
    let base = one - z;
    let pref = if is_half_integer(req.a) {
        Wide::pow_half(base, -req.a)
    } else {
        let s = Scaled::from_ln(1.0, -req.a * (1.0 - req.z).ln());
        Wide { m: T::from(s.mantissa), e: s.exp2 as i64 }
    };
    Ok(Generic { value: core.value.mul_wide(pref), ..core })
}

fn terminating_sum<T: Field>(a: f64, b: f64, g: f64, z: T, m: u64) -> Wide<T> {
    terminating_sum_with_condition(a, b, g, z, m).0
}

fn terminating_sum_with_condition<T: Field>(a: f64, b: f64, g: f64, z: T, m: u64) -> (Wide<T>, f64) {
    let mut term = T::from(1.0);
    let mut sum = T::from(1.0);
    let mut abs_sum = 1.0;
    let mut e = 0i64;
    for k in 0..m {
        let k = k as f64;
        term = term * (T::from(a + k) * T::from(b + k)) / (T::from(g + k) * T::from(k + 1.0)) * z;
        sum = sum + term;
        abs_sum += term.to_f64().abs();
        let big = sum.to_f64().abs().max(term.to_f64().abs());
        if big > 1e200 {
            term = term.ldexp(-600);
            sum = sum.ldexp(-600);
            abs_sum *= crate::numeric::pow2(-600.0);
            e += 600;
        }
    }
    let condition = abs_sum / sum.to_f64().abs();
    (Wide { m: sum, e }.norm(), condition)
}

/// Direct series of `2F1(a, b; g; w)`, stopping on two consecutive small terms
/// once the tail is provably geometric.
pub(crate) fn series_core<T: Field>(
    a: f64,
    b: f64,
    g: f64,
    w: T,
    tol: f64,
    max_terms: usize,
) -> Result<Generic<T>> {
    let wf = w.to_f64();
    let mut term = T::from(1.0);
    let mut sum = T::from(1.0);
    let mut abs_sum = 1.0;
    let mut e = 0i64;
    let mut used = 1usize;
    let mut small_run = 0;
    if wf == 0.0 {
        return Ok(Generic { value: Wide::new(sum), terms_used: 1, rel_bound: 0.0, condition: 1.0 });
    }
    let mut k = 0.0;
    loop {
        if used >= max_terms {
            return Err(Error::Convergence {
                partial: Wide { m: sum, e }.to_scaled().to_f64(),
                terms: used,
            });
        }
        let factor = (T::from(a + k) * T::from(b + k)) / (T::from(g + k) * T::from(k + 1.0)) * w;
        term = term * factor;
        k += 1.0;
        if term.to_f64() == 0.0 {
            break;
        }
        sum = sum + term;
        abs_sum += term.to_f64().abs();
        used += 1;
        let big = sum.to_f64().abs().max(term.to_f64().abs());
        if big > 1e200 {
            term = term.ldexp(-600);
            sum = sum.ldexp(-600);
            abs_sum *= crate::numeric::pow2(-600.0);
            e += 600;
        }
        let s = sum.to_f64().abs();
        let t = term.to_f64().abs();
        if t < tol * s {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if small_run >= 2 && a + k > 0.0 && b + k > 0.0 && g + k > 0.0 {
            let rho = tail_ratio(a, b, g, wf, k);
            if rho < 1.0 {
                let rel = t * rho / (1.0 - rho) / s;
                let condition = abs_sum / s;
                return Ok(Generic { value: Wide { m: sum, e }.norm(), terms_used: used, rel_bound: rel, condition });
            }
        }
    }
    let condition = abs_sum / sum.to_f64().abs();
    Ok(Generic { value: Wide { m: sum, e }.norm(), terms_used: used, rel_bound: 0.0, condition })
}

/// Upper bound on `|term_{j+1} / term_j|` for all `j >= k`, valid once
/// `a+k`, `b+k` and `g+k` are positive.
pub fn tail_ratio(a: f64, b: f64, g: f64, w: f64, k: f64) -> f64 {
    w.abs() * ((a + k) / (1.0 + k)).max(1.0) * ((b + k) / (g + k)).max(1.0)
}

/// Bound on the tail `sum_{j>k} term_j` given the last included term.
pub fn truncation_bound(last_term: f64, a: f64, b: f64, g: f64, w: f64, k: f64) -> Option<f64> {
    if a + k <= 0.0 || b + k <= 0.0 || g + k <= 0.0 {
        return None;
    }
    let rho = tail_ratio(a, b, g, w, k);
    (rho < 1.0).then(|| last_term.abs() * rho / (1.0 - rho))
}
