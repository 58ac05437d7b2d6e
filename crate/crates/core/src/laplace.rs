//! Discrete Laplace transforms and generating functions of the four families.
//!
//! Forward: `L{x}(z) = sum_{t>=0} x(t) (1+z)^(-t-1)`.
//! Backward: `L{x}(z) = sum_{t>=0} x(t) (1-z)^(t-1)`.
//! Generating function: `sum_{t>=0} x(t) w^t`.
//!
//! All transforms here are real-valued on the real line. The closed forms are
//! `c^-n (s - z)^n / s` with `s^2 = z^2 + c^2` (J) and `c^-n (z - s)^n / s`
//! with `s^2 = z^2 - c^2` (I), written as `(c/(s+z))^n / s` and
//! `(c/(z+s))^n / s` to avoid cancellation.
//!
//! The forward region `|1+z| > R` has a second real component left of
//! `z = -1 - R`. There the transform is the continuation around the outside
//! of the disc, which takes `s` with the sign of `z`; the principal root
//! would give the other sheet.

use serde::Serialize;

use crate::bessel::{self, BesselSpec, Direction, Kind};
use crate::error::{Error, Result};
use crate::hyper::SeriesResult;
use crate::numeric::Scaled;

/// Relative-free guard band on region boundaries.
pub const REGION_GUARD: f64 = 1e-9;
pub const DEFAULT_TOL: f64 = 1e-14;
pub const DEFAULT_MAX_TERMS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplaceEval {
    #[serde(skip)]
    pub spec: BesselSpec,
    pub z: f64,
    pub closed: f64,
    pub series: f64,
    pub terms_used: usize,
    pub in_region: bool,
}

impl LaplaceEval {
    /// `series - closed - (1-z)^-1` for backward order zero, where the closed
    /// forms drop the `t = 0` term; `None` elsewhere.
    pub fn discrepancy(&self) -> Option<f64> {
        discrepancy_offset(&self.spec, self.z).map(|off| self.series - self.closed - off)
    }

    pub fn abs_diff(&self) -> f64 {
        (self.series - self.closed).abs()
    }
}

/// The offset `(1-z)^-1` that the backward order-zero series carries over the closed form.
pub fn discrepancy_offset(spec: &BesselSpec, z: f64) -> Option<f64> {
    (spec.direction == Direction::Backward && spec.n == 0).then(|| 1.0 / (1.0 - z))
}

/// Growth rate `R` of the family: `|x(t)| ~ R^t` up to algebraic factors.
pub fn growth_rate(spec: &BesselSpec) -> f64 {
    let c = spec.c;
    match (spec.kind, spec.direction) {
        (Kind::J, Direction::Forward) => c.hypot(1.0),
        (Kind::I, Direction::Forward) => 1.0 + c.abs(),
        (Kind::J, Direction::Backward) => 1.0 / c.hypot(1.0),
        (Kind::I, Direction::Backward) => 1.0 / (1.0 - c.abs()),
    }
}

/// Radius of convergence of the generating function, `1/R`.
pub fn genfun_radius(spec: &BesselSpec) -> f64 {
    1.0 / growth_rate(spec)
}

/// Whether `z` lies inside the transform's region of convergence, guard band included.
pub fn in_region(spec: &BesselSpec, z: f64) -> bool {
    let r = genfun_radius(spec);
    match spec.direction {
        // weight base 1/(1+z) must be inside the generating-function disc
        Direction::Forward => (1.0 + z).abs() > 1.0 / r + REGION_GUARD,
        Direction::Backward => (1.0 - z).abs() < r - REGION_GUARD,
    }
}

/// The `s` of the closed forms; see the module notes for the sheet on `z < -1`.
fn root(spec: &BesselSpec, z: f64) -> Result<f64> {
    let c = spec.c;
    let s = match spec.kind {
        Kind::J => z.hypot(c),
        Kind::I => {
            if z.abs() <= c.abs() {
                return Err(Error::Domain(format!("I transform is complex for |z| <= |c| (z = {z}, c = {c})")));
            }
            ((z - c) * (z + c)).sqrt()
        }
    };
    Ok(if spec.direction == Direction::Forward && z < -1.0 { -s } else { s })
}

pub fn laplace_closed(spec: &BesselSpec, z: f64) -> Result<f64> {
    spec.validate()?;
    let s = root(spec, z)?;
    let n = spec.n as i32;
    let base = spec.c / (s + z);
    Ok(base.powi(n) / s)
}

pub fn laplace_series(spec: &BesselSpec, z: f64, tol: f64, max_terms: usize) -> Result<LaplaceEval> {
    spec.validate()?;
    if !in_region(spec, z) {
        return Err(Error::Region(format!("z = {z} for {} {} c = {}", spec.direction, spec.kind, spec.c)));
    }
    let closed = laplace_closed(spec, z)?;
    let (series, terms_used) = match spec.direction {
        Direction::Forward => {
            let q = 1.0 / (1.0 + z);
            let s = power_sum(spec, q, tol, max_terms)?;
            (q * s.value, s.terms_used)
        }
        Direction::Backward => {
            let w = 1.0 - z;
            if w == 0.0 {
                // only the t = 1 term survives; t = 0 would divide by zero
                if spec.n == 0 {
                    return Err(Error::Domain("backward order-zero transform has a pole at z = 1".into()));
                }
                (bessel::eval(spec, 1)?, 2)
            } else {
                let s = power_sum(spec, w, tol, max_terms)?;
                (s.value / w, s.terms_used)
            }
        }
    };
    Ok(LaplaceEval { spec: *spec, z, closed, series, terms_used, in_region: true })
}

/// Closed generating function: `f` (forward J), `g` (forward I), `fbar` (backward J), `gbar` (backward I).
///
/// The backward forms carry a factor `w` and so vanish at `w = 0` for every order.
pub fn genfun_closed(spec: &BesselSpec, w: f64) -> Result<f64> {
    spec.validate()?;
    let c = spec.c;
    let n = spec.n as i32;
    match spec.direction {
        Direction::Forward => {
            let u = 1.0 - w;
            let cw = c * w;
            let q = match spec.kind {
                Kind::J => u.hypot(cw),
                Kind::I => {
                    let d = (u - cw) * (u + cw);
                    if d <= 0.0 {
                        return Err(Error::Domain(format!("g has a branch point or is complex at w = {w}")));
                    }
                    d.sqrt()
                }
            };
            let q = if u < 0.0 { -q } else { q };
            if q == 0.0 {
                return Err(Error::Domain(format!("pole at w = {w}")));
            }
            Ok((cw / (q + u)).powi(n) / q)
        }
        Direction::Backward => {
            let z = 1.0 - w;
            if spec.kind == Kind::I && z.abs() <= c.abs() {
                return Err(Error::Domain(format!("gbar has a branch point or is complex at w = {w}")));
            }
            Ok(w * laplace_closed(spec, z)?)
        }
    }
}

pub fn genfun_series(spec: &BesselSpec, w: f64, tol: f64, max_terms: usize) -> Result<SeriesResult> {
    spec.validate()?;
    let r = genfun_radius(spec);
    if w.abs() >= r - REGION_GUARD {
        return Err(Error::Region(format!("|w| = {} is not inside radius {r}", w.abs())));
    }
    power_sum(spec, w, tol, max_terms)
}

/// `sum_{t>=0} x(t) w^t` for `|w|` inside the radius, with a tail estimate.
///
/// The tail past `t` is bounded by `M / (1 - rho)`, where `M` is the largest
/// term magnitude over the last oscillation period and `rho = |w| R`.
fn power_sum(spec: &BesselSpec, w: f64, tol: f64, max_terms: usize) -> Result<SeriesResult> {
    if w == 0.0 {
        return Ok(SeriesResult { value: bessel::eval(spec, 0)?, terms_used: 1, truncation_bound: 0.0 });
    }
    let rho = w.abs() * growth_rate(spec);
    let window = match spec.kind {
        Kind::J => (2.0 * std::f64::consts::PI / spec.c.abs().atan()).ceil() as usize + 2,
        Kind::I => 2,
    };
    let guess = ((tol * 1e-3 * (1.0 - rho)).ln() / rho.ln()).ceil();
    let mut limit = if guess.is_finite() { (guess as usize).clamp(64, max_terms) } else { max_terms };
    let step = Scaled::from_f64(w);
    loop {
        let values = bessel::sequence(spec, 0, limit as i64 - 1)?;
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        let mut recent: Vec<f64> = Vec::with_capacity(window);
        // w^t carried with an explicit exponent so x(t) and w^t never overflow on their own
        let mut power = Scaled::from_f64(1.0);
        for (t, e) in values.iter().enumerate() {
            let term = e.scaled.mul(&power).to_f64();
            power = power.mul(&step);
            let next = sum + term;
            comp += if sum.abs() >= term.abs() { (sum - next) + term } else { (term - next) + sum };
            sum = next;
            if recent.len() == window {
                recent.remove(0);
            }
            recent.push(term.abs());
            let total = sum + comp;
            if t + 1 >= window && total != 0.0 {
                let tail = recent.iter().cloned().fold(0.0, f64::max) * rho.min(1.0) / (1.0 - rho);
                if tail <= tol * total.abs() {
                    return Ok(SeriesResult { value: total, terms_used: t + 1, truncation_bound: tail });
                }
            }
        }
        if limit >= max_terms {
            return Err(Error::Convergence { partial: sum + comp, terms: limit });
        }
        limit = (limit * 2).min(max_terms);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(kind: Kind, direction: Direction, n: u32, c: f64) -> BesselSpec {
        BesselSpec::new(kind, direction, n, c).unwrap()
    }

    fn series(s: &BesselSpec, z: f64) -> Result<LaplaceEval> {
        laplace_series(s, z, DEFAULT_TOL, DEFAULT_MAX_TERMS)
    }

    #[test]
    fn closed_form_examples() {
        let j = spec(Kind::J, Direction::Forward, 0, 1.0);
        assert!((laplace_closed(&j, 2.0).unwrap() - 0.4472135955).abs() < 1e-10);
        let i = spec(Kind::I, Direction::Forward, 0, 0.5);
        assert!((laplace_closed(&i, 1.0).unwrap() - 1.1547005384).abs() < 1e-10);
        let j1 = spec(Kind::J, Direction::Forward, 1, 1.0);
        assert!((laplace_closed(&j1, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(laplace_closed(&i, 0.5), Err(Error::Domain(_))));
        assert!(matches!(laplace_closed(&i, -0.2), Err(Error::Domain(_))));
    }

    #[test]
    fn series_examples() {
        let j = spec(Kind::J, Direction::Forward, 0, 1.0);
        let e = series(&j, 2.0).unwrap();
        assert!(e.abs_diff() < 1e-10, "{e:?}");
        let i = spec(Kind::I, Direction::Backward, 1, 0.5);
        let e = series(&i, 1.2).unwrap();
        assert!(e.abs_diff() < 1e-10 * e.closed.abs(), "{e:?}");
        assert!(matches!(series(&j, -0.5), Err(Error::Region(_))));
    }

    #[test]
    fn backward_order_zero_offset() {
        let i = spec(Kind::I, Direction::Backward, 0, 0.5);
        let e = series(&i, 0.9).unwrap();
        assert!((e.series - e.closed - 10.0).abs() < 1e-9, "{e:?}");
        assert!(e.discrepancy().unwrap().abs() < 1e-10);
        let j = spec(Kind::J, Direction::Backward, 0, 0.6);
        let e = series(&j, 0.3).unwrap();
        assert!(e.discrepancy().unwrap().abs() < 1e-10, "{e:?}");
        assert!(discrepancy_offset(&spec(Kind::J, Direction::Forward, 0, 0.6), 0.3).is_none());
    }

    #[test]
    fn regions() {
        let bj = spec(Kind::J, Direction::Backward, 2, 1.0);
        // |1 - z| < sqrt(2)
        assert!(in_region(&bj, 0.0));
        assert!(in_region(&bj, -0.4));
        assert!(!in_region(&bj, -0.42));
        let bi = spec(Kind::I, Direction::Backward, 2, 0.5);
        assert!(!in_region(&bi, 0.0));
        assert!(in_region(&bi, 1.4));
        let fj = spec(Kind::J, Direction::Forward, 2, 1.0);
        assert!(in_region(&fj, 0.5) && in_region(&fj, -2.5) && !in_region(&fj, -1.5));
        let boundary = 2f64.sqrt() - 1.0;
        assert!(!in_region(&fj, boundary));
    }

    #[test]
    fn left_component_uses_outer_sheet() {
        for kind in [Kind::J, Kind::I] {
            for n in 0..4 {
                let s = spec(kind, Direction::Forward, n, 0.7);
                let e = series(&s, -4.0).unwrap();
                assert!(e.abs_diff() < 1e-12 * e.closed.abs(), "{kind} {n}: {e:?}");
            }
        }
    }

    #[test]
    fn backward_at_one() {
        let s = spec(Kind::J, Direction::Backward, 1, 1.0);
        let e = series(&s, 1.0).unwrap();
        assert!(e.abs_diff() < 1e-14);
        assert!(series(&s.with_order(0), 1.0).is_err());
    }

    #[test]
    fn generating_function_examples() {
        let f0 = spec(Kind::J, Direction::Forward, 0, 1.3);
        assert_eq!(genfun_closed(&f0, 0.0).unwrap(), 1.0);
        let g0 = spec(Kind::I, Direction::Forward, 0, 0.4);
        assert_eq!(genfun_closed(&g0, 0.0).unwrap(), 1.0);
        let gb = spec(Kind::I, Direction::Backward, 0, 0.4);
        assert_eq!(genfun_closed(&gb, 0.0).unwrap(), 0.0);
        let s = genfun_series(&spec(Kind::J, Direction::Forward, 0, 1.0), 0.5, 1e-15, 10_000).unwrap();
        let closed = genfun_closed(&spec(Kind::J, Direction::Forward, 0, 1.0), 0.5).unwrap();
        assert!((s.value - closed).abs() < 1e-12);
        let b2 = spec(Kind::I, Direction::Backward, 2, 0.5);
        let s = genfun_series(&b2, 0.3, 1e-15, 10_000).unwrap();
        assert!((s.value - genfun_closed(&b2, 0.3).unwrap()).abs() < 1e-12);
        let any = spec(Kind::J, Direction::Backward, 3, 0.9);
        assert_eq!(genfun_series(&any, 0.0, 1e-15, 10).unwrap().value, 0.0);
        assert!(matches!(genfun_series(&f0, 0.9, 1e-15, 10), Err(Error::Region(_))));
    }

    #[test]
    fn slow_series_reports_nonconvergence() {
        let s = spec(Kind::J, Direction::Forward, 0, 1.0);
        let w = 0.999 / 2f64.sqrt();
        assert!(matches!(genfun_series(&s, w, 1e-15, 100), Err(Error::Convergence { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn transform_is_substituted_generating_function(
            n in 0u32..5, c in 0.2f64..2.5, zr in 0.05f64..3.0, i_kind: bool,
        ) {
            let kind = if i_kind { Kind::I } else { Kind::J };
            let s = spec(kind, Direction::Forward, n, c);
            let z = c.abs().max(c.hypot(1.0) - 1.0) + zr;
            let lhs = genfun_closed(&s, 1.0 / (1.0 + z)).unwrap() / (1.0 + z);
            let rhs = laplace_closed(&s, z).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs(), "{} vs {}", lhs, rhs);
        }

        #[test]
        fn generating_series_matches_closed(
            n in 0u32..5, c in -0.9f64..0.9, frac in -0.8f64..0.8, kind_i: bool, backward: bool,
        ) {
            prop_assume!(c.abs() > 0.05);
            let kind = if kind_i { Kind::I } else { Kind::J };
            let dir = if backward { Direction::Backward } else { Direction::Forward };
            let s = spec(kind, dir, n, c);
            let w = frac * genfun_radius(&s);
            let got = genfun_series(&s, w, 1e-15, 100_000).unwrap().value;
            // the backward closed forms omit the constant term at order zero
            let offset = if backward && n == 0 { 1.0 } else { 0.0 };
            let want = genfun_closed(&s, w).unwrap() + offset;
            prop_assert!((got - want).abs() <= 1e-11 * want.abs().max(1.0), "{} vs {}", got, want);
        }
    }
}
