//! The discrete wave equation on the integers.
//!
//! Forward scheme: `u(n;t+2) = 2u(n;t+1) - u(n;t) + c^2 (u(n+1;t) - 2u(n;t) + u(n-1;t))`,
//! explicit, with finite propagation: the delta response is `J_{2|n|}^{2c}(t)`,
//! which vanishes for `2|n| > t`.
//!
//! Backward scheme: `u(n;t) - c^2 (u(n+1;t) - 2u(n;t) + u(n-1;t)) = 2u(n;t-1) - u(n;t-2)`,
//! implicit, one tridiagonal solve per step. Its delta response
//! `Jbar_{2|n|}^{2c}(t)` is nonzero everywhere, so the window `[-N, N]` is a
//! truncation whose error is budgeted from the kernel at order `2(N - s)`,
//! `s` being the support radius of the initial data.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::bessel::{self, BesselSpec, Direction, Kind};
use crate::error::{Error, Result};
use crate::numeric::Residual;

/// Safety factor on the backward truncation budget.
const WINDOW_SAFETY: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Forward,
    Backward,
}

impl Scheme {
    pub fn direction(self) -> Direction {
        match self {
            Scheme::Forward => Direction::Forward,
            Scheme::Backward => Direction::Backward,
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "forward" => Ok(Scheme::Forward),
            "backward" => Ok(Scheme::Backward),
            _ => Err(Error::Domain(format!("unknown scheme {s:?}"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Forward => "forward",
            Scheme::Backward => "backward",
        })
    }
}

/// A two-sided sequence that is zero outside `offset .. offset + values.len()`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceWindow {
    pub offset: i64,
    pub values: Vec<f64>,
}

impl SequenceWindow {
    pub fn new(offset: i64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("sequence window needs at least one value".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite initial value {v}")));
        }
        Ok(SequenceWindow { offset, values })
    }

    pub fn delta() -> Self {
        SequenceWindow { offset: 0, values: vec![1.0] }
    }

    pub fn zero() -> Self {
        SequenceWindow { offset: 0, values: vec![0.0] }
    }

    /// Build from sparse `(n, value)` pairs; repeated `n` add up.
    pub fn from_pairs(pairs: &[(i64, f64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Ok(Self::zero());
        }
        let lo = pairs.iter().map(|p| p.0).min().unwrap_or(0);
        let hi = pairs.iter().map(|p| p.0).max().unwrap_or(0);
        let len = usize::try_from(hi - lo + 1).map_err(|_| Error::Config("window too wide".into()))?;
        if len > 1 << 24 {
            return Err(Error::Config(format!("initial data spans {len} sites")));
        }
        let mut values = vec![0.0; len];
        for &(n, v) in pairs {
            values[(n - lo) as usize] += v;
        }
        SequenceWindow::new(lo, values)
    }

    pub fn get(&self, n: i64) -> f64 {
        let i = n - self.offset;
        if i < 0 {
            return 0.0;
        }
        self.values.get(i as usize).copied().unwrap_or(0.0)
    }

    /// Nonzero entries as `(n, value)`.
    pub fn nonzero(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(move |(i, v)| (self.offset + i as i64, *v))
    }

    /// Largest `|n|` carrying a nonzero value; zero for the zero sequence.
    pub fn support_radius(&self) -> u64 {
        self.nonzero().map(|(n, _)| n.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn l1(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    /// `alpha * self + beta * other` on the union of the two windows.
    pub fn combine(&self, alpha: f64, other: &SequenceWindow, beta: f64) -> SequenceWindow {
        let lo = self.offset.min(other.offset);
        let hi = (self.offset + self.values.len() as i64).max(other.offset + other.values.len() as i64);
        let values = (lo..hi).map(|n| alpha * self.get(n) + beta * other.get(n)).collect();
        SequenceWindow { offset: lo, values }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveConfig {
    pub scheme: Scheme,
    pub c: f64,
    pub radius: u64,
    pub horizon: u64,
    pub truncation_tol: f64,
    pub init_u0: SequenceWindow,
    pub init_v0: SequenceWindow,
}

impl WaveConfig {
    /// Delta displacement, zero velocity, tolerance `1e-10`.
    pub fn new(scheme: Scheme, c: f64, radius: u64, horizon: u64) -> Self {
        WaveConfig {
            scheme,
            c,
            radius,
            horizon,
            truncation_tol: 1e-10,
            init_u0: SequenceWindow::delta(),
            init_v0: SequenceWindow::zero(),
        }
    }

    pub fn with_init(mut self, u0: SequenceWindow, v0: SequenceWindow) -> Self {
        self.init_u0 = u0;
        self.init_v0 = v0;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.truncation_tol = tol;
        self
    }

    pub fn support_radius(&self) -> u64 {
        self.init_u0.support_radius().max(self.init_v0.support_radius())
    }

    /// Checks parameters and that the window is wide enough for the scheme.
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("c must be positive, got {}", self.c)));
        }
        if self.radius < 1 || self.horizon < 1 {
            return Err(Error::Config("radius and horizon must be at least 1".into()));
        }
        if !(self.truncation_tol > 0.0) {
            return Err(Error::Config("truncation tolerance must be positive".into()));
        }
        let s = self.support_radius();
        match self.scheme {
            Scheme::Forward => {
                let need = self.horizon.div_ceil(2) + s;
                if self.radius < need {
                    return Err(Error::Config(format!(
                        "forward window radius {} is below {need} (= ceil(T/2) + support radius)",
                        self.radius
                    )));
                }
            }
            Scheme::Backward => {
                let bound = self.truncation_bound()?;
                if bound >= self.truncation_tol {
                    return Err(Error::Config(format!(
                        "backward window radius {} gives truncation bound {bound:e} >= tol {:e}",
                        self.radius, self.truncation_tol
                    )));
                }
            }
        }
        Ok(())
    }

    /// Backward budget `10 (|u0|_1 + (T+2)|v0|_1) max_{t<=T} |Jbar_{2(N-s)}^{2c}(t)|`.
    pub fn truncation_bound(&self) -> Result<f64> {
        let mass = self.init_u0.l1() + (self.horizon as f64 + 2.0) * self.init_v0.l1();
        if mass == 0.0 {
            return Ok(0.0);
        }
        let s = self.support_radius();
        if self.radius <= s {
            return Err(Error::Config(format!("radius {} does not contain the initial data", self.radius)));
        }
        let order = u32::try_from(2 * (self.radius - s)).map_err(|_| Error::Config("radius too large".into()))?;
        let spec = BesselSpec::new(Kind::J, Direction::Backward, order, 2.0 * self.c)?;
        let peak = bessel::sequence(&spec, 0, self.horizon as i64)?
            .iter()
            .map(|e| e.value.abs())
            .fold(0.0, f64::max);
        Ok(WINDOW_SAFETY * mass * peak)
    }
}

/// Solution values on `n in [-N, N]`, `t in [-1, T]`.
///
/// Row `t = -1` is the seed `u0 - v0` of the backward scheme; the forward
/// scheme does not use it and leaves it at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveGrid {
    pub config: WaveConfig,
    /// `values[t + 1][n + N]`.
    pub values: Vec<Vec<f64>>,
}

impl WaveGrid {
    /// Grid holding the seed rows: `t = 0, 1` (forward) or `t = -1, 0` (backward).
    pub fn seeded(config: WaveConfig) -> Result<Self> {
        config.validate()?;
        let n = config.radius as i64;
        let u0: Vec<f64> = (-n..=n).map(|k| config.init_u0.get(k)).collect();
        let v0: Vec<f64> = (-n..=n).map(|k| config.init_v0.get(k)).collect();
        let values = match config.scheme {
            Scheme::Forward => {
                let one = u0.iter().zip(&v0).map(|(u, v)| u + v).collect();
                vec![vec![0.0; u0.len()], u0, one]
            }
            Scheme::Backward => {
                let minus_one = u0.iter().zip(&v0).map(|(u, v)| u - v).collect();
                vec![minus_one, u0]
            }
        };
        Ok(WaveGrid { config, values })
    }

    pub fn radius(&self) -> i64 {
        self.config.radius as i64
    }

    /// Latest populated time.
    pub fn last_time(&self) -> i64 {
        self.values.len() as i64 - 2
    }

    /// First time holding scheme data: `0` forward, `-1` backward.
    pub fn first_time(&self) -> i64 {
        match self.config.scheme {
            Scheme::Forward => 0,
            Scheme::Backward => -1,
        }
    }

    pub fn row(&self, t: i64) -> &[f64] {
        &self.values[(t + 1) as usize]
    }

    /// `u(n;t)`, zero outside the window.
    pub fn get(&self, n: i64, t: i64) -> f64 {
        let r = self.radius();
        if n.abs() > r {
            return 0.0;
        }
        self.row(t)[(n + r) as usize]
    }

    /// `max_n |u(n;t)|` for each populated time from [`first_time`](Self::first_time).
    pub fn max_abs_per_time(&self) -> Vec<(i64, f64)> {
        (self.first_time()..=self.last_time())
            .map(|t| (t, self.row(t).iter().fold(0.0f64, |m, v| m.max(v.abs()))))
            .collect()
    }

    /// `(n, t, value)` for every cell from [`first_time`](Self::first_time) on.
    pub fn cells(&self) -> impl Iterator<Item = (i64, i64, f64)> + '_ {
        let r = self.radius();
        (self.first_time()..=self.last_time()).flat_map(move |t| (-r..=r).map(move |n| (n, t, self.get(n, t))))
    }
}

/// Append the next row of the explicit forward scheme.
pub fn step_forward(grid: &mut WaveGrid) -> Result<()> {
    if grid.config.scheme != Scheme::Forward {
        return Err(Error::Config("step_forward on a backward grid".into()));
    }
    let t = grid.last_time();
    let c2 = grid.config.c * grid.config.c;
    let (prev, cur) = (grid.row(t - 1), grid.row(t));
    let len = cur.len();
    let at = |row: &[f64], i: isize| if i < 0 || i as usize >= len { 0.0 } else { row[i as usize] };
    let next = (0..len as isize)
        .map(|i| {
            let lap = at(prev, i + 1) - 2.0 * at(prev, i) + at(prev, i - 1);
            2.0 * at(cur, i) - at(prev, i) + c2 * lap
        })
        .collect();
    grid.values.push(next);
    Ok(())
}

/// Append the next row of the implicit backward scheme.
pub fn step_backward(grid: &mut WaveGrid) -> Result<()> {
    if grid.config.scheme != Scheme::Backward {
        return Err(Error::Config("step_backward on a forward grid".into()));
    }
    let t = grid.last_time();
    let c2 = grid.config.c * grid.config.c;
    let rhs: Vec<f64> = grid.row(t).iter().zip(grid.row(t - 1)).map(|(a, b)| 2.0 * a - b).collect();
    let next = solve_toeplitz_tridiagonal(1.0 + 2.0 * c2, -c2, &rhs);
    grid.values.push(next);
    Ok(())
}

/// Thomas elimination for the symmetric Toeplitz system with diagonal `d` and
/// off-diagonal `e`; no pivoting, which is safe because `|d| > 2|e|`.
fn solve_toeplitz_tridiagonal(d: f64, e: f64, rhs: &[f64]) -> Vec<f64> {
    let m = rhs.len();
    let mut cp = vec![0.0; m];
    let mut x = vec![0.0; m];
    let mut denom = d;
    x[0] = rhs[0] / denom;
    for i in 1..m {
        cp[i - 1] = e / denom;
        denom = d - e * cp[i - 1];
        x[i] = (rhs[i] - e * x[i - 1]) / denom;
    }
    for i in (0..m.saturating_sub(1)).rev() {
        x[i] -= cp[i] * x[i + 1];
    }
    x
}

/// Seed and march to the horizon.
pub fn simulate(config: WaveConfig) -> Result<WaveGrid> {
    let mut grid = WaveGrid::seeded(config)?;
    while grid.last_time() < grid.config.horizon as i64 {
        match grid.config.scheme {
            Scheme::Forward => step_forward(&mut grid)?,
            Scheme::Backward => step_backward(&mut grid)?,
        }
    }
    // the forward seed carries t = 1 even when the horizon is 1 or less
    grid.values.truncate(grid.config.horizon as usize + 2);
    Ok(grid)
}

/// Worst residual of the scheme's difference equation over the grid, zero padding included.
pub fn scheme_residual(grid: &WaveGrid) -> Residual {
    let c2 = grid.config.c * grid.config.c;
    let r = grid.radius();
    let mut worst = Residual { value: 0.0, scale: 0.0 };
    let (first, last) = match grid.config.scheme {
        Scheme::Forward => (2, grid.last_time()),
        Scheme::Backward => (1, grid.last_time()),
    };
    for t in first..=last {
        for n in -r..=r {
            let terms = match grid.config.scheme {
                Scheme::Forward => {
                    let (p, q) = (t - 2, t - 1);
                    [
                        grid.get(n, t),
                        -2.0 * grid.get(n, q),
                        grid.get(n, p),
                        -c2 * grid.get(n + 1, p),
                        2.0 * c2 * grid.get(n, p),
                        -c2 * grid.get(n - 1, p),
                    ]
                }
                Scheme::Backward => [
                    (1.0 + 2.0 * c2) * grid.get(n, t),
                    -c2 * grid.get(n + 1, t),
                    -c2 * grid.get(n - 1, t),
                    -2.0 * grid.get(n, t - 1),
                    grid.get(n, t - 2),
                    0.0,
                ],
            };
            let res = Residual::from_terms(&terms);
            if res.scale > 0.0 && (worst.scale == 0.0 || res.relative() > worst.relative()) {
                worst = res;
            }
        }
    }
    worst
}

fn kernel_spec(scheme: Scheme, n: i64, c: f64) -> Result<BesselSpec> {
    let order = u32::try_from(2 * n.unsigned_abs()).map_err(|_| Error::Domain(format!("site {n} too far out")))?;
    BesselSpec::new(Kind::J, scheme.direction(), order, 2.0 * c)
}

/// First fundamental solution: `J_{2|n|}^{2c}(t)` (forward) or `Jbar_{2|n|}^{2c}(t)` (backward).
pub fn fundamental1(scheme: Scheme, n: i64, t: u64, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("c must be positive, got {c}")));
    }
    bessel::eval(&kernel_spec(scheme, n, c)?, t as i64)
}

/// Second fundamental solution of the backward scheme:
/// `sum_{s=0}^{t} Jbar_{2|n|}^{2c}(s) - Jbar_{2|n|}^{2c}(-1)`, the sum being empty at `t = -1`.
pub fn fundamental2_backward(n: i64, t: i64, c: f64) -> Result<f64> {
    if t < -1 {
        return Err(Error::Domain(format!("t must be at least -1, got {t}")));
    }
    if !(c > 0.0) {
        return Err(Error::Domain(format!("c must be positive, got {c}")));
    }
    let spec = kernel_spec(Scheme::Backward, n, c)?;
    let before = bessel::eval(&spec, -1)?;
    if t < 0 {
        return Ok(-before);
    }
    let sum: f64 = bessel::sequence(&spec, 0, t)?.iter().map(|e| e.value).sum();
    Ok(sum - before)
}

/// Backward solution for general data:
/// `sum_k u0_k u1(n-k;t) + v0_k u2(n-k;t)` over the nonzero entries of the data.
///
/// The data windows are finite, so the sum is exact up to kernel rounding.
pub fn general_solution(n: i64, t: u64, cfg: &WaveConfig) -> Result<f64> {
    if cfg.scheme != Scheme::Backward {
        return Err(Error::Precondition("the general solution is implemented for the backward scheme".into()));
    }
    if !(cfg.c > 0.0) {
        return Err(Error::Domain(format!("c must be positive, got {}", cfg.c)));
    }
    let mut total = 0.0;
    for (k, u) in cfg.init_u0.nonzero() {
        total += u * fundamental1(Scheme::Backward, n - k, t, cfg.c)?;
    }
    for (k, v) in cfg.init_v0.nonzero() {
        total += v * fundamental2_backward(n - k, t as i64, cfg.c)?;
    }
    Ok(total)
}

/// Which envelope an [`envelope_fit`] is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EnvelopeRef {
    ForwardGrowth,
    BackwardDecay,
}

impl EnvelopeRef {
    fn sign(self) -> f64 {
        match self {
            EnvelopeRef::ForwardGrowth => 1.0,
            EnvelopeRef::BackwardDecay => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeFit {
    pub times: Vec<i64>,
    pub amplitudes: Vec<f64>,
    pub fitted_rate: f64,
    pub reference_rate: f64,
}

/// Nominal envelope rate `+-1/2 ln(1 + c^2/4)` for the fundamental solutions.
/// The fitted slope follows [`kernel_envelope_rate`] instead.
pub fn nominal_envelope_rate(reference: EnvelopeRef, c: f64) -> f64 {
    reference.sign() * 0.5 * (c * c / 4.0).ln_1p()
}

/// Envelope rate of the kernel `J^{2c}`, `+-1/2 ln(1 + 4c^2)`, read off the
/// large-`t` asymptotics of the families at parameter `2c`.
pub fn kernel_envelope_rate(reference: EnvelopeRef, c: f64) -> f64 {
    reference.sign() * 0.5 * (4.0 * c * c).ln_1p()
}

/// Least-squares slope of `ln |extremum|` against `t` over the local extrema of `series`.
pub fn envelope_fit(series: &[(i64, f64)], reference: EnvelopeRef, c: f64) -> Result<EnvelopeFit> {
    let sign_changes = series.windows(2).filter(|w| w[0].1 * w[1].1 < 0.0).count();
    if sign_changes < 5 {
        return Err(Error::Fit(format!("need at least 5 sign changes, found {sign_changes}")));
    }
    let mut times = Vec::new();
    let mut amplitudes = Vec::new();
    for w in series.windows(3) {
        let (a, b, d) = (w[0].1, w[1].1, w[2].1);
        let is_max = b > 0.0 && b >= a && b >= d;
        let is_min = b < 0.0 && b <= a && b <= d;
        if is_max || is_min {
            times.push(w[1].0);
            amplitudes.push(b.abs());
        }
    }
    if times.len() < 5 {
        return Err(Error::Fit(format!("need at least 5 extrema, found {}", times.len())));
    }
    let xs: Vec<f64> = times.iter().map(|&t| t as f64).collect();
    let ys: Vec<f64> = amplitudes.iter().map(|a| a.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("extrema all at one time".into()));
    }
    Ok(EnvelopeFit { times, amplitudes, fitted_rate: sxy / sxx, reference_rate: nominal_envelope_rate(reference, c) })
}

/// `(t, fundamental1(scheme, n, t, c))` for `t in t0..=t1`, sharing one recurrence march.
pub fn fundamental1_series(scheme: Scheme, n: i64, t0: u64, t1: u64, c: f64) -> Result<Vec<(i64, f64)>> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("c must be positive, got {c}")));
    }
    let spec = kernel_spec(scheme, n, c)?;
    Ok(bessel::sequence(&spec, t0 as i64, t1 as i64)?
        .into_iter()
        .enumerate()
        .map(|(i, e)| (t0 as i64 + i as i64, e.value))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fundamental_examples() {
        for scheme in [Scheme::Forward, Scheme::Backward] {
            assert_eq!(fundamental1(scheme, 0, 0, 0.7).unwrap(), 1.0);
        }
        assert_eq!(fundamental1(Scheme::Forward, 3, 2, 0.5).unwrap(), 0.0);
        assert!((fundamental1(Scheme::Backward, 0, 1, 0.5).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(fundamental2_backward(0, 0, 0.5).unwrap(), 0.0);
        assert_eq!(fundamental2_backward(1, 0, 0.5).unwrap(), 0.0);
        assert_eq!(fundamental2_backward(0, -1, 0.5).unwrap(), -1.0);
        assert!(fundamental2_backward(0, -2, 0.5).is_err());
    }

    #[test]
    fn forward_step_examples() {
        let grid = simulate(WaveConfig::new(Scheme::Forward, 0.5, 8, 10)).unwrap();
        assert_eq!(grid.get(0, 2), 0.5);
        assert_eq!(grid.get(2, 2), 0.0);
        assert_eq!(grid.last_time(), 10);
        let zero = WaveConfig::new(Scheme::Forward, 0.5, 8, 10).with_init(SequenceWindow::zero(), SequenceWindow::zero());
        assert!(simulate(zero).unwrap().cells().all(|(_, _, v)| v == 0.0));
    }

    #[test]
    fn forward_window_must_cover_light_cone() {
        let cfg = WaveConfig::new(Scheme::Forward, 0.5, 4, 10);
        assert!(matches!(simulate(cfg), Err(Error::Config(_))));
        let shifted = WaveConfig::new(Scheme::Forward, 0.5, 6, 10)
            .with_init(SequenceWindow::new(1, vec![1.0]).unwrap(), SequenceWindow::zero());
        assert!(simulate(shifted).is_ok());
    }

    #[test]
    fn forward_stepper_is_the_kernel() {
        let (c, t_max) = (0.8, 30u64);
        let grid = simulate(WaveConfig::new(Scheme::Forward, c, 20, t_max)).unwrap();
        for t in 0..=t_max {
            for n in -20..=20i64 {
                let k = fundamental1(Scheme::Forward, n, t, c).unwrap();
                assert!((grid.get(n, t as i64) - k).abs() <= 1e-12 * k.abs().max(1.0), "n={n} t={t}");
            }
        }
        assert!(scheme_residual(&grid).relative() < 1e-12);
    }

    #[test]
    fn backward_stepper_examples() {
        let grid = simulate(WaveConfig::new(Scheme::Backward, 0.5, 64, 20)).unwrap();
        assert!((grid.get(0, 1) - 0.5f64.sqrt()).abs() < 1e-10);
        assert_eq!(grid.get(0, 0), 1.0);
        assert_eq!(grid.get(0, -1), 1.0);
        for t in -1..=20 {
            for n in 1..=64 {
                // elimination runs left to right, so symmetry holds to rounding only
                assert!((grid.get(n, t) - grid.get(-n, t)).abs() <= 1e-15, "n={n} t={t}");
            }
        }
        assert!(scheme_residual(&grid).relative() < 1e-10);
    }

    #[test]
    fn backward_window_budget() {
        assert!(matches!(simulate(WaveConfig::new(Scheme::Backward, 0.5, 3, 20)), Err(Error::Config(_))));
        let cfg = WaveConfig::new(Scheme::Backward, 0.5, 40, 20);
        assert!(cfg.truncation_bound().unwrap() < 1e-10);
        let zero = cfg.clone().with_init(SequenceWindow::zero(), SequenceWindow::zero());
        assert_eq!(zero.truncation_bound().unwrap(), 0.0);
    }

    #[test]
    fn second_fundamental_initial_conditions() {
        let c = 0.5;
        for n in -3..=3i64 {
            let at0 = fundamental2_backward(n, 0, c).unwrap();
            let at_minus = fundamental2_backward(n, -1, c).unwrap();
            assert_eq!(at0, 0.0, "n={n}");
            assert_eq!(at0 - at_minus, if n == 0 { 1.0 } else { 0.0 }, "n={n}");
        }
    }

    #[test]
    fn general_solution_reproduces_fundamentals() {
        let c = 0.5;
        let delta_u = WaveConfig::new(Scheme::Backward, c, 40, 10);
        let delta_v = delta_u.clone().with_init(SequenceWindow::zero(), SequenceWindow::delta());
        for n in -5..=5 {
            for t in 0..=10u64 {
                let u1 = fundamental1(Scheme::Backward, n, t, c).unwrap();
                let u2 = fundamental2_backward(n, t as i64, c).unwrap();
                assert!((general_solution(n, t, &delta_u).unwrap() - u1).abs() <= 1e-12);
                assert!((general_solution(n, t, &delta_v).unwrap() - u2).abs() <= 1e-12);
            }
        }
        let two = delta_u.clone().with_init(SequenceWindow::from_pairs(&[(0, 1.0), (5, 1.0)]).unwrap(), SequenceWindow::zero());
        let want = fundamental1(Scheme::Backward, 2, 3, c).unwrap() + fundamental1(Scheme::Backward, -3, 3, c).unwrap();
        assert!((general_solution(2, 3, &two).unwrap() - want).abs() < 1e-15);
        let fwd = WaveConfig::new(Scheme::Forward, c, 40, 10);
        assert!(matches!(general_solution(0, 1, &fwd), Err(Error::Precondition(_))));
    }

    #[test]
    fn stepper_matches_general_solution_for_mixed_data() {
        let c = 0.35;
        let u0 = SequenceWindow::new(-2, vec![0.5, -1.0, 2.0, 0.0, 0.25]).unwrap();
        let v0 = SequenceWindow::new(-1, vec![1.0, 0.0, -0.5]).unwrap();
        let cfg = WaveConfig::new(Scheme::Backward, c, 60, 15).with_init(u0, v0);
        let grid = simulate(cfg.clone()).unwrap();
        for t in 0..=15u64 {
            for n in -10..=10 {
                let g = general_solution(n, t, &cfg).unwrap();
                assert!((grid.get(n, t as i64) - g).abs() < 1e-10, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn envelope_of_synthetic_cosine_is_flat() {
        let series: Vec<(i64, f64)> = (0..300).map(|t| (t, (0.9 * t as f64 + 0.3).cos())).collect();
        let fit = envelope_fit(&series, EnvelopeRef::ForwardGrowth, 1.0).unwrap();
        assert!(fit.fitted_rate.abs() < 1e-3, "{}", fit.fitted_rate);
        assert!((fit.reference_rate - 0.5 * 1.25f64.ln()).abs() < 1e-15);
        let growing: Vec<(i64, f64)> = series.iter().map(|&(t, v)| (t, v * (0.02 * t as f64).exp())).collect();
        let fit = envelope_fit(&growing, EnvelopeRef::ForwardGrowth, 1.0).unwrap();
        assert!((fit.fitted_rate - 0.02).abs() < 1e-3);
        let flat: Vec<(i64, f64)> = (0..50).map(|t| (t, 1.0 + t as f64)).collect();
        assert!(matches!(envelope_fit(&flat, EnvelopeRef::BackwardDecay, 1.0), Err(Error::Fit(_))));
    }

    #[test]
    fn kernel_envelope_follows_parameter_two_c() {
        let c = 1.0;
        let fwd = fundamental1_series(Scheme::Forward, 0, 100, 400, c).unwrap();
        let fit = envelope_fit(&fwd, EnvelopeRef::ForwardGrowth, c).unwrap();
        let want = kernel_envelope_rate(EnvelopeRef::ForwardGrowth, c);
        assert!((fit.fitted_rate - want).abs() < 0.05 * want, "{} vs {want}", fit.fitted_rate);
        let bwd = fundamental1_series(Scheme::Backward, 0, 100, 400, c).unwrap();
        let fit = envelope_fit(&bwd, EnvelopeRef::BackwardDecay, c).unwrap();
        let want = kernel_envelope_rate(EnvelopeRef::BackwardDecay, c);
        assert!((fit.fitted_rate - want).abs() < 0.05 * want.abs(), "{} vs {want}", fit.fitted_rate);
    }

    #[test]
    fn scheme_parse() {
        assert_eq!("Backward".parse::<Scheme>().unwrap(), Scheme::Backward);
        assert!("sideways".parse::<Scheme>().is_err());
        assert_eq!(Scheme::Forward.to_string(), "forward");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn general_solution_is_linear(
            a in -2.0f64..2.0, b in -2.0f64..2.0,
            u in proptest::collection::vec(-1.0f64..1.0, 1..4),
            v in proptest::collection::vec(-1.0f64..1.0, 1..4),
            n in -4i64..4, t in 0u64..12,
        ) {
            let c = 0.6;
            let ua = SequenceWindow::new(-1, u.clone()).unwrap();
            let va = SequenceWindow::new(0, v.clone()).unwrap();
            let ub = SequenceWindow::new(1, v).unwrap();
            let vb = SequenceWindow::new(-2, u).unwrap();
            let base = WaveConfig::new(Scheme::Backward, c, 30, 12);
            let da = base.clone().with_init(ua.clone(), va.clone());
            let db = base.clone().with_init(ub.clone(), vb.clone());
            let mix = base.with_init(ua.combine(a, &ub, b), va.combine(a, &vb, b));
            let lhs = general_solution(n, t, &mix).unwrap();
            let rhs = a * general_solution(n, t, &da).unwrap() + b * general_solution(n, t, &db).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn even_data_gives_even_rows(vals in proptest::collection::vec(-1.0f64..1.0, 1..4), backward: bool) {
            let mut sym: Vec<f64> = vals.iter().rev().cloned().collect();
            sym.extend_from_slice(&vals[1..]);
            let r = vals.len() as i64 - 1;
            let u0 = SequenceWindow::new(-r, sym).unwrap();
            let scheme = if backward { Scheme::Backward } else { Scheme::Forward };
            let cfg = WaveConfig::new(scheme, 0.4, 40, 12).with_init(u0, SequenceWindow::zero());
            let grid = simulate(cfg).unwrap();
            for t in 0..=12 {
                for n in 1..=40 {
                    prop_assert!((grid.get(n, t) - grid.get(-n, t)).abs() <= 1e-14);
                }
            }
        }
    }
}
