//! Sampled invariant suites behind the `verify` command.
//!
//! Parameter tuples are drawn from a ChaCha stream keyed by the seed, so a
//! given `(suite, seed, tol)` always runs the same checks in the same order.
//! `tol`, when given, replaces every floating-point tolerance; the bit
//! threshold of the oracle suite is fixed.

use std::fmt;
use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bessel::{self, BesselSpec, Direction, Kind};
use crate::error::{Error, Result};
use crate::laplace;
use crate::oracle;
use crate::wave::{self, Scheme, SequenceWindow, WaveConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Bessel,
    Laplace,
    Wave,
    Oracle,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(Suite::All),
            "bessel" => Ok(Suite::Bessel),
            "laplace" => Ok(Suite::Laplace),
            "wave" => Ok(Suite::Wave),
            "oracle" => Ok(Suite::Oracle),
            _ => Err(Error::Domain(format!("unknown suite {s:?}"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::All => "all",
            Suite::Bessel => "bessel",
            Suite::Laplace => "laplace",
            Suite::Wave => "wave",
            Suite::Oracle => "oracle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub tol: Option<f64>,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { tol: None, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub check: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub checks_run: usize,
    pub failures: Vec<Failure>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Checker {
    tol: Option<f64>,
    rng: ChaCha8Rng,
    run: usize,
    failures: Vec<Failure>,
}

impl Checker {
    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    /// Record one check; an evaluation error counts as a failure.
    fn check(&mut self, name: &str, outcome: Result<(bool, String)>) {
        self.run += 1;
        match outcome {
            Ok((true, _)) => {}
            Ok((false, detail)) => self.failures.push(Failure { check: name.into(), detail }),
            Err(e) => self.failures.push(Failure { check: name.into(), detail: e.to_string() }),
        }
    }

    fn pick<T: Copy>(&mut self, items: &[T]) -> T {
        items[self.rng.random_range(0..items.len())]
    }
}

const C_GRID: [f64; 8] = [0.25, -0.25, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0];
const KINDS: [Kind; 2] = [Kind::J, Kind::I];
const DIRECTIONS: [Direction; 2] = [Direction::Forward, Direction::Backward];

pub fn run(suite: Suite, opts: &VerifyOptions) -> Report {
    let mut ck = Checker { tol: opts.tol, rng: ChaCha8Rng::seed_from_u64(opts.seed), run: 0, failures: Vec::new() };
    let all = suite == Suite::All;
    if all || suite == Suite::Bessel {
        bessel_suite(&mut ck);
    }
    if all || suite == Suite::Laplace {
        laplace_suite(&mut ck);
    }
    if all || suite == Suite::Wave {
        wave_suite(&mut ck);
    }
    if all || suite == Suite::Oracle {
        oracle_suite(&mut ck);
    }
    Report { suite, checks_run: ck.run, failures: ck.failures }
}

fn bessel_suite(ck: &mut Checker) {
    let examples: [(Kind, Direction, u32, f64, i64, f64); 4] = [
        (Kind::J, Direction::Forward, 0, 1.0, 2, 0.5),
        (Kind::J, Direction::Backward, 1, 1.0, -2, -1.0),
        (Kind::J, Direction::Backward, 0, 1.0, 1, std::f64::consts::FRAC_1_SQRT_2),
        (Kind::I, Direction::Forward, 0, 7.0 / 3.0, 0, 1.0),
    ];
    for (kind, dir, n, c, t, want) in examples {
        ck.check(
            "bessel.example",
            BesselSpec::new(kind, dir, n, c).and_then(|s| bessel::eval(&s, t)).map(|v| {
                ((v - want).abs() <= 1e-15, format!("{dir} {kind} n={n} c={c} t={t}: {v} vs {want}"))
            }),
        );
    }
    let tol = ck.tol(1e-10);
    for _ in 0..150 {
        let (kind, dir, n, c, t) = (ck.pick(&KINDS), ck.pick(&DIRECTIONS), ck.rng.random_range(0..=8u32), ck.pick(&C_GRID), ck.rng.random_range(1..=30i64));
        if kind == Kind::I && dir == Direction::Backward && c.abs() >= 1.0 {
            continue;
        }
        let r = match dir {
            Direction::Forward => bessel::residual_forward(kind, n, t, c),
            Direction::Backward => bessel::residual_backward(kind, n, t, c),
        };
        ck.check(
            "bessel.defining_equation",
            r.map(|r| (r.relative() < tol, format!("{dir} {kind} n={n} c={c} t={t}: relative residual {:e}", r.relative()))),
        );
    }
    let tol = ck.tol(1e-12);
    for _ in 0..80 {
        let (kind, n, c, t) = (ck.pick(&KINDS), ck.rng.random_range(0..=8u32), ck.pick(&C_GRID), ck.rng.random_range(-30..=30i64));
        if kind == Kind::I && c.abs() >= 1.0 {
            continue;
        }
        ck.check(
            "bessel.reflection",
            bessel::reflection_check(kind, n, t, c)
                .map(|r| (r.relative() < tol, format!("{kind} n={n} c={c} t={t}: relative residual {:e}", r.relative()))),
        );
    }
    let tol = ck.tol(1e-10);
    for _ in 0..60 {
        let (n, c, t) = (ck.rng.random_range(0..=8u32), ck.pick(&C_GRID), ck.rng.random_range(0..=30i64));
        let outcome = bessel::lemma_residuals(n, t, c).map(|parts| {
            let bad: Vec<String> = parts
                .iter()
                .filter(|(_, r)| !(r.relative() < tol))
                .map(|(p, r)| format!("{p:?}: {:e}", r.relative()))
                .collect();
            (bad.is_empty(), format!("n={n} c={c} t={t}: {}", bad.join(", ")))
        });
        ck.check("bessel.difference_identities", outcome);
    }
    for _ in 0..20 {
        let n = ck.rng.random_range(0..=8u32);
        let t = ck.rng.random_range(n as i64..=30);
        ck.check(
            "bessel.imaginary_parameter_coefficients",
            bessel::imaginary_identity_coeffs(n, t).map(|ok| (ok, format!("n={n} t={t}"))),
        );
    }
}

/// A real `z` inside the transform region, `frac` in `[0, 1)` picking how deep.
fn region_point(spec: &BesselSpec, frac: f64, left: bool) -> f64 {
    let r = laplace::genfun_radius(spec);
    // weight base |w| = (0.15 + 0.7 frac) r stays well inside the disc
    let w = (0.15 + 0.7 * frac) * r;
    match spec.direction {
        Direction::Forward => {
            let one_plus_z = 1.0 / w;
            if left {
                -one_plus_z - 1.0
            } else {
                one_plus_z - 1.0
            }
        }
        Direction::Backward => {
            if left {
                1.0 + w
            } else {
                1.0 - w
            }
        }
    }
}

fn laplace_suite(ck: &mut Checker) {
    let tol = ck.tol(1e-10);
    for _ in 0..120 {
        let (kind, dir) = (ck.pick(&KINDS), ck.pick(&DIRECTIONS));
        let n = ck.rng.random_range(0..=3u32);
        let cs: &[f64] = if dir == Direction::Forward { &[0.3, 1.0, 2.0] } else { &[0.3, 0.6] };
        let c = ck.pick(cs);
        let (frac, left) = (ck.rng.random_range(0.0..1.0), ck.rng.random_range(0..2) == 1);
        let outcome = BesselSpec::new(kind, dir, n, c).and_then(|spec| {
            let z = region_point(&spec, frac, left);
            let e = laplace::laplace_series(&spec, z, 1e-15, laplace::DEFAULT_MAX_TERMS)?;
            let (gap, what) = match e.discrepancy() {
                Some(d) => (d.abs(), "series - closed - 1/(1-z)"),
                None => (e.abs_diff(), "series - closed"),
            };
            Ok((gap < tol * e.closed.abs().max(1.0), format!("{dir} {kind} n={n} c={c} z={z}: |{what}| = {gap:e}")))
        });
        let name = if dir == Direction::Backward && n == 0 { "laplace.discrepancy_law" } else { "laplace.transform_equality" };
        ck.check(name, outcome);
    }
    let tol = ck.tol(1e-12);
    for _ in 0..60 {
        let kind = ck.pick(&KINDS);
        let n = ck.rng.random_range(0..=4u32);
        let c: f64 = ck.rng.random_range(0.2..2.5);
        let z = c.max(c.hypot(1.0) - 1.0) + ck.rng.random_range(0.05..3.0);
        let outcome = BesselSpec::new(kind, Direction::Forward, n, c).and_then(|spec| {
            let lhs = laplace::genfun_closed(&spec, 1.0 / (1.0 + z))? / (1.0 + z);
            let rhs = laplace::laplace_closed(&spec, z)?;
            Ok(((lhs - rhs).abs() <= tol * rhs.abs(), format!("{kind} n={n} c={c} z={z}: {lhs} vs {rhs}")))
        });
        ck.check("laplace.generating_function_identity", outcome);
    }
}

fn wave_suite(ck: &mut Checker) {
    let tol = ck.tol(1e-12);
    for _ in 0..4 {
        let c = ck.rng.random_range(0.2..1.5);
        let outcome = wave::simulate(WaveConfig::new(Scheme::Forward, c, 24, 40)).and_then(|grid| {
            let mut worst = 0.0f64;
            for t in 0..=40u64 {
                for n in -24..=24i64 {
                    let k = wave::fundamental1(Scheme::Forward, n, t, c)?;
                    worst = worst.max((grid.get(n, t as i64) - k).abs() / k.abs().max(1.0));
                }
            }
            let res = wave::scheme_residual(&grid).relative();
            Ok((worst <= tol && res <= tol, format!("c={c}: stepper gap {worst:e}, scheme residual {res:e}")))
        });
        ck.check("wave.forward_stepper_equivalence", outcome);
    }
    let tol = ck.tol(1e-10);
    for _ in 0..4 {
        let c = ck.rng.random_range(0.2..1.0);
        let cfg = WaveConfig::new(Scheme::Backward, c, 80, 30).with_tol(1e-10);
        let budget = cfg.truncation_tol;
        let outcome = wave::simulate(cfg).and_then(|grid| {
            let mut worst = 0.0f64;
            for t in 0..=30u64 {
                for n in -40..=40i64 {
                    let k = wave::fundamental1(Scheme::Backward, n, t, c)?;
                    worst = worst.max((grid.get(n, t as i64) - k).abs());
                }
            }
            let res = wave::scheme_residual(&grid).relative();
            Ok((worst <= budget + tol && res <= tol, format!("c={c}: stepper gap {worst:e}, scheme residual {res:e}")))
        });
        ck.check("wave.backward_stepper_equivalence", outcome);
    }
    for n in -3..=3i64 {
        let c = 0.5;
        let outcome = (|| {
            let at0 = wave::fundamental2_backward(n, 0, c)?;
            let before = wave::fundamental2_backward(n, -1, c)?;
            let want = if n == 0 { 1.0 } else { 0.0 };
            Ok((at0 == 0.0 && at0 - before == want, format!("n={n}: u2(0) = {at0}, backward difference {}", at0 - before)))
        })();
        ck.check("wave.second_fundamental_initial_conditions", outcome);
    }
    let tol = ck.tol(1e-12);
    for _ in 0..6 {
        let c = ck.rng.random_range(0.2..1.0);
        let (n, t) = (ck.rng.random_range(-6..=6i64), ck.rng.random_range(0..=12u64));
        let base = WaveConfig::new(Scheme::Backward, c, 30, 12);
        let outcome = (|| {
            let u = wave::general_solution(n, t, &base)?;
            let v = wave::general_solution(n, t, &base.clone().with_init(SequenceWindow::zero(), SequenceWindow::delta()))?;
            let (u1, u2) = (wave::fundamental1(Scheme::Backward, n, t, c)?, wave::fundamental2_backward(n, t as i64, c)?);
            let gap = (u - u1).abs().max((v - u2).abs());
            Ok((gap <= tol, format!("c={c} n={n} t={t}: gap {gap:e}")))
        })();
        ck.check("wave.general_solution_delta_data", outcome);
    }
}

fn oracle_suite(ck: &mut Checker) {
    let cs = [(1i64, 4i64), (-1, 4), (1, 2), (-1, 2), (3, 4), (-3, 4), (3, 2), (-3, 2)];
    for _ in 0..60 {
        let (kind, dir) = (ck.pick(&KINDS), ck.pick(&DIRECTIONS));
        let (num, den) = ck.pick(&cs);
        let (n, t) = (ck.rng.random_range(0..=8u32), ck.rng.random_range(-20..=40i64));
        let c = num as f64 / den as f64;
        if kind == Kind::I && c.abs() >= 1.0 && (dir == Direction::Backward || t < 0) {
            continue;
        }
        let outcome = (|| {
            let cr = oracle::rat(num, den);
            let sign = oracle::rat(if n % 2 == 0 { 1 } else { -1 }, 1);
            let reference = match (dir, t >= 0) {
                (Direction::Forward, true) | (Direction::Backward, false) => {
                    oracle::HpReal::exact(oracle::oracle_poly_eval(kind, dir, n, t, &cr)?)
                }
                (Direction::Backward, true) => oracle::oracle_backward_series(kind, n, t, &cr, 96)?,
                (Direction::Forward, false) => oracle::oracle_backward_series(kind, n, -t, &cr, 96)?.scale(&sign),
            };
            let v = bessel::eval(&BesselSpec::new(kind, dir, n, c)?, t)?;
            let bits = if reference.mid == oracle::rat(0, 1) && reference.rad == oracle::rat(0, 1) {
                if v == 0.0 { f64::INFINITY } else { 0.0 }
            } else {
                reference.agreement_bits(v)
            };
            Ok((bits >= 45.0, format!("{dir} {kind} n={n} c={c} t={t}: {bits:.1} bits")))
        })();
        ck.check("oracle.agreement", outcome);
    }
    let outcome = (|| {
        let c = oracle::rat(1, 2);
        let seed = |t| oracle::oracle_backward_series(Kind::I, 1, t, &c, 256);
        let ys = oracle::oracle_recurrence_extend(Kind::I, 1, &c, &seed(1)?, &seed(2)?, 20, 256);
        let mut worst = f64::INFINITY;
        for (i, y) in ys.iter().enumerate() {
            worst = worst.min(oracle::oracle_backward_series(Kind::I, 1, i as i64 + 1, &c, 64)?.agreement_with(y));
        }
        Ok((worst >= 44.0, format!("backward I n=1 c=1/2: routes agree to {worst:.1} bits")))
    })();
    ck.check("oracle.route_independence", outcome);
}
