//! Large-argument values frozen from a 700-digit independent computation.
//! They pin the recurrence and rescaled-series routes, which the exact
//! oracle cannot reach cheaply.

use disbessel::bessel::{eval_detailed, BesselSpec, Direction, Kind, Method};

/// (kind, direction, n, c, t, mantissa, power of ten, expected route)
const CASES: &[(Kind, Direction, u32, f64, i64, f64, i32, Method)] = &[
    (Kind::J, Direction::Forward, 0, 1.0, 2000, 2.1000422756117089831, 299, Method::Recurrence),
    (Kind::J, Direction::Forward, 3, -0.5, 2100, -1.0437897496181119378, 100, Method::Recurrence),
    (Kind::J, Direction::Forward, 1, 2.0, 300, -3.0267876619649643923, 103, Method::Recurrence),
    (Kind::J, Direction::Backward, 1, 1.0, 2000, -1.8299171726004776995, -303, Method::Recurrence),
    (Kind::J, Direction::Backward, 2, 2.0, 500, -5.3187357189050247478, -177, Method::Recurrence),
    (Kind::J, Direction::Backward, 0, 0.25, 3000, 4.2679140512355041477, -42, Method::Recurrence),
    (Kind::I, Direction::Forward, 3, 0.5, 1500, 2.4232879329761318223, 262, Method::Polynomial),
    (Kind::I, Direction::Backward, 1, 0.5, 1000, 1.3517782601226086705, 299, Method::Series),
    (Kind::I, Direction::Backward, 4, -0.75, 600, 1.6130018696565768319, 359, Method::Series),
];

#[test]
fn large_argument_references() {
    for &(kind, dir, n, c, t, mant, p10, method) in CASES {
        let spec = BesselSpec::new(kind, dir, n, c).unwrap();
        let e = eval_detailed(&spec, t).unwrap();
        assert_eq!(e.method, method, "{kind} {dir} n={n} c={c} t={t}");
        assert_eq!(e.scaled.signum(), mant.signum());
        let ln_ref = mant.abs().ln() + p10 as f64 * std::f64::consts::LN_10;
        let rel = (e.scaled.ln_abs() - ln_ref).abs();
        assert!(rel < 1e-10, "{kind} {dir} n={n} c={c} t={t}: log error {rel:e}");
    }
}
