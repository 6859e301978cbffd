use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::transforms::{Forcing, HalfLineFunction, TimeSignal};

fn ch_plus(alpha: f64, beta: f64) -> Dispersion {
    Dispersion::new(Family::ChPlus, alpha, beta).unwrap()
}

fn ch_minus(alpha: f64, beta: f64) -> Dispersion {
    Dispersion::new(Family::ChMinus, alpha, beta).unwrap()
}

fn exp_data(d: Dispersion) -> ProblemData {
    ProblemData::new(d, HalfLineFunction::exp_decay(1.0, 1.0).unwrap(), TimeSignal::sin(0.5, 1.0), TimeSignal::exp(0.3, -1.0))
}

fn eval(data: &ProblemData, x: f64, t: f64, n: u32, m: u32, opts: &SolverOptions) -> Complex64 {
    evaluate(data, x, t, DerivOrder::new(n, m).unwrap(), opts, None).unwrap().value
}

#[test]
fn zero_data_gives_zero_field() {
    for d in [Dispersion::biharmonic(), ch_plus(1.0, 1.0), ch_minus(1.0, 1.0)] {
        let data = ProblemData::new(d, HalfLineFunction::zero(), TimeSignal::zero(), TimeSignal::zero());
        let f = solve(&data, &EvalRequest::values(vec![(0.5, 0.5), (2.0, 0.1)]), &SolverOptions::default()).unwrap();
        assert!(f.values.iter().all(|v| v.norm() == 0.0), "{:?}", d.family);
    }
}

#[test]
fn request_validation() {
    let data = exp_data(Dispersion::biharmonic());
    let opts = SolverOptions::default();
    assert!(solve(&data, &EvalRequest::values(vec![(0.0, 1.0)]), &opts).is_err());
    assert!(solve(&data, &EvalRequest::values(vec![(1.0, 0.0)]), &opts).is_err());
    assert!(solve(&data, &EvalRequest::values(vec![(1.0, 1.0)]).with_horizon(1.0), &opts).is_err());
    assert!(DerivOrder::new(1, 2).is_err());
    assert!(solve(&data, &EvalRequest::values(vec![(1.0, 1.0)]), &SolverOptions::with_tol(0.0)).is_err());
}

#[test]
fn corner_warning_for_incompatible_data() {
    let data = ProblemData::new(Dispersion::biharmonic(), HalfLineFunction::zero(), TimeSignal::constant(1.0), TimeSignal::zero());
    let f = solve(&data, &EvalRequest::values(vec![(0.005, 0.005)]), &SolverOptions::default()).unwrap();
    assert!(f.warnings.iter().any(|w| w.contains("corner")));
    let g = solve(&data, &EvalRequest::values(vec![(1.0, 1.0)]), &SolverOptions::default()).unwrap();
    assert!(!g.warnings.iter().any(|w| w.contains("corner")));
}

#[test]
fn deformed_and_boundary_contours_agree() {
    let opts = SolverOptions::default();
    for d in [Dispersion::biharmonic(), ch_minus(1.0, 1.0)] {
        let data = exp_data(d);
        let a = eval(&data, 4.0, 0.1, 0, 0, &opts);
        let b = eval(&data, 4.0, 0.1, 0, 0, &opts.boundary());
        assert!((a - b).norm() < 1e-9, "{:?}: {a} vs {b}", d.family);
    }
}

#[test]
fn vanishing_second_order_term_reduces_to_biharmonic() {
    let opts = SolverOptions::default();
    let bi = exp_data(Dispersion::biharmonic());
    let ch = exp_data(ch_plus(0.0, 1.0));
    for (x, t) in [(0.5, 0.5), (1.5, 0.2), (3.0, 1.0)] {
        let (a, b) = (eval(&bi, x, t, 0, 0, &opts), eval(&ch, x, t, 0, 0, &opts));
        assert!((a - b).norm() < 1e-8, "({x},{t}): {a} vs {b}");
    }
}

#[test]
fn field_satisfies_the_equation() {
    let opts = SolverOptions::default();
    let forced = ProblemData::new(ch_plus(1.0, 2.0), HalfLineFunction::poly_exp(1.0, 2, 1.0).unwrap(), TimeSignal::zero(), TimeSignal::zero())
        .with_forcing(Forcing::new(vec![(HalfLineFunction::exp_decay(1.0, 2.0).unwrap(), TimeSignal::cos(1.0, 2.0))]));
    let cases = [exp_data(Dispersion::biharmonic()), exp_data(ch_plus(1.0, 1.0)), exp_data(ch_minus(1.0, 1.0)), forced];
    for data in &cases {
        let (a, beta) = (data.dispersion.a2(), data.dispersion.beta);
        for (x, t) in [(0.7, 0.4), (2.0, 1.0)] {
            let ut = eval(data, x, t, 0, 1, &opts);
            let uxx = eval(data, x, t, 2, 0, &opts);
            let uxxxx = eval(data, x, t, 4, 0, &opts);
            let f = data.forcing.eval(x, t);
            let scale = ut.norm().max(uxxxx.norm()).max(1.0);
            let res = (ut - a * uxx + beta * uxxxx - f).norm();
            assert!(res <= 1e-6 * scale, "{:?} ({x},{t}): residual {res:e}", data.dispersion.family);
        }
    }
}

#[test]
fn derivatives_match_finite_differences() {
    let opts = SolverOptions::with_tol(1e-12);
    let h = 1e-3;
    for data in [exp_data(Dispersion::biharmonic()), exp_data(ch_plus(1.0, 1.0))] {
        let (x, t) = (1.2, 0.6);
        let u = |x: f64, t: f64| eval(&data, x, t, 0, 0, &opts);
        let ux_fd = (u(x + h, t) - u(x - h, t)) / (2.0 * h);
        let ut_fd = (u(x, t + h) - u(x, t - h)) / (2.0 * h);
        let ux = eval(&data, x, t, 1, 0, &opts);
        let ut = eval(&data, x, t, 0, 1, &opts);
        assert!((ux - ux_fd).norm() <= 1e-4 * ux.norm().max(1e-3), "u_x {ux} vs {ux_fd}");
        assert!((ut - ut_fd).norm() <= 1e-4 * ut.norm().max(1e-3), "u_t {ut} vs {ut_fd}");
    }
}

#[test]
fn horizon_does_not_change_the_field() {
    let opts = SolverOptions::default();
    let (x, t) = (4.0, 0.1);
    for data in [exp_data(Dispersion::biharmonic()), exp_data(ch_minus(1.0, 1.0))] {
        let base = eval(&data, x, t, 0, 0, &opts);
        for horizon in [t + 0.5, t + 1.0, 2.0 * t] {
            let v = evaluate(&data, x, t, DerivOrder::VALUE, &opts, Some(horizon)).unwrap().value;
            assert!((v - base).norm() < 1e-8, "{:?}, T = {horizon}: {v} vs {base}", data.dispersion.family);
        }
    }
}

#[test]
fn duhamel_matches_contour_forcing() {
    let forcing = Forcing::new(vec![(HalfLineFunction::exp_decay(1.0, 1.5).unwrap(), TimeSignal::exp(1.0, -0.5))]);
    let opts = SolverOptions::default();
    for d in [Dispersion::biharmonic(), ch_minus(1.0, 1.0)] {
        let data = ProblemData::new(d, HalfLineFunction::zero(), TimeSignal::zero(), TimeSignal::zero())
            .with_forcing(forcing.clone());
        for x in [3.5, 4.0] {
            let a = eval(&data, x, 0.1, 0, 0, &opts);
            let b = eval(&data, x, 0.1, 0, 0, &opts.boundary());
            assert!(a.norm() > 1e-5);
            assert!((a - b).norm() < 1e-9, "{:?} x = {x}: {a} vs {b}", d.family);
        }
    }
}

#[test]
fn field_reaches_boundary_value() {
    let data = ProblemData::new(ch_plus(1.0, 1.0), HalfLineFunction::zero(), TimeSignal::constant(1.0), TimeSignal::zero());
    let opts = SolverOptions::default();
    let errs: Vec<f64> = [0.1, 0.03, 0.01].iter().map(|&x| (eval(&data, x, 1.0, 0, 0, &opts) - 1.0).norm()).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(errs[2] < 1e-3, "{errs:?}");
}

#[test]
fn field_reaches_initial_value() {
    let data = ProblemData::new(Dispersion::biharmonic(), HalfLineFunction::exp_decay(1.0, 1.0).unwrap(), TimeSignal::zero(), TimeSignal::zero());
    let opts = SolverOptions::default();
    let u0 = (-1.0f64).exp();
    let errs: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&t| (eval(&data, 1.0, t, 0, 0, &opts) - u0).norm()).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn field_is_linear_in_data(a in -2.0f64..2.0, b in -2.0f64..2.0, x in 0.2f64..3.0, t in 0.1f64..1.5) {
        let d = ch_plus(1.0, 1.0);
        let p = ProblemData::new(d, HalfLineFunction::exp_decay(1.0, 1.0).unwrap(), TimeSignal::sin(1.0, 1.0), TimeSignal::zero());
        let q = ProblemData::new(d, HalfLineFunction::poly_exp(1.0, 2, 2.0).unwrap(), TimeSignal::zero(), TimeSignal::exp(1.0, -2.0));
        let mix = ProblemData::new(
            d,
            p.u0.combine(a, &q.u0, b),
            p.g0.scaled(a).plus(&q.g0.scaled(b)),
            p.g1.scaled(a).plus(&q.g1.scaled(b)),
        );
        let opts = SolverOptions::default();
        let lhs = eval(&mix, x, t, 0, 0, &opts);
        let rhs = a * eval(&p, x, t, 0, 0, &opts) + b * eval(&q, x, t, 0, 0, &opts);
        prop_assert!((lhs - rhs).norm() < 1e-8, "{} vs {}", lhs, rhs);
    }
}

#[test]
fn laplace_gaussian() {
    let t = 10.0;
    let r = laplace_expand([0.0, -2.0, 0.0, 0.0], [Complex64::new(1.0, 0.0), ZERO, ZERO], t).unwrap();
    assert!((r.leading.re - (std::f64::consts::PI / t).sqrt()).abs() < 1e-15);
    assert_eq!(r.correction, ZERO);
    // ∫_{-1}^{1} e^{-10λ²} dλ = √(π/10) erf(√10).
    let exact = (std::f64::consts::PI / t).sqrt() * statrs::function::erf::erf(t.sqrt());
    assert!((r.leading.re - exact).abs() < 1e-5);
}

#[test]
fn laplace_correction_improves_the_quartic_case() {
    let phi = [0.0, -2.0, 0.0, -24.0];
    let brute = |t: f64| {
        crate::quadrature::composite_gauss_nodes(-1.0, 1.0, 200)
            .into_iter()
            .map(|(l, w)| w * (-t * (l * l + l.powi(4))).exp())
            .sum::<f64>()
    };
    let mut errs = Vec::new();
    for t in [50.0, 100.0, 200.0] {
        let r = laplace_expand(phi, [Complex64::new(1.0, 0.0), ZERO, ZERO], t).unwrap();
        let two = (r.leading + r.correction).re;
        assert!((two - brute(t)).abs() < (r.leading.re - brute(t)).abs());
        errs.push((t, (two - brute(t)).abs()));
    }
    let slope = (errs[2].1 / errs[0].1).ln() / (errs[2].0 / errs[0].0).ln();
    assert!((slope + 2.5).abs() < 0.2, "remainder slope {slope}");
}

#[test]
fn laplace_odd_amplitude_vanishes() {
    let r = laplace_expand([0.0, -2.0, 0.0, 0.0], [ZERO, Complex64::new(1.0, 0.0), ZERO], 3.0).unwrap();
    assert_eq!(r.leading, ZERO);
    assert_eq!(r.correction, ZERO);
    assert!(laplace_expand([0.0, 1.0, 0.0, 0.0], [ZERO; 3], 1.0).is_err());
}

#[test]
fn half_value_examples() {
    let bi = |g0| ProblemData::new(Dispersion::biharmonic(), HalfLineFunction::zero(), g0, TimeSignal::zero());
    let r = half_value_check(&bi(TimeSignal::constant(1.0)), &[1.0]).unwrap();
    assert!((r[0].ratio.unwrap().re - 0.5).abs() < 0.01, "{r:?}");
    let half_pi = std::f64::consts::FRAC_PI_2;
    let r = half_value_check(&bi(TimeSignal::sin(1.0, 1.0)), &[half_pi]).unwrap();
    assert!((r[0].ratio.unwrap().re - 0.5).abs() < 0.01, "{r:?}");
    let r = half_value_check(&bi(TimeSignal::zero()), &[1.0]).unwrap();
    assert_eq!(r[0].value, ZERO);
    assert!(r[0].ratio.is_none());
    let ch = ProblemData::new(ch_plus(1.0, 1.0), HalfLineFunction::zero(), TimeSignal::constant(1.0), TimeSignal::zero());
    assert!(half_value_check(&ch, &[1.0]).is_err());
}

#[test]
fn global_relation_of_zero_data_is_zero() {
    let data = ProblemData::new(Dispersion::biharmonic(), HalfLineFunction::zero(), TimeSignal::zero(), TimeSignal::zero());
    let r = global_relation_residual(&data, 0.5, &standard_lambda_grid(), &SolverOptions::default()).unwrap();
    assert!(r.iter().all(|v| *v == 0.0));
    assert!(global_relation_residual(&data, 0.5, &[Complex64::new(1.0, 1.0)], &SolverOptions::default()).is_err());
}

#[test]
fn standard_grid_contents() {
    let g = standard_lambda_grid();
    assert_eq!(g.len(), 12);
    assert!(g.iter().all(|l| l.im <= 0.0 && l.norm() >= 1.0));
}

#[test]
fn nonuniqueness_radius_is_checked() {
    let grid = EvalRequest::values(vec![(1.0, 1.0)]);
    assert!(nonuniqueness_pair(1.0, 1.0, 0.9, &grid, &SolverOptions::default()).is_err());
    assert!(nonuniqueness_pair(1.0, 1.0, 1.0, &grid, &SolverOptions::default()).is_err());
}

#[test]
fn nonuniqueness_v_is_the_time_derivative_of_u() {
    let grid = EvalRequest::new(vec![(0.01, 1.0), (0.5, 0.5), (2.0, 0.25)], vec![DerivOrder::new(0, 1).unwrap()]);
    let opts = SolverOptions::default();
    let (u, v) = nonuniqueness_pair(1.0, 1.0, 1.5, &grid, &opts).unwrap();
    let grid0 = EvalRequest::values(grid.points.clone());
    let (_, v0) = nonuniqueness_pair(1.0, 1.0, 1.5, &grid0, &opts).unwrap();
    for p in 0..3 {
        assert!((u.value(p, 0) - v0.value(p, 0)).norm() < 1e-8, "point {p}: {} vs {}", u.value(p, 0), v0.value(p, 0));
    }
    assert!(v.values.iter().all(|z| z.is_finite()));
}
