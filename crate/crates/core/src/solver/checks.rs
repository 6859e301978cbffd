//! Self-consistency certificates: the global relation, the half-value
//! effect at the boundary and the non-uniqueness counterexample.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{evaluate, solve, DerivOrder, EvalRequest, SolutionField, SolverOptions, I, ZERO};
use crate::contours::{ContourPath, SegmentKind};
use crate::dispersion::{Dispersion, Family};
use crate::error::{Result, UtmError};
use crate::quadrature::{adaptive, composite_gauss_nodes, exp_clamped, integrate_path, QuadratureReport};
use crate::transforms::{fourier_half_line, time_transform_exact, HalfLineFunction, ProblemData, TimeSignal};

/// Offset from the boundary at which traces are sampled.
pub const TRACE_EPS: f64 = 1e-3;

/// Smallest admissible `|λ|` in the residual grid.
pub const MIN_LAMBDA: f64 = 0.25;

/// `∫_a^b e^{-iλx} u(x) dx` by a single 7-point Gauss panel (short intervals only).
fn short_transform(u: &HalfLineFunction, lambda: Complex64, a: f64, b: f64) -> Complex64 {
    composite_gauss_nodes(a, b, 1)
        .into_iter()
        .map(|(x, w)| w * u.eval(x) * (-I * lambda * x).exp())
        .sum()
}

/// Weights `w_j = ∫_a^b e^{-ω(t-τ)} L_j(τ) dτ` where `L_j` are the Lagrange
/// polynomials through `nodes`.  Product integration keeps the weights
/// exact in ω, so panels need only resolve the trace, not the kernel.
fn product_weights(nodes: &[f64], a: f64, b: f64, omega: Complex64, t: f64) -> Vec<Complex64> {
    let sub = ((omega.norm() * (b - a)).ceil() as usize).clamp(2, 4096);
    let mut w = vec![ZERO; nodes.len()];
    for (tau, wt) in composite_gauss_nodes(a, b, sub) {
        let k = exp_clamped(-omega * (t - tau)) * wt;
        for (j, &xj) in nodes.iter().enumerate() {
            let lj: f64 = nodes
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, &xi)| (tau - xi) / (xj - xi))
                .product();
            w[j] += k * lj;
        }
    }
    w
}

/// Normalized residual of the global relation on the half-line `x > ε`.
///
/// With `Û_ε(λ,t) = ∫_ε^∞ e^{-iλx} U(x,t) dx` and
/// `W_n(λ) = ∫_0^t e^{-ω(t-τ)} ∂_x^n U(ε,τ) dτ`, the identity reads
/// `Û_ε - e^{-ωt} û0_ε + e^{-iλε}[-βW3 - βiλW2 + (βλ²+a)W1 + iλ(βλ²+a)W0] - F_ε = 0`
/// where `a` is the `U_xx` coefficient and `F_ε` the shifted forcing
/// transform.  It holds exactly for every ε, so sampling the traces at
/// `x = ε` instead of `x = 0` introduces no bias.  The residual is the
/// magnitude of the left side divided by its largest term.
pub fn global_relation_residual(
    data: &ProblemData,
    t: f64,
    lambdas: &[Complex64],
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    if !(t > 0.0) {
        return Err(UtmError::Domain(format!("global relation needs t > 0, got {t}")));
    }
    for l in lambdas {
        if l.im > 0.0 || l.norm() < MIN_LAMBDA {
            return Err(UtmError::Domain(format!("λ = {l} must satisfy Im λ <= 0 and |λ| >= {MIN_LAMBDA}")));
        }
    }
    let eps = TRACE_EPS;
    let d = data.dispersion;

    // Spatial transform of the computed field.
    let x_max = 40.0_f64.max(data.u0.truncation_point());
    let panels = ((x_max - eps) / 0.25).ceil() as usize;
    let x_nodes = composite_gauss_nodes(eps, x_max, panels);
    let field = solve(data, &EvalRequest::values(x_nodes.iter().map(|&(x, _)| (x, t)).collect()), opts)
        .map_err(|e| UtmError::NonConvergent(format!("spatial transform: {e}")))?;

    // Traces on panels graded geometrically toward τ = 0.
    let levels = 50;
    let mut breaks: Vec<f64> = (1..=levels).rev().map(|k| t * 0.5f64.powi(k)).collect();
    breaks.extend([0.75 * t, t]);
    let tau_panels: Vec<(f64, f64, Vec<f64>)> = breaks
        .windows(2)
        .map(|w| (w[0], w[1], composite_gauss_nodes(w[0], w[1], 1).into_iter().map(|p| p.0).collect()))
        .collect();
    let jobs: Vec<(usize, usize, u32)> = (0..tau_panels.len())
        .flat_map(|p| (0..7).flat_map(move |j| (0..4u32).map(move |n| (p, j, n))))
        .collect();
    let traces: Vec<Complex64> = jobs
        .par_iter()
        .map(|&(p, j, n)| {
            let tau = tau_panels[p].2[j];
            // Near τ = 0 the traces are O(τ^{-n/4}) and cancel from larger
            // spectral mass; the quadrature weight τ keeps the relaxed
            // tolerance harmless.
            let relax = (t / tau).powf(0.75).max(1.0);
            let o = SolverOptions { tol: opts.tol * relax, ..*opts };
            Ok(evaluate(data, eps, tau, DerivOrder { n, m: 0 }, &o, None)?.value)
        })
        .collect::<Result<_>>()?;
    let trace = |p: usize, j: usize, n: u32| traces[(p * 7 + j) * 4 + n as usize];

    let a2 = d.a2();
    let beta = d.beta;
    lambdas
        .par_iter()
        .map(|&l| {
            let om = d.omega(l);
            let u_hat: Complex64 = x_nodes
                .iter()
                .zip(&field.values)
                .map(|(&(x, w), &u)| w * (-I * l * x).exp() * u)
                .sum();
            let u0_eps = fourier_half_line(&data.u0, l)? - short_transform(&data.u0, l, 0.0, eps);
            let mut wn = [ZERO; 4];
            for (p, (a, b, nodes)) in tau_panels.iter().enumerate() {
                let pw = product_weights(nodes, *a, *b, om, t);
                for (n, slot) in wn.iter_mut().enumerate() {
                    *slot += pw.iter().enumerate().map(|(j, w)| w * trace(p, j, n as u32)).sum::<Complex64>();
                }
            }
            let mut f_eps = ZERO;
            for (a, b) in &data.forcing.terms {
                let ah = fourier_half_line(a, l)? - short_transform(a, l, 0.0, eps);
                f_eps += ah * time_transform_exact(b, om, t);
            }
            let shift = (-I * l * eps).exp();
            let q = beta * l * l + a2;
            let terms = [
                u_hat,
                -(-om * t).exp() * u0_eps,
                shift * (-beta * wn[3]),
                shift * (-beta * I * l * wn[2]),
                shift * q * wn[1],
                shift * I * l * q * wn[0],
                -f_eps,
            ];
            let scale = terms.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let sum: Complex64 = terms.iter().sum();
            Ok(if scale == 0.0 { 0.0 } else { sum.norm() / scale })
        })
        .collect()
}

/// The standard λ grid: nonzero integers in `[-5, 5]` plus `-1-i` and `-3-2i`.
pub fn standard_lambda_grid() -> Vec<Complex64> {
    let mut g: Vec<Complex64> = (-5..=5).filter(|&k| k != 0).map(|k| Complex64::new(k as f64, 0.0)).collect();
    g.push(Complex64::new(-1.0, -1.0));
    g.push(Complex64::new(-3.0, -2.0));
    g
}

/// Outcome of one half-value evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfValueReport {
    pub t: f64,
    pub g0_t: f64,
    pub value: Complex64,
    /// `value / (2π g0(t))`, absent when `g0(t) = 0`.
    pub ratio: Option<Complex64>,
    /// Taper radius at which successive values agreed.
    pub radius: f64,
}

const HALF_VALUE_RADII: [f64; 8] = [2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];

/// The x = 0 combination of the boundary-data integrals over the
/// biharmonic contours with the horizon equal to `t`, summed with a cosine
/// taper on `[R, 2R]`.
pub fn half_value_check(data: &ProblemData, t_list: &[f64]) -> Result<Vec<HalfValueReport>> {
    if data.dispersion.family != Family::Biharmonic {
        return Err(UtmError::Domain("half-value check is defined for the biharmonic family".into()));
    }
    t_list
        .iter()
        .map(|&t| {
            if !(t > 0.0) {
                return Err(UtmError::Domain(format!("half-value check needs t > 0, got {t}")));
            }
            let g0_t = data.g0.value(t).re;
            if data.g0.is_zero() {
                return Ok(HalfValueReport { t, g0_t, value: ZERO, ratio: None, radius: 0.0 });
            }
            let mut prev: Option<Complex64> = None;
            for &r in &HALF_VALUE_RADII {
                let v = tapered_boundary_sum(&data.g0, t, r)?;
                if let Some(p) = prev {
                    if (v - p).norm() <= 0.01 * v.norm().max(1e-300) {
                        let ratio = (g0_t != 0.0).then(|| v / (2.0 * PI * g0_t));
                        return Ok(HalfValueReport { t, g0_t, value: v, ratio, radius: r });
                    }
                }
                prev = Some(v);
            }
            Err(UtmError::NonConvergent(format!("tapered half-value sums did not settle within 1% at t = {t}")))
        })
        .collect()
}

fn tapered_boundary_sum(g0: &TimeSignal, t: f64, r: f64) -> Result<Complex64> {
    let f = |l: Complex64| l * l * l * time_transform_exact(g0, l.powu(4), t);
    let taper = |s: f64| {
        if s <= r {
            1.0
        } else if s >= 2.0 * r {
            0.0
        } else {
            0.5 * (1.0 + (PI * (s - r) / r).cos())
        }
    };
    // Breakpoints keep the phase s^4 t below π/4 per panel.
    let mut breaks = vec![0.0];
    let mut s = 0.0_f64;
    while s < 2.0 * r {
        s += (PI / (16.0 * s.powi(3) * t + 1e-300)).min(0.25);
        breaks.push(s.min(2.0 * r));
    }
    let mut total = ZERO;
    for (coef, a_in, a_out) in [
        (Complex64::new(2.0, -2.0), 7.0 * PI / 8.0, 5.0 * PI / 8.0),
        (Complex64::new(-2.0, -2.0), 3.0 * PI / 8.0, PI / 8.0),
    ] {
        let ei = Complex64::from_polar(1.0, a_in);
        let eo = Complex64::from_polar(1.0, a_out);
        let g = |s: f64| coef * taper(s) * (eo * f(eo * s) - ei * f(ei * s));
        let locate = |s: f64| eo * s;
        total += adaptive(&g, &breaks, 1e-10, &locate)?.value;
    }
    Ok(total)
}

/// The contour of the non-uniqueness example with its arms turned into the
/// sectors where `Re ω > 0`: right part in along 7π/16, clockwise arc of
/// radius `r`, out along π/16; left part the same with 15π/16 and 9π/16.
pub fn nonuniqueness_contour(r: f64) -> ContourPath {
    let dir = |a: f64| Complex64::from_polar(1.0, a);
    let zero = ZERO;
    let part = |a_in: f64, a_out: f64| {
        vec![
            SegmentKind::Ray { origin: dir(a_in) * r, dir: dir(a_in), inward: true },
            SegmentKind::Arc { center: zero, radius: r, theta0: a_in, theta1: a_out },
            SegmentKind::Ray { origin: dir(a_out) * r, dir: dir(a_out), inward: false },
        ]
    };
    let mut kinds = part(15.0 * PI / 16.0, 9.0 * PI / 16.0);
    kinds.extend(part(7.0 * PI / 16.0, PI / 16.0));
    ContourPath::new("Gamma_r", kinds)
}

/// `∂_x^n ∂_t^m v(x,t)` for `v = -(βi/π) ∫_Γ e^{iλx-ωt} λ(iλ+ρ)ρ dλ`.
pub fn nonuniqueness_v(d: &Dispersion, r: f64, x: f64, t: f64, order: DerivOrder, tol: f64) -> Result<QuadratureReport> {
    check_nonuniqueness_args(d, r)?;
    let f = |l: Complex64| {
        let om = d.omega(l);
        let ex = exp_clamped(I * l * x - om * t);
        if ex == ZERO {
            return ZERO;
        }
        let rho = d.rho_value(l);
        let il = I * l;
        -(d.beta * I / PI) * ex * il.powu(order.n) * (-om).powu(order.m) * l * (il + rho) * rho
    };
    integrate_path(&f, &nonuniqueness_contour(r), tol, None)
}

fn check_nonuniqueness_args(d: &Dispersion, r: f64) -> Result<()> {
    if d.family != Family::ChPlus {
        return Err(UtmError::Domain("the non-uniqueness example is posed for ch_plus".into()));
    }
    if !(r > d.kappa().sqrt()) {
        return Err(UtmError::Domain(format!("arc radius r = {r} must exceed sqrt(alpha/beta) = {}", d.kappa().sqrt())));
    }
    Ok(())
}

/// `U` (zero initial datum, `g0 = 1`, `g1 = 0`) and `v` on the same grid.
pub fn nonuniqueness_pair(
    alpha: f64,
    beta: f64,
    r: f64,
    grid: &EvalRequest,
    opts: &SolverOptions,
) -> Result<(SolutionField, SolutionField)> {
    let d = Dispersion::new(Family::ChPlus, alpha, beta)?;
    check_nonuniqueness_args(&d, r)?;
    let data = ProblemData::new(d, HalfLineFunction::zero(), TimeSignal::constant(1.0), TimeSignal::zero());
    let u = solve(&data, grid, opts)?;
    let jobs: Vec<(usize, usize)> = (0..grid.points.len())
        .flat_map(|p| (0..grid.deriv_orders.len()).map(move |k| (p, k)))
        .collect();
    let reps: Vec<QuadratureReport> = jobs
        .par_iter()
        .map(|&(p, k)| {
            let (x, t) = grid.points[p];
            nonuniqueness_v(&d, r, x, t, grid.deriv_orders[k], opts.tol)
        })
        .collect::<Result<_>>()?;
    let v = SolutionField {
        points: grid.points.clone(),
        deriv_orders: grid.deriv_orders.clone(),
        values: reps.iter().map(|r| r.value).collect(),
        error_ests: reps.iter().map(|r| r.abs_error_est).collect(),
        warnings: Vec::new(),
    };
    Ok((u, v))
}

/// Summary of the non-uniqueness construction.
#[derive(Clone, Debug, PartialEq)]
pub struct NonuniquenessReport {
    pub alpha: f64,
    pub beta: f64,
    pub r: f64,
    /// `(x, |v(x, 1)|)` for x → 0.
    pub boundary_sweep: Vec<(f64, f64)>,
    /// `(t, |v(1, t)|)` for t → 0.
    pub initial_sweep: Vec<(f64, f64)>,
    /// `((x, t), |v|)` on the interior grid.
    pub interior: Vec<((f64, f64), f64)>,
    pub boundary_max: f64,
    pub interior_max: f64,
    pub ratio: f64,
    pub boundary_decreasing: bool,
    pub initial_decreasing: bool,
    /// `v(0, 1)` and `v_x(0, 1)` by Richardson extrapolation of the sweep.
    pub extrapolated_boundary: (f64, f64),
}

pub const BOUNDARY_SWEEP: [f64; 3] = [0.05, 0.02, 0.01];
pub const INITIAL_SWEEP: [f64; 3] = [0.05, 0.02, 0.01];
pub const INTERIOR_GRID: [f64; 4] = [0.25, 0.5, 1.0, 2.0];

pub fn nonuniqueness_demo(alpha: f64, beta: f64, r: f64, opts: &SolverOptions) -> Result<NonuniquenessReport> {
    let d = Dispersion::new(Family::ChPlus, alpha, beta)?;
    check_nonuniqueness_args(&d, r)?;
    let v = |x: f64, t: f64, n: u32| nonuniqueness_v(&d, r, x, t, DerivOrder { n, m: 0 }, opts.tol).map(|q| q.value);
    let boundary_sweep: Vec<(f64, f64)> =
        BOUNDARY_SWEEP.par_iter().map(|&x| Ok((x, v(x, 1.0, 0)?.norm()))).collect::<Result<_>>()?;
    let initial_sweep: Vec<(f64, f64)> =
        INITIAL_SWEEP.par_iter().map(|&t| Ok((t, v(1.0, t, 0)?.norm()))).collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> =
        INTERIOR_GRID.iter().flat_map(|&x| INTERIOR_GRID.iter().map(move |&t| (x, t))).collect();
    let interior: Vec<((f64, f64), f64)> =
        pts.par_iter().map(|&(x, t)| Ok(((x, t), v(x, t, 0)?.norm()))).collect::<Result<_>>()?;
    let boundary_max = boundary_sweep.iter().map(|p| p.1).fold(0.0, f64::max);
    let interior_max = interior.iter().map(|p| p.1).fold(0.0, f64::max);
    let decreasing = |s: &[(f64, f64)]| s.windows(2).all(|w| w[1].1 < w[0].1);
    // v(x) ≈ v(0) + x v_x(0) + x² v_xx(0)/2 through the three sweep points.
    let [(x1, _), (x2, _), (x3, _)] = [boundary_sweep[0], boundary_sweep[1], boundary_sweep[2]];
    let (y1, y2, y3) = (v(x1, 1.0, 0)?.re, v(x2, 1.0, 0)?.re, v(x3, 1.0, 0)?.re);
    let l = |xa: f64, xb: f64, xc: f64| (0.0 - xb) * (0.0 - xc) / ((xa - xb) * (xa - xc));
    let v0 = y1 * l(x1, x2, x3) + y2 * l(x2, x1, x3) + y3 * l(x3, x1, x2);
    let dl = |xa: f64, xb: f64, xc: f64| (-(xb + xc)) / ((xa - xb) * (xa - xc));
    let vx0 = y1 * dl(x1, x2, x3) + y2 * dl(x2, x1, x3) + y3 * dl(x3, x1, x2);
    Ok(NonuniquenessReport {
        alpha,
        beta,
        r,
        boundary_decreasing: decreasing(&boundary_sweep),
        initial_decreasing: decreasing(&initial_sweep),
        boundary_sweep,
        initial_sweep,
        interior,
        boundary_max,
        interior_max,
        ratio: if boundary_max > 0.0 { interior_max / boundary_max } else { f64::INFINITY },
        extrapolated_boundary: (v0, vx0),
    })
}
