//! Long-time behaviour under periodic boundary data.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{half_line_hat, DerivOrder, SolverOptions, I, INV_2PI, ZERO};
use crate::dispersion::Family;
use crate::error::{Result, UtmError};
use crate::quadrature::exp_clamped;
use crate::transforms::{time_transform_horizon, ProblemData};

/// The two leading terms of Laplace's expansion of `∫ e^{tφ(λ)} h(λ) dλ`
/// about an interior maximum `λ0` of `φ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplaceTerms {
    /// Coefficient of `t^{-1/2}` times `t^{-1/2}`.
    pub leading: Complex64,
    /// Coefficient of `t^{-3/2}` times `t^{-3/2}`.
    pub correction: Complex64,
}

/// `phi = [φ(λ0), φ'', φ''', φ'''']`, `h = [h(λ0), h', h'']`.
pub fn laplace_expand(phi: [f64; 4], h: [Complex64; 3], t: f64) -> Result<LaplaceTerms> {
    let [p0, p2, p3, p4] = phi;
    if !(p2 < 0.0) {
        return Err(UtmError::Domain(format!("Laplace expansion needs φ''(λ0) < 0, got {p2}")));
    }
    if !(t > 0.0) {
        return Err(UtmError::Domain(format!("Laplace expansion needs t > 0, got {t}")));
    }
    let [h0, h1, h2] = h;
    let pre = (t * p0).exp() * (2.0 * std::f64::consts::PI / -p2).sqrt();
    let bracket = -h2 / (2.0 * p2) + h0 * p4 / (8.0 * p2 * p2) + h1 * p3 / (2.0 * p2 * p2)
        - 5.0 * h0 * p3 * p3 / (24.0 * p2 * p2 * p2);
    Ok(LaplaceTerms { leading: pre * h0 * t.powf(-0.5), correction: pre * bracket * t.powf(-1.5) })
}

/// Result of [`periodicity_analysis`].
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicityFit {
    pub x0: f64,
    pub period: f64,
    /// `(t, U(x0, t+T) - U(x0, t))` with increasing `t`.
    pub samples: Vec<(f64, Complex64)>,
    /// Slope of `log|diff|` against `log t`.
    pub fitted_exponent: f64,
    /// Root-mean-square residual of that fit.
    pub fit_residual: f64,
    /// Least-squares fit of `Re diff ≈ C1 t^{-1/2} + C2 t^{-3/2}`.
    pub c1_fit: f64,
    pub c2_fit: f64,
    /// The same constants from Laplace's expansion at `λ = 0`.
    pub c1_laplace: f64,
    pub c2_laplace: f64,
}

/// Sample `U(x0, t+T) - U(x0, t)` on `t_grid`, fit the algebraic decay and
/// compare with the constants predicted by Laplace's method.
pub fn periodicity_analysis(
    data: &ProblemData,
    x0: f64,
    period: f64,
    t_grid: &[f64],
    opts: &SolverOptions,
) -> Result<PeriodicityFit> {
    if data.dispersion.family != Family::ChPlus || !(data.dispersion.alpha > 0.0) {
        return Err(UtmError::Domain("periodicity analysis needs ch_plus with alpha > 0".into()));
    }
    if !(period > 0.0) || !(x0 > 0.0) {
        return Err(UtmError::Domain(format!("need x0 > 0 and T > 0 (x0={x0}, T={period})")));
    }
    if t_grid.len() < 3 || t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid[0] <= 0.0 {
        return Err(UtmError::Domain("t_grid must hold at least 3 strictly increasing positive times".into()));
    }
    let samples: Vec<(f64, Complex64)> = t_grid
        .par_iter()
        .map(|&t| {
            let a = super::evaluate(data, x0, t + period, DerivOrder::VALUE, opts, None)?;
            let b = super::evaluate(data, x0, t, DerivOrder::VALUE, opts, None)?;
            Ok((t, a.value - b.value))
        })
        .collect::<Result<_>>()?;

    let logs: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, d)| d.norm() > 0.0)
        .map(|(t, d)| (t.ln(), d.norm().ln()))
        .collect();
    let (fitted_exponent, fit_residual) = if logs.len() >= 2 {
        let (slope, icpt) = least_squares_line(&logs);
        let rms = (logs.iter().map(|(x, y)| (y - slope * x - icpt).powi(2)).sum::<f64>() / logs.len() as f64).sqrt();
        (slope, rms)
    } else {
        (f64::NAN, 0.0)
    };
    if fit_residual > 0.1 {
        return Err(UtmError::FitUnstable { residual: fit_residual, limit: 0.1 });
    }
    let (c1_fit, c2_fit) = fit_two_powers(&samples);
    let (c1_laplace, c2_laplace) = laplace_constants(data, x0, period)?;
    Ok(PeriodicityFit {
        x0,
        period,
        samples,
        fitted_exponent,
        fit_residual,
        c1_fit,
        c2_fit,
        c1_laplace,
        c2_laplace,
    })
}

fn least_squares_line(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Normal equations for `y ≈ a t^{-1/2} + b t^{-3/2}`.
fn fit_two_powers(samples: &[(f64, Complex64)]) -> (f64, f64) {
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (t, d) in samples {
        let p = t.powf(-0.5);
        let q = t.powf(-1.5);
        s11 += p * p;
        s12 += p * q;
        s22 += q * q;
        r1 += p * d.re;
        r2 += q * d.re;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() < f64::MIN_POSITIVE {
        return (0.0, 0.0);
    }
    ((r1 * s22 - r2 * s12) / det, (s11 * r2 - s12 * r1) / det)
}

/// Laplace constants of the difference `U(x0,t+T) - U(x0,t)`.
///
/// Every term of the real-line representation picks up, after the shift,
/// a factor `e^{-ωt}` times a smooth amplitude: the boundary transforms
/// become `Δ_j(ω) = e^{-ωT} ∫_0^T e^{ωτ} g_j(τ) dτ` and the initial-data
/// terms acquire `e^{-ωT} - 1`.  On the λ side the V contour is pulled
/// down to `[-1, 1]` near the saddle; the remainder is exponentially small.
fn laplace_constants(data: &ProblemData, x0: f64, period: f64) -> Result<(f64, f64)> {
    if !data.forcing.is_zero() {
        return Err(UtmError::Domain("Laplace constants are assembled for unforced problems".into()));
    }
    let d = data.dispersion;
    let beta = d.beta;
    let lam_amp = |l: Complex64| -> Complex64 {
        let om = d.omega(l);
        let rho = d.rho_value(l);
        let il = I * l;
        let ex = exp_clamped(il * x0);
        let mut v = ZERO;
        if !(data.g0.is_zero() && data.g1.is_zero()) {
            let d0 = time_transform_horizon(&data.g0, om, period, period);
            let d1 = time_transform_horizon(&data.g1, om, period, period);
            v += -(beta * I / std::f64::consts::PI) * l * (il + rho) * (rho * d0 - d1);
        }
        if !data.u0.is_zero() {
            let a = (il + rho) / (il - rho);
            let b = 2.0 * il / (il - rho);
            let u = |k| half_line_hat(&data.u0, k);
            v += INV_2PI * ((-om * period).exp() - 1.0) * (u(l) + a * u(-l) - b * u(I * rho));
        }
        ex * v
    };
    let mu_amp = |m: Complex64| -> Complex64 {
        let om = d.omega(m);
        let rho = d.rho_value(m);
        let im = I * m;
        let ex = exp_clamped(rho * x0);
        let mut v = ZERO;
        if !(data.g0.is_zero() && data.g1.is_zero()) {
            let d0 = time_transform_horizon(&data.g0, om, period, period);
            let d1 = time_transform_horizon(&data.g1, om, period, period);
            v += -(beta * I / std::f64::consts::PI) * m * (im - rho) * (im * d0 + d1);
        }
        if !data.u0.is_zero() {
            let u = |k| half_line_hat(&data.u0, k);
            let br = (im - rho) / (im + rho) * u(I * rho) + 2.0 * rho / (im + rho) * u(m);
            v += INV_2PI * ((-om * period).exp() - 1.0) * br * m / (I * rho);
        }
        ex * v
    };
    let phi = [0.0, -2.0 * d.a2(), 0.0, -24.0 * beta];
    let mut c1 = ZERO;
    let mut c2 = ZERO;
    for amp in [&lam_amp as &dyn Fn(Complex64) -> Complex64, &mu_amp] {
        let h = taylor3(amp);
        let terms = laplace_expand(phi, h, 1.0)?;
        c1 += terms.leading;
        c2 += terms.correction;
    }
    Ok((c1.re, c2.re))
}

/// `[h(0), h'(0), h''(0)]` by central differences on the real axis.
fn taylor3(h: &dyn Fn(Complex64) -> Complex64) -> [Complex64; 3] {
    let dl = 1e-3;
    let p = h(Complex64::new(dl, 0.0));
    let m = h(Complex64::new(-dl, 0.0));
    let p2 = h(Complex64::new(2.0 * dl, 0.0));
    let m2 = h(Complex64::new(-2.0 * dl, 0.0));
    let z = h(ZERO);
    let d1 = (8.0 * (p - m) - (p2 - m2)) / (12.0 * dl);
    let d2 = (16.0 * (p + m) - (p2 + m2) - 30.0 * z) / (12.0 * dl * dl);
    [z, d1, d2]
}
