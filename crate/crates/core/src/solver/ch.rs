use std::f64::consts::PI;

use num_complex::Complex64;

use super::{
    integrate_real, integrate_with_sides, rho_at, Representation, SolverOptions, Spectral, I, INV_2PI, ZERO,
};
use crate::contours::{domega_boundary, ContourPath, PathSegment, SegmentKind};
use crate::dispersion::{Family, SideHint};
use crate::error::Result;
use crate::quadrature::{exp_clamped, integrate_path, QuadratureReport};

pub(super) fn homogeneous(s: &Spectral, opts: &SolverOptions) -> Result<QuadratureReport> {
    let boundary = opts.representation == Representation::Boundary || s.horizon.is_some() || s.transform_forcing;
    match s.d.family {
        Family::ChPlus if !boundary => ray_form(s, opts.tol),
        Family::ChMinus if !boundary => lobe_form(s, opts.tol),
        _ => boundary_form(s, opts.tol),
    }
}

/// `(1/2π) e^{iλx} D [e^{-ωt} û0(λ) + forcing]` on the real line.
fn real_term(s: &Spectral, l: Complex64) -> Complex64 {
    let om = s.d.omega(l);
    let ex = exp_clamped(I * l * s.x);
    let mut v = ZERO;
    if s.has_u0() {
        v += s.decay(om) * s.u0h(l);
    }
    if s.transform_forcing {
        v += s.forcing_hat(l, om);
    }
    ex * s.dfac(I * l, om) * v * INV_2PI
}

/// Full boundary integrand: data bracket plus the boundary-value kernel.
fn boundary_term(s: &Spectral, l: Complex64, side: SideHint) -> Complex64 {
    let ex = exp_clamped(I * l * s.x);
    if ex == ZERO {
        return ZERO;
    }
    let om = s.d.omega(l);
    let rho = rho_at(&s.d, l, side);
    let il = I * l;
    let g = g_kernel(s, l, rho, om);
    let mut v = ZERO;
    if s.has_u0() || s.transform_forcing {
        let a = (il + rho) / (il - rho);
        let b = 2.0 * il / (il - rho);
        let mut w = ZERO;
        if s.has_u0() {
            w += s.decay(om) * (a * s.u0h(-l) - b * s.u0h(I * rho));
        }
        if s.transform_forcing {
            w += a * s.forcing_hat(-l, om) - b * s.forcing_hat(I * rho, om);
        }
        v += w * INV_2PI;
    }
    ex * (s.xfac(il) * g + s.dfac(il, om) * v)
}

/// `-(βi/π) λ (iλ + ρ) (ρ E0 - E1)`, with the time derivatives already
/// folded into the transforms.
fn g_kernel(s: &Spectral, l: Complex64, rho: Complex64, om: Complex64) -> Complex64 {
    if !s.has_g() {
        return ZERO;
    }
    let e0 = s.e0(om);
    let e1 = s.e1(om);
    -(s.d.beta * I / PI) * l * (I * l + rho) * (rho * e0 - e1)
}

/// Truncation radius for ∂Ω: the curves stay above the rays at angle π/8,
/// so `|e^{iλx}| <= e^{-x |λ| sin(π/8)}` far out, while the remaining
/// factors grow at most like `|λ|^{n+4m-1}`.
fn boundary_radius(s: &Spectral, tol: f64) -> f64 {
    let sigma = 0.9 * (PI / 8.0).sin() * s.x.max(1e-3);
    let deg = s.order.degree() as f64;
    let target = (1e-3 * tol).ln().abs();
    let mut r: f64 = 4.0;
    for _ in 0..30 {
        r = (target + deg * r.max(1.0).ln()) / sigma;
    }
    r.max(4.0 * (1.0 + s.d.kappa().sqrt()))
}

fn boundary_form(s: &Spectral, tol: f64) -> Result<QuadratureReport> {
    let mut rep = QuadratureReport::zero();
    if s.has_u0() || s.transform_forcing {
        let f = |l: Complex64| real_term(s, l);
        rep.absorb(integrate_real(&f, s.data_radius(tol / 2.0), tol / 2.0, s.hint_rays())?);
    }
    let path = domega_boundary(&s.d, boundary_radius(s, tol))?;
    let f = |l: Complex64, side: SideHint| boundary_term(s, l, side);
    rep.absorb(integrate_with_sides(&f, &path, tol / 2.0, s.hint_boundary())?);
    Ok(rep)
}

/// The two lobes of ∂Ω for `ch_minus`, with the curved arms replaced by
/// rays inside the sectors where `Re ω > 0`.  The real pieces `[-c, 0]`
/// and `[0, c]` stay where they are and are read from above.
pub(crate) fn minus_lobes(c: f64) -> ContourPath {
    let zero = ZERO;
    let cc = Complex64::new(c, 0.0);
    let dir = |a: f64| Complex64::from_polar(1.0, a);
    let line = |a: Complex64, b: Complex64| {
        PathSegment::new(SegmentKind::Line { start: a, end: b }).on_side(SideHint::FromUpperHalfPlane)
    };
    ContourPath {
        label: "lobes".into(),
        segments: vec![
            PathSegment::new(SegmentKind::Ray { origin: -cc, dir: dir(15.0 * PI / 16.0), inward: true }),
            line(-cc, zero),
            PathSegment::new(SegmentKind::Ray { origin: zero, dir: dir(9.0 * PI / 16.0), inward: false }),
            PathSegment::new(SegmentKind::Ray { origin: zero, dir: dir(7.0 * PI / 16.0), inward: true }),
            line(zero, cc),
            PathSegment::new(SegmentKind::Ray { origin: cc, dir: dir(PI / 16.0), inward: false }),
        ],
        disjoint: true,
        truncation_r: None,
    }
}

fn lobe_form(s: &Spectral, tol: f64) -> Result<QuadratureReport> {
    let mut rep = QuadratureReport::zero();
    if s.has_u0() {
        let f = |l: Complex64| real_term(s, l);
        rep.absorb(integrate_real(&f, s.real_radius(), tol / 2.0, s.hint_rays())?);
    }
    let path = minus_lobes(s.d.kappa().sqrt());
    let f = |l: Complex64, side: SideHint| boundary_term(s, l, side);
    rep.absorb(integrate_with_sides(&f, &path, tol / 2.0, s.hint_rays())?);
    Ok(rep)
}

/// The V-shaped contour through 0: in along 15π/16, out along π/16.
pub(crate) fn v_contour() -> ContourPath {
    ContourPath::wedge("V", 15.0 * PI / 16.0, PI / 16.0)
}

/// `ch_plus` with the upper component of ∂Ω traded for a real-line
/// integral in the variable μ, where `λ = iρ(μ)` runs along that
/// component.  The initial-data terms then sit on the real axis and the
/// boundary-data kernel on the V contour and the μ axis.
fn ray_form(s: &Spectral, tol: f64) -> Result<QuadratureReport> {
    let share = tol / 4.0;
    let mut rep = QuadratureReport::zero();
    let r = s.real_radius();
    if s.has_u0() {
        let lam_part = |l: Complex64| {
            let om = s.d.omega(l);
            let ex = exp_clamped(I * l * s.x);
            let rho = s.d.rho_value(l);
            let il = I * l;
            let a = (il + rho) / (il - rho);
            let b = 2.0 * il / (il - rho);
            let bracket = s.u0h(l) + a * s.u0h(-l) - b * s.u0h(I * rho);
            ex * s.dfac(il, om) * s.decay(om) * bracket * INV_2PI
        };
        rep.absorb(integrate_real(&lam_part, r, share, s.hint_rays())?);
        let mu_part = |m: Complex64| {
            let om = s.d.omega(m);
            let rho = s.d.rho_value(m);
            let ex = exp_clamped(rho * s.x);
            let im = I * m;
            let bracket = (im - rho) / (im + rho) * s.u0h(I * rho) + 2.0 * rho / (im + rho) * s.u0h(m);
            ex * s.dfac(rho, om) * s.decay(om) * bracket * m / (I * rho) * INV_2PI
        };
        rep.absorb(integrate_real(&mu_part, r, share, None)?);
    }
    if s.has_g() {
        let v_part = |l: Complex64| {
            let ex = exp_clamped(I * l * s.x);
            if ex == ZERO {
                return ZERO;
            }
            let om = s.d.omega(l);
            let rho = s.d.rho_value(l);
            ex * s.xfac(I * l) * g_kernel(s, l, rho, om)
        };
        rep.absorb(integrate_path(&v_part, &v_contour(), share, s.hint_rays())?);
        let mu_part = |m: Complex64| {
            let rho = s.d.rho_value(m);
            let ex = exp_clamped(rho * s.x);
            if ex == ZERO {
                return ZERO;
            }
            let om = s.d.omega(m);
            let e0 = s.e0(om);
            let e1 = s.e1(om);
            let im = I * m;
            -(s.d.beta * I / PI) * ex * s.xfac(rho) * m * (im - rho) * (im * e0 + e1)
        };
        rep.absorb(integrate_path(&mu_part, &mu_axis(), share, None)?);
    }
    Ok(rep)
}

/// The real μ axis as two rays from 0, so the truncation follows the decay
/// of `e^{ρ(μ)x}` rather than of `e^{-ωt}`.
fn mu_axis() -> ContourPath {
    let one = Complex64::new(1.0, 0.0);
    ContourPath::new(
        "mu",
        vec![
            SegmentKind::Ray { origin: ZERO, dir: -one, inward: true },
            SegmentKind::Ray { origin: ZERO, dir: one, inward: false },
        ],
    )
}
