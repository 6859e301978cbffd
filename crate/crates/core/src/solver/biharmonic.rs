use std::f64::consts::PI;

use num_complex::Complex64;

use super::{integrate_real, Representation, SolverOptions, Spectral, I, INV_2PI, ZERO};
use crate::contours::{gamma_biharmonic, ContourPath};
use crate::error::Result;
use crate::quadrature::{exp_clamped, integrate_path, QuadratureReport};

/// Contours for the two boundary brackets.  The default pair sits at the
/// centre lines of the sectors where `Re λ^4 > 0`, so `e^{-λ^4 t}` decays
/// along them as well as `e^{iλx}`.
fn contours(boundary: bool) -> (ContourPath, ContourPath) {
    if boundary {
        gamma_biharmonic()
    } else {
        (
            ContourPath::wedge("Gamma1'", 15.0 * PI / 16.0, 9.0 * PI / 16.0),
            ContourPath::wedge("Gamma2'", 7.0 * PI / 16.0, PI / 16.0),
        )
    }
}

pub(super) fn homogeneous(s: &Spectral, opts: &SolverOptions) -> Result<QuadratureReport> {
    let boundary = opts.representation == Representation::Boundary || s.horizon.is_some();
    let tol = opts.tol * 2.0 * PI / 3.0;
    let mut rep = QuadratureReport::zero();
    if s.has_u0() || s.transform_forcing {
        let f = |l: Complex64| real_term(s, l);
        rep.absorb(integrate_real(&f, s.data_radius(tol), tol, s.hint_rays())?);
    }
    if s.has_g() || s.has_u0() || s.transform_forcing {
        let hint = if boundary { s.hint_boundary() } else { s.hint_rays() };
        let (g1, g2) = contours(boundary);
        rep.absorb(integrate_path(&|l| gamma1(s, l), &g1, tol, hint)?);
        rep.absorb(integrate_path(&|l| gamma2(s, l), &g2, tol, hint)?);
    }
    Ok(rep.scaled(Complex64::new(INV_2PI, 0.0)))
}

fn real_term(s: &Spectral, l: Complex64) -> Complex64 {
    let om = l.powu(4);
    let ex = exp_clamped(I * l * s.x);
    if ex == ZERO {
        return ZERO;
    }
    let mut v = ZERO;
    if s.has_u0() {
        v += s.decay(om) * s.u0h(l);
    }
    if s.transform_forcing {
        v += s.forcing_hat(l, om);
    }
    ex * s.dfac(I * l, om) * v
}

fn gamma1(s: &Spectral, l: Complex64) -> Complex64 {
    let om = l.powu(4);
    let ex = exp_clamped(I * l * s.x);
    if ex == ZERO {
        return ZERO;
    }
    let l2 = l * l;
    let mut g = ZERO;
    if s.has_g() {
        g = Complex64::new(2.0, -2.0) * l2 * l * s.e0(om) + Complex64::new(-2.0, 2.0) * l2 * s.e1(om);
    }
    let mut v = ZERO;
    if s.has_u0() {
        v += s.decay(om) * (-I * s.u0h(-l) + Complex64::new(-1.0, 1.0) * s.u0h(I * l));
    }
    if s.transform_forcing {
        v += -I * s.forcing_hat(-l, om) + Complex64::new(-1.0, 1.0) * s.forcing_hat(I * l, om);
    }
    ex * (s.xfac(I * l) * g + s.dfac(I * l, om) * v)
}

fn gamma2(s: &Spectral, l: Complex64) -> Complex64 {
    let om = l.powu(4);
    let ex = exp_clamped(I * l * s.x);
    if ex == ZERO {
        return ZERO;
    }
    let l2 = l * l;
    let c = Complex64::new(-2.0, -2.0);
    let mut g = ZERO;
    if s.has_g() {
        g = c * l2 * l * s.e0(om) + c * l2 * s.e1(om);
    }
    let mut v = ZERO;
    if s.has_u0() {
        v += s.decay(om) * (I * s.u0h(-l) - Complex64::new(1.0, 1.0) * s.u0h(-I * l));
    }
    if s.transform_forcing {
        v += I * s.forcing_hat(-l, om) - Complex64::new(1.0, 1.0) * s.forcing_hat(-I * l, om);
    }
    ex * (s.xfac(I * l) * g + s.dfac(I * l, om) * v)
}
