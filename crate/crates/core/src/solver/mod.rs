//! Evaluation of the integral representations.
//!
//! The biharmonic and Cahn–Hilliard families have their own kernels in the
//! submodules; this module holds the request/response types, the shared
//! spectral helpers, the forcing contribution and the parallel dispatch.

mod asymptotics;
mod biharmonic;
mod ch;
mod checks;
#[cfg(test)]
mod tests;

use std::cell::Cell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::contours::ContourPath;
use crate::dispersion::{Dispersion, Family, SideHint};
use crate::error::{Result, UtmError};
use crate::quadrature::{
    exp_clamped, integrate_interval, integrate_segment, real_line_radius, OscHint, QuadratureReport,
};
use crate::transforms::{
    fourier_half_line, time_transform_exact, time_transform_horizon, HalfLineFunction, ProblemData, TimeSignal,
};

pub use asymptotics::{laplace_expand, periodicity_analysis, LaplaceTerms, PeriodicityFit};
pub use checks::{
    global_relation_residual, half_value_check, nonuniqueness_contour, nonuniqueness_demo, nonuniqueness_pair,
    nonuniqueness_v, standard_lambda_grid, HalfValueReport, NonuniquenessReport, TRACE_EPS,
};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default absolute tolerance for field values.
pub const DEFAULT_SOLVER_TOL: f64 = 1e-10;

/// Points closer than this (in `sqrt(x² + t²)`) to the corner get a warning
/// when the data are not compatible there.
pub const CORNER_RADIUS: f64 = 1e-2;

/// Mixed derivative `∂_x^n ∂_t^m`, limited to `n + 4m <= 8`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DerivOrder {
    pub n: u32,
    pub m: u32,
}

impl DerivOrder {
    pub const VALUE: DerivOrder = DerivOrder { n: 0, m: 0 };

    pub fn new(n: u32, m: u32) -> Result<Self> {
        if n + 4 * m > 8 {
            return Err(UtmError::Domain(format!("derivative order n + 4m = {} exceeds 8", n + 4 * m)));
        }
        Ok(Self { n, m })
    }

    /// Polynomial degree this order adds to a spectral integrand.
    pub fn degree(self) -> u32 {
        self.n + 4 * self.m
    }
}

/// Which contours the kernels are integrated on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Representation {
    /// Rays inside the decay sectors of `e^{-ωt}`, and for `ch_plus` the
    /// real-line form of the solution.  Fastest.
    #[default]
    Auto,
    /// The boundary of Ω itself (the rays `Γ1, Γ2` for the biharmonic
    /// equation).  Forcing is then handled through its own transforms
    /// rather than through Duhamel's principle.
    Boundary,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub representation: Representation,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_SOLVER_TOL, representation: Representation::Auto }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    pub fn boundary(mut self) -> Self {
        self.representation = Representation::Boundary;
        self
    }
}

/// Points and derivative orders to evaluate.  With `ehrenpreis_t = Some(T)`
/// the boundary data enter through transforms over `[0, T]`, which requires
/// `T > t` at every point.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalRequest {
    pub points: Vec<(f64, f64)>,
    pub deriv_orders: Vec<DerivOrder>,
    pub ehrenpreis_t: Option<f64>,
}

impl EvalRequest {
    pub fn new(points: Vec<(f64, f64)>, deriv_orders: Vec<DerivOrder>) -> Self {
        Self { points, deriv_orders, ehrenpreis_t: None }
    }

    pub fn values(points: Vec<(f64, f64)>) -> Self {
        Self::new(points, vec![DerivOrder::VALUE])
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.ehrenpreis_t = Some(horizon);
        self
    }

    fn validate(&self) -> Result<()> {
        for &(x, t) in &self.points {
            if !(x.is_finite() && t.is_finite() && x > 0.0 && t > 0.0) {
                return Err(UtmError::Domain(format!("evaluation point ({x}, {t}) is outside x > 0, t > 0")));
            }
            if let Some(h) = self.ehrenpreis_t {
                if t >= h {
                    return Err(UtmError::Domain(format!("t = {t} exceeds the transform horizon {h}")));
                }
            }
        }
        if let Some(h) = self.ehrenpreis_t {
            if !(h > 0.0 && h.is_finite()) {
                return Err(UtmError::Domain(format!("transform horizon must be positive, got {h}")));
            }
        }
        for o in &self.deriv_orders {
            DerivOrder::new(o.n, o.m)?;
        }
        Ok(())
    }
}

/// Values laid out point-major: entry `p * deriv_orders.len() + k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionField {
    pub points: Vec<(f64, f64)>,
    pub deriv_orders: Vec<DerivOrder>,
    pub values: Vec<Complex64>,
    pub error_ests: Vec<f64>,
    pub warnings: Vec<String>,
}

impl SolutionField {
    pub fn value(&self, point: usize, order: usize) -> Complex64 {
        self.values[point * self.deriv_orders.len() + order]
    }

    pub fn error_est(&self, point: usize, order: usize) -> f64 {
        self.error_ests[point * self.deriv_orders.len() + order]
    }

    /// Rows `(x, t, n, m, value, error)`.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, u32, u32, Complex64, f64)> + '_ {
        let k = self.deriv_orders.len();
        self.values.iter().zip(&self.error_ests).enumerate().map(move |(i, (v, e))| {
            let (x, t) = self.points[i / k];
            let o = self.deriv_orders[i % k];
            (x, t, o.n, o.m, *v, *e)
        })
    }
}

/// Evaluate `∂_x^n ∂_t^m U` at every requested point and order.
pub fn solve(data: &ProblemData, req: &EvalRequest, opts: &SolverOptions) -> Result<SolutionField> {
    if !(opts.tol > 0.0) {
        return Err(UtmError::Domain(format!("tolerance must be positive, got {}", opts.tol)));
    }
    req.validate()?;
    let jobs: Vec<(usize, usize)> = (0..req.points.len())
        .flat_map(|p| (0..req.deriv_orders.len()).map(move |k| (p, k)))
        .collect();
    let reports: Vec<QuadratureReport> = jobs
        .par_iter()
        .map(|&(p, k)| {
            let (x, t) = req.points[p];
            evaluate(data, x, t, req.deriv_orders[k], opts, req.ehrenpreis_t)
        })
        .collect::<Result<_>>()?;
    let mut warnings = Vec::new();
    let compatible = data.compatibility_order() >= 1;
    for &(x, t) in &req.points {
        if !compatible && x.hypot(t) < CORNER_RADIUS {
            warnings.push(format!(
                "corner singularity: data incompatible at the corner, point ({x}, {t}) is within {CORNER_RADIUS}"
            ));
        }
    }
    for r in &reports {
        for w in &r.warnings {
            if !warnings.contains(w) {
                warnings.push(w.clone());
            }
        }
    }
    Ok(SolutionField {
        points: req.points.clone(),
        deriv_orders: req.deriv_orders.clone(),
        values: reports.iter().map(|r| r.value).collect(),
        error_ests: reports.iter().map(|r| r.abs_error_est).collect(),
        warnings,
    })
}

/// One entry of the field.
pub fn evaluate(
    data: &ProblemData,
    x: f64,
    t: f64,
    order: DerivOrder,
    opts: &SolverOptions,
    horizon: Option<f64>,
) -> Result<QuadratureReport> {
    let transform_forcing = opts.representation == Representation::Boundary && !data.forcing.is_zero();
    let s = Spectral::new(data, x, t, order, horizon, transform_forcing);
    let mut rep = homogeneous(&s, opts)?;
    if !data.forcing.is_zero() && !transform_forcing {
        rep.absorb(duhamel(data, x, t, order, opts)?);
    }
    Ok(rep)
}

fn homogeneous(s: &Spectral, opts: &SolverOptions) -> Result<QuadratureReport> {
    match s.d.family {
        Family::Biharmonic => biharmonic::homogeneous(s, opts),
        Family::ChPlus | Family::ChMinus => ch::homogeneous(s, opts),
    }
}

/// Forcing through Duhamel's principle: with `W_a` the solution for
/// initial datum `a` and zero boundary data,
/// `∂_x^n ∂_t^m U_f = Σ_{j<m} b^{(j)}(0) ∂_x^n ∂_t^{m-1-j} W(x,t)
///                   + ∫_0^t b^{(m)}(t-s) ∂_x^n W(x,s) ds`.
fn duhamel(data: &ProblemData, x: f64, t: f64, order: DerivOrder, opts: &SolverOptions) -> Result<QuadratureReport> {
    let mut total = QuadratureReport::zero();
    let inner_opts = SolverOptions { tol: opts.tol * 1e-2 / (1.0 + t), representation: Representation::Auto };
    for (a, b) in &data.forcing.terms {
        if a.is_zero() || b.is_zero() {
            continue;
        }
        let w_data = ProblemData::new(data.dispersion, a.clone(), TimeSignal::zero(), TimeSignal::zero());
        let w = |s: f64, o: DerivOrder| -> Result<QuadratureReport> {
            homogeneous(&Spectral::new(&w_data, x, s, o, None, false), &inner_opts)
        };
        let mut bj = b.clone();
        for j in 0..order.m {
            let b0 = bj.value(0.0);
            if b0.norm() > 0.0 {
                let o = DerivOrder { n: order.n, m: order.m - 1 - j };
                total.absorb(w(t, o)?.scaled(b0));
            }
            bj = bj.derivative();
        }
        let failure: Cell<Option<UtmError>> = Cell::new(None);
        let integrand = |s: f64| -> Complex64 {
            if s <= 0.0 {
                return ZERO;
            }
            match w(s, DerivOrder { n: order.n, m: 0 }) {
                Ok(r) => bj.value(t - s) * r.value,
                Err(e) => {
                    failure.set(Some(e));
                    Complex64::new(f64::NAN, f64::NAN)
                }
            }
        };
        let rep = integrate_interval(&integrand, 0.0, t, opts.tol * 0.5);
        if let Some(e) = failure.take() {
            return Err(e);
        }
        total.absorb(rep?);
    }
    Ok(total)
}

/// Shared per-point quantities for the spectral integrands.
pub(crate) struct Spectral<'a> {
    pub data: &'a ProblemData,
    pub d: Dispersion,
    pub x: f64,
    pub t: f64,
    pub order: DerivOrder,
    pub horizon: Option<f64>,
    pub transform_forcing: bool,
    /// `∂_t^m` of the boundary data and their lower derivatives at 0.
    g0m: TimeSignal,
    g1m: TimeSignal,
    g0_init: Vec<Complex64>,
    g1_init: Vec<Complex64>,
}

impl<'a> Spectral<'a> {
    pub fn new(
        data: &'a ProblemData,
        x: f64,
        t: f64,
        order: DerivOrder,
        horizon: Option<f64>,
        transform_forcing: bool,
    ) -> Self {
        let lift = |g: &TimeSignal| {
            let mut init = Vec::new();
            let mut h = g.clone();
            for _ in 0..order.m {
                init.push(h.value(0.0));
                h = h.derivative();
            }
            init.reverse();
            (h, init)
        };
        let (g0m, g0_init) = lift(&data.g0);
        let (g1m, g1_init) = lift(&data.g1);
        Self { data, d: data.dispersion, x, t, order, horizon, transform_forcing, g0m, g1m, g0_init, g1_init }
    }

    pub fn u0h(&self, k: Complex64) -> Complex64 {
        half_line_hat(&self.data.u0, k)
    }

    /// `(-ω)^m E_{g0}(ω)` in the current (t or horizon) form.
    pub fn e0(&self, omega: Complex64) -> Complex64 {
        self.e_lifted(&self.data.g0, &self.g0m, &self.g0_init, omega)
    }

    /// `(-ω)^m E_{g1}(ω)`.
    pub fn e1(&self, omega: Complex64) -> Complex64 {
        self.e_lifted(&self.data.g1, &self.g1m, &self.g1_init, omega)
    }

    /// In the t form, `m` integrations by parts give
    /// `(-ω)^m E_g = E_{g^(m)} + Σ_j (-ω)^j [e^{-ωt} g^(m-1-j)(0) - g^(m-1-j)(t)]`.
    /// The terms in `g^(k)(t)` are polynomial in λ and ρ, whose integrals
    /// against `e^{iλx}` vanish for `x > 0` on every contour used here, so
    /// they are dropped.  This keeps the integrands decaying for `m >= 1`.
    fn e_lifted(&self, g: &TimeSignal, gm: &TimeSignal, init: &[Complex64], omega: Complex64) -> Complex64 {
        match self.horizon {
            Some(h) => (-omega).powu(self.order.m) * time_transform_horizon(g, omega, self.t, h),
            None => {
                let mut v = time_transform_exact(gm, omega, self.t);
                if !init.is_empty() {
                    let decay = self.decay(omega);
                    let mut p = Complex64::new(1.0, 0.0);
                    for &c in init {
                        v += p * decay * c;
                        p *= -omega;
                    }
                }
                v
            }
        }
    }

    /// `e^{-ωt} f̃(k, ω, t)` with ω taken at the contour point.
    pub fn forcing_hat(&self, k: Complex64, omega: Complex64) -> Complex64 {
        self.data
            .forcing
            .terms
            .iter()
            .map(|(a, b)| half_line_hat(a, k) * time_transform_exact(b, omega, self.t))
            .sum()
    }

    /// x-derivative multiplier `p^n` for the x-symbol `p`.
    pub fn xfac(&self, p: Complex64) -> Complex64 {
        p.powu(self.order.n)
    }

    /// Derivative multiplier `p^n (-ω)^m` for the x-symbol `p`.
    pub fn dfac(&self, p: Complex64, omega: Complex64) -> Complex64 {
        p.powu(self.order.n) * (-omega).powu(self.order.m)
    }

    pub fn decay(&self, omega: Complex64) -> Complex64 {
        exp_clamped(-omega * self.t)
    }

    pub fn has_u0(&self) -> bool {
        !self.data.u0.is_zero()
    }

    pub fn has_g(&self) -> bool {
        !(self.data.g0.is_zero() && self.data.g1.is_zero())
    }

    /// Real-line truncation radius for integrands carrying `e^{-ωt}`.
    pub fn real_radius(&self) -> f64 {
        let beta = self.d.beta;
        real_line_radius(beta, self.t, self.order.degree() + 4)
    }

    /// Real-line radius for the data terms.  The forcing transform only
    /// decays like `|λ|^{-5}`, so carrying it needs a much longer line.
    pub fn data_radius(&self, tol: f64) -> f64 {
        let r = self.real_radius();
        if !self.transform_forcing {
            return r;
        }
        let excess = 4.0 - (self.order.degree() as f64).min(3.0);
        r.max(tol.powf(-1.0 / excess).min(1e4))
    }

    pub fn hint_rays(&self) -> Option<OscHint> {
        Some(OscHint::new(self.x, 0.0))
    }

    pub fn hint_boundary(&self) -> Option<OscHint> {
        let t_eff = self.horizon.unwrap_or(self.t).max(self.t);
        Some(OscHint::new(self.x, t_eff * self.d.alpha.max(self.d.beta)))
    }
}

pub(crate) fn half_line_hat(u: &HalfLineFunction, k: Complex64) -> Complex64 {
    fourier_half_line(u, k).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
}

/// ρ at `λ`, honouring the segment's cut side.
pub(crate) fn rho_at(d: &Dispersion, lambda: Complex64, side: SideHint) -> Complex64 {
    match side {
        SideHint::None => d.rho_value(lambda),
        s => d.rho(lambda, s).map(|b| b.value).unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
    }
}

/// Integrate `f(λ, side)` over every segment of `path`.
pub(crate) fn integrate_with_sides<F>(f: &F, path: &ContourPath, tol: f64, hint: Option<OscHint>) -> Result<QuadratureReport>
where
    F: Fn(Complex64, SideHint) -> Complex64,
{
    let share = tol / path.segments.len().max(1) as f64;
    let mut total = QuadratureReport::zero();
    for seg in &path.segments {
        let g = |l: Complex64| f(l, seg.side);
        total.absorb(integrate_segment(&g, &seg.kind, share, hint, path.truncation_r)?);
    }
    Ok(total)
}

/// `∫_{-r}^{r}` split at 0.
pub(crate) fn integrate_real<F>(f: &F, r: f64, tol: f64, hint: Option<OscHint>) -> Result<QuadratureReport>
where
    F: Fn(Complex64) -> Complex64,
{
    use crate::contours::SegmentKind;
    let left = SegmentKind::Line { start: Complex64::new(-r, 0.0), end: ZERO };
    let right = SegmentKind::Line { start: ZERO, end: Complex64::new(r, 0.0) };
    let mut rep = integrate_segment(f, &left, tol / 2.0, hint, None)?;
    rep.absorb(integrate_segment(f, &right, tol / 2.0, hint, None)?);
    rep.truncation_r = rep.truncation_r.max(r);
    Ok(rep)
}

pub(crate) const INV_2PI: f64 = 0.5 / PI;

