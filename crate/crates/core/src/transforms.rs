//! Spectral transforms of the problem data.
//!
//! Half-line data are finite sums of `y^k e^{-a y}` and `y^k e^{-s y^2}`
//! terms and time signals are finite sums of complex exponentials, so most
//! transforms have closed forms.  The numerical routines are kept as the
//! reference path and are cross-checked against the closed forms in tests.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::dispersion::Dispersion;
use crate::error::{Result, UtmError};
use crate::quadrature::{exp_clamped, integrate_interval};

/// Frequency above which [`time_transform_stable`] switches to the
/// integration-by-parts form.
pub const OMEGA_SWITCH: f64 = 50.0;

/// Number of corner derivatives stored for every function.
pub const MAX_DERIV_ORDER: usize = 8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// `(e^z - 1)/z`, accurate near `z = 0`.
pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        // 1 + z/2 + z²/6 + z³/24 + z⁴/120
        Complex64::new(1.0, 0.0) + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0)))
    } else if z.re < -746.0 {
        -1.0 / z
    } else {
        (z.exp() - 1.0) / z
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecayClass {
    Schwartz,
    ExpDecay(f64),
    CompactSupport(f64),
}

/// One building block of a half-line function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HalfLineTerm {
    /// `coef · y^power · e^{-rate·y}`, `rate > 0`.
    PolyExp { coef: f64, power: u32, rate: f64 },
    /// `coef · y^power · e^{-width·y²}`, `width > 0`.
    PolyGauss { coef: f64, power: u32, width: f64 },
}

impl HalfLineTerm {
    fn eval(&self, y: f64) -> f64 {
        match *self {
            Self::PolyExp { coef, power, rate } => coef * y.powi(power as i32) * (-rate * y).exp(),
            Self::PolyGauss { coef, power, width } => coef * y.powi(power as i32) * (-width * y * y).exp(),
        }
    }

    fn deriv_at_zero(&self, j: u32) -> f64 {
        match *self {
            Self::PolyExp { coef, power, rate } => {
                if j < power {
                    0.0
                } else {
                    coef * binomial(j, power) * factorial(power) * (-rate).powi((j - power) as i32)
                }
            }
            Self::PolyGauss { coef, power, width } => {
                if j < power || (j - power) % 2 == 1 {
                    0.0
                } else {
                    let m = (j - power) / 2;
                    coef * factorial(j) * (-width).powi(m as i32) / factorial(m)
                }
            }
        }
    }

    fn closed_transform(&self, lambda: Complex64) -> Option<Complex64> {
        match *self {
            Self::PolyExp { coef, power, rate } => {
                let d = Complex64::new(rate, 0.0) + Complex64::i() * lambda;
                Some(coef * factorial(power) / d.powu(power + 1))
            }
            Self::PolyGauss { .. } => None,
        }
    }

    /// Point beyond which `|term(y)|·y` stays below `floor`.
    fn truncation(&self, floor: f64) -> f64 {
        let (peak, f): (f64, Box<dyn Fn(f64) -> f64>) = match *self {
            Self::PolyExp { power, rate, .. } => (f64::from(power) / rate, Box::new(move |y| self.eval(y))),
            Self::PolyGauss { power, width, .. } => {
                ((f64::from(power) / (2.0 * width)).sqrt(), Box::new(move |y| self.eval(y)))
            }
        };
        let mut y = 2.0 * peak + 1.0;
        while f(y).abs() * y >= floor && y < 1e6 {
            y *= 1.1;
        }
        y
    }
}

/// Smooth, rapidly decaying data on `[0, ∞)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfLineFunction {
    terms: Vec<HalfLineTerm>,
    derivs: Vec<f64>,
}

impl HalfLineFunction {
    pub fn new(terms: Vec<HalfLineTerm>) -> Result<Self> {
        for t in &terms {
            let (c, r) = match *t {
                HalfLineTerm::PolyExp { coef, rate, .. } => (coef, rate),
                HalfLineTerm::PolyGauss { coef, width, .. } => (coef, width),
            };
            if !(r > 0.0) || !c.is_finite() {
                return Err(UtmError::Domain(format!("half-line term needs a positive decay rate: {t:?}")));
            }
        }
        let derivs = (0..=MAX_DERIV_ORDER as u32)
            .map(|j| terms.iter().map(|t| t.deriv_at_zero(j)).sum())
            .collect();
        Ok(Self { terms, derivs })
    }

    pub fn zero() -> Self {
        Self { terms: Vec::new(), derivs: vec![0.0; MAX_DERIV_ORDER + 1] }
    }

    pub fn exp_decay(coef: f64, rate: f64) -> Result<Self> {
        Self::poly_exp(coef, 0, rate)
    }

    pub fn poly_exp(coef: f64, power: u32, rate: f64) -> Result<Self> {
        Self::new(vec![HalfLineTerm::PolyExp { coef, power, rate }])
    }

    pub fn poly_gauss(coef: f64, power: u32, width: f64) -> Result<Self> {
        Self::new(vec![HalfLineTerm::PolyGauss { coef, power, width }])
    }

    pub fn terms(&self) -> &[HalfLineTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| match *t {
            HalfLineTerm::PolyExp { coef, .. } | HalfLineTerm::PolyGauss { coef, .. } => coef == 0.0,
        })
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        let scale = |t: &HalfLineTerm, s: f64| match *t {
            HalfLineTerm::PolyExp { coef, power, rate } => HalfLineTerm::PolyExp { coef: coef * s, power, rate },
            HalfLineTerm::PolyGauss { coef, power, width } => HalfLineTerm::PolyGauss { coef: coef * s, power, width },
        };
        let terms = self
            .terms
            .iter()
            .map(|t| scale(t, a))
            .chain(other.terms.iter().map(|t| scale(t, b)))
            .collect();
        let derivs = self.derivs.iter().zip(&other.derivs).map(|(x, y)| a * x + b * y).collect();
        Self { terms, derivs }
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(y)).sum()
    }

    /// `d^j u/dy^j (0)` for `j ≤ MAX_DERIV_ORDER`.
    pub fn derivs_at_zero(&self) -> &[f64] {
        &self.derivs
    }

    pub fn decay_class(&self) -> DecayClass {
        let slowest = self
            .terms
            .iter()
            .filter_map(|t| match *t {
                HalfLineTerm::PolyExp { rate, .. } => Some(rate),
                HalfLineTerm::PolyGauss { .. } => None,
            })
            .fold(f64::INFINITY, f64::min);
        if slowest.is_finite() {
            DecayClass::ExpDecay(slowest)
        } else {
            DecayClass::Schwartz
        }
    }

    /// Truncation point `X*` with `|u(X*)|·X* < 1e-14·scale`.
    pub fn truncation_point(&self) -> f64 {
        let scale = (0..=400)
            .map(|k| self.eval(k as f64 * 0.05).abs())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let floor = 1e-14 * scale / self.terms.len().max(1) as f64;
        self.terms.iter().map(|t| t.truncation(floor)).fold(0.0, f64::max)
    }
}

fn check_lower_half_plane(lambda: Complex64) -> Result<()> {
    if lambda.im > 1e-12 * lambda.norm().max(1.0) {
        return Err(UtmError::Domain(format!("half-line transform needs Im λ ≤ 0, got λ = {lambda}")));
    }
    Ok(())
}

/// `∫_0^∞ e^{-iλy} u(y) dy` for `Im λ ≤ 0`, closed form where available.
pub fn fourier_half_line(u: &HalfLineFunction, lambda: Complex64) -> Result<Complex64> {
    check_lower_half_plane(lambda)?;
    let mut total = ZERO;
    let mut numeric = Vec::new();
    for t in &u.terms {
        match t.closed_transform(lambda) {
            Some(v) => total += v,
            None => numeric.push(*t),
        }
    }
    if !numeric.is_empty() {
        let part = HalfLineFunction::new(numeric)?;
        total += fourier_half_line_numeric(&part, lambda)?;
    }
    Ok(total)
}

/// Reference path: adaptive quadrature on `[0, X*]`.
pub fn fourier_half_line_numeric(u: &HalfLineFunction, lambda: Complex64) -> Result<Complex64> {
    check_lower_half_plane(lambda)?;
    if u.terms.is_empty() {
        return Ok(ZERO);
    }
    let x_star = u.truncation_point();
    let g = |y: f64| exp_clamped(-Complex64::i() * lambda * y) * u.eval(y);
    let rep = integrate_interval(&g, 0.0, x_star, 1e-13)?;
    if rep.abs_error_est > 1e-10 {
        return Err(UtmError::NonConvergent(format!(
            "half-line transform error {:.2e} at λ = {lambda}",
            rep.abs_error_est
        )));
    }
    Ok(rep.value)
}

/// `Σ_{j=1}^M u^{(j-1)}(0)/(iλ)^j`.
pub fn sigma_tail(u: &HalfLineFunction, lambda: Complex64, m: usize) -> Result<Complex64> {
    if lambda == ZERO {
        return Err(UtmError::Domain("sigma tail is undefined at λ = 0".into()));
    }
    if m > MAX_DERIV_ORDER + 1 {
        return Err(UtmError::Domain(format!("sigma tail order {m} exceeds stored derivatives")));
    }
    let il = Complex64::i() * lambda;
    Ok((1..=m).map(|j| u.derivs[j - 1] / il.powu(j as u32)).sum())
}

/// `Σ coef_k e^{rate_k τ}`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TimeSignal {
    terms: Vec<(Complex64, Complex64)>,
    period_hint: Option<f64>,
}

impl TimeSignal {
    pub fn new(terms: Vec<(Complex64, Complex64)>) -> Self {
        Self { terms, period_hint: None }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut s = Self::new(vec![(Complex64::new(c, 0.0), ZERO)]);
        s.period_hint = Some(1.0);
        s
    }

    pub fn exp(coef: f64, rate: f64) -> Self {
        Self::new(vec![(Complex64::new(coef, 0.0), Complex64::new(rate, 0.0))])
    }

    /// `amp · sin(freq·τ)`.
    pub fn sin(amp: f64, freq: f64) -> Self {
        let w = Complex64::new(0.0, freq);
        let c = Complex64::new(0.0, -amp / 2.0);
        let mut s = Self::new(vec![(c, w), (-c, -w)]);
        s.period_hint = (freq != 0.0).then(|| 2.0 * std::f64::consts::PI / freq.abs());
        s
    }

    /// `amp · cos(freq·τ)`.
    pub fn cos(amp: f64, freq: f64) -> Self {
        let w = Complex64::new(0.0, freq);
        let c = Complex64::new(amp / 2.0, 0.0);
        let mut s = Self::new(vec![(c, w), (c, -w)]);
        s.period_hint = (freq != 0.0).then(|| 2.0 * std::f64::consts::PI / freq.abs());
        s
    }

    pub fn with_period(mut self, period: f64) -> Self {
        self.period_hint = Some(period);
        self
    }

    pub fn period_hint(&self) -> Option<f64> {
        self.period_hint
    }

    pub fn terms(&self) -> &[(Complex64, Complex64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(c, _)| *c == ZERO)
    }

    pub fn plus(&self, other: &Self) -> Self {
        let period_hint = match (self.period_hint, other.period_hint) {
            (Some(a), Some(b)) if (a - b).abs() < 1e-15 * a => Some(a),
            (Some(a), None) if other.is_zero() => Some(a),
            (None, Some(b)) if self.is_zero() => Some(b),
            _ => None,
        };
        Self { terms: self.terms.iter().chain(&other.terms).copied().collect(), period_hint }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { terms: self.terms.iter().map(|(c, r)| (c * s, *r)).collect(), period_hint: self.period_hint }
    }

    pub fn value(&self, t: f64) -> Complex64 {
        self.terms.iter().map(|(c, r)| c * (r * t).exp()).sum()
    }

    pub fn derivative(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(c, r)| (c * r, *r)).collect(),
            period_hint: self.period_hint,
        }
    }

    pub fn derivs_at_zero(&self) -> Vec<Complex64> {
        (0..=MAX_DERIV_ORDER as u32)
            .map(|j| self.terms.iter().map(|(c, r)| c * r.powu(j)).sum())
            .collect()
    }

    /// Bound on `|g|` over `[0, t]`.
    fn sup_bound(&self, t: f64) -> f64 {
        self.terms.iter().map(|(c, r)| c.norm() * (r.re * t).exp().max(1.0)).sum()
    }
}

/// `E(ω,t) = e^{-ωt} ∫_0^t e^{ωτ} g(τ) dτ` in closed form.
pub fn time_transform_exact(g: &TimeSignal, omega: Complex64, t: f64) -> Complex64 {
    g.terms
        .iter()
        .map(|(c, mu)| c * (mu * t).exp() * t * phi1(-(omega + mu) * t))
        .sum()
}

/// `e^{-ωt} ∫_0^T e^{ωτ} g(τ) dτ`, the finite-horizon transform used by the
/// Ehrenpreis form.
pub fn time_transform_horizon(g: &TimeSignal, omega: Complex64, t: f64, horizon: f64) -> Complex64 {
    g.terms
        .iter()
        .map(|(c, mu)| c * horizon * exp_clamped(-omega * t) * phi1((omega + mu) * horizon))
        .sum()
}

fn direct_time_transform(g: &TimeSignal, omega: Complex64, t: f64, tol: f64) -> Result<Complex64> {
    let f = |tau: f64| exp_clamped(-omega * (t - tau)) * g.value(tau);
    Ok(integrate_interval(&f, 0.0, t, tol)?.value)
}

/// `E(ω,t)` by quadrature: direct for `|ω| < OMEGA_SWITCH`, otherwise two
/// rounds of integration by parts with a quadrature remainder in `g''`.
pub fn time_transform_stable(g: &TimeSignal, omega: Complex64, t: f64) -> Result<Complex64> {
    if !(t >= 0.0) {
        return Err(UtmError::Domain(format!("time transform needs t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(ZERO);
    }
    let scale = 1.0 + t * g.sup_bound(t);
    if omega.norm() < OMEGA_SWITCH {
        return direct_time_transform(g, omega, t, 1e-13 * scale);
    }
    let decay = exp_clamped(-omega * t);
    let g1 = g.derivative();
    let g2 = g1.derivative();
    let rest_scale = 1.0 + t * g2.sup_bound(t);
    let rest = direct_time_transform(&g2, omega, t, 1e-13 * rest_scale * omega.norm_sqr())?;
    let e1 = (g1.value(t) - decay * g1.value(0.0) - rest) / omega;
    Ok((g.value(t) - decay * g.value(0.0) - e1) / omega)
}

/// Separable forcing `Σ a_k(y) b_k(τ)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Forcing {
    pub terms: Vec<(HalfLineFunction, TimeSignal)>,
}

impl Forcing {
    pub fn new(terms: Vec<(HalfLineFunction, TimeSignal)>) -> Self {
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(a, b)| a.is_zero() || b.is_zero())
    }

    pub fn eval(&self, y: f64, tau: f64) -> f64 {
        self.terms.iter().map(|(a, b)| a.eval(y) * b.value(tau).re).sum()
    }
}

/// `(f̂(λ,t), e^{-ωt} f̃(λ,ω,t))`.
pub fn forcing_transforms(f: &Forcing, d: &Dispersion, lambda: Complex64, t: f64) -> Result<(Complex64, Complex64)> {
    check_lower_half_plane(lambda)?;
    let omega = d.omega(lambda);
    f.terms.iter().try_fold((ZERO, ZERO), |(fh, ft), (a, b)| {
        let ah = fourier_half_line(a, lambda)?;
        Ok((fh + ah * b.value(t), ft + ah * time_transform_exact(b, omega, t)))
    })
}

/// The data of one initial-boundary-value problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemData {
    pub u0: HalfLineFunction,
    pub g0: TimeSignal,
    pub g1: TimeSignal,
    pub forcing: Forcing,
    pub dispersion: Dispersion,
}

impl ProblemData {
    pub fn new(dispersion: Dispersion, u0: HalfLineFunction, g0: TimeSignal, g1: TimeSignal) -> Self {
        Self { u0, g0, g1, forcing: Forcing::default(), dispersion }
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = forcing;
        self
    }

    /// Number of consecutive corner-regularity levels whose hypotheses hold
    /// (0 to 5).
    pub fn compatibility_order(&self) -> u32 {
        let tol = 1e-12;
        let u = self.u0.derivs_at_zero();
        let g0 = self.g0.derivs_at_zero();
        let g1 = self.g1.derivs_at_zero();
        let f00 = self.forcing.eval(0.0, 0.0);
        let levels = [
            u[0].abs() <= tol && g0[0].norm() <= tol,
            u[1].abs() <= tol && g1[0].norm() <= tol,
            u[2].abs() <= tol,
            u[3].abs() <= tol,
            g0[1].norm() <= tol && (self.dispersion.beta * u[4] - f00).abs() <= tol,
        ];
        levels.iter().take_while(|ok| **ok).count() as u32
    }
}

/// Named parameter list from a configuration file.
pub type Params = BTreeMap<String, f64>;

fn param(p: &Params, key: &str, default: f64) -> f64 {
    p.get(key).copied().unwrap_or(default)
}

fn check_keys(p: &Params, allowed: &[&str], id: &str) -> Result<()> {
    match p.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(UtmError::Domain(format!("preset '{id}' has no parameter '{k}'"))),
        None => Ok(()),
    }
}

/// Half-line presets: `zero`, `exp` (c e^{-a y}), `poly_exp` (c y^k e^{-a y}),
/// `poly_gauss` (c y^k e^{-s y²}).
pub fn half_line_preset(id: &str, p: &Params) -> Result<HalfLineFunction> {
    let power = |p: &Params| -> Result<u32> {
        let k = param(p, "k", 0.0);
        if k < 0.0 || k.fract() != 0.0 || k > 8.0 {
            return Err(UtmError::Domain(format!("power k must be an integer in 0..=8, got {k}")));
        }
        Ok(k as u32)
    };
    match id {
        "zero" => {
            check_keys(p, &[], id)?;
            Ok(HalfLineFunction::zero())
        }
        "exp" => {
            check_keys(p, &["c", "a"], id)?;
            HalfLineFunction::exp_decay(param(p, "c", 1.0), param(p, "a", 1.0))
        }
        "poly_exp" => {
            check_keys(p, &["c", "k", "a"], id)?;
            HalfLineFunction::poly_exp(param(p, "c", 1.0), power(p)?, param(p, "a", 1.0))
        }
        "poly_gauss" => {
            check_keys(p, &["c", "k", "s"], id)?;
            HalfLineFunction::poly_gauss(param(p, "c", 1.0), power(p)?, param(p, "s", 1.0))
        }
        other => Err(UtmError::Domain(format!("unknown half-line preset '{other}'"))),
    }
}

/// Time-signal presets: `zero`, `const`, `exp` (c e^{r t}), `sin`, `cos`
/// (amplitude `c`, frequency `w`), `ramp` (c(1 - e^{-a t})) and
/// `smooth_step` (c(1 - e^{-a t})²).
pub fn time_signal_preset(id: &str, p: &Params) -> Result<TimeSignal> {
    let c = param(p, "c", 1.0);
    let a = param(p, "a", 1.0);
    match id {
        "zero" => check_keys(p, &[], id).map(|_| TimeSignal::zero()),
        "const" => check_keys(p, &["c"], id).map(|_| TimeSignal::constant(c)),
        "exp" => check_keys(p, &["c", "r"], id).map(|_| TimeSignal::exp(c, param(p, "r", -1.0))),
        "sin" => check_keys(p, &["c", "w"], id).map(|_| TimeSignal::sin(c, param(p, "w", 1.0))),
        "cos" => check_keys(p, &["c", "w"], id).map(|_| TimeSignal::cos(c, param(p, "w", 1.0))),
        "ramp" => {
            check_keys(p, &["c", "a"], id)?;
            Ok(TimeSignal::constant(c).plus(&TimeSignal::exp(-c, -a)))
        }
        "smooth_step" => {
            check_keys(p, &["c", "a"], id)?;
            Ok(TimeSignal::new(vec![
                (Complex64::new(c, 0.0), ZERO),
                (Complex64::new(-2.0 * c, 0.0), Complex64::new(-a, 0.0)),
                (Complex64::new(c, 0.0), Complex64::new(-2.0 * a, 0.0)),
            ]))
        }
        other => Err(UtmError::Domain(format!("unknown time-signal preset '{other}'"))),
    }
}
