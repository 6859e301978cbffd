//! Dispersion relations, the branch function ρ and the spectral region Ω.

use num_complex::Complex64;

use crate::error::{Result, UtmError};

/// The three equation families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// `U_t = -U_xxxx`, with `ω = λ⁴`.
    Biharmonic,
    /// `U_t = α U_xx - β U_xxxx`, with `ω = αλ² + βλ⁴`.
    ChPlus,
    /// `U_t = -α U_xx - β U_xxxx`, with `ω = -αλ² + βλ⁴`.
    ChMinus,
}

impl Family {
    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().replace('-', "_").as_str() {
            "biharmonic" => Some(Self::Biharmonic),
            "ch_plus" => Some(Self::ChPlus),
            "ch_minus" => Some(Self::ChMinus),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Biharmonic => "biharmonic",
            Self::ChPlus => "ch_plus",
            Self::ChMinus => "ch_minus",
        }
    }
}

/// Which side of a branch cut a limiting value is taken from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SideHint {
    /// Limit from `Re λ > 0` (for cuts on the imaginary axis).
    FromRightQuadrant,
    /// Limit from `Re λ < 0`.
    FromLeftQuadrant,
    /// Limit from `Im λ > 0` (for cuts on the real axis).
    FromUpperHalfPlane,
    #[default]
    None,
}

/// A value of ρ together with how it was obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchValue {
    pub value: Complex64,
    pub on_cut: bool,
    pub side_hint: SideHint,
}

/// Classification of a point relative to Ω.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    InsideOmega,
    OnBoundary,
    Outside,
}

/// Relative tolerance for boundary classification, scaled by `1 + |λ|⁴`.
pub const REGION_TOL: f64 = 1e-10;

/// Dispersion relation for one family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dispersion {
    pub family: Family,
    pub alpha: f64,
    pub beta: f64,
}

impl Dispersion {
    /// Validated constructor.  The biharmonic family is normalised to
    /// `α = 0, β = 1`; other `β` are handled by rescaling λ in the solver.
    pub fn new(family: Family, alpha: f64, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() || !alpha.is_finite() {
            return Err(UtmError::Domain(format!("need finite alpha and beta > 0 (alpha={alpha}, beta={beta})")));
        }
        match family {
            Family::Biharmonic if alpha != 0.0 || beta != 1.0 => Err(UtmError::Domain(
                "biharmonic dispersion is normalised to alpha = 0, beta = 1".into(),
            )),
            Family::ChPlus if alpha < 0.0 => Err(UtmError::Domain("ch_plus needs alpha >= 0".into())),
            Family::ChMinus if alpha <= 0.0 => Err(UtmError::Domain("ch_minus needs alpha > 0".into())),
            _ => Ok(Self { family, alpha, beta }),
        }
    }

    pub fn biharmonic() -> Self {
        Self { family: Family::Biharmonic, alpha: 0.0, beta: 1.0 }
    }

    /// `α/β`.
    pub fn kappa(&self) -> f64 {
        self.alpha / self.beta
    }

    /// Coefficient of λ² in ω (signed).
    /// Coefficient of `U_xx` in the evolution equation.
    pub fn a2(&self) -> f64 {
        match self.family {
            Family::Biharmonic => 0.0,
            Family::ChPlus => self.alpha,
            Family::ChMinus => -self.alpha,
        }
    }

    #[inline]
    pub fn omega(&self, lambda: Complex64) -> Complex64 {
        let l2 = lambda * lambda;
        l2 * (self.a2() + self.beta * l2)
    }

    #[inline]
    pub fn omega_prime(&self, lambda: Complex64) -> Complex64 {
        lambda * (2.0 * self.a2() + 4.0 * self.beta * lambda * lambda)
    }

    /// `λ² + α/β` for ChPlus, `λ² - α/β` for ChMinus, `λ²` for Biharmonic.
    #[inline]
    fn rho_square(&self, lambda: Complex64) -> Complex64 {
        lambda * lambda + self.a2() / self.beta
    }

    /// True when λ sits on the family's cut set.
    pub fn on_cut(&self, lambda: Complex64) -> bool {
        let c = self.kappa().sqrt();
        match self.family {
            Family::ChPlus => lambda.re == 0.0 && lambda.im.abs() > c,
            Family::ChMinus => (lambda.im == 0.0 && lambda.re.abs() < c) || lambda.re == 0.0,
            Family::Biharmonic => lambda.re == 0.0 && lambda.im != 0.0,
        }
    }

    /// ρ off the cuts, without classification.  Every family uses the
    /// negated principal root, which is even in λ and has `Re ρ ≤ 0`.
    #[inline]
    pub fn rho_value(&self, lambda: Complex64) -> Complex64 {
        -self.rho_square(lambda).sqrt()
    }

    /// ρ with cut handling.
    pub fn rho(&self, lambda: Complex64, hint: SideHint) -> Result<BranchValue> {
        if !self.on_cut(lambda) {
            return Ok(BranchValue { value: self.rho_value(lambda), on_cut: false, side_hint: SideHint::None });
        }
        // On the cut ρ² is real and non-positive; the one-sided limit is
        // ±i√|ρ²| with the sign of Im(λ²) on the chosen side.
        let z = self.rho_square(lambda);
        let side_sign = match hint {
            SideHint::FromRightQuadrant if lambda.re == 0.0 => lambda.im.signum(),
            SideHint::FromLeftQuadrant if lambda.re == 0.0 => -lambda.im.signum(),
            SideHint::FromUpperHalfPlane if lambda.im == 0.0 && lambda.re != 0.0 => lambda.re.signum(),
            _ => return Err(UtmError::Cut { lambda }),
        };
        let root = Complex64::new(0.0, side_sign * (-z.re).max(0.0).sqrt());
        Ok(BranchValue { value: -root, on_cut: true, side_hint: hint })
    }

    /// Membership in Ω = {Im λ ≥ 0, Re ω ≤ 0}.
    pub fn region_membership(&self, lambda: Complex64) -> Region {
        let tol = REGION_TOL;
        if lambda.im < -tol {
            return Region::Outside;
        }
        let scale = tol * (1.0 + lambda.norm_sqr() * lambda.norm_sqr());
        let re_w = self.omega(lambda).re;
        if re_w > scale {
            Region::Outside
        } else if re_w >= -scale || lambda.im.abs() <= tol {
            Region::OnBoundary
        } else {
            Region::InsideOmega
        }
    }

    /// Squares of the two roots η² of `Re ω(ξ + iη) = 0`, ascending.
    /// Negative entries mean no real η exists on that branch.
    pub fn boundary_eta_squares(&self, xi: f64) -> (f64, f64) {
        let a = self.a2();
        let b = self.beta;
        let x2 = xi * xi;
        let sum = (6.0 * b * x2 + a) / b;
        let prod = x2 * (b * x2 + a) / b;
        let disc = (32.0 * b * b * x2 * x2 + 8.0 * a * b * x2 + a * a).sqrt() / b;
        // Vieta-stable pair.
        let (r1, r2) = if sum >= 0.0 {
            let big = 0.5 * (sum + disc);
            (if big != 0.0 { prod / big } else { 0.0 }, big)
        } else {
            let small = 0.5 * (sum - disc);
            (small, if small != 0.0 { prod / small } else { 0.0 })
        };
        if r1 <= r2 { (r1, r2) } else { (r2, r1) }
    }

    /// The two boundary heights ψ∓(ξ) of the ChPlus region.
    pub fn psi_boundary(&self, xi: f64) -> Result<(f64, f64)> {
        if self.family != Family::ChPlus || self.alpha <= 0.0 {
            return Err(UtmError::Domain("psi_boundary is defined for ch_plus with alpha > 0".into()));
        }
        let (lo, hi) = self.boundary_eta_squares(xi);
        Ok((lo.max(0.0).sqrt(), hi.max(0.0).sqrt()))
    }

    /// `dη/dξ` along the curve `Re ω = 0` through `ξ + iη`.
    pub fn boundary_slope(&self, xi: f64, eta: f64) -> f64 {
        let a = self.a2();
        let b = self.beta;
        let fx = 2.0 * a * xi + b * (4.0 * xi.powi(3) - 12.0 * xi * eta * eta);
        let fy = -2.0 * a * eta + b * (4.0 * eta.powi(3) - 12.0 * xi * xi * eta);
        -fx / fy
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ch(alpha: f64, beta: f64) -> Dispersion {
        Dispersion::new(Family::ChPlus, alpha, beta).unwrap()
    }

    fn chm(alpha: f64, beta: f64) -> Dispersion {
        Dispersion::new(Family::ChMinus, alpha, beta).unwrap()
    }

    #[test]
    fn omega_examples() {
        assert_eq!(Dispersion::biharmonic().omega(c(1.0, 0.0)), c(1.0, 0.0));
        assert!(ch(1.0, 1.0).omega(c(0.0, 1.0)).norm() < 1e-15);
        assert!(chm(1.0, 1.0).omega(c(1.0, 0.0)).norm() < 1e-15);
        for d in [Dispersion::biharmonic(), ch(1.0, 2.0), chm(0.5, 3.0)] {
            assert_eq!(d.omega(c(0.0, 0.0)), c(0.0, 0.0));
        }
    }

    #[test]
    fn constructor_rules() {
        assert!(Dispersion::new(Family::ChPlus, 1.0, 0.0).is_err());
        assert!(Dispersion::new(Family::ChMinus, 0.0, 1.0).is_err());
        assert!(Dispersion::new(Family::Biharmonic, 0.0, 2.0).is_err());
        assert!(Dispersion::new(Family::ChPlus, 0.0, 1.0).is_ok());
    }

    #[test]
    fn rho_real_axis_anchor() {
        let d = ch(1.0, 1.0);
        assert!((d.rho_value(c(0.0, 0.0)) - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((d.rho_value(c(3.0, 0.0)) - c(-10f64.sqrt(), 0.0)).norm() < 1e-14);
        assert!((10f64.sqrt() - 3.162_277_66).abs() < 1e-8);
    }

    #[test]
    fn rho_follows_path_continuation() {
        // Track the root of λ²+1 from λ = 0.5 to 0.5+0.5i, choosing at each
        // step the root closest to the previous one.
        let d = ch(1.0, 1.0);
        let start = c(0.5, 0.0);
        let end = c(0.5, 0.5);
        let mut prev = d.rho_value(start);
        for k in 1..=64 {
            let lam = start + (end - start) * (k as f64 / 64.0);
            let r = (lam * lam + 1.0).sqrt();
            prev = if (r - prev).norm() < (-r - prev).norm() { r } else { -r };
        }
        assert!((d.rho_value(end) - prev).norm() < 1e-14);
    }

    #[test]
    fn rho_minus_real_axis_and_cut_set() {
        let d = chm(1.0, 1.0);
        assert!((d.rho_value(c(2.0, 0.0)) - c(-3f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!((d.rho_value(c(-2.0, 0.0)) - c(-3f64.sqrt(), 0.0)).norm() < 1e-15);
        // Jump across the imaginary axis.
        let right = d.rho_value(c(1e-9, 1.0));
        let left = d.rho_value(c(-1e-9, 1.0));
        assert!((right + left).norm() < 1e-6 && right.norm() > 1.0);
        assert!(d.on_cut(c(0.0, 2.0)) && d.on_cut(c(0.5, 0.0)) && !d.on_cut(c(1.5, 0.0)));
    }

    #[test]
    fn side_hints_match_limits() {
        let d = ch(1.0, 1.0);
        let lam = c(0.0, 2.0);
        assert!(matches!(d.rho(lam, SideHint::None), Err(UtmError::Cut { .. })));
        let r = d.rho(lam, SideHint::FromRightQuadrant).unwrap();
        assert!(r.on_cut);
        assert!((r.value - d.rho_value(c(1e-12, 2.0))).norm() < 1e-9);
        let l = d.rho(lam, SideHint::FromLeftQuadrant).unwrap();
        assert!((l.value - d.rho_value(c(-1e-12, 2.0))).norm() < 1e-9);
        let dm = chm(1.0, 1.0);
        for x in [-0.7, 0.3] {
            let v = dm.rho(c(x, 0.0), SideHint::FromUpperHalfPlane).unwrap().value;
            assert!((v - dm.rho_value(c(x, 1e-13))).norm() < 1e-9);
        }
    }

    #[test]
    fn region_examples() {
        let d = ch(1.0, 1.0);
        assert_eq!(d.region_membership(c(0.0, 0.5)), Region::InsideOmega);
        assert_eq!(d.region_membership(c(1.0, 0.0)), Region::Outside);
        assert_eq!(chm(1.0, 1.0).region_membership(c(1.0, 0.0)), Region::OnBoundary);
        let e = Complex64::from_polar(1.0, PI / 4.0);
        assert_eq!(Dispersion::biharmonic().region_membership(e), Region::InsideOmega);
        assert_eq!(Dispersion::biharmonic().region_membership(c(0.3, -0.1)), Region::Outside);
    }

    #[test]
    fn psi_examples() {
        let (lo, hi) = ch(1.0, 1.0).psi_boundary(0.0).unwrap();
        assert!(lo.abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
        let (lo, hi) = ch(1.0, 5.0).psi_boundary(0.0).unwrap();
        assert!(lo.abs() < 1e-15 && (hi - 0.2f64.sqrt()).abs() < 1e-15);
        assert!((0.2f64.sqrt() - 0.447_213_6).abs() < 1e-7);
        let d = ch(1.0, 1.0);
        let (lo, hi) = d.psi_boundary(2.0).unwrap();
        assert!(lo <= hi);
        for eta in [lo, hi] {
            assert!(d.omega(c(2.0, eta)).re.abs() <= 1e-12 * (1.0 + 4f64.powi(4)));
        }
        assert!(Dispersion::biharmonic().psi_boundary(1.0).is_err());
    }

    #[test]
    fn psi_matches_closed_form() {
        // Closed form from the quadratic formula, valid where it is well conditioned.
        let (a, b) = (1.3, 0.7);
        let d = ch(a, b);
        for xi in [0.4, 1.0, 3.0] {
            let x2: f64 = xi * xi;
            let root = (32.0 * b * b * x2 * x2 + 8.0 * a * b * x2 + a * a).sqrt();
            let minus = ((6.0 * b * x2 + a - root) / (2.0 * b)).sqrt();
            let plus = ((6.0 * b * x2 + a + root) / (2.0 * b)).sqrt();
            let (lo, hi) = d.psi_boundary(xi).unwrap();
            assert!((lo - minus).abs() < 1e-12 && (hi - plus).abs() < 1e-12);
        }
    }

    #[test]
    fn asymptote_on_real_axis() {
        for (a, b) in [(1.0, 1.0), (1.0, 2.0), (3.0, 0.5)] {
            let d = ch(a, b);
            let mut lam: f64 = 10.0;
            while lam <= 1e4 {
                let gap = (d.rho_value(c(lam, 0.0)).re + lam).abs();
                assert!(gap <= d.kappa() / (2.0 * lam) * 1.1, "lambda {lam}");
                lam *= 1.7;
            }
        }
    }

    #[test]
    fn boundary_slope_matches_finite_difference() {
        let d = ch(1.0, 1.0);
        let xi = 1.3;
        let h = 1e-6;
        let (lo1, _) = d.psi_boundary(xi + h).unwrap();
        let (lo0, _) = d.psi_boundary(xi - h).unwrap();
        let (lo, _) = d.psi_boundary(xi).unwrap();
        let fd = (lo1 - lo0) / (2.0 * h);
        assert!((d.boundary_slope(xi, lo) - fd).abs() < 1e-6);
    }

    fn theta_point() -> impl Strategy<Value = Complex64> {
        (-20.0f64..20.0, -20.0f64..20.0).prop_map(|(x, y)| Complex64::new(x, y))
    }

    proptest! {
        #[test]
        fn square_law_plus(lam in theta_point(), a in 0.1f64..3.0, b in 0.1f64..3.0) {
            let d = ch(a, b);
            let r = d.rho_value(lam);
            prop_assert!((r * r - (lam * lam + a / b)).norm() <= 1e-12 * (1.0 + lam.norm_sqr()));
        }

        #[test]
        fn square_law_minus(lam in theta_point(), a in 0.1f64..3.0, b in 0.1f64..3.0) {
            let d = chm(a, b);
            let r = d.rho_value(lam);
            prop_assert!((r * r - (lam * lam - a / b)).norm() <= 1e-12 * (1.0 + lam.norm_sqr()));
        }

        #[test]
        fn evenness_plus(lam in theta_point(), a in 0.1f64..3.0, b in 0.1f64..3.0) {
            let d = ch(a, b);
            prop_assume!(!d.on_cut(lam));
            prop_assert!((d.rho_value(-lam) - d.rho_value(lam)).norm() <= 1e-14 * (1.0 + lam.norm()));
        }

        #[test]
        fn omega_symmetry(lam in theta_point(), a in 0.1f64..3.0, b in 0.1f64..3.0, minus in any::<bool>()) {
            let d = if minus { chm(a, b) } else { ch(a, b) };
            let w = d.omega(lam);
            let r = d.rho_value(lam);
            let i = Complex64::i();
            let scale = 1e-10 * (1.0 + w.norm());
            prop_assert!((d.omega(-lam) - w).norm() <= scale);
            prop_assert!((d.omega(i * r) - w).norm() <= scale);
            prop_assert!((d.omega(-i * r) - w).norm() <= scale);
        }

        #[test]
        fn rho_has_nonpositive_real_part(lam in theta_point(), a in 0.1f64..3.0, b in 0.1f64..3.0) {
            prop_assert!(ch(a, b).rho_value(lam).re <= 0.0);
            prop_assert!(chm(a, b).rho_value(lam).re <= 0.0);
        }
    }
}
