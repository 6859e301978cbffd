//! Integration paths in the spectral plane.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::dispersion::{Dispersion, Family, SideHint};
use crate::error::{Result, UtmError};

/// Geometry of one piece of a path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SegmentKind {
    Line { start: Complex64, end: Complex64 },
    /// Semi-infinite ray `origin + s·dir`, `s ≥ 0`, `|dir| = 1`.  When
    /// `inward` is set the ray is traversed from infinity toward `origin`.
    Ray { origin: Complex64, dir: Complex64, inward: bool },
    /// `center + radius·e^{iθ}` for θ running from `theta0` to `theta1`.
    Arc { center: Complex64, radius: f64, theta0: f64, theta1: f64 },
}

impl SegmentKind {
    /// Parameter length; rays report infinity.
    pub fn length(&self) -> f64 {
        match *self {
            Self::Line { start, end } => (end - start).norm(),
            Self::Ray { .. } => f64::INFINITY,
            Self::Arc { radius, theta0, theta1, .. } => radius * (theta1 - theta0).abs(),
        }
    }

    /// Point and derivative at parameter `s ∈ [0, len]`, traversed in the
    /// parameter direction (rays always outward; see [`orientation`]).
    ///
    /// [`orientation`]: SegmentKind::orientation
    #[inline]
    pub fn point(&self, s: f64, len: f64) -> (Complex64, Complex64) {
        match *self {
            Self::Line { start, end } => {
                let d = (end - start) / len;
                (start + d * s, d)
            }
            Self::Ray { origin, dir, .. } => (origin + dir * s, dir),
            Self::Arc { center, radius, theta0, theta1 } => {
                let sgn = (theta1 - theta0).signum();
                let th = theta0 + sgn * s / radius;
                let e = Complex64::from_polar(1.0, th);
                (center + e * radius, Complex64::i() * e * sgn)
            }
        }
    }

    /// `-1` for inward rays, `+1` otherwise.
    pub fn orientation(&self) -> f64 {
        match self {
            Self::Ray { inward: true, .. } => -1.0,
            _ => 1.0,
        }
    }

    /// Finite start point in traversal order (None for inward rays).
    pub fn start(&self) -> Option<Complex64> {
        match *self {
            Self::Line { start, .. } => Some(start),
            Self::Ray { origin, inward, .. } => (!inward).then_some(origin),
            Self::Arc { center, radius, theta0, .. } => Some(center + Complex64::from_polar(radius, theta0)),
        }
    }

    /// Finite end point in traversal order (None for outward rays).
    pub fn end(&self) -> Option<Complex64> {
        match *self {
            Self::Line { end, .. } => Some(end),
            Self::Ray { origin, inward, .. } => inward.then_some(origin),
            Self::Arc { center, radius, theta1, .. } => Some(center + Complex64::from_polar(radius, theta1)),
        }
    }

    fn reversed(&self) -> Self {
        match *self {
            Self::Line { start, end } => Self::Line { start: end, end: start },
            Self::Ray { origin, dir, inward } => Self::Ray { origin, dir, inward: !inward },
            Self::Arc { center, radius, theta0, theta1 } => Self::Arc { center, radius, theta0: theta1, theta1: theta0 },
        }
    }

    /// Lower bound σ with `|e^{iλx}| ≤ e^{-σ x |λ|}` along the piece.
    pub fn decay_sigma(&self) -> f64 {
        let min_sin = |a: f64, b: f64| -> f64 {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            // Does [lo, hi] contain -π/2 + 2kπ?
            let k = ((hi + FRAC_PI_2) / (2.0 * PI)).floor();
            let trough = -FRAC_PI_2 + 2.0 * PI * k;
            if trough >= lo {
                -1.0
            } else {
                lo.sin().min(hi.sin())
            }
        };
        let s = match *self {
            Self::Line { start, end } => {
                if start.norm() == 0.0 || end.norm() == 0.0 {
                    let other = if start.norm() == 0.0 { end } else { start };
                    other.arg().sin()
                } else {
                    let a = start.arg();
                    let mut b = end.arg();
                    // Arg varies monotonically along a line not through 0;
                    // unwrap to the short way round.
                    if (b - a).abs() > PI {
                        b -= 2.0 * PI * (b - a).signum();
                    }
                    min_sin(a, b)
                }
            }
            Self::Ray { origin, dir, .. } => {
                if origin.norm() == 0.0 {
                    dir.arg().sin()
                } else {
                    let a = origin.arg();
                    let mut b = dir.arg();
                    if (b - a).abs() > PI {
                        b -= 2.0 * PI * (b - a).signum();
                    }
                    min_sin(a, b)
                }
            }
            Self::Arc { center, radius, theta0, theta1 } => {
                if center.norm() == 0.0 {
                    min_sin(theta0, theta1)
                } else {
                    let n = 256;
                    (0..=n)
                        .map(|k| {
                            let th = theta0 + (theta1 - theta0) * k as f64 / n as f64;
                            let p = center + Complex64::from_polar(radius, th);
                            p.im / p.norm()
                        })
                        .fold(f64::INFINITY, f64::min)
                }
            }
        };
        s.max(0.0)
    }
}

/// A segment with its decay certificate and cut-side rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathSegment {
    pub kind: SegmentKind,
    pub decay_sigma: f64,
    /// Side from which ρ is evaluated when this piece lies on a cut.
    pub side: SideHint,
}

impl PathSegment {
    pub fn new(kind: SegmentKind) -> Self {
        Self { decay_sigma: kind.decay_sigma(), kind, side: SideHint::None }
    }

    pub fn on_side(mut self, side: SideHint) -> Self {
        self.side = side;
        self
    }
}

/// An oriented, piecewise path.
#[derive(Clone, Debug, PartialEq)]
pub struct ContourPath {
    pub label: String,
    pub segments: Vec<PathSegment>,
    /// Components need not join end to end.
    pub disjoint: bool,
    /// Fixed truncation radius for rays; `None` means probe the integrand.
    pub truncation_r: Option<f64>,
}

impl ContourPath {
    pub fn new(label: impl Into<String>, kinds: Vec<SegmentKind>) -> Self {
        Self {
            label: label.into(),
            segments: kinds.into_iter().map(PathSegment::new).collect(),
            disjoint: false,
            truncation_r: None,
        }
    }

    pub fn segment(a: Complex64, b: Complex64) -> Self {
        Self::new("segment", vec![SegmentKind::Line { start: a, end: b }])
    }

    /// Two rays from the origin: in along `in_angle`, out along `out_angle`.
    pub fn wedge(label: impl Into<String>, in_angle: f64, out_angle: f64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self::new(
            label,
            vec![
                SegmentKind::Ray { origin: zero, dir: Complex64::from_polar(1.0, in_angle), inward: true },
                SegmentKind::Ray { origin: zero, dir: Complex64::from_polar(1.0, out_angle), inward: false },
            ],
        )
    }

    pub fn with_truncation(mut self, r: f64) -> Self {
        self.truncation_r = Some(r);
        self
    }

    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.segments = self
            .segments
            .iter()
            .rev()
            .map(|s| PathSegment { kind: s.kind.reversed(), ..*s })
            .collect();
        out
    }

    pub fn concat(label: impl Into<String>, parts: &[ContourPath]) -> Self {
        Self {
            label: label.into(),
            segments: parts.iter().flat_map(|p| p.segments.iter().copied()).collect(),
            disjoint: true,
            truncation_r: parts.iter().find_map(|p| p.truncation_r),
        }
    }

    /// True when consecutive finite endpoints coincide (or the path is
    /// marked as a disjoint union).
    pub fn is_connected(&self) -> bool {
        if self.disjoint {
            return true;
        }
        self.segments.windows(2).all(|w| match (w[0].kind.end(), w[1].kind.start()) {
            (Some(a), Some(b)) => (a - b).norm() <= 1e-12 * (1.0 + a.norm()),
            (None, None) => true,
            _ => false,
        })
    }

    /// Sample points `(segment_index, arclength, λ)` for dumps and checks.
    /// Rays are sampled up to `ray_len`.
    pub fn samples(&self, per_segment: usize, ray_len: f64) -> Vec<(usize, f64, Complex64)> {
        let mut out = Vec::new();
        for (i, seg) in self.segments.iter().enumerate() {
            let len = match seg.kind {
                SegmentKind::Ray { .. } => ray_len,
                k => k.length(),
            };
            for k in 0..=per_segment {
                let s = len * k as f64 / per_segment.max(1) as f64;
                let s_trav = if seg.kind.orientation() < 0.0 { len - s } else { s };
                let (lam, _) = seg.kind.point(s_trav, len.max(f64::MIN_POSITIVE));
                out.push((i, s, lam));
            }
        }
        out
    }
}

/// The two biharmonic contours: Γ1 bounds the sector between 5π/8 and
/// 7π/8, Γ2 the sector between π/8 and 3π/8, each keeping its sector on
/// the left.
pub fn gamma_biharmonic() -> (ContourPath, ContourPath) {
    (
        ContourPath::wedge("Gamma1", 7.0 * PI / 8.0, 5.0 * PI / 8.0),
        ContourPath::wedge("Gamma2", 3.0 * PI / 8.0, PI / 8.0),
    )
}

/// Sample a curve `η = height(ξ)` between `xi_from` and `xi_to` (either
/// order) by arclength, refining where the slope is steep.
fn sample_curve<H, S>(height: &H, slope: &S, xi_from: f64, xi_to: f64) -> Vec<Complex64>
where
    H: Fn(f64) -> f64,
    S: Fn(f64, f64) -> f64,
{
    let dir = (xi_to - xi_from).signum();
    let mut pts = vec![Complex64::new(xi_from, height(xi_from))];
    let mut xi = xi_from;
    let total = (xi_to - xi_from).abs();
    if total == 0.0 {
        return pts;
    }
    loop {
        let eta = height(xi);
        let lam_abs = (xi * xi + eta * eta).sqrt();
        let ds = (0.05 + 0.04 * lam_abs).min(1.0);
        let m = slope(xi, eta);
        let m = if m.is_finite() { m.abs() } else { 1e6 };
        let mut dxi = ds / (1.0 + m * m).sqrt();
        if m > 10.0 {
            dxi /= 4.0;
        }
        dxi = dxi.max(1e-9 * (1.0 + xi.abs()));
        let next = xi + dir * dxi;
        if (next - xi_from).abs() >= total {
            pts.push(Complex64::new(xi_to, height(xi_to)));
            break;
        }
        xi = next;
        pts.push(Complex64::new(xi, height(xi)));
    }
    pts
}

fn polyline(points: &[Complex64]) -> Vec<SegmentKind> {
    points.windows(2).map(|w| SegmentKind::Line { start: w[0], end: w[1] }).collect()
}

/// ξ at which the curve `η = h(ξ)` reaches modulus `r` (curve assumed to
/// have increasing modulus for ξ ≥ xi_min).
fn xi_at_radius<H: Fn(f64) -> f64>(h: &H, xi_min: f64, r: f64) -> f64 {
    let modulus = |xi: f64| (xi * xi + h(xi).powi(2)).sqrt();
    let mut lo = xi_min;
    let mut hi = r.max(xi_min + 1e-12);
    while modulus(hi) < r {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if modulus(mid) < r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Polyline parametrisation of ∂Ω truncated at `|λ| = truncation_r`.
///
/// The vertices lie on the curves `Re ω = 0`; straight chords between
/// them are equivalent to the curves themselves because the integrands
/// are analytic in the thin regions swept between chord and curve.
pub fn domega_boundary(d: &Dispersion, truncation_r: f64) -> Result<ContourPath> {
    let c = d.kappa().sqrt();
    let lower = |xi: f64| d.boundary_eta_squares(xi).0.max(0.0).sqrt();
    let upper = |xi: f64| d.boundary_eta_squares(xi).1.max(0.0).sqrt();
    let slope = |xi: f64, eta: f64| d.boundary_slope(xi, eta);
    match d.family {
        Family::Biharmonic => Err(UtmError::Domain("use gamma_biharmonic for the biharmonic family".into())),
        Family::ChPlus => {
            if truncation_r <= 2.0 * c {
                return Err(UtmError::Domain(format!("truncation radius {truncation_r} too small")));
            }
            let xl = xi_at_radius(&lower, 0.0, truncation_r);
            let xu = xi_at_radius(&upper, 0.0, truncation_r);
            // Lower component, left to right through 0.
            let mut lower_pts = sample_curve(&lower, &slope, -xl, 0.0);
            lower_pts.pop();
            lower_pts.push(Complex64::new(0.0, 0.0));
            let right = sample_curve(&lower, &slope, 0.0, xl);
            lower_pts.extend(right.into_iter().skip(1));
            // Upper component, right to left through i√κ.
            let mut upper_pts = sample_curve(&upper, &slope, xu, 0.0);
            upper_pts.pop();
            upper_pts.push(Complex64::new(0.0, c));
            let left = sample_curve(&upper, &slope, 0.0, -xu);
            upper_pts.extend(left.into_iter().skip(1));
            let mut kinds = polyline(&lower_pts);
            kinds.extend(polyline(&upper_pts));
            let mut path = ContourPath::new("dOmega", kinds);
            path.disjoint = true;
            path.truncation_r = Some(truncation_r);
            Ok(path)
        }
        Family::ChMinus => {
            let xu = xi_at_radius(&upper, 0.0, truncation_r);
            let xl = xi_at_radius(&lower, c, truncation_r);
            let real_seg = |a: f64, b: f64| {
                PathSegment::new(SegmentKind::Line { start: Complex64::new(a, 0.0), end: Complex64::new(b, 0.0) })
                    .on_side(SideHint::FromUpperHalfPlane)
            };
            let mut segs = Vec::new();
            // Right lobe: in along the upper curve to 0, across [0, c], out along the lower curve.
            let mut pts = sample_curve(&upper, &slope, xu, 0.0);
            pts.pop();
            pts.push(Complex64::new(0.0, 0.0));
            segs.extend(polyline(&pts).into_iter().map(PathSegment::new));
            segs.push(real_seg(0.0, c));
            let mut pts = sample_curve(&lower, &slope, c, xl);
            pts[0] = Complex64::new(c, 0.0);
            segs.extend(polyline(&pts).into_iter().map(PathSegment::new));
            // Left lobe: in along the lower curve to -c, across [-c, 0], out along the upper curve.
            let mut pts = sample_curve(&lower, &slope, -xl, -c);
            let last = pts.len() - 1;
            pts[last] = Complex64::new(-c, 0.0);
            segs.extend(polyline(&pts).into_iter().map(PathSegment::new));
            segs.push(real_seg(-c, 0.0));
            let mut pts = sample_curve(&upper, &slope, 0.0, -xu);
            pts[0] = Complex64::new(0.0, 0.0);
            segs.extend(polyline(&pts).into_iter().map(PathSegment::new));
            Ok(ContourPath {
                label: "dOmega".into(),
                segments: segs,
                disjoint: true,
                truncation_r: Some(truncation_r),
            })
        }
    }
}

/// Default directions of the four half-lines used for long-time asymptotics.
pub const E_ANGLES: [f64; 4] = [PI / 16.0, 7.0 * PI / 16.0, 9.0 * PI / 16.0, 15.0 * PI / 16.0];

/// The half-lines `E_1..E_4` (outward from 0) and the contour `Z`.
pub fn deformed_paths_for_asymptotics(d: &Dispersion) -> Result<(Vec<ContourPath>, ContourPath)> {
    if d.family != Family::ChPlus {
        return Err(UtmError::Domain("asymptotic contours are built for ch_plus".into()));
    }
    let zero = Complex64::new(0.0, 0.0);
    let e: Vec<ContourPath> = E_ANGLES
        .iter()
        .enumerate()
        .map(|(j, &th)| {
            ContourPath::new(
                format!("E{}", j + 1),
                vec![SegmentKind::Ray { origin: zero, dir: Complex64::from_polar(1.0, th), inward: false }],
            )
        })
        .collect();
    let t1 = E_ANGLES[0];
    let t4 = E_ANGLES[3];
    let a = Complex64::from_polar(-1.0 / t4.cos(), t4);
    let b = Complex64::from_polar(1.0 / t1.cos(), t1);
    let z = ContourPath {
        label: "Z".into(),
        segments: vec![
            PathSegment::new(SegmentKind::Ray { origin: a, dir: Complex64::from_polar(1.0, t4), inward: true }),
            PathSegment::new(SegmentKind::Line { start: a, end: Complex64::new(-1.0, 0.0) }),
            PathSegment::new(SegmentKind::Line { start: Complex64::new(1.0, 0.0), end: b }),
            PathSegment::new(SegmentKind::Ray { origin: b, dir: Complex64::from_polar(1.0, t1), inward: false }),
        ],
        disjoint: true,
        truncation_r: None,
    };
    Ok((e, z))
}

/// Arc `{R e^{iθ} : θ ∈ [θ0, θ1]}`.
pub fn diagnostic_arc(r: f64, theta0: f64, theta1: f64) -> Result<ContourPath> {
    if !(r > 0.0) || theta1 < theta0 {
        return Err(UtmError::Domain(format!("arc needs R > 0 and theta0 <= theta1 (R={r}, {theta0}, {theta1})")));
    }
    if theta0 == theta1 {
        return Ok(ContourPath { label: "arc".into(), segments: Vec::new(), disjoint: false, truncation_r: None });
    }
    Ok(ContourPath::new(
        "arc",
        vec![SegmentKind::Arc { center: Complex64::new(0.0, 0.0), radius: r, theta0, theta1 }],
    ))
}

/// Rows `(segment_index, s, λ, ω(λ))` for a CSV dump.
pub fn dump_rows(path: &ContourPath, d: &Dispersion, per_segment: usize, ray_len: f64) -> Vec<(usize, f64, Complex64, Complex64)> {
    path.samples(per_segment, ray_len)
        .into_iter()
        .map(|(i, s, lam)| (i, s, lam, d.omega(lam)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::Region;
    use crate::quadrature::integrate_path;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gamma2_contains_sample_point() {
        let (_, g2) = gamma_biharmonic();
        let on = g2.segments.iter().any(|s| match s.kind {
            SegmentKind::Ray { dir, .. } => (dir - Complex64::from_polar(1.0, PI / 8.0)).norm() < 1e-15,
            _ => false,
        });
        assert!(on);
        let p = Complex64::from_polar(1.0, PI / 8.0);
        assert!(p.powi(4).re.abs() < 1e-15);
    }

    #[test]
    fn gamma_decay_certificates() {
        let (g1, g2) = gamma_biharmonic();
        for s in g1.segments.iter().chain(&g2.segments) {
            assert!(s.decay_sigma >= (PI / 8.0).sin() - 1e-12);
            if let SegmentKind::Ray { dir, .. } = s.kind {
                assert!((dir.norm() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gamma_orientation_by_residue() {
        // Close each truncated sector with an arc at R = 10 and integrate 1/(λ-λ0).
        let (g1, g2) = gamma_biharmonic();
        for (g, mid) in [(g2, 2.0 * PI / 8.0), (g1, 6.0 * PI / 8.0)] {
            let lam0 = Complex64::from_polar(3.0, mid);
            let f = |l: Complex64| 1.0 / (l - lam0);
            let r = 10.0;
            let (t_in, t_out) = match (g.segments[0].kind, g.segments[1].kind) {
                (SegmentKind::Ray { dir: a, .. }, SegmentKind::Ray { dir: b, .. }) => (a.arg(), b.arg()),
                _ => unreachable!(),
            };
            let rays = g.clone().with_truncation(r);
            let closing = ContourPath::new(
                "close",
                vec![SegmentKind::Arc { center: c(0.0, 0.0), radius: r, theta0: t_out, theta1: t_in }],
            );
            let total = integrate_path(&f, &rays, 1e-12, None).unwrap().value
                + integrate_path(&f, &closing, 1e-12, None).unwrap().value;
            assert!((total - c(0.0, 2.0 * PI)).norm() < 1e-10, "{total}");
        }
    }

    #[test]
    fn domega_plus_points_on_boundary() {
        let d = Dispersion::new(Family::ChPlus, 1.0, 1.0).unwrap();
        let p = domega_boundary(&d, 30.0).unwrap();
        let verts: Vec<Complex64> = p.segments.iter().filter_map(|s| s.kind.start()).collect();
        assert!(verts.iter().any(|v| (*v - c(0.0, 1.0)).norm() < 1e-14));
        for v in &verts {
            assert!(d.omega(*v).re.abs() <= 1e-9 * (1.0 + v.norm().powi(4)), "{v}");
            assert_eq!(d.region_membership(*v), Region::OnBoundary);
        }
        assert!(Dispersion::biharmonic() != d);
        assert!(domega_boundary(&Dispersion::biharmonic(), 30.0).is_err());
    }

    #[test]
    fn domega_minus_contains_real_branch_points() {
        let d = Dispersion::new(Family::ChMinus, 1.0, 1.0).unwrap();
        let p = domega_boundary(&d, 20.0).unwrap();
        let verts: Vec<Complex64> = p.segments.iter().filter_map(|s| s.kind.start()).collect();
        assert!(verts.iter().any(|v| (*v - c(1.0, 0.0)).norm() < 1e-14));
        assert!(verts.iter().any(|v| (*v - c(-1.0, 0.0)).norm() < 1e-14));
        for v in &verts {
            assert!(d.omega(*v).re.abs() <= 1e-9 * (1.0 + v.norm().powi(4)), "{v}");
        }
        let cut_sides = p.segments.iter().filter(|s| s.side == SideHint::FromUpperHalfPlane).count();
        assert_eq!(cut_sides, 2);
    }

    #[test]
    fn asymptotic_paths() {
        let d = Dispersion::new(Family::ChPlus, 1.0, 1.0).unwrap();
        let (e, z) = deformed_paths_for_asymptotics(&d).unwrap();
        assert_eq!(e.len(), 4);
        assert!(d.omega(Complex64::from_polar(2.0, PI / 16.0)).re > 0.0);
        // Z never meets the open interval (-1, 1).
        for (_, _, lam) in z.samples(50, 10.0) {
            assert!(!(lam.im.abs() < 1e-14 && lam.re.abs() < 1.0 - 1e-12), "{lam}");
        }
        let a = z.segments[0].kind.end().unwrap();
        assert!((a.re + 1.0).abs() < 1e-14);
    }

    #[test]
    fn circle_residue_and_degenerate_arc() {
        let circle = diagnostic_arc(1.0, 0.0, 2.0 * PI).unwrap();
        let v = integrate_path(&|l: Complex64| 1.0 / l, &circle, 1e-12, None).unwrap().value;
        assert!((v - c(0.0, 2.0 * PI)).norm() < 1e-12);
        let empty = diagnostic_arc(2.0, 0.3, 0.3).unwrap();
        assert_eq!(integrate_path(&|l: Complex64| l, &empty, 1e-12, None).unwrap().value, c(0.0, 0.0));
        assert!(diagnostic_arc(-1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn arc_integrals_shrink() {
        // λ² e^{-λ⁴} over θ ∈ [-π/16, π/16].
        let f = |l: Complex64| l * l * (-l.powi(4)).exp();
        let vals: Vec<f64> = [2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|&r| integrate_path(&f, &diagnostic_arc(r, -PI / 16.0, PI / 16.0).unwrap(), 1e-14, None).unwrap().value.norm())
            .collect();
        assert!(vals[0] >= 10.0 * vals[1]);
        for w in vals.windows(2) {
            assert!(w[1] <= w[0] * 1.05);
        }
    }

    #[test]
    fn reversal_and_connectivity() {
        let (g1, _) = gamma_biharmonic();
        assert!(g1.is_connected());
        let rev = g1.reversed();
        assert!(rev.is_connected());
        let broken = ContourPath::new(
            "broken",
            vec![
                SegmentKind::Line { start: c(0.0, 0.0), end: c(1.0, 0.0) },
                SegmentKind::Line { start: c(2.0, 0.0), end: c(3.0, 0.0) },
            ],
        );
        assert!(!broken.is_connected());
    }

    #[test]
    fn decay_sigma_matches_samples() {
        let kinds = [
            SegmentKind::Line { start: c(-1.0, 2.0), end: c(3.0, 0.5) },
            SegmentKind::Arc { center: c(0.0, 0.0), radius: 2.0, theta0: 0.3, theta1: 2.5 },
            SegmentKind::Line { start: c(-1.0, -0.5), end: c(1.0, 1.0) },
        ];
        for k in kinds {
            let len = k.length();
            let sampled = (0..=4000)
                .map(|i| {
                    let (p, _) = k.point(len * i as f64 / 4000.0, len);
                    p.im / p.norm()
                })
                .fold(f64::INFINITY, f64::min)
                .max(0.0);
            assert!((k.decay_sigma() - sampled).abs() < 1e-6, "{k:?}");
        }
    }
}
