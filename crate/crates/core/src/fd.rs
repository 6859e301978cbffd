//! Finite-difference reference solver for `u_t = a u_xx - β u_xxxx + f` on `[0, L]`.
//!
//! Central differences in space, theta-weighted stepping in time, and a few
//! backward-Euler half steps at the start to damp the high-frequency content
//! of incompatible data.  The left end takes `u(0) = g0` directly and
//! `u_x(0) = g1` through a ghost node; the right end is clamped.

use crate::dispersion::{Dispersion, Family};
use crate::error::{Result, UtmError};
use crate::transforms::ProblemData;
use crate::solver::SolutionField;

/// Number of backward-Euler half steps taken before switching to `theta`.
const STARTUP_HALF_STEPS: usize = 4;

/// Maximum number of stored snapshots (the final time is always kept).
const MAX_SNAPSHOTS: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdGrid {
    pub length: f64,
    pub nx: usize,
    pub dt: f64,
    pub t_end: f64,
    pub theta: f64,
}

impl FdGrid {
    pub fn new(length: f64, nx: usize, dt: f64, t_end: f64) -> Self {
        Self { length, nx, dt, t_end, theta: 0.5 }
    }

    pub fn dx(&self) -> f64 {
        self.length / self.nx as f64
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    fn validate(&self, data: &ProblemData) -> Result<Vec<String>> {
        if !(self.length > 0.0 && self.dt > 0.0 && self.t_end > 0.0) {
            return Err(UtmError::Domain("grid length, dt and t_end must be positive".into()));
        }
        if self.nx < 64 {
            return Err(UtmError::Domain(format!("nx = {} is below the minimum of 64", self.nx)));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(UtmError::Domain(format!("theta = {} outside [0, 1]", self.theta)));
        }
        let mut warnings = Vec::new();
        if self.dt > 0.5 * self.dx() {
            warnings.push(format!("dt = {} exceeds half the mesh width {}", self.dt, self.dx()));
        }
        let peak = (0..=self.nx).map(|j| data.u0.eval(j as f64 * self.dx()).abs()).fold(0.0, f64::max);
        if data.u0.eval(self.length).abs() > 1e-12 * peak {
            warnings.push(format!("initial datum is not negligible at L = {}", self.length));
        }
        Ok(warnings)
    }
}

/// Snapshots of the discrete solution.
#[derive(Clone, Debug, PartialEq)]
pub struct FdField {
    pub dx: f64,
    pub times: Vec<f64>,
    /// `values[k][j]` is the solution at `times[k]` and `x = j dx`, `j = 0..=nx`.
    pub values: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl FdField {
    pub fn nx(&self) -> usize {
        self.values.first().map_or(0, |v| v.len() - 1)
    }

    /// `∫ u² dx` at every stored time, by the trapezoid rule.
    pub fn l2_squared(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|u| {
                let inner: f64 = u.iter().map(|v| v * v).sum();
                self.dx * (inner - 0.5 * (u[0] * u[0] + u[u.len() - 1] * u[u.len() - 1]))
            })
            .collect()
    }

    /// Value at `(x, t)`, with a flag telling whether interpolation was needed.
    pub fn sample(&self, x: f64, t: f64) -> (f64, bool) {
        let nx = self.nx();
        let sx = (x / self.dx).clamp(0.0, nx as f64);
        let j = (sx.floor() as usize).min(nx.saturating_sub(1));
        let fx = sx - j as f64;
        let mut k = match self.times.partition_point(|&s| s < t) {
            0 => 0,
            k if k >= self.times.len() => self.times.len() - 1,
            k => k,
        };
        // A snapshot a rounding error below `t` still counts as `t`.
        if k > 0 && (self.times[k - 1] - t).abs() <= 1e-9 * t.abs().max(1.0) {
            k -= 1;
        }
        let on_time = (self.times[k] - t).abs() <= 1e-9 * t.abs().max(1.0);
        let on_space = fx.abs() < 1e-9 || (1.0 - fx).abs() < 1e-9;
        let at = |k: usize| (1.0 - fx) * self.values[k][j] + fx * self.values[k][j + 1];
        if on_time || k == 0 {
            return (at(k), !(on_time && on_space));
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        ((1.0 - w) * at(k - 1) + w * at(k), true)
    }
}

/// LU factors of a pentadiagonal matrix, stored by diagonals.
struct Banded {
    /// `rows[i] = [a_{i,i-2}, a_{i,i-1}, a_{i,i}, a_{i,i+1}, a_{i,i+2}]`.
    rows: Vec<[f64; 5]>,
}

impl Banded {
    /// In-place elimination without pivoting.
    fn factor(mut rows: Vec<[f64; 5]>) -> Result<Self> {
        let n = rows.len();
        for k in 0..n {
            let piv = rows[k][2];
            if piv == 0.0 || !piv.is_finite() {
                return Err(UtmError::SingularSystem { row: k });
            }
            for off in 1..=2 {
                let i = k + off;
                if i >= n {
                    break;
                }
                // Row i holds a_{i,k} at column index 2 - off.
                let l = rows[i][2 - off] / piv;
                rows[i][2 - off] = l;
                for c in 1..=2 {
                    if k + c < n && c + 2 - off <= 4 {
                        let upper = rows[k][2 + c];
                        rows[i][2 - off + c] -= l * upper;
                    }
                }
            }
        }
        Ok(Self { rows })
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n {
            let r = &self.rows[i];
            if i >= 1 {
                b[i] -= r[1] * b[i - 1];
            }
            if i >= 2 {
                b[i] -= r[0] * b[i - 2];
            }
        }
        for i in (0..n).rev() {
            let r = &self.rows[i];
            let mut s = b[i];
            if i + 1 < n {
                s -= r[3] * b[i + 1];
            }
            if i + 2 < n {
                s -= r[4] * b[i + 2];
            }
            b[i] = s / r[2];
        }
    }
}

/// Spatial operator restricted to the unknowns `u_1 .. u_{N-1}`.
struct Operator {
    n: usize,
    h: f64,
    a: f64,
    beta: f64,
}

impl Operator {
    fn new(d: &Dispersion, nx: usize, h: f64) -> Self {
        Self { n: nx - 1, h, a: d.a2(), beta: d.beta }
    }

    /// Stencil coefficients of `a D2 - β D4` on offsets -2..=2.
    fn stencil(&self) -> [f64; 5] {
        let (h2, h4) = (self.h * self.h, self.h.powi(4));
        let (c2, c4) = (self.a / h2, self.beta / h4);
        [-c4, c2 + 4.0 * c4, -2.0 * c2 - 6.0 * c4, c2 + 4.0 * c4, -c4]
    }

    /// Rows of the matrix after eliminating the ghost and boundary nodes.
    fn rows(&self) -> Vec<[f64; 5]> {
        let s = self.stencil();
        (0..self.n)
            .map(|i| {
                let mut r = s;
                if i == 0 {
                    // u_{-1} = u_1 - 2h g1 folds into the diagonal.
                    r[2] += s[0];
                    r[0] = 0.0;
                    r[1] = 0.0;
                }
                if i == 1 {
                    r[0] = 0.0;
                }
                if i + 1 == self.n {
                    // u_{N+1} = u_{N-1} folds into the diagonal, u_N = 0.
                    r[2] += s[4];
                    r[3] = 0.0;
                    r[4] = 0.0;
                }
                if i + 2 == self.n {
                    r[4] = 0.0;
                }
                r
            })
            .collect()
    }

    /// Boundary contribution for data `g0`, `g1` at one time level.
    fn boundary(&self, g0: f64, g1: f64, out: &mut [f64]) {
        let s = self.stencil();
        out.iter_mut().for_each(|v| *v = 0.0);
        out[0] += s[1] * g0 - s[0] * 2.0 * self.h * g1;
        if self.n > 1 {
            out[1] += s[0] * g0;
        }
    }

    fn apply(&self, rows: &[[f64; 5]], u: &[f64], out: &mut [f64]) {
        for (i, r) in rows.iter().enumerate() {
            let mut s = r[2] * u[i];
            if i >= 1 {
                s += r[1] * u[i - 1];
            }
            if i >= 2 {
                s += r[0] * u[i - 2];
            }
            if i + 1 < self.n {
                s += r[3] * u[i + 1];
            }
            if i + 2 < self.n {
                s += r[4] * u[i + 2];
            }
            out[i] = s;
        }
    }
}

/// One linear stepper `(I - θ k M) u⁺ = (I + (1-θ) k M) u + k [θ r⁺ + (1-θ) r]`.
struct Stepper {
    lu: Banded,
    k: f64,
    theta: f64,
}

impl Stepper {
    fn new(rows: &[[f64; 5]], k: f64, theta: f64) -> Result<Self> {
        let lhs: Vec<[f64; 5]> = rows
            .iter()
            .map(|r| {
                let mut l = r.map(|c| -theta * k * c);
                l[2] += 1.0;
                l
            })
            .collect();
        Ok(Self { lu: Banded::factor(lhs)?, k, theta })
    }
}

fn check_family(d: &Dispersion) -> Result<()> {
    match d.family {
        Family::ChMinus => Err(UtmError::Domain(
            "the finite-difference oracle does not treat the backward-diffusion family".into(),
        )),
        _ => Ok(()),
    }
}

/// Solve on `grid` and return the stored snapshots.
pub fn fd_solve(data: &ProblemData, grid: &FdGrid) -> Result<FdField> {
    check_family(&data.dispersion)?;
    let warnings = grid.validate(data)?;
    let nx = grid.nx;
    let h = grid.dx();
    let op = Operator::new(&data.dispersion, nx, h);
    let rows = op.rows();
    let n = op.n;
    let steps = grid.steps().max(1);
    let dt = grid.t_end / steps as f64;
    let stride = steps.div_ceil(MAX_SNAPSHOTS);

    let rhs_at = |t: f64, out: &mut [f64]| {
        op.boundary(data.g0.value(t).re, data.g1.value(t).re, out);
        if !data.forcing.is_zero() {
            for (i, v) in out.iter_mut().enumerate() {
                *v += data.forcing.eval((i + 1) as f64 * h, t);
            }
        }
    };
    let full = |u: &[f64], t: f64| {
        let mut v = Vec::with_capacity(nx + 1);
        v.push(data.g0.value(t).re);
        v.extend_from_slice(u);
        v.push(0.0);
        v
    };

    let mut u: Vec<f64> = (1..nx).map(|j| data.u0.eval(j as f64 * h)).collect();
    let mut times = vec![0.0];
    let mut values = vec![full(&u, 0.0)];

    let startup = Stepper::new(&rows, 0.5 * dt, 1.0)?;
    let main = Stepper::new(&rows, dt, grid.theta)?;
    let (mut r_old, mut r_new, mut mu) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut t = 0.0;
    let mut advance = |st: &Stepper, u: &mut Vec<f64>, t0: f64| {
        let t1 = t0 + st.k;
        rhs_at(t0, &mut r_old);
        rhs_at(t1, &mut r_new);
        op.apply(&rows, u, &mut mu);
        for i in 0..n {
            u[i] += (1.0 - st.theta) * st.k * mu[i]
                + st.k * (st.theta * r_new[i] + (1.0 - st.theta) * r_old[i]);
        }
        st.lu.solve(u);
        t1
    };

    let lead = (STARTUP_HALF_STEPS / 2).min(steps);
    for step in 1..=steps {
        let t0 = t;
        t = if step <= lead {
            let mid = advance(&startup, &mut u, t0);
            advance(&startup, &mut u, mid)
        } else {
            advance(&main, &mut u, t0)
        };
        t = if step == steps { grid.t_end } else { t };
        if step % stride == 0 || step == steps {
            times.push(t);
            values.push(full(&u, t));
        }
    }
    Ok(FdField { dx: h, times, values, warnings })
}

/// Per-point discrepancy between a transform solution and the FD field.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRow {
    pub x: f64,
    pub t: f64,
    pub utm: f64,
    pub fd: f64,
    pub abs_err: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
    pub l2_abs: f64,
    pub linf_abs: f64,
    /// `max |utm - fd| / max |fd|` over the compared points.
    pub linf_rel: f64,
    pub warnings: Vec<String>,
}

/// Compare the value column (order `(0,0)`) of `utm` against `fd` at every point.
pub fn compare(utm: &SolutionField, fd: &FdField) -> ErrorTable {
    let k = utm.deriv_orders.iter().position(|o| o.n == 0 && o.m == 0);
    let mut warnings = Vec::new();
    let mut flagged = false;
    let rows: Vec<ErrorRow> = match k {
        None => {
            warnings.push("solution field carries no value column".into());
            Vec::new()
        }
        Some(k) => utm
            .points
            .iter()
            .enumerate()
            .map(|(p, &(x, t))| {
                let u = utm.value(p, k).re;
                let (f, interp) = fd.sample(x, t);
                flagged |= interp;
                let abs_err = (u - f).abs();
                let rel_err = if f != 0.0 { abs_err / f.abs() } else { abs_err };
                ErrorRow { x, t, utm: u, fd: f, abs_err, rel_err }
            })
            .collect(),
    };
    if flagged {
        warnings.push("InterpolationFlagged: some points are off the FD grid".into());
    }
    let linf_abs = rows.iter().map(|r| r.abs_err).fold(0.0, f64::max);
    let scale = rows.iter().map(|r| r.fd.abs()).fold(0.0, f64::max);
    let l2_abs = (rows.iter().map(|r| r.abs_err * r.abs_err).sum::<f64>() / rows.len().max(1) as f64).sqrt();
    ErrorTable {
        linf_rel: if scale > 0.0 { linf_abs / scale } else { linf_abs },
        rows,
        l2_abs,
        linf_abs,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::{Forcing, HalfLineFunction, HalfLineTerm, TimeSignal};

    fn poly_exp_sum(coefs: &[(f64, u32)]) -> HalfLineFunction {
        HalfLineFunction::new(coefs.iter().map(|&(coef, power)| HalfLineTerm::PolyExp { coef, power, rate: 1.0 }).collect())
            .unwrap()
    }

    /// `U = e^{-t} x² e^{-x}` with the forcing that makes it exact.
    fn manufactured(alpha: f64, beta: f64) -> ProblemData {
        let d = Dispersion::new(Family::ChPlus, alpha, beta).unwrap();
        // f = e^{-t}[-x² - a(2 - 4x + x²) + β(12 - 8x + x²)] e^{-x}
        let a = d.a2();
        let f = poly_exp_sum(&[(-2.0 * a + 12.0 * beta, 0), (4.0 * a - 8.0 * beta, 1), (-1.0 - a + beta, 2)]);
        ProblemData::new(d, HalfLineFunction::poly_exp(1.0, 2, 1.0).unwrap(), TimeSignal::zero(), TimeSignal::zero())
            .with_forcing(Forcing::new(vec![(f, TimeSignal::exp(1.0, -1.0))]))
    }

    fn max_error(data: &ProblemData, nx: usize) -> f64 {
        let grid = FdGrid::new(16.0, nx, 16.0 / nx as f64 / 8.0, 0.5);
        let field = fd_solve(data, &grid).unwrap();
        let last = field.values.last().unwrap();
        last.iter()
            .enumerate()
            .map(|(j, v)| {
                let x = j as f64 * field.dx;
                (v - (-0.5f64).exp() * x * x * (-x).exp()).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn zero_data_gives_zero_field() {
        let data = ProblemData::new(Dispersion::biharmonic(), HalfLineFunction::zero(), TimeSignal::zero(), TimeSignal::zero());
        let f = fd_solve(&data, &FdGrid::new(8.0, 128, 0.01, 0.2)).unwrap();
        assert!(f.values.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn manufactured_solution_converges_at_second_order() {
        let data = manufactured(1.0, 1.0);
        let (e1, e2) = (max_error(&data, 256), max_error(&data, 512));
        let order = (e1 / e2).log2();
        assert!((1.8..=2.2).contains(&order), "observed order {order} ({e1:.3e} -> {e2:.3e})");
    }

    #[test]
    fn zero_boundary_energy_is_nonincreasing() {
        let d = Dispersion::new(Family::ChPlus, 1.0, 1.0).unwrap();
        let data = ProblemData::new(d, HalfLineFunction::poly_exp(1.0, 2, 1.0).unwrap(), TimeSignal::zero(), TimeSignal::zero());
        let f = fd_solve(&data, &FdGrid::new(30.0, 960, 0.005, 2.0)).unwrap();
        let e = f.l2_squared();
        assert!(e.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), "{e:?}");
        assert!(e.last().unwrap() < &(0.5 * e[0]));
    }

    #[test]
    fn backward_diffusion_family_is_rejected() {
        let d = Dispersion::new(Family::ChMinus, 1.0, 1.0).unwrap();
        let data = ProblemData::new(d, HalfLineFunction::zero(), TimeSignal::zero(), TimeSignal::zero());
        assert!(matches!(fd_solve(&data, &FdGrid::new(8.0, 128, 0.01, 0.1)), Err(UtmError::Domain(_))));
    }

    #[test]
    fn small_grids_are_rejected() {
        let data = ProblemData::new(Dispersion::biharmonic(), HalfLineFunction::zero(), TimeSignal::zero(), TimeSignal::zero());
        assert!(fd_solve(&data, &FdGrid::new(8.0, 32, 0.01, 0.1)).is_err());
    }

    #[test]
    fn zero_pivot_is_reported() {
        let rows = vec![[0.0, 0.0, 1.0, 1.0, 0.0], [0.0, 1.0, 1.0, 0.0, 0.0]];
        assert_eq!(Banded::factor(rows).err(), Some(UtmError::SingularSystem { row: 1 }));
    }

    #[test]
    fn banded_solve_matches_dense_product() {
        let n = 7;
        let rows: Vec<[f64; 5]> = (0..n).map(|i| [0.3, -1.1, 6.0 + i as f64, 0.7, -0.2]).collect();
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            for c in 0..5 {
                let j = i as isize + c as isize - 2;
                if (0..n as isize).contains(&j) {
                    b[i] += rows[i][c] * x[j as usize];
                }
            }
        }
        Banded::factor(rows).unwrap().solve(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn identical_inputs_compare_to_zero() {
        let data = manufactured(1.0, 1.0);
        let fd = fd_solve(&data, &FdGrid::new(16.0, 256, 0.01, 0.5)).unwrap();
        let pts: Vec<(f64, f64)> = (1..5).map(|j| (j as f64, 0.5)).collect();
        let values = pts.iter().map(|&(x, t)| num_complex::Complex64::new(fd.sample(x, t).0, 0.0)).collect();
        let utm = SolutionField {
            points: pts,
            deriv_orders: vec![crate::solver::DerivOrder::VALUE],
            values,
            error_ests: vec![0.0; 4],
            warnings: Vec::new(),
        };
        let table = compare(&utm, &fd);
        assert_eq!(table.linf_abs, 0.0);
        assert!(table.warnings.is_empty());
    }

    #[test]
    fn off_grid_points_are_flagged() {
        let data = manufactured(1.0, 1.0);
        let fd = fd_solve(&data, &FdGrid::new(16.0, 256, 0.01, 0.5)).unwrap();
        let utm = SolutionField {
            points: vec![(1.01, 0.333)],
            deriv_orders: vec![crate::solver::DerivOrder::VALUE],
            values: vec![num_complex::Complex64::new(0.0, 0.0)],
            error_ests: vec![0.0],
            warnings: Vec::new(),
        };
        assert!(compare(&utm, &fd).warnings.iter().any(|w| w.contains("InterpolationFlagged")));
    }
}
