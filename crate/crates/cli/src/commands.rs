use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use utmq_core::contours::{domega_boundary, dump_rows, gamma_biharmonic};
use utmq_core::solver::{
    global_relation_residual, half_value_check, nonuniqueness_demo, periodicity_analysis, standard_lambda_grid,
};
use utmq_core::{compare, fd_solve, solve, ContourPath, DerivOrder, EvalRequest, Family, SideHint};

use crate::config::{Command, Resolved};
use crate::CliError;

/// One pass/fail verdict in `report.json`.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass: value <= threshold, value, threshold, detail: detail.into() }
    }

    fn at_least(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass: value >= threshold, value, threshold, detail: detail.into() }
    }

    fn holds(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        let v = if pass { 1.0 } else { 0.0 };
        Self { name: name.into(), pass, value: v, threshold: 1.0, detail: detail.into() }
    }
}

/// Everything a command produces before it is written to disk.
#[derive(Debug)]
pub struct Output {
    pub csv: Csv,
    pub checks: Vec<Check>,
    pub results: Value,
    pub warnings: Vec<String>,
    /// Gnuplot `using` clauses, one curve each, with a title.
    pub curves: Vec<(String, String)>,
    pub axes: (&'static str, &'static str),
}

/// A CSV table with `.` decimals and LF line endings.
#[derive(Debug, Default)]
pub struct Csv {
    pub text: String,
}

impl Csv {
    fn new(header: &[&str]) -> Self {
        Self { text: format!("{}\n", header.join(",")) }
    }

    fn row(&mut self, cells: &[Cell]) {
        let line: Vec<String> = cells.iter().map(Cell::render).collect();
        let _ = writeln!(self.text, "{}", line.join(","));
    }
}

pub enum Cell<'a> {
    F(f64),
    U(u64),
    S(&'a str),
}

impl Cell<'_> {
    fn render(&self) -> String {
        match self {
            // Shortest round-trip form; never locale dependent.
            Cell::F(v) => format!("{v:e}"),
            Cell::U(v) => v.to_string(),
            Cell::S(s) => (*s).to_string(),
        }
    }
}

use Cell::{F, S, U};

pub fn run(cfg: &Resolved) -> Result<Output, CliError> {
    match cfg.command {
        Command::Solve => solve_cmd(cfg),
        Command::TraceCheck => trace_check(cfg),
        Command::CompareFd => compare_fd(cfg),
        Command::Periodicity => periodicity(cfg),
        Command::NonuniquenessDemo => nonuniqueness(cfg),
        Command::HalfValue => half_value(cfg),
        Command::ContourDump => contour_dump(cfg),
        Command::GlobalRelation => global_relation(cfg),
    }
}

fn curve(using: &str, title: &str) -> (String, String) {
    (using.to_string(), title.to_string())
}

fn solve_cmd(cfg: &Resolved) -> Result<Output, CliError> {
    let field = solve(&cfg.data, &cfg.request, &cfg.opts)?;
    let mut csv = Csv::new(&["x", "t", "n", "m", "re_value", "im_value", "abs_err_est"]);
    for (x, t, n, m, v, e) in field.rows() {
        csv.row(&[F(x), F(t), U(n.into()), U(m.into()), F(v.re), F(v.im), F(e)]);
    }
    let finite = field.values.iter().all(|v| v.re.is_finite() && v.im.is_finite());
    let max_err = field.error_ests.iter().copied().fold(0.0, f64::max);
    Ok(Output {
        csv,
        checks: vec![Check::holds("finite_values", finite, "every requested value is finite")],
        results: json!({ "values": field.values.len(), "max_abs_err_est": max_err }),
        warnings: field.warnings,
        curves: vec![curve("1:5", "Re U")],
        axes: ("x", "value"),
    })
}

fn decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn trace_check(cfg: &Resolved) -> Result<Output, CliError> {
    let eps = cfg.check.eps.clone().unwrap_or_else(|| vec![0.1, 0.03, 0.01]);
    if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0)) {
        return Err(CliError::Config("check.eps must hold positive values".into()));
    }
    let tb = cfg.check.t.unwrap_or(1.0);
    let x0 = cfg.check.x0.unwrap_or(1.0);
    let dx = DerivOrder::new(1, 0)?;
    let boundary = EvalRequest::new(eps.iter().map(|&e| (e, tb)).collect(), vec![DerivOrder::VALUE, dx]);
    let initial = EvalRequest::values(eps.iter().map(|&e| (x0, e)).collect());
    let bf = solve(&cfg.data, &boundary, &cfg.opts)?;
    let inf = solve(&cfg.data, &initial, &cfg.opts)?;

    let g0 = cfg.data.g0.value(tb).re;
    let g1 = cfg.data.g1.value(tb).re;
    let u0 = cfg.data.u0.eval(x0);
    let mut csv = Csv::new(&["quantity", "eps", "x", "t", "re_value", "im_value", "target", "abs_err"]);
    let mut series = |name: &str, target: f64, pick: &dyn Fn(usize) -> (f64, f64, Complex64)| -> Vec<f64> {
        eps.iter()
            .enumerate()
            .map(|(i, &e)| {
                let (x, t, v) = pick(i);
                let err = (v.re - target).abs();
                csv.row(&[S(name), F(e), F(x), F(t), F(v.re), F(v.im), F(target), F(err)]);
                err
            })
            .collect()
    };
    let eu = series("u_boundary", g0, &|i| (eps[i], tb, bf.value(i, 0)));
    let ex = series("ux_boundary", g1, &|i| (eps[i], tb, bf.value(i, 1)));
    let ei = series("u_initial", u0, &|i| (x0, eps[i], inf.value(i, 0)));

    let lim_b = 1e-3 * (1.0 + g0.abs());
    let lim_i = 1e-3 * (1.0 + u0.abs());
    let verdict = |name: &str, errs: &[f64], lim: f64| {
        let last = *errs.last().unwrap_or(&f64::NAN);
        let mono = decreasing(errs);
        Check {
            name: name.into(),
            pass: mono && last <= lim,
            value: last,
            threshold: lim,
            detail: format!("errors {errs:?}, decreasing: {mono}"),
        }
    };
    let mut warnings = bf.warnings;
    warnings.extend(inf.warnings);
    Ok(Output {
        csv,
        checks: vec![verdict("trace_u", &eu, lim_b), verdict("trace_ux", &ex, lim_b), verdict("trace_initial", &ei, lim_i)],
        results: json!({ "t_boundary": tb, "x_initial": x0, "g0": g0, "g1": g1, "u0": u0, "compatibility_order": cfg.data.compatibility_order() }),
        warnings,
        curves: vec![curve("2:8", "abs_err")],
        axes: ("eps", "abs error"),
    })
}

fn compare_fd(cfg: &Resolved) -> Result<Output, CliError> {
    let grid = cfg.fd_grid();
    let fd = fd_solve(&cfg.data, &grid)?;
    let req = EvalRequest::values(cfg.request.points.clone());
    let utm = solve(&cfg.data, &req, &cfg.opts)?;
    let table = compare(&utm, &fd);
    let mut csv = Csv::new(&["x", "t", "utm", "fd", "abs_err", "rel_err"]);
    for r in &table.rows {
        csv.row(&[F(r.x), F(r.t), F(r.utm), F(r.fd), F(r.abs_err), F(r.rel_err)]);
    }
    let limit = cfg.check.max_rel.unwrap_or(1e-3);
    let mut warnings = fd.warnings.clone();
    warnings.extend(utm.warnings);
    warnings.extend(table.warnings.iter().cloned());
    Ok(Output {
        csv,
        checks: vec![Check::at_most("fd_linf_rel", table.linf_rel, limit, "max |utm - fd| / max |fd|")],
        results: json!({
            "l2_abs": table.l2_abs,
            "linf_abs": table.linf_abs,
            "linf_rel": table.linf_rel,
            "fd_grid": { "length": grid.length, "nx": grid.nx, "dt": grid.dt, "t_end": grid.t_end, "theta": grid.theta },
        }),
        warnings,
        curves: vec![curve("1:3", "UTM"), curve("1:4", "FD")],
        axes: ("x", "U"),
    })
}

fn periodicity(cfg: &Resolved) -> Result<Output, CliError> {
    let period = cfg.period().ok_or_else(|| CliError::Config("no period".into()))?;
    let x0 = cfg.check.x0.unwrap_or(1.0);
    let grid = cfg
        .check
        .t_grid
        .clone()
        .unwrap_or_else(|| (0..12).map(|k| 8.0 * 8f64.powf(k as f64 / 11.0)).collect());
    let fit = periodicity_analysis(&cfg.data, x0, period, &grid, &cfg.opts)?;
    let mut csv = Csv::new(&["t", "re_diff", "im_diff"]);
    for (t, d) in &fit.samples {
        csv.row(&[F(*t), F(d.re), F(d.im)]);
    }
    let c1_rel = if fit.c1_laplace != 0.0 { ((fit.c1_fit - fit.c1_laplace) / fit.c1_laplace).abs() } else { f64::INFINITY };
    Ok(Output {
        csv,
        checks: vec![
            Check::at_most("decay_exponent", (fit.fitted_exponent + 0.5).abs(), 0.05, format!("fitted exponent {}", fit.fitted_exponent)),
            Check::at_most("c1_match", c1_rel, 0.05, format!("C1 fit {} vs Laplace {}", fit.c1_fit, fit.c1_laplace)),
        ],
        results: json!({
            "x0": x0,
            "period": period,
            "fitted_exponent": fit.fitted_exponent,
            "fit_residual": fit.fit_residual,
            "c1_fit": fit.c1_fit,
            "c2_fit": fit.c2_fit,
            "c1_laplace": fit.c1_laplace,
            "c2_laplace": fit.c2_laplace,
        }),
        warnings: Vec::new(),
        curves: vec![curve("1:(abs($2))", "|Re diff|")],
        axes: ("t", "U(x0,t+T) - U(x0,t)"),
    })
}

fn nonuniqueness(cfg: &Resolved) -> Result<Output, CliError> {
    let d = cfg.data.dispersion;
    let r = cfg.check.r.unwrap_or(1.5);
    let rep = nonuniqueness_demo(d.alpha, d.beta, r, &cfg.opts)?;
    let mut csv = Csv::new(&["kind", "x", "t", "abs_v"]);
    for (x, v) in &rep.boundary_sweep {
        csv.row(&[S("boundary"), F(*x), F(1.0), F(*v)]);
    }
    for (t, v) in &rep.initial_sweep {
        csv.row(&[S("initial"), F(1.0), F(*t), F(*v)]);
    }
    for ((x, t), v) in &rep.interior {
        csv.row(&[S("interior"), F(*x), F(*t), F(*v)]);
    }
    let min_ratio = cfg.check.min_ratio.unwrap_or(1e6);
    Ok(Output {
        csv,
        checks: vec![
            Check::at_least("ratio", rep.ratio, min_ratio, "interior_max / boundary_max"),
            Check::holds("boundary_sweep_decreasing", rep.boundary_decreasing, "|v(x,1)| as x -> 0"),
            Check::holds("initial_sweep_decreasing", rep.initial_decreasing, "|v(1,t)| as t -> 0"),
        ],
        results: json!({
            "alpha": rep.alpha,
            "beta": rep.beta,
            "r": rep.r,
            "boundary_max": rep.boundary_max,
            "interior_max": rep.interior_max,
            "ratio": rep.ratio,
            "extrapolated_v0": rep.extrapolated_boundary.0,
            "extrapolated_vx0": rep.extrapolated_boundary.1,
        }),
        warnings: Vec::new(),
        curves: vec![curve("2:4", "|v|")],
        axes: ("x", "|v|"),
    })
}

fn half_value(cfg: &Resolved) -> Result<Output, CliError> {
    let ts = cfg.check.t_list.clone().unwrap_or_else(|| vec![1.0]);
    let reps = half_value_check(&cfg.data, &ts)?;
    let mut csv = Csv::new(&["t", "g0", "re_value", "im_value", "re_ratio", "im_ratio", "radius"]);
    let mut checks = Vec::new();
    for r in &reps {
        let ratio = r.ratio.unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        csv.row(&[F(r.t), F(r.g0_t), F(r.value.re), F(r.value.im), F(ratio.re), F(ratio.im), F(r.radius)]);
        if r.ratio.is_some() {
            let dev = (ratio - 0.5).norm();
            checks.push(Check::at_most(&format!("half_value_t{}", r.t), dev, 0.01, format!("ratio {ratio}")));
        }
    }
    Ok(Output {
        csv,
        checks,
        results: json!({ "times": ts }),
        warnings: Vec::new(),
        curves: vec![curve("1:5", "Re ratio")],
        axes: ("t", "ratio"),
    })
}

fn cut_segments(family: Family, c: f64, r: f64) -> Vec<(Complex64, Complex64)> {
    let z = |re: f64, im: f64| Complex64::new(re, im);
    match family {
        Family::ChPlus => vec![(z(0.0, c), z(0.0, r)), (z(0.0, -c), z(0.0, -r))],
        Family::ChMinus => vec![(z(-c, 0.0), z(c, 0.0)), (z(0.0, -r), z(0.0, r))],
        Family::Biharmonic => vec![(z(0.0, 0.0), z(0.0, r)), (z(0.0, 0.0), z(0.0, -r))],
    }
}

fn contour_dump(cfg: &Resolved) -> Result<Output, CliError> {
    let d = cfg.data.dispersion;
    let r = cfg.check.truncation_r.unwrap_or(20.0);
    let per = cfg.check.per_segment.unwrap_or(50).max(1);
    let ray_len = cfg.check.ray_len.unwrap_or(r);
    let path = match d.family {
        Family::Biharmonic => {
            let (g1, g2) = gamma_biharmonic();
            ContourPath::concat("gamma", &[g1, g2])
        }
        _ => domega_boundary(&d, r)?,
    };
    let mut csv = Csv::new(&["kind", "segment", "s", "re_lambda", "im_lambda", "re_omega", "im_omega"]);
    let rows = dump_rows(&path, &d, per, ray_len);
    let mut worst_im = f64::NEG_INFINITY;
    let mut finite = true;
    let mut skipped = 0usize;
    for &(k, s, lam, om) in &rows {
        csv.row(&[S("path"), U(k as u64), F(s), F(lam.re), F(lam.im), F(om.re), F(om.im)]);
        finite &= lam.re.is_finite() && lam.im.is_finite() && om.re.is_finite() && om.im.is_finite();
        if d.family != Family::Biharmonic {
            let side = path.segments[k].side;
            let side = match side {
                SideHint::None if d.on_cut(lam) && lam.im == 0.0 => SideHint::FromUpperHalfPlane,
                SideHint::None if d.on_cut(lam) => SideHint::FromRightQuadrant,
                s => s,
            };
            // Where cuts meet (λ = 0 for ch_minus) no one-sided limit exists.
            match d.rho(lam, side) {
                Ok(rho) => worst_im = worst_im.max((Complex64::i() * rho.value).im),
                Err(_) => skipped += 1,
            }
        }
    }
    for (k, (a, b)) in cut_segments(d.family, d.kappa().sqrt(), r).into_iter().enumerate() {
        for j in 0..=per {
            let s = j as f64 / per as f64;
            let lam = a + (b - a) * s;
            let om = d.omega(lam);
            csv.row(&[S("cut"), U(k as u64), F(s * (b - a).norm()), F(lam.re), F(lam.im), F(om.re), F(om.im)]);
        }
    }
    let mut checks = vec![
        Check::holds("path_connected", path.is_connected(), format!("{} segments", path.segments.len())),
        Check::holds("finite_samples", finite, format!("{} samples", rows.len())),
    ];
    if d.family != Family::Biharmonic {
        checks.push(Check::at_most(
            "im_i_rho_nonpositive",
            worst_im,
            1e-10,
            format!("max Im(i rho) over path samples, {skipped} samples at cut junctions skipped"),
        ));
    }
    Ok(Output {
        csv,
        checks,
        results: json!({ "label": path.label, "segments": path.segments.len(), "truncation_r": r, "samples": rows.len() }),
        warnings: Vec::new(),
        curves: vec![curve("4:5", "lambda")],
        axes: ("Re lambda", "Im lambda"),
    })
}

fn global_relation(cfg: &Resolved) -> Result<Output, CliError> {
    let t = cfg.check.t.unwrap_or(0.5);
    let mut grid = standard_lambda_grid();
    grid.extend(cfg.extra_lambdas());
    let res = global_relation_residual(&cfg.data, t, &grid, &cfg.opts)?;
    let mut csv = Csv::new(&["re_lambda", "im_lambda", "residual"]);
    for (l, r) in grid.iter().zip(&res) {
        csv.row(&[F(l.re), F(l.im), F(*r)]);
    }
    let worst = res.iter().copied().fold(0.0, f64::max);
    let limit = cfg.check.max_residual.unwrap_or(1e-5);
    Ok(Output {
        csv,
        checks: vec![Check::at_most("global_relation", worst, limit, format!("max normalized residual at t = {t}"))],
        results: json!({ "t": t, "lambdas": grid.len(), "max_residual": worst }),
        warnings: Vec::new(),
        curves: vec![curve("1:3", "residual")],
        axes: ("Re lambda", "residual"),
    })
}
