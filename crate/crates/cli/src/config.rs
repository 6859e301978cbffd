//! Run configuration: a strict TOML file resolved against the preset registry.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use utmq_core::transforms::{half_line_preset, time_signal_preset, Params};
use utmq_core::{
    DerivOrder, Dispersion, EvalRequest, Family, FdGrid, Forcing, ProblemData, Representation, SolverOptions,
};

use crate::CliError;

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    TraceCheck,
    CompareFd,
    Periodicity,
    NonuniquenessDemo,
    HalfValue,
    ContourDump,
    GlobalRelation,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Solve => "solve",
            Self::TraceCheck => "trace-check",
            Self::CompareFd => "compare-fd",
            Self::Periodicity => "periodicity",
            Self::NonuniquenessDemo => "nonuniqueness-demo",
            Self::HalfValue => "half-value",
            Self::ContourDump => "contour-dump",
            Self::GlobalRelation => "global-relation",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub problem: ProblemSection,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub check: CheckSection,
    #[serde(default)]
    pub fd: FdSection,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    pub id: String,
    #[serde(default)]
    pub params: Params,
}

impl Preset {
    fn zero() -> Self {
        Self { id: "zero".into(), params: BTreeMap::new() }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingTerm {
    pub space: Preset,
    pub time: Preset,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub family: String,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default = "Preset::zero")]
    pub u0: Preset,
    #[serde(default = "Preset::zero")]
    pub g0: Preset,
    #[serde(default = "Preset::zero")]
    pub g1: Preset,
    #[serde(default)]
    pub forcing: Vec<ForcingTerm>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPoints {
    pub count: usize,
    pub x: [f64; 2],
    pub t: [f64; 2],
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    /// Grid axes; every `x` is paired with every `t`.
    #[serde(default)]
    pub x: Vec<f64>,
    #[serde(default)]
    pub t: Vec<f64>,
    /// Extra explicit `[x, t]` pairs.
    #[serde(default)]
    pub points: Vec<[f64; 2]>,
    pub random: Option<RandomPoints>,
    /// `[n, m]` pairs; defaults to the value alone.
    #[serde(default)]
    pub orders: Vec<[u32; 2]>,
    pub representation: Option<String>,
    pub horizon: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    pub eps: Option<Vec<f64>>,
    pub x0: Option<f64>,
    pub t: Option<f64>,
    pub period: Option<f64>,
    pub t_grid: Option<Vec<f64>>,
    pub t_list: Option<Vec<f64>>,
    pub r: Option<f64>,
    #[serde(default)]
    pub lambdas: Vec<[f64; 2]>,
    pub max_residual: Option<f64>,
    pub max_rel: Option<f64>,
    pub min_ratio: Option<f64>,
    pub truncation_r: Option<f64>,
    pub per_segment: Option<usize>,
    pub ray_len: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdSection {
    pub length: Option<f64>,
    pub nx: Option<usize>,
    pub dt: Option<f64>,
    pub theta: Option<f64>,
}

/// Everything a command needs, validated up front.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub command: Command,
    pub data: ProblemData,
    pub request: EvalRequest,
    pub opts: SolverOptions,
    pub check: CheckSection,
    pub fd: FdSection,
    pub out: PathBuf,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(&self, tol_override: Option<f64>, out_override: Option<PathBuf>) -> Result<Resolved, CliError> {
        let p = &self.problem;
        let family = Family::parse(&p.family).ok_or_else(|| bad(format!("unknown family '{}'", p.family)))?;
        let dispersion = match family {
            Family::Biharmonic if p.alpha != 0.0 || p.beta != 1.0 => {
                return Err(bad("the biharmonic family takes alpha = 0 and beta = 1"));
            }
            Family::Biharmonic => Dispersion::biharmonic(),
            f => Dispersion::new(f, p.alpha, p.beta).map_err(|e| bad(e.to_string()))?,
        };
        let space = |s: &Preset| half_line_preset(&s.id, &s.params).map_err(|e| bad(e.to_string()));
        let time = |s: &Preset| time_signal_preset(&s.id, &s.params).map_err(|e| bad(e.to_string()));
        let mut data = ProblemData::new(dispersion, space(&p.u0)?, time(&p.g0)?, time(&p.g1)?);
        if !p.forcing.is_empty() {
            let terms = p.forcing.iter().map(|f| Ok((space(&f.space)?, time(&f.time)?))).collect::<Result<_, CliError>>()?;
            data = data.with_forcing(Forcing::new(terms));
        }

        let tol = tol_override.or(self.tol).unwrap_or(utmq_core::solver::DEFAULT_SOLVER_TOL);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(bad(format!("tol must be positive, got {tol}")));
        }
        let representation = match self.eval.representation.as_deref() {
            None | Some("auto") => Representation::Auto,
            Some("boundary") => Representation::Boundary,
            Some(other) => return Err(bad(format!("unknown representation '{other}'"))),
        };
        let opts = SolverOptions { tol, representation };

        let request = self.request()?;
        let out = out_override.or_else(|| self.out.clone()).unwrap_or_else(|| PathBuf::from("utmq-out"));
        let resolved = Resolved { command: self.command, data, request, opts, check: self.check.clone(), fd: self.fd.clone(), out };
        resolved.validate()?;
        Ok(resolved)
    }

    fn request(&self) -> Result<EvalRequest, CliError> {
        let e = &self.eval;
        let mut points: Vec<(f64, f64)> = e.t.iter().flat_map(|&t| e.x.iter().map(move |&x| (x, t))).collect();
        points.extend(e.points.iter().map(|p| (p[0], p[1])));
        if let Some(r) = &e.random {
            if !(r.x[0] < r.x[1] && r.t[0] < r.t[1]) {
                return Err(bad("random ranges must be increasing"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            points.extend((0..r.count).map(|_| (rng.gen_range(r.x[0]..r.x[1]), rng.gen_range(r.t[0]..r.t[1]))));
        }
        if let Some(&(x, t)) = points.iter().find(|&&(x, t)| !(x > 0.0 && t > 0.0 && x.is_finite() && t.is_finite())) {
            return Err(bad(format!("evaluation points need x > 0 and t > 0, got ({x}, {t})")));
        }
        let orders = if e.orders.is_empty() {
            vec![DerivOrder::VALUE]
        } else {
            e.orders.iter().map(|o| DerivOrder::new(o[0], o[1]).map_err(|err| bad(err.to_string()))).collect::<Result<_, _>>()?
        };
        let mut req = EvalRequest::new(points, orders);
        if let Some(h) = e.horizon {
            if req.points.iter().any(|p| p.1 >= h) {
                return Err(bad(format!("horizon {h} must exceed every evaluation time")));
            }
            req = req.with_horizon(h);
        }
        Ok(req)
    }
}

impl Resolved {
    /// Command-specific preconditions that can be decided without numerics.
    fn validate(&self) -> Result<(), CliError> {
        let family = self.data.dispersion.family;
        let needs_points = matches!(self.command, Command::Solve | Command::CompareFd);
        if needs_points && self.request.points.is_empty() {
            return Err(bad(format!("command '{}' needs evaluation points in [eval]", self.command.name())));
        }
        match self.command {
            Command::HalfValue if family != Family::Biharmonic => Err(bad("half-value needs the biharmonic family")),
            Command::NonuniquenessDemo | Command::Periodicity if family != Family::ChPlus => {
                Err(bad(format!("{} needs the ch_plus family", self.command.name())))
            }
            Command::CompareFd if family == Family::ChMinus => Err(bad("compare-fd supports biharmonic and ch_plus")),
            Command::Periodicity if self.period().is_none() => {
                Err(bad("periodicity needs check.period or a periodic g0 preset"))
            }
            _ => Ok(()),
        }
    }

    pub fn period(&self) -> Option<f64> {
        self.check.period.or_else(|| self.data.g0.period_hint())
    }

    pub fn extra_lambdas(&self) -> Vec<Complex64> {
        self.check.lambdas.iter().map(|l| Complex64::new(l[0], l[1])).collect()
    }

    pub fn fd_grid(&self) -> FdGrid {
        let t_end = self.request.points.iter().map(|p| p.1).fold(0.0, f64::max);
        let mut g = FdGrid::new(
            self.fd.length.unwrap_or(40.0),
            self.fd.nx.unwrap_or(8192),
            self.fd.dt.unwrap_or(1e-3),
            t_end,
        );
        if let Some(theta) = self.fd.theta {
            g.theta = theta;
        }
        g
    }
}
