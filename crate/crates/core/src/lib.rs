//! Unified-transform solvers for fourth-order evolution equations on the half-line.

pub mod contours;
pub mod dispersion;
pub mod error;
pub mod fd;
pub mod quadrature;
pub mod solver;
pub mod transforms;

pub use contours::{ContourPath, PathSegment, SegmentKind};
pub use dispersion::{BranchValue, Dispersion, Family, Region, SideHint};
pub use error::{Result, UtmError};
pub use quadrature::{OscHint, QuadratureReport};
pub use solver::{solve, DerivOrder, EvalRequest, Representation, SolutionField, SolverOptions};
pub use transforms::{Forcing, HalfLineFunction, ProblemData, TimeSignal};
pub use fd::{compare, fd_solve, ErrorTable, FdField, FdGrid};
