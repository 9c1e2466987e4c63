//! Frequency-constrained unit commitment with HVDC reserve sharing.
//!
//! [`build_ucp`] assembles the MILP for one scenario mode, [`solve_ucp`]
//! runs a backend and maps the primal values back to named decisions,
//! [`recover_prices`] re-solves the fixed-binary LP for nodal prices, and
//! [`verify_solution`] replays every analytic security constraint and a
//! sample of time-domain simulations against the solution.

mod build;
mod prices;
mod solution;
mod verify;

pub use build::{build_ucp, BuiltModel, McCormickRanges};
pub use prices::{recover_prices, AreaMarketRow, MarketReport};
pub use solution::{solve_ucp, InlineSystem, SolutionFile, UcpSolution};
pub use verify::{verify_solution, HardViolation, SampleCheck, VerificationReport};

use crate::nadir::NadirHyperplane;
use crate::solver::SolverOptions;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Relative tolerance accepted between the bilinear surrogate product
/// R*S and 1 at an incumbent, with the default segment count.
pub const MCCORMICK_TOLERANCE: f64 = 0.05;
/// Big-M constant for binary-continuous products; valid because R >= 1
/// forces S <= 1.
pub const BIG_M: f64 = 10.0;

#[derive(Debug, thiserror::Error)]
pub enum UcpError {
    #[error("scenario configuration: {0}")]
    Config(String),
    #[error("missing hyperplane for area `{0}`")]
    MissingHyperplane(String),
    #[error("hyperplane for area `{area}` is unusable: {detail}")]
    BadHyperplane { area: String, detail: String },
    #[error(
        "structural infeasibility in area `{area}`: {check} requires {required:.4} but the fleet caps at {available:.4}"
    )]
    StructuralInfeasibility {
        area: String,
        check: &'static str,
        required: f64,
        available: f64,
    },
    #[error("solver: {0}")]
    Solver(#[from] crate::solver::SolverError),
    #[error("problem is infeasible{}", diagnose_hint(.hint))]
    Infeasible { hint: String },
    #[error("solver hit its limit without a feasible point")]
    Timeout,
    #[error("solution integrity: {0}")]
    Integrity(String),
    #[error("metrics: {0}")]
    Metrics(#[from] crate::metrics::MetricsError),
    #[error("dynamics: {0}")]
    Dynamics(#[from] crate::dynamics::DynamicsError),
}

fn diagnose_hint(hint: &str) -> String {
    if hint.is_empty() {
        String::new()
    } else {
        format!(" ({hint})")
    }
}

/// The four scenario modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// No frequency constraints; a per-area minimum reserve requirement
    /// equal to the dimensioning incident replaces them.
    NoLim,
    /// Frequency constraints active, HVDC links do not take part.
    NoSpc,
    /// HVDC links may support one side of each pair per day.
    Unilateral,
    /// HVDC links react to the frequency difference and support both sides.
    Bilateral,
}

impl Mode {
    pub fn uses_frequency_constraints(self) -> bool {
        !matches!(self, Mode::NoLim)
    }

    pub fn uses_spc(self) -> bool {
        matches!(self, Mode::Unilateral | Mode::Bilateral)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::NoLim => "no_lim",
            Mode::NoSpc => "no_spc",
            Mode::Unilateral => "unilateral",
            Mode::Bilateral => "bilateral",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "no_lim" | "no-lim" | "nolim" => Ok(Mode::NoLim),
            "no_spc" | "no-spc" | "nospc" => Ok(Mode::NoSpc),
            "unilateral" => Ok(Mode::Unilateral),
            "bilateral" => Ok(Mode::Bilateral),
            other => Err(format!(
                "unknown mode `{other}` (expected no_lim, no_spc, unilateral or bilateral)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReserveGranularity {
    /// Participation decisions are constant within each day.
    Daily,
    Hourly,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub granularity: ReserveGranularity,
    /// Periods an LCC link's flow direction is held constant.
    pub lcc_block_len: usize,
    /// Allow converter frequency support beyond the nominal rating, up to
    /// each link's overload factor.
    pub overload_enabled: bool,
    /// Certified nadir hyperplanes keyed by area id; required whenever
    /// frequency constraints are active.
    pub planes: BTreeMap<String, NadirHyperplane>,
    /// Optional horizon truncation (defaults to the series length).
    pub horizon: Option<usize>,
    /// Number of segments per axis of the piecewise McCormick relaxation.
    pub mccormick_segments: usize,
    pub solver: SolverOptions,
}

impl ScenarioConfig {
    pub fn new(mode: Mode) -> Self {
        ScenarioConfig {
            mode,
            granularity: ReserveGranularity::Daily,
            lcc_block_len: 24,
            overload_enabled: false,
            planes: BTreeMap::new(),
            horizon: None,
            mccormick_segments: 4,
            solver: SolverOptions::default(),
        }
    }

    pub fn with_plane(mut self, plane: NadirHyperplane) -> Self {
        self.planes.insert(plane.area.clone(), plane);
        self
    }
}
