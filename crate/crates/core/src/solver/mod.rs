//! Minimal model-builder abstraction over external LP/MILP solvers.
//!
//! A [`ModelHandle`] is a plain data description of the problem: variables
//! with bounds and objective coefficients, linear constraints, a sense and
//! solver options. Backends translate it and report a [`SolveResult`] with
//! primal values and, for continuous models, row duals. The backend is
//! chosen by a configuration key (`highs` or `microlp`), never by code
//! changes; the `HVDC_UC_BACKEND` environment variable overrides the
//! default.

mod highs_backend;
mod lp_format;
mod microlp_backend;

pub use highs_backend::HighsBackend;
pub use lp_format::{read_lp, write_lp, LpParseError};
pub use microlp_backend::MicrolpBackend;

use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("unknown backend `{0}` (expected `highs` or `microlp`)")]
    UnknownBackend(String),
    #[error("backend failure: {0}")]
    Backend(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("incumbent is missing a value for binary `{0}`")]
    MissingIncumbent(String),
    #[error("backend `{0}` does not provide dual values")]
    DualsUnavailable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lb: f64,
    pub ub: f64,
    pub obj: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ObjSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SolverOptions {
    /// Wall-clock limit in seconds.
    pub time_limit: Option<f64>,
    /// Relative MIP gap target.
    pub mip_gap: Option<f64>,
    pub threads: Option<u32>,
    /// Single thread, fixed seed: bit-reproducible solves for golden tests.
    pub deterministic: bool,
    pub seed: Option<i32>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            time_limit: None,
            mip_gap: Some(1e-4),
            threads: None,
            deterministic: false,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Default, serde::Serialize, serde::Deserialize)]
pub struct ModelHandle {
    pub name: String,
    pub sense: ObjSense,
    pub vars: Vec<Variable>,
    pub cons: Vec<Constraint>,
    pub options: SolverOptions,
    /// Optional feasible starting point (e.g. a previous incumbent).
    pub initial: Option<Vec<f64>>,
}

impl Default for ObjSense {
    fn default() -> Self {
        ObjSense::Minimize
    }
}

impl ModelHandle {
    pub fn new(name: impl Into<String>) -> Self {
        ModelHandle {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lb: f64,
        ub: f64,
        obj: f64,
    ) -> usize {
        debug_assert!(
            kind != VarKind::Binary || (lb >= 0.0 && ub <= 1.0),
            "binary variables live in [0, 1]"
        );
        self.vars.push(Variable {
            name: name.into(),
            kind,
            lb,
            ub,
            obj,
        });
        self.vars.len() - 1
    }

    pub fn add_con(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(usize, f64)>,
        sense: RowSense,
        rhs: f64,
    ) -> usize {
        debug_assert!(terms.iter().all(|&(v, _)| v < self.vars.len()));
        self.cons.push(Constraint {
            name: name.into(),
            terms,
            sense,
            rhs,
        });
        self.cons.len() - 1
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn has_integers(&self) -> bool {
        self.vars.iter().any(|v| v.kind == VarKind::Binary)
    }

    /// Objective value of a primal assignment.
    pub fn objective_of(&self, primal: &[f64]) -> f64 {
        self.vars
            .iter()
            .zip(primal)
            .map(|(v, &x)| v.obj * x)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SolveStatus {
    Optimal,
    /// Feasible incumbent returned before proving optimality (gap or limit).
    FeasibleGap,
    Infeasible,
    Unbounded,
    /// Limit reached without any feasible point.
    Timeout,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective: Option<f64>,
    /// Primal values indexed like `ModelHandle::vars`; empty when no
    /// feasible point was found.
    pub primal: Vec<f64>,
    /// Row duals (by constraint index); present only for continuous models.
    pub row_duals: Option<Vec<f64>>,
    /// Reduced costs; present only for continuous models.
    pub col_duals: Option<Vec<f64>>,
    pub mip_gap: Option<f64>,
}

impl SolveResult {
    pub fn value(&self, model: &ModelHandle, name: &str) -> Option<f64> {
        model.var_index(name).and_then(|i| self.primal.get(i)).copied()
    }

    /// Named primal map, for serialization.
    pub fn primal_map(&self, model: &ModelHandle) -> BTreeMap<String, f64> {
        model
            .vars
            .iter()
            .zip(&self.primal)
            .map(|(v, &x)| (v.name.clone(), x))
            .collect()
    }
}

pub trait SolverBackend: Send + Sync {
    fn id(&self) -> &'static str;
    fn supports_duals(&self) -> bool;
    fn solve(&self, model: &ModelHandle) -> Result<SolveResult, SolverError>;
}

/// Backend registry keyed by configuration string. Falls back to the
/// `HVDC_UC_BACKEND` environment variable, then to HiGHS.
pub fn backend_from_key(key: Option<&str>) -> Result<Box<dyn SolverBackend>, SolverError> {
    let from_env = std::env::var("HVDC_UC_BACKEND").ok();
    let key = key
        .map(str::to_string)
        .or(from_env)
        .unwrap_or_else(|| "highs".to_string());
    match key.as_str() {
        "highs" => Ok(Box::new(HighsBackend)),
        "microlp" => Ok(Box::new(MicrolpBackend)),
        other => Err(SolverError::UnknownBackend(other.to_string())),
    }
}

/// Maps a primal solution of `source` onto the variable order of `target`
/// by name, filling variables absent from the source with zero. Used to
/// warm-start a richer model (e.g. an SPC mode) from a leaner incumbent.
pub fn map_initial(target: &ModelHandle, source: &ModelHandle, source_primal: &[f64]) -> Vec<f64> {
    let by_name: BTreeMap<&str, f64> = source
        .vars
        .iter()
        .zip(source_primal)
        .map(|(v, &x)| (v.name.as_str(), x))
        .collect();
    target
        .vars
        .iter()
        .map(|v| by_name.get(v.name.as_str()).copied().unwrap_or(0.0))
        .collect()
}

/// Clamps every binary to its incumbent value and relaxes it to continuous:
/// the fixed-binary LP whose duals price the original problem.
pub fn fix_binaries_and_relax(
    model: &ModelHandle,
    incumbent: &[f64],
) -> Result<ModelHandle, SolverError> {
    if incumbent.len() != model.vars.len() {
        return Err(SolverError::Model(format!(
            "incumbent has {} values for {} variables",
            incumbent.len(),
            model.vars.len()
        )));
    }
    let mut relaxed = model.clone();
    relaxed.name = format!("{}.fixed", model.name);
    relaxed.initial = None;
    for (i, v) in relaxed.vars.iter_mut().enumerate() {
        if v.kind == VarKind::Binary {
            let x = incumbent[i];
            if !x.is_finite() {
                return Err(SolverError::MissingIncumbent(v.name.clone()));
            }
            let fixed = if x >= 0.5 { 1.0 } else { 0.0 };
            v.kind = VarKind::Continuous;
            v.lb = fixed;
            v.ub = fixed;
        }
    }
    Ok(relaxed)
}
