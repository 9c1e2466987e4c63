//! Pure-Rust fallback backend. Exercises the backend-agnosticism contract on
//! small models; does not expose dual values.

use super::{
    ModelHandle, ObjSense, RowSense, SolveResult, SolveStatus, SolverBackend, SolverError, VarKind,
};
use microlp::{ComparisonOp, OptimizationDirection, Problem};

pub struct MicrolpBackend;

impl SolverBackend for MicrolpBackend {
    fn id(&self) -> &'static str {
        "microlp"
    }

    fn supports_duals(&self) -> bool {
        false
    }

    fn solve(&self, model: &ModelHandle) -> Result<SolveResult, SolverError> {
        let direction = match model.sense {
            ObjSense::Minimize => OptimizationDirection::Minimize,
            ObjSense::Maximize => OptimizationDirection::Maximize,
        };
        let mut pb = Problem::new(direction);
        if let Some(tl) = model.options.time_limit {
            pb.set_time_limit(std::time::Duration::from_secs_f64(tl));
        }
        let vars: Vec<microlp::Variable> = model
            .vars
            .iter()
            .map(|v| match v.kind {
                VarKind::Continuous => pb.add_var(v.obj, (v.lb, v.ub)),
                VarKind::Binary => pb.add_integer_var(v.obj, (v.lb as i32, v.ub as i32)),
            })
            .collect();
        for c in &model.cons {
            let expr: Vec<(microlp::Variable, f64)> =
                c.terms.iter().map(|&(i, w)| (vars[i], w)).collect();
            let op = match c.sense {
                RowSense::Le => ComparisonOp::Le,
                RowSense::Ge => ComparisonOp::Ge,
                RowSense::Eq => ComparisonOp::Eq,
            };
            pb.add_constraint(expr.as_slice(), op, c.rhs);
        }
        match pb.solve() {
            Ok(outcome) => {
                let optimal = outcome.is_optimal();
                let solution = match outcome.into_solution() {
                    Ok(s) => s,
                    Err(_) => {
                        return Ok(SolveResult {
                            status: SolveStatus::Timeout,
                            objective: None,
                            primal: Vec::new(),
                            row_duals: None,
                            col_duals: None,
                            mip_gap: None,
                        })
                    }
                };
                let primal: Vec<f64> = vars.iter().map(|&v| solution.var_value(v)).collect();
                Ok(SolveResult {
                    status: if optimal {
                        SolveStatus::Optimal
                    } else {
                        SolveStatus::FeasibleGap
                    },
                    objective: Some(model.objective_of(&primal)),
                    primal,
                    row_duals: None,
                    col_duals: None,
                    mip_gap: None,
                })
            }
            Err(microlp::Error::Infeasible) => Ok(SolveResult {
                status: SolveStatus::Infeasible,
                objective: None,
                primal: Vec::new(),
                row_duals: None,
                col_duals: None,
                mip_gap: None,
            }),
            Err(microlp::Error::Unbounded) => Ok(SolveResult {
                status: SolveStatus::Unbounded,
                objective: None,
                primal: Vec::new(),
                row_duals: None,
                col_duals: None,
                mip_gap: None,
            }),
            Err(e) => Err(SolverError::Backend(e.to_string())),
        }
    }
}
