//! HiGHS backend: the default for production solves. Handles LPs and MILPs,
//! reports duals on continuous models.

use super::{
    ModelHandle, ObjSense, RowSense, SolveResult, SolveStatus, SolverBackend, SolverError, VarKind,
};
use highs::{HighsModelStatus, RowProblem, Sense};

pub struct HighsBackend;

impl SolverBackend for HighsBackend {
    fn id(&self) -> &'static str {
        "highs"
    }

    fn supports_duals(&self) -> bool {
        true
    }

    fn solve(&self, model: &ModelHandle) -> Result<SolveResult, SolverError> {
        let mut pb = RowProblem::default();
        let mut cols = Vec::with_capacity(model.vars.len());
        for v in &model.vars {
            let col = match v.kind {
                VarKind::Continuous => pb.add_column(v.obj, v.lb..=v.ub),
                VarKind::Binary => pb.add_integer_column(v.obj, v.lb..=v.ub),
            };
            cols.push(col);
        }
        for c in &model.cons {
            let terms: Vec<(highs::Col, f64)> =
                c.terms.iter().map(|&(i, w)| (cols[i], w)).collect();
            match c.sense {
                RowSense::Le => pb.add_row(..=c.rhs, &terms),
                RowSense::Ge => pb.add_row(c.rhs.., &terms),
                RowSense::Eq => pb.add_row(c.rhs..=c.rhs, &terms),
            };
        }
        let sense = match model.sense {
            ObjSense::Minimize => Sense::Minimise,
            ObjSense::Maximize => Sense::Maximise,
        };
        let mut m = pb
            .try_optimise(sense)
            .map_err(|s| SolverError::Backend(format!("HiGHS rejected the model: {s:?}")))?;
        m.make_quiet();
        let o = &model.options;
        if let Some(tl) = o.time_limit {
            m.set_option("time_limit", tl);
        }
        if let Some(gap) = o.mip_gap {
            m.set_option("mip_rel_gap", gap);
        }
        if o.deterministic {
            m.set_option("threads", 1);
            m.set_option("random_seed", o.seed.unwrap_or(0));
        } else if let Some(t) = o.threads {
            m.set_option("threads", t as i32);
        }
        if let Some(start) = &model.initial {
            if start.len() == model.vars.len() {
                let zeros_rows = vec![0.0; model.cons.len()];
                // row values are recomputed by HiGHS; duals omitted
                let _ = m.try_set_solution(Some(start), Some(&zeros_rows), None, None);
            }
        }

        let is_mip = model.has_integers();
        let solved = m
            .try_solve()
            .map_err(|s| SolverError::Backend(format!("HiGHS solve failed: {s:?}")))?;
        let status = solved.status();
        let gap = if is_mip {
            let g = solved.mip_gap();
            if g.is_finite() {
                Some(g)
            } else {
                None
            }
        } else {
            None
        };

        let map_with_solution = |status: HighsModelStatus| -> SolveStatus {
            match status {
                HighsModelStatus::Optimal => SolveStatus::Optimal,
                _ => SolveStatus::FeasibleGap,
            }
        };
        match status {
            HighsModelStatus::Optimal
            | HighsModelStatus::ReachedTimeLimit
            | HighsModelStatus::ReachedIterationLimit
            | HighsModelStatus::ReachedInterrupt => {
                let solution = solved.get_solution();
                let have_primal = !solution.columns().is_empty()
                    && solution.columns().iter().all(|v| v.is_finite());
                if !have_primal {
                    return Ok(SolveResult {
                        status: SolveStatus::Timeout,
                        objective: None,
                        primal: Vec::new(),
                        row_duals: None,
                        col_duals: None,
                        mip_gap: gap,
                    });
                }
                let primal = solution.columns().to_vec();
                let objective = Some(model.objective_of(&primal));
                let (row_duals, col_duals) = if is_mip {
                    (None, None)
                } else {
                    (
                        Some(solution.dual_rows().to_vec()),
                        Some(solution.dual_columns().to_vec()),
                    )
                };
                Ok(SolveResult {
                    status: map_with_solution(status),
                    objective,
                    primal,
                    row_duals,
                    col_duals,
                    mip_gap: gap,
                })
            }
            HighsModelStatus::Infeasible => Ok(SolveResult {
                status: SolveStatus::Infeasible,
                objective: None,
                primal: Vec::new(),
                row_duals: None,
                col_duals: None,
                mip_gap: None,
            }),
            HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => {
                Ok(SolveResult {
                    status: SolveStatus::Unbounded,
                    objective: None,
                    primal: Vec::new(),
                    row_duals: None,
                    col_duals: None,
                    mip_gap: None,
                })
            }
            other => Err(SolverError::Backend(format!(
                "HiGHS returned unexpected status {other:?}"
            ))),
        }
    }
}
