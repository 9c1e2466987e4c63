//! Solution extraction, integrity checks and the self-contained solution
//! file (system, configuration, primal decisions and LP duals in one JSON).

use super::build::BuiltModel;
use super::{Mode, ScenarioConfig, UcpError, MCCORMICK_TOLERANCE};
use crate::metrics::AreaAggregates;
use crate::solver::{fix_binaries_and_relax, SolveStatus, SolverBackend};
use crate::system::{DemandAndResSeries, SeriesRefs, SystemFile, SystemSpec};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Nodal-balance and shedding-bound duals of the fixed-binary LP.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualSet {
    /// `lambda[bus][t]`: marginal cost of demand (EUR/puh).
    pub lambda: Vec<Vec<f64>>,
    /// `rho[load][t]`: dual of the shedding upper bound.
    pub rho: Vec<Vec<f64>>,
    pub lp_objective: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UcpSolution {
    pub mode: Mode,
    pub status: SolveStatus,
    pub objective: f64,
    pub mip_gap: Option<f64>,
    pub horizon: usize,
    /// Entity id orders match the embedded system spec.
    pub commitment: Vec<Vec<bool>>,
    pub startup: Vec<Vec<bool>>,
    pub shutdown: Vec<Vec<bool>>,
    pub gen_participation: Vec<Vec<bool>>,
    pub dispatch: Vec<Vec<f64>>,
    pub reserve: Vec<Vec<f64>>,
    pub shed: Vec<Vec<f64>>,
    pub curtail: Vec<Vec<f64>>,
    pub angle: Vec<Vec<f64>>,
    pub link_flow: Vec<Vec<f64>>,
    /// link id -> supported area id -> per-period reserved response (pu).
    pub link_reserve: BTreeMap<String, BTreeMap<String, Vec<f64>>>,
    /// supported area -> supporting area -> per-period participation.
    pub spc_participation: BTreeMap<String, BTreeMap<String, Vec<bool>>>,
    /// LCC direction binaries per link per block.
    pub lcc_direction: BTreeMap<String, Vec<bool>>,
    /// Aggregates recomputed from the committed/participating flags.
    pub aggregates: Vec<Vec<AreaAggregates>>,
    /// The 1/R surrogate reported by the model, per area per period.
    pub shat: Vec<Vec<f64>>,
    pub duals: Option<DualSet>,
}

impl UcpSolution {
    /// Converter droop support seen by area `a` from area `b` in period `t`.
    pub fn rc_pair(&self, spec: &SystemSpec, a: usize, b: usize, t: usize) -> f64 {
        let supported = &spec.areas[a].id;
        let supporting = &spec.areas[b].id;
        let active = self
            .spc_participation
            .get(supported)
            .and_then(|m| m.get(supporting))
            .map(|v| v[t])
            .unwrap_or(false);
        if !active {
            return 0.0;
        }
        spec.area_links[a]
            .iter()
            .filter(|&&k| spec.link_peer_area(k, a) == Some(b))
            .map(|&k| spec.converters[k].droop_gain())
            .sum()
    }

    /// Total objective recomputed from the decisions (for integrity checks).
    pub fn recompute_objective(&self, spec: &SystemSpec) -> f64 {
        let mut total = 0.0;
        for (i, g) in spec.generators.iter().enumerate() {
            for t in 0..self.horizon {
                total += g.cost_energy * self.dispatch[i][t]
                    + g.cost_reserve * self.reserve[i][t]
                    + g.cost_startup * (self.startup[i][t] as u8 as f64)
                    + g.cost_shutdown * (self.shutdown[i][t] as u8 as f64);
            }
        }
        for (j, l) in spec.loads.iter().enumerate() {
            for t in 0..self.horizon {
                total += l.voll * self.shed[j][t];
            }
        }
        for (r, w) in spec.res.iter().enumerate() {
            for t in 0..self.horizon {
                total += w.curtail_value * self.curtail[r][t];
            }
        }
        total
    }
}

fn as_binary(name: &str, x: f64) -> Result<bool, UcpError> {
    let r = x.round();
    if (x - r).abs() > 1e-6 || !(r == 0.0 || r == 1.0) {
        return Err(UcpError::Integrity(format!(
            "binary `{name}` holds non-integral value {x}"
        )));
    }
    Ok(r == 1.0)
}

/// Solves a built model, maps the primal values back to named decisions,
/// re-derives the aggregates from the flags and cross-checks them against
/// the model's aggregate variables, and, when the backend provides duals,
/// re-solves the fixed-binary LP for nodal prices.
pub fn solve_ucp(
    spec: &SystemSpec,
    cfg: &ScenarioConfig,
    built: &BuiltModel,
    backend: &dyn SolverBackend,
) -> Result<UcpSolution, UcpError> {
    let result = backend.solve(&built.model)?;
    match result.status {
        SolveStatus::Infeasible => {
            return Err(UcpError::Infeasible {
                hint: "check demand against committable capacity and reserve floors".into(),
            })
        }
        SolveStatus::Unbounded => {
            return Err(UcpError::Integrity(
                "unit commitment cannot be unbounded; model corrupt".into(),
            ))
        }
        SolveStatus::Timeout => return Err(UcpError::Timeout),
        SolveStatus::Optimal | SolveStatus::FeasibleGap => {}
    }
    let primal = &result.primal;
    let ids = &built.ids;
    let t_count = ids.t_count;
    let freq = cfg.mode.uses_frequency_constraints();

    let bools = |idx: &Vec<Vec<usize>>, what: &str| -> Result<Vec<Vec<bool>>, UcpError> {
        idx.iter()
            .map(|per_t| {
                per_t
                    .iter()
                    .map(|&v| as_binary(&format!("{what}:{}", built.model.vars[v].name), primal[v]))
                    .collect()
            })
            .collect()
    };
    let reals = |idx: &Vec<Vec<usize>>| -> Vec<Vec<f64>> {
        idx.iter()
            .map(|per_t| per_t.iter().map(|&v| primal[v]).collect())
            .collect()
    };

    let commitment = bools(&ids.u, "u")?;
    let startup = bools(&ids.y, "y")?;
    let shutdown = bools(&ids.z, "z")?;
    let gen_participation = bools(&ids.vg, "vg")?;

    let mut link_reserve = BTreeMap::new();
    let mut spc_participation: BTreeMap<String, BTreeMap<String, Vec<bool>>> = BTreeMap::new();
    for (&(k, a), per_t) in &ids.ps {
        link_reserve
            .entry(spec.converters[k].id.clone())
            .or_insert_with(BTreeMap::new)
            .insert(
                spec.areas[a].id.clone(),
                per_t.iter().map(|&v| primal[v]).collect(),
            );
    }
    for (&(a, b), per_t) in &ids.vc {
        let vals: Result<Vec<bool>, _> = per_t
            .iter()
            .map(|&v| as_binary(&built.model.vars[v].name.clone(), primal[v]))
            .collect();
        spc_participation
            .entry(spec.areas[a].id.clone())
            .or_insert_with(BTreeMap::new)
            .insert(spec.areas[b].id.clone(), vals?);
    }
    let mut lcc_direction = BTreeMap::new();
    for (k, per_blk) in ids.ulcc.iter().enumerate() {
        if per_blk.is_empty() {
            continue;
        }
        let vals: Result<Vec<bool>, _> = per_blk
            .iter()
            .map(|&v| as_binary(&built.model.vars[v].name.clone(), primal[v]))
            .collect();
        lcc_direction.insert(spec.converters[k].id.clone(), vals?);
    }

    // aggregates recomputed from flags; model variables must agree
    let mut aggregates = Vec::with_capacity(spec.areas.len());
    for a in 0..spec.areas.len() {
        let mut per_t = Vec::with_capacity(t_count);
        for t in 0..t_count {
            let mut agg = AreaAggregates {
                damping: spec.areas[a].damping,
                ..Default::default()
            };
            for &i in &spec.area_gens[a] {
                if commitment[i][t] {
                    agg.inertia += spec.generators[i].inertia_contrib();
                }
                if gen_participation[i][t] {
                    agg.gen_droop += spec.generators[i].droop_gain();
                    agg.gen_turbine += spec.generators[i].turbine_gain();
                }
            }
            if cfg.mode.uses_spc() {
                for b in 0..spec.areas.len() {
                    if b != a {
                        // rc_pair needs spc_participation; inline the sum
                        let active = spc_participation
                            .get(&spec.areas[a].id)
                            .and_then(|m| m.get(&spec.areas[b].id))
                            .map(|v| v[t])
                            .unwrap_or(false);
                        if active {
                            agg.conv_droop += spec.area_links[a]
                                .iter()
                                .filter(|&&k| spec.link_peer_area(k, a) == Some(b))
                                .map(|&k| spec.converters[k].droop_gain())
                                .sum::<f64>();
                        }
                    }
                }
            }
            if freq && !spec.area_gens[a].is_empty() {
                let tol = 1e-6;
                let model_rg = primal[ids.rg[a][t]];
                let model_m = primal[ids.mhat[a][t]];
                let model_rhat = primal[ids.rhat[a][t]];
                if (model_rg - agg.gen_droop).abs() > tol * agg.gen_droop.max(1.0)
                    || (model_m - agg.inertia).abs() > tol * agg.inertia.max(1.0)
                    || (model_rhat - agg.total_droop()).abs() > tol * agg.total_droop().max(1.0)
                {
                    return Err(UcpError::Integrity(format!(
                        "aggregate mismatch in area {} period {}: model ({model_rg:.6}, {model_m:.6}, {model_rhat:.6}) vs flags ({:.6}, {:.6}, {:.6})",
                        spec.areas[a].id,
                        t + 1,
                        agg.gen_droop,
                        agg.inertia,
                        agg.total_droop(),
                    )));
                }
                let shat = primal[ids.shat[a][t]];
                let prod = model_rhat * shat;
                if !(1.0 - MCCORMICK_TOLERANCE..=1.0 + MCCORMICK_TOLERANCE).contains(&prod) {
                    return Err(UcpError::Integrity(format!(
                        "McCormick surrogate loose in area {} period {}: R*S = {prod:.4}",
                        spec.areas[a].id,
                        t + 1
                    )));
                }
            }
            per_t.push(agg);
        }
        aggregates.push(per_t);
    }
    let shat = if freq {
        reals(&ids.shat)
    } else {
        vec![vec![0.0; t_count]; spec.areas.len()]
    };

    // fixed-binary LP re-solve for duals (skipped for dual-less backends)
    let duals = if backend.supports_duals() {
        let relaxed = fix_binaries_and_relax(&built.model, primal)?;
        let lp = backend.solve(&relaxed)?;
        if lp.status != SolveStatus::Optimal {
            return Err(UcpError::Integrity(format!(
                "fixed-binary LP did not solve to optimality: {:?}",
                lp.status
            )));
        }
        let row_duals = lp
            .row_duals
            .as_ref()
            .ok_or_else(|| crate::solver::SolverError::DualsUnavailable(backend.id().into()))?;
        let lp_obj = lp.objective.unwrap_or(f64::NAN);
        let milp_obj = result.objective.unwrap_or(f64::NAN);
        if (lp_obj - milp_obj).abs() > 1e-6 * milp_obj.abs().max(1.0) {
            return Err(UcpError::Integrity(format!(
                "fixed-binary LP objective {lp_obj} deviates from MILP objective {milp_obj}"
            )));
        }
        let lambda: Vec<Vec<f64>> = ids
            .balance_rows
            .iter()
            .map(|rows| rows.iter().map(|&r| row_duals[r]).collect())
            .collect();
        // backend duals are d(obj)/d(rhs); the price formula subtracts the
        // KKT multiplier of the shedding cap, which is its negation
        let rho: Vec<Vec<f64>> = ids
            .shed_rows
            .iter()
            .map(|rows| rows.iter().map(|&r| -row_duals[r]).collect())
            .collect();
        Some(DualSet {
            lambda,
            rho,
            lp_objective: lp_obj,
        })
    } else {
        None
    };

    Ok(UcpSolution {
        mode: cfg.mode,
        status: result.status,
        objective: result.objective.unwrap_or(f64::NAN),
        mip_gap: result.mip_gap,
        horizon: t_count,
        commitment,
        startup,
        shutdown,
        gen_participation,
        dispatch: reals(&ids.g),
        reserve: reals(&ids.gs),
        shed: reals(&ids.ds),
        curtail: reals(&ids.wc),
        angle: reals(&ids.theta),
        link_flow: reals(&ids.pdc),
        link_reserve,
        spc_participation,
        lcc_direction,
        aggregates,
        shat,
        duals,
    })
}

/// A system spec with the series inlined, making solution files
/// self-contained.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InlineSystem {
    pub file: SystemFile,
    pub horizon: usize,
    pub load_series: Vec<Vec<f64>>,
    pub res_series: Vec<Vec<f64>>,
}

impl InlineSystem {
    pub fn from_spec(spec: &SystemSpec) -> Self {
        InlineSystem {
            file: SystemFile {
                base_mva: spec.base_mva,
                areas: spec.areas.clone(),
                buses: spec.buses.clone(),
                generators: spec.generators.clone(),
                converters: spec.converters.clone(),
                ac_lines: spec.ac_lines.clone(),
                loads: spec.loads.clone(),
                res: spec.res.clone(),
                series: SeriesRefs {
                    loads: "inline".into(),
                    res: "inline".into(),
                },
            },
            horizon: spec.series.horizon,
            load_series: spec.series.load.clone(),
            res_series: spec.series.res.clone(),
        }
    }

    pub fn to_spec(&self) -> Result<SystemSpec, crate::system::LoadError> {
        SystemSpec::resolve(
            self.file.clone(),
            DemandAndResSeries {
                horizon: self.horizon,
                load: self.load_series.clone(),
                res: self.res_series.clone(),
            },
        )
    }
}

/// The on-disk solution format: everything needed to reproduce reports,
/// prices and simulations without the original input files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionFile {
    pub tool: String,
    pub backend: String,
    pub system: InlineSystem,
    pub config: ScenarioConfig,
    pub solution: UcpSolution,
}

impl SolutionFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
