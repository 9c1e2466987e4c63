//! Ex-post verification of a commitment solution: replay every analytic
//! security constraint exactly (no linearisation), and confirm a sample of
//! periods in the time-domain simulator, including HVDC-outage events.

use super::solution::UcpSolution;
use super::{Mode, ScenarioConfig, UcpError};
use crate::dynamics::{
    extract_metrics, simulate, simulate_hvdc_outage, DisturbanceEvent, DynamicScenario,
    DynamicSnapshot, LinkSpcMode,
};
use crate::metrics::{metrics_ucs_supported, AreaAggregates};
use crate::nadir::{NadirContext, NeighborContext};
use crate::system::SystemSpec;
use serde::{Deserialize, Serialize};

/// Slack allowed between a sampled simulation nadir and the limit; covers
/// the converter lag and per-unit turbine constants the analytics neglect.
pub const SIM_NADIR_SLACK: f64 = 0.02;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HardViolation {
    pub area: String,
    pub period: usize,
    pub check: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleCheck {
    pub period: usize,
    pub area: String,
    pub event: String,
    pub analytic_nadir_hz: Option<f64>,
    pub simulated_nadir_hz: f64,
    pub limit_hz: f64,
    pub within_limit: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub hard_violations: Vec<HardViolation>,
    pub samples: Vec<SampleCheck>,
    /// Worst relative McCormick product error over areas and periods.
    pub worst_surrogate_error: f64,
    /// Worst absolute deviation of the exactly recomputed reserve-share sum
    /// from the dimensioning incident (pu).
    pub worst_share_residual: f64,
}

/// Exact nonlinear nadir of area `a` at period `t` under the solution's
/// flags, routed through the same evaluator the hyperplane fit used.
pub fn exact_nadir(
    spec: &SystemSpec,
    mode: Mode,
    solution: &UcpSolution,
    a: usize,
    t: usize,
) -> Result<f64, UcpError> {
    let ar = &spec.areas[a];
    let agg = &solution.aggregates[a][t];
    let nadir = match mode {
        Mode::NoLim | Mode::NoSpc | Mode::Unilateral => {
            let ctx = NadirContext::Unilateral {
                damping: ar.damping,
                t_a: ar.turbine_time_const,
                dp: ar.dimensioning_incident,
                f_base: ar.f_base,
            };
            ctx.eval(&[agg.total_droop(), agg.total_turbine(), agg.inertia])
        }
        Mode::Bilateral => {
            let mut neighbor_ids: Vec<usize> = spec.area_links[a]
                .iter()
                .filter_map(|&k| spec.link_peer_area(k, a))
                .collect();
            neighbor_ids.sort_unstable();
            neighbor_ids.dedup();
            let neighbors: Vec<NeighborContext> = neighbor_ids
                .iter()
                .map(|&b| NeighborContext {
                    area_id: spec.areas[b].id.clone(),
                    damping: spec.areas[b].damping,
                    t_b: spec.areas[b].turbine_time_const,
                })
                .collect();
            let ctx = NadirContext::Bilateral {
                damping: ar.damping,
                t_a: ar.turbine_time_const,
                dp: ar.dimensioning_incident,
                f_base: ar.f_base,
                df_limit: ar.nadir_limit,
                neighbors,
            };
            let mut point = vec![
                agg.gen_droop,
                agg.gen_turbine,
                agg.inertia,
            ];
            for &b in &neighbor_ids {
                let nb = &solution.aggregates[b][t];
                point.push(nb.gen_droop);
                point.push(nb.inertia);
                point.push(nb.gen_turbine);
                point.push(solution.rc_pair(spec, a, b, t));
            }
            ctx.eval(&point)
        }
    };
    nadir.ok_or_else(|| {
        UcpError::Integrity(format!(
            "nadir undefined for area {} period {}: invalid aggregates",
            spec.areas[a].id,
            t + 1
        ))
    })
}

/// Snapshot of the solution at period `t` for the dynamic simulator.
pub fn snapshot_at(
    spec: &SystemSpec,
    mode: Mode,
    solution: &UcpSolution,
    t: usize,
) -> DynamicSnapshot {
    let committed: Vec<bool> = (0..spec.generators.len())
        .map(|i| solution.commitment[i][t])
        .collect();
    let participating: Vec<bool> = (0..spec.generators.len())
        .map(|i| solution.gen_participation[i][t])
        .collect();
    let link_mode: Vec<LinkSpcMode> = (0..spec.converters.len())
        .map(|k| {
            let (x, y) = (spec.conv_from_area[k], spec.conv_to_area[k]);
            let supported = |sup: usize, by: usize| {
                solution
                    .spc_participation
                    .get(&spec.areas[sup].id)
                    .and_then(|m| m.get(&spec.areas[by].id))
                    .map(|v| v[t])
                    .unwrap_or(false)
            };
            match mode {
                Mode::Bilateral if supported(x, y) => LinkSpcMode::Bilateral,
                Mode::Unilateral if supported(x, y) => LinkSpcMode::Unilateral { supported_area: x },
                Mode::Unilateral if supported(y, x) => LinkSpcMode::Unilateral { supported_area: y },
                _ => LinkSpcMode::Off,
            }
        })
        .collect();
    let link_flow: Vec<f64> = (0..spec.converters.len())
        .map(|k| solution.link_flow[k][t])
        .collect();
    DynamicSnapshot {
        committed,
        participating,
        link_mode,
        link_flow,
    }
}

/// Replays all security checks. `sim_periods` selects the periods whose
/// dimensioning incidents and HVDC outages are additionally confirmed in
/// the time domain.
pub fn verify_solution(
    spec: &SystemSpec,
    cfg: &ScenarioConfig,
    solution: &UcpSolution,
    sim_periods: &[usize],
) -> Result<VerificationReport, UcpError> {
    let mut hard = Vec::new();
    let mut worst_surrogate: f64 = 0.0;
    let mut worst_share: f64 = 0.0;
    let freq = cfg.mode.uses_frequency_constraints();

    for (a, ar) in spec.areas.iter().enumerate() {
        if spec.area_gens[a].is_empty() {
            continue;
        }
        let dp = ar.dimensioning_incident;
        for t in 0..solution.horizon {
            let agg: &AreaAggregates = &solution.aggregates[a][t];
            let reserve_sum: f64 = spec.area_gens[a]
                .iter()
                .map(|&i| solution.reserve[i][t])
                .sum();

            if !freq {
                if reserve_sum < dp - 1e-6 {
                    hard.push(HardViolation {
                        area: ar.id.clone(),
                        period: t + 1,
                        check: "minimum reserve".into(),
                        detail: format!("sum gs = {reserve_sum:.6} < dP = {dp:.6}"),
                    });
                }
                continue;
            }

            // RoCoF and SSFD closed forms
            let rocof = ar.f_base * dp / agg.inertia.max(1e-12);
            if rocof > ar.rocof_limit + 1e-9 {
                hard.push(HardViolation {
                    area: ar.id.clone(),
                    period: t + 1,
                    check: "rocof".into(),
                    detail: format!("{rocof:.4} Hz/s > {:.4} Hz/s", ar.rocof_limit),
                });
            }
            let ssfd = ar.f_base * dp / (agg.damping + agg.gen_droop).max(1e-12);
            if ssfd > ar.ssfd_limit + 1e-9 {
                hard.push(HardViolation {
                    area: ar.id.clone(),
                    period: t + 1,
                    check: "ssfd".into(),
                    detail: format!("{ssfd:.4} Hz > {:.4} Hz", ar.ssfd_limit),
                });
            }
            // exact nonlinear nadir against the limit
            let nadir = exact_nadir(spec, cfg.mode, solution, a, t)?;
            if nadir > ar.nadir_limit + 1e-9 {
                hard.push(HardViolation {
                    area: ar.id.clone(),
                    period: t + 1,
                    check: "nadir".into(),
                    detail: format!("{nadir:.4} Hz > {:.4} Hz", ar.nadir_limit),
                });
            }
            // bilinear surrogate tightness at the incumbent
            let prod = agg.total_droop() * solution.shat[a][t];
            worst_surrogate = worst_surrogate.max((prod - 1.0).abs());

            // reserve shares: solved values within McCormick tolerance of
            // the incident; exact recomputation reproduces it to 1e-9
            let conv_sum: f64 = spec.area_links[a]
                .iter()
                .map(|&k| {
                    solution
                        .link_reserve
                        .get(&spec.converters[k].id)
                        .and_then(|m| m.get(&ar.id))
                        .map(|v| v[t])
                        .unwrap_or(0.0)
                })
                .sum();
            let total_share = reserve_sum + conv_sum;
            if (total_share - dp).abs() > dp * (super::MCCORMICK_TOLERANCE + 1e-6) {
                hard.push(HardViolation {
                    area: ar.id.clone(),
                    period: t + 1,
                    check: "reserve share sum".into(),
                    detail: format!("sum = {total_share:.6} pu vs dP = {dp:.6} pu"),
                });
            }
            let r_hat = agg.total_droop();
            if r_hat > 0.0 {
                let exact: f64 = dp * (agg.gen_droop + agg.conv_droop) / r_hat;
                worst_share = worst_share.max((exact - dp).abs());
            }
            // HVDC outage reserve floor
            let dp_dc = spec.max_link_outage(a);
            if dp_dc > 0.0 && reserve_sum < dp_dc - 1e-6 {
                hard.push(HardViolation {
                    area: ar.id.clone(),
                    period: t + 1,
                    check: "dc outage reserve floor".into(),
                    detail: format!("sum gs = {reserve_sum:.6} < dP_dc = {dp_dc:.6}"),
                });
            }
        }
    }

    // sampled time-domain confirmation
    let mut samples = Vec::new();
    for &t in sim_periods {
        if t >= solution.horizon {
            continue;
        }
        let snapshot = snapshot_at(spec, cfg.mode, solution, t);
        for (a, ar) in spec.areas.iter().enumerate() {
            if spec.area_gens[a].is_empty() {
                continue;
            }
            let scenario = DynamicScenario::new(
                spec,
                snapshot.clone(),
                DisturbanceEvent::GeneratorTrip {
                    area: a,
                    power: ar.dimensioning_incident,
                },
            );
            let traj = simulate(spec, &scenario)?;
            let fm = extract_metrics(&traj, a)?;
            let analytic = if freq {
                Some(exact_nadir(spec, cfg.mode, solution, a, t)?)
            } else {
                metrics_ucs_supported(
                    &solution.aggregates[a][t],
                    ar.turbine_time_const,
                    ar.dimensioning_incident,
                    ar.f_base,
                )
                .ok()
                .map(|m| m.nadir)
            };
            let within = !freq || fm.nadir <= ar.nadir_limit + SIM_NADIR_SLACK;
            if freq && !within {
                hard.push(HardViolation {
                    area: ar.id.clone(),
                    period: t + 1,
                    check: "simulated nadir".into(),
                    detail: format!("{:.4} Hz > {:.4} Hz + slack", fm.nadir, ar.nadir_limit),
                });
            }
            samples.push(SampleCheck {
                period: t + 1,
                area: ar.id.clone(),
                event: format!("trip:{}", ar.id),
                analytic_nadir_hz: analytic,
                simulated_nadir_hz: fm.nadir,
                limit_hz: ar.nadir_limit,
                within_limit: within,
            });
        }
        // HVDC outages: both endpoint areas must hold their limits
        for c in spec.converters.iter() {
            if !freq {
                break;
            }
            let out = simulate_hvdc_outage(spec, &snapshot, &c.id)?;
            for area in [out.importer_area, out.exporter_area] {
                let ar = &spec.areas[area];
                let fm = extract_metrics(&out.trajectory, area)?;
                let within = fm.nadir <= ar.nadir_limit + SIM_NADIR_SLACK;
                if !within {
                    hard.push(HardViolation {
                        area: ar.id.clone(),
                        period: t + 1,
                        check: "hvdc outage nadir".into(),
                        detail: format!(
                            "link {}: {:.4} Hz > {:.4} Hz + slack",
                            c.id, fm.nadir, ar.nadir_limit
                        ),
                    });
                }
                samples.push(SampleCheck {
                    period: t + 1,
                    area: ar.id.clone(),
                    event: format!("hvdc:{}", c.id),
                    analytic_nadir_hz: None,
                    simulated_nadir_hz: fm.nadir,
                    limit_hz: ar.nadir_limit,
                    within_limit: within,
                });
            }
        }
    }

    Ok(VerificationReport {
        passed: hard.is_empty(),
        hard_violations: hard,
        samples,
        worst_surrogate_error: worst_surrogate,
        worst_share_residual: worst_share,
    })
}
