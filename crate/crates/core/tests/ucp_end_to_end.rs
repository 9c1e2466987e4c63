//! Model construction golden counts, end-to-end solves of all four modes on
//! a small two-area system, price recovery against a finite-difference
//! oracle, and ex-post verification.

mod common;

use common::{GenParams, TwoAreaConfig};
use hvdc_uc_core::metrics::AreaAggregates;
use hvdc_uc_core::nadir::{build_grid, fit_hyperplane, Scheme};
use hvdc_uc_core::solver::{fix_binaries_and_relax, HighsBackend, SolveStatus, SolverBackend};
use hvdc_uc_core::ucp::*;
use hvdc_uc_core::SystemSpec;

fn tiny_sys() -> SystemSpec {
    let mk = |p: f64| GenParams {
        p_max: p,
        inertia: 6.0,
        droop: 0.05,
        turbine_fraction: 0.3,
        turbine_time: 8.0,
    };
    let mut sys = common::single_area_system(
        vec![
            common::gen("G1", "A1", "B1", &mk(0.5)),
            common::gen("G2", "A1", "B1", &mk(0.4)),
        ],
        0.5,
        2,
    );
    for g in &mut sys.generators {
        g.t_on = 2;
        g.t_off = 2;
    }
    sys
}

fn plane_for(sys: &SystemSpec, area: &str, scheme: Scheme) -> hvdc_uc_core::nadir::NadirHyperplane {
    let grid = build_grid(sys, area, scheme, 25).unwrap();
    fit_hyperplane(&grid, sys.areas[sys.area_index(area).unwrap()].nadir_limit, 0.01).unwrap()
}

#[test]
fn model_counts_match_hand_enumeration() {
    // 1 area, 2 generators, 2 periods, no_spc, 4x4 McCormick cells:
    //   variables: 7 per gen-period (g, gs, u, y, z, vg, vsg) = 28
    //            + shedding 2 + angle 2 + aggregates 6x2 = 12
    //            + McCormick cells 3x16x2 = 96          -> 140
    //   rows: generator blocks 32, balance 2, shed caps 2,
    //         aggregate defs 10, rocof/ssfd 4, nadir 2,
    //         envelopes 8, cell gates 128, cell sums 6, big-M 16 -> 210
    let sys = tiny_sys();
    let cfg = ScenarioConfig::new(Mode::NoSpc).with_plane(plane_for(&sys, "A1", Scheme::Unilateral));
    let built = build_ucp(&sys, &cfg).unwrap();
    assert_eq!(built.model.vars.len(), 140);
    assert_eq!(built.model.cons.len(), 210);
}

#[test]
fn no_lim_drops_frequency_groups_and_keeps_reserve_floor() {
    let sys = tiny_sys();
    let cfg = ScenarioConfig::new(Mode::NoLim);
    let built = build_ucp(&sys, &cfg).unwrap();
    for c in &built.model.cons {
        for prefix in ["nadir.", "rocof.", "ssfd.", "mc_", "share.", "bm_"] {
            assert!(
                !c.name.starts_with(prefix),
                "frequency-group row {} present in no_lim",
                c.name
            );
        }
    }
    assert!(built.model.cons.iter().any(|c| c.name.starts_with("min_res.")));
}

#[test]
fn missing_hyperplane_is_rejected() {
    let sys = tiny_sys();
    let cfg = ScenarioConfig::new(Mode::NoSpc);
    assert!(matches!(
        build_ucp(&sys, &cfg),
        Err(UcpError::MissingHyperplane(_))
    ));
}

#[test]
fn structural_infeasibility_names_the_binding_area() {
    let mut sys = tiny_sys();
    sys.areas[0].dimensioning_incident = 5.0; // no fleet can cover this
    let cfg = ScenarioConfig::new(Mode::NoSpc).with_plane(plane_for(&tiny_sys(), "A1", Scheme::Unilateral));
    match build_ucp(&sys, &cfg) {
        Err(UcpError::StructuralInfeasibility { area, .. }) => assert_eq!(area, "A1"),
        other => panic!("expected structural infeasibility, got {:?}", other.map(|_| ())),
    }
}

/// A two-area system rich enough for all four modes: asymmetric reserve
/// costs make unilateral support of area 1 by area 2 economic.
fn spc_sys() -> SystemSpec {
    let mk = |p: f64, h: f64, r: f64, f: f64| GenParams {
        p_max: p,
        inertia: h,
        droop: r,
        turbine_fraction: f,
        turbine_time: 8.0,
    };
    let mut sys = common::two_area_system(TwoAreaConfig {
        gens_a: vec![
            mk(0.15, 6.5, 0.050, 0.30),
            mk(0.22, 5.5, 0.045, 0.25),
            mk(0.18, 5.0, 0.055, 0.35),
            mk(0.25, 6.0, 0.060, 0.30),
            mk(0.12, 4.5, 0.040, 0.20),
            mk(0.20, 5.8, 0.050, 0.32),
            mk(0.16, 4.8, 0.065, 0.28),
            mk(0.22, 6.2, 0.048, 0.30),
        ],
        gens_b: vec![
            mk(0.20, 6.0, 0.050, 0.30),
            mk(0.15, 5.2, 0.045, 0.28),
            mk(0.18, 5.6, 0.055, 0.33),
            mk(0.22, 6.4, 0.050, 0.27),
            mk(0.14, 4.9, 0.042, 0.22),
            mk(0.19, 5.7, 0.058, 0.31),
        ],
        link_capacity: 0.25,
        link_droop: 0.08,
        load_a: 0.9,
        load_b: 0.55,
        horizon: 4,
        incident_a: 0.15,
        incident_b: 0.15,
    });
    // cheap energy in area 2, expensive reserves in area 1
    for (i, g) in sys.generators.iter_mut().enumerate() {
        if g.area == "A1" {
            g.cost_energy = 42_000.0 + 1_000.0 * i as f64;
            g.cost_reserve = 9_000.0;
        } else {
            g.cost_energy = 30_000.0 + 1_000.0 * i as f64;
            g.cost_reserve = 2_000.0;
        }
    }
    sys
}

fn cfg_for(sys: &SystemSpec, mode: Mode) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(mode);
    cfg.solver.deterministic = true;
    cfg.solver.mip_gap = Some(1e-6);
    if mode.uses_frequency_constraints() {
        let scheme = if mode == Mode::Bilateral {
            Scheme::Bilateral
        } else {
            Scheme::Unilateral
        };
        for area in ["A1", "A2"] {
            cfg = cfg.with_plane(plane_for(sys, area, scheme));
        }
    }
    cfg
}

fn solve_mode(sys: &SystemSpec, mode: Mode) -> (ScenarioConfig, UcpSolution) {
    let cfg = cfg_for(sys, mode);
    let built = build_ucp(sys, &cfg).unwrap();
    let sol = solve_ucp(sys, &cfg, &built, &HighsBackend).unwrap();
    (cfg, sol)
}

#[test]
fn all_four_modes_solve_and_verify() {
    let sys = spc_sys();
    for mode in [Mode::NoLim, Mode::NoSpc, Mode::Unilateral, Mode::Bilateral] {
        let (cfg, sol) = solve_mode(&sys, mode);
        assert!(
            matches!(sol.status, SolveStatus::Optimal | SolveStatus::FeasibleGap),
            "{mode:?}"
        );
        let report = verify_solution(&sys, &cfg, &sol, &[0]).unwrap();
        assert!(
            report.passed,
            "{mode:?} verification failed: {:?}",
            report.hard_violations
        );
        // decisions reproduce the objective
        let recomputed = sol.recompute_objective(&sys);
        assert!(
            (recomputed - sol.objective).abs() <= 1e-6 * sol.objective.abs().max(1.0),
            "{mode:?}: recomputed {recomputed} vs reported {}",
            sol.objective
        );
        if mode.uses_frequency_constraints() {
            assert!(report.worst_surrogate_error <= MCCORMICK_TOLERANCE);
            assert!(report.worst_share_residual <= 1e-9);
        }
    }
}

#[test]
fn spc_modes_cost_no_more_than_no_spc() {
    let sys = spc_sys();
    let (_, base) = solve_mode(&sys, Mode::NoSpc);
    for mode in [Mode::Unilateral, Mode::Bilateral] {
        let cfg = cfg_for(&sys, mode);
        let mut built = build_ucp(&sys, &cfg).unwrap();
        // warm-start from the no-SPC incumbent so dominance is structural
        let base_cfg = cfg_for(&sys, Mode::NoSpc);
        let base_built = build_ucp(&sys, &base_cfg).unwrap();
        let base_primal: Vec<f64> = {
            let r = HighsBackend.solve(&base_built.model).unwrap();
            r.primal
        };
        built.model.initial = Some(hvdc_uc_core::solver::map_initial(
            &built.model,
            &base_built.model,
            &base_primal,
        ));
        let sol = solve_ucp(&sys, &cfg, &built, &HighsBackend).unwrap();
        assert!(
            sol.objective <= base.objective * (1.0 + 1e-9) + 1e-6,
            "{mode:?} objective {} above no_spc {}",
            sol.objective,
            base.objective
        );
    }
}

#[test]
fn unilateral_exclusivity_holds() {
    let sys = spc_sys();
    let (_, sol) = solve_mode(&sys, Mode::Unilateral);
    for t in 0..sol.horizon {
        let ab = sol.spc_participation["A1"]["A2"][t] as u8;
        let ba = sol.spc_participation["A2"]["A1"][t] as u8;
        assert!(ab * ba == 0, "mutual support at t={t}");
    }
}

#[test]
fn bilateral_symmetry_holds() {
    let sys = spc_sys();
    let (_, sol) = solve_mode(&sys, Mode::Bilateral);
    for t in 0..sol.horizon {
        assert_eq!(
            sol.spc_participation["A1"]["A2"][t],
            sol.spc_participation["A2"]["A1"][t]
        );
    }
}

#[test]
fn shedding_absorbs_demand_beyond_capacity() {
    let mut sys = tiny_sys();
    sys.series.load[0] = vec![2.0, 2.0]; // fleet caps at 0.9
    let cfg = ScenarioConfig::new(Mode::NoLim);
    let built = build_ucp(&sys, &cfg).unwrap();
    let sol = solve_ucp(&sys, &cfg, &built, &HighsBackend).unwrap();
    assert!(sol.shed[0].iter().all(|&s| s > 1.0));
}

#[test]
fn deterministic_mode_reproduces_solution_bytes() {
    let sys = spc_sys();
    let (cfg, sol1) = solve_mode(&sys, Mode::Unilateral);
    let (_, sol2) = solve_mode(&sys, Mode::Unilateral);
    let file1 = SolutionFile {
        tool: "test".into(),
        backend: "highs".into(),
        system: InlineSystem::from_spec(&sys),
        config: cfg.clone(),
        solution: sol1,
    };
    let file2 = SolutionFile {
        tool: "test".into(),
        backend: "highs".into(),
        system: InlineSystem::from_spec(&sys),
        config: cfg,
        solution: sol2,
    };
    assert_eq!(file1.to_json(), file2.to_json());
}

#[test]
fn aggregates_in_solution_match_flags() {
    let sys = spc_sys();
    let (_, sol) = solve_mode(&sys, Mode::Unilateral);
    for (a, per_t) in sol.aggregates.iter().enumerate() {
        for (t, agg) in per_t.iter().enumerate() {
            let mut expect = AreaAggregates {
                damping: sys.areas[a].damping,
                ..Default::default()
            };
            for &i in &sys.area_gens[a] {
                if sol.commitment[i][t] {
                    expect.inertia += sys.generators[i].inertia_contrib();
                }
                if sol.gen_participation[i][t] {
                    expect.gen_droop += sys.generators[i].droop_gain();
                    expect.gen_turbine += sys.generators[i].turbine_gain();
                }
            }
            assert!((agg.inertia - expect.inertia).abs() < 1e-9);
            assert!((agg.gen_droop - expect.gen_droop).abs() < 1e-9);
        }
    }
}

#[test]
fn energy_price_matches_demand_perturbation_oracle() {
    let sys = spc_sys();
    let cfg = cfg_for(&sys, Mode::NoSpc);
    let built = build_ucp(&sys, &cfg).unwrap();
    let sol = solve_ucp(&sys, &cfg, &built, &HighsBackend).unwrap();
    let report = recover_prices(&sys, &cfg, &sol).unwrap();

    let milp = HighsBackend.solve(&built.model).unwrap();
    let eps = 1e-4;
    for (bus, t) in [(0usize, 1usize), (1, 2), (0, 3)] {
        // bump demand of the load at this bus and re-solve the fixed LP
        let mut bumped = sys.clone();
        let j = (0..sys.loads.len())
            .find(|&j| sys.load_bus[j] == bus)
            .unwrap();
        bumped.series.load[j][t] += eps;
        let built2 = build_ucp(&bumped, &cfg).unwrap();
        let lp0 = HighsBackend
            .solve(&fix_binaries_and_relax(&built.model, &milp.primal).unwrap())
            .unwrap();
        let lp1 = HighsBackend
            .solve(&fix_binaries_and_relax(&built2.model, &milp.primal).unwrap())
            .unwrap();
        let fd = (lp1.objective.unwrap() - lp0.objective.unwrap()) / eps;
        let ep = report.energy_price[bus][t];
        assert!(
            (ep - fd).abs() < 1e-3,
            "bus {bus} t {t}: EP {ep} vs finite difference {fd}"
        );
    }
}

#[test]
fn market_report_costs_sum_to_objective() {
    let sys = spc_sys();
    let (cfg, sol) = solve_mode(&sys, Mode::Unilateral);
    let report = recover_prices(&sys, &cfg, &sol).unwrap();
    let total: f64 = report.areas.iter().map(|r| r.total_cost).sum();
    assert!(
        (total - sol.objective).abs() <= 1e-6 * sol.objective.max(1.0),
        "area totals {total} vs objective {}",
        sol.objective
    );
    assert!(report.hvdc_congestion_rent >= 0.0);
}

#[test]
fn lcc_direction_pins_flow_sign_within_block() {
    use hvdc_uc_core::system::{ConverterTechnology, PoleConfig};
    let mut sys = spc_sys();
    sys.converters[0].technology = ConverterTechnology::Lcc;
    sys.converters[0].pole_config = PoleConfig::Monopole;
    let mut cfg = cfg_for(&sys, Mode::Unilateral);
    cfg.lcc_block_len = 2;
    let built = build_ucp(&sys, &cfg).unwrap();
    let sol = solve_ucp(&sys, &cfg, &built, &HighsBackend).unwrap();
    let dirs = &sol.lcc_direction["L1"];
    assert_eq!(dirs.len(), 2, "4 periods in blocks of 2");
    for t in 0..sol.horizon {
        let blk = t / cfg.lcc_block_len;
        let flow = sol.link_flow[0][t];
        if dirs[blk] {
            assert!(flow >= -1e-9);
        } else {
            assert!(flow <= 1e-9);
        }
        // the post-contingency flow keeps the block's sign too
        for (_, per_area) in sol.link_reserve.iter() {
            for (area_id, ps) in per_area {
                let a = sys.area_index(area_id).unwrap();
                let post = flow + sys.support_sign(0, a) * ps[t];
                if dirs[blk] {
                    assert!(post >= -1e-6);
                } else {
                    assert!(post <= 1e-6);
                }
            }
        }
    }
}
