//! Grid evaluation, boundary extraction, hyperplane fitting and the
//! soundness certification sweep.

mod common;

use common::{GenParams, TwoAreaConfig};
use hvdc_uc_core::nadir::*;
use hvdc_uc_core::SystemSpec;
use std::collections::BTreeMap;

/// A fleet rich enough that the 0.7 Hz boundary crosses the realizable box.
fn surface_system() -> SystemSpec {
    let mk = |p: f64, h: f64, r: f64, f: f64| GenParams {
        p_max: p,
        inertia: h,
        droop: r,
        turbine_fraction: f,
        turbine_time: 8.0,
    };
    common::two_area_system(TwoAreaConfig {
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
        load_b: 0.7,
        horizon: 24,
        incident_a: 0.15,
        incident_b: 0.15,
    })
}

#[test]
fn grid_point_count_is_product_of_axes() {
    let sys = surface_system();
    let g2 = build_grid(&sys, "A1", Scheme::Unilateral, 2).unwrap();
    assert_eq!(g2.total_points(), 8);
    let g5 = build_grid(&sys, "A1", Scheme::Unilateral, 5).unwrap();
    assert_eq!(g5.total_points(), 125);
    assert_eq!(g5.axes.len(), 3);
}

#[test]
fn too_few_points_rejected() {
    let sys = surface_system();
    assert!(matches!(
        build_grid(&sys, "A1", Scheme::Unilateral, 1),
        Err(NadirError::TooFewPoints(1))
    ));
}

#[test]
fn unknown_area_rejected() {
    let sys = surface_system();
    assert!(matches!(
        build_grid(&sys, "NOPE", Scheme::Unilateral, 4),
        Err(NadirError::UnknownArea(_))
    ));
}

#[test]
fn boundary_band_selects_near_limit_points() {
    let sys = surface_system();
    let grid = build_grid(&sys, "A1", Scheme::Unilateral, 30).unwrap();
    let band = extract_boundary(&grid, 0.7, 0.01).unwrap();
    assert!(band.len() >= 4);
    for (_, nadir) in &band {
        assert!((nadir - 0.7).abs() <= 0.01 + 1e-12);
    }
    // a band covering the whole range selects every valid point
    let all = extract_boundary(&grid, 0.7, 1e9).unwrap();
    assert_eq!(all.len(), grid.total_points() - grid.invalid_count);
}

#[test]
fn limit_above_surface_gives_degenerate_boundary() {
    let sys = surface_system();
    let grid = build_grid(&sys, "A1", Scheme::Unilateral, 12).unwrap();
    assert!(matches!(
        extract_boundary(&grid, 99.0, 0.01),
        Err(NadirError::DegenerateBoundary { .. })
    ));
}

#[test]
fn zero_residual_fit_recovers_exact_plane() {
    // band points lying exactly on a plane, no soundness cuts: the
    // active-set QP must return the plane coefficients unchanged
    let truth = [0.35, -0.02, 1.5]; // f = 0.35 r - 0.02 m + 1.5
    let mut h = vec![0.0; 9];
    let mut g = vec![0.0; 3];
    let pts: Vec<[f64; 2]> = (0..20)
        .map(|i| [10.0 + i as f64, 20.0 + ((i * 7) % 13) as f64])
        .collect();
    for p in &pts {
        let x = [p[0], p[1], 1.0];
        let f = truth[0] * p[0] + truth[1] * p[1] + truth[2];
        for r in 0..3 {
            for c in 0..3 {
                h[r * 3 + c] += x[r] * x[c];
            }
            g[r] += f * x[r];
        }
    }
    let theta = qp::active_set_min(&h, &g, 3, |_| None, 50).unwrap();
    for (a, b) in theta.iter().zip(&truth) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn active_set_honours_cuts() {
    // minimise (x-1)^2 subject to x >= 2: solution x = 2
    let h = vec![2.0];
    let g = vec![2.0];
    let theta = qp::active_set_min(&h, &g, 1, |t| {
        if t[0] < 2.0 - 1e-9 {
            Some(qp::Cut {
                row: vec![1.0],
                rhs: 2.0,
                tag: 1,
            })
        } else {
            None
        }
    }, 50)
    .unwrap();
    assert!((theta[0] - 2.0).abs() < 1e-9);
}

#[test]
fn unilateral_fit_is_sound_and_tight() {
    let sys = surface_system();
    let grid = build_grid(&sys, "A1", Scheme::Unilateral, 40).unwrap();
    let plane = fit_hyperplane(&grid, 0.7, 0.01).unwrap();
    assert_eq!(plane.diagnostics.false_feasible_count, 0);
    assert!(
        plane.diagnostics.mean_relative_error <= 0.05,
        "mean relative error {}",
        plane.diagnostics.mean_relative_error
    );
    assert!(
        plane.diagnostics.rejected_feasible_share < 0.5,
        "plane rejects {}% of the feasible points",
        plane.diagnostics.rejected_feasible_share * 100.0
    );
    // exhaustive re-sweep with the public accessors confirms soundness
    for idx in 0..grid.total_points() {
        if let Some(nadir) = grid.nadir_at(idx) {
            let p = grid.point(idx);
            if plane.accepts(&p) {
                assert!(
                    nadir <= 0.7 + 1e-9,
                    "accepted point with nadir {nadir} at {p:?}"
                );
            }
        }
    }
}

#[test]
fn fit_is_deterministic() {
    let sys = surface_system();
    let grid = build_grid(&sys, "A1", Scheme::Unilateral, 25).unwrap();
    let p1 = fit_hyperplane(&grid, 0.7, 0.01).unwrap();
    let p2 = fit_hyperplane(&grid, 0.7, 0.01).unwrap();
    assert_eq!(p1.to_json(), p2.to_json());
}

#[test]
fn grid_refinement_moves_coefficients_little() {
    let sys = surface_system();
    let coarse = fit_hyperplane(&build_grid(&sys, "A1", Scheme::Unilateral, 30).unwrap(), 0.7, 0.01).unwrap();
    let fine = fit_hyperplane(&build_grid(&sys, "A1", Scheme::Unilateral, 60).unwrap(), 0.7, 0.01).unwrap();
    for (k, c) in &coarse.coefficients {
        let f = fine.coefficients[k];
        let scale = f.abs().max(coarse.intercept.abs()).max(1e-6);
        assert!(
            (c - f).abs() / scale < 0.05,
            "coefficient {k} moved {c} -> {f}"
        );
    }
}

#[test]
fn bilateral_grid_has_seven_axes_and_fits() {
    let sys = surface_system();
    let grid = build_grid(&sys, "A1", Scheme::Bilateral, 6).unwrap();
    assert_eq!(grid.axes.len(), 7);
    let names: Vec<&str> = grid.axes.iter().map(|a| a.name.as_str()).collect();
    assert_eq!(
        names,
        ["rg_a", "fg_a", "m_a", "rg_b:A2", "m_b:A2", "fg_b:A2", "rc:A2"]
    );
    let plane = fit_hyperplane(&grid, 0.7, 0.02).unwrap();
    assert_eq!(plane.diagnostics.false_feasible_count, 0);
    assert_eq!(plane.coefficients.len(), 6);
    assert!(plane.diagnostics.certification_samples > 0 || grid.values.is_some());
}

#[test]
fn hyperplane_json_round_trip() {
    let sys = surface_system();
    let grid = build_grid(&sys, "A1", Scheme::Unilateral, 20).unwrap();
    let plane = fit_hyperplane(&grid, 0.7, 0.01).unwrap();
    let text = plane.to_json();
    let back = NadirHyperplane::from_json(&text).unwrap();
    assert_eq!(plane, back);
}

#[test]
fn visualize_slice_emits_grid_rows() {
    let sys = surface_system();
    let grid = build_grid(&sys, "A1", Scheme::Unilateral, 12).unwrap();
    let plane = fit_hyperplane(&grid, 0.7, 0.01).unwrap();
    let mut fixed = BTreeMap::new();
    fixed.insert("f_hat".to_string(), 5.0);
    let csv = visualize_export(&grid, &plane, "r_hat", "m_hat", &fixed).unwrap();
    assert_eq!(csv.lines().count(), 1 + 12 * 12);
    assert!(csv.starts_with("r_hat,m_hat,f_hat,nadir,plane_z"));
    // unknown axis is rejected
    assert!(matches!(
        visualize_export(&grid, &plane, "bogus", "m_hat", &fixed),
        Err(NadirError::InvalidSlice(_))
    ));
}

#[test]
fn infeasible_floor_ranges_are_reported() {
    // a tiny fleet cannot reach the RoCoF inertia floor
    let sys = common::two_area_system(TwoAreaConfig {
        gens_a: vec![GenParams {
            p_max: 0.2,
            inertia: 3.0,
            droop: 0.05,
            turbine_fraction: 0.3,
            turbine_time: 8.0,
        }],
        gens_b: vec![GenParams::default()],
        link_capacity: 0.2,
        link_droop: 0.1,
        load_a: 0.1,
        load_b: 0.1,
        horizon: 1,
        incident_a: 0.2,
        incident_b: 0.1,
    });
    assert!(matches!(
        build_grid(&sys, "A1", Scheme::Unilateral, 8),
        Err(NadirError::InfeasibleRanges { .. })
    ));
}
