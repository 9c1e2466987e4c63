//! Backend contract tests: tiny LPs/MILPs with known optima, dual sign
//! conventions, fixed-binary relaxation and the LP text round trip.

use hvdc_uc_core::solver::*;

fn tiny_lp() -> ModelHandle {
    // min x s.t. x >= 3
    let mut m = ModelHandle::new("tiny");
    let x = m.add_var("x", VarKind::Continuous, 0.0, f64::INFINITY, 1.0);
    m.add_con("floor", vec![(x, 1.0)], RowSense::Ge, 3.0);
    m
}

fn tiny_milp() -> ModelHandle {
    // min x + y s.t. x + y >= 1, x,y binary
    let mut m = ModelHandle::new("tiny_milp");
    let x = m.add_var("x", VarKind::Binary, 0.0, 1.0, 1.0);
    let y = m.add_var("y", VarKind::Binary, 0.0, 1.0, 1.0);
    m.add_con("cover", vec![(x, 1.0), (y, 1.0)], RowSense::Ge, 1.0);
    m
}

fn infeasible_lp() -> ModelHandle {
    let mut m = ModelHandle::new("infeasible");
    let x = m.add_var("x", VarKind::Continuous, 0.0, f64::INFINITY, 1.0);
    m.add_con("hi", vec![(x, 1.0)], RowSense::Le, 1.0);
    m.add_con("lo", vec![(x, 1.0)], RowSense::Ge, 2.0);
    m
}

#[test]
fn one_var_lp_optimum() {
    for backend in [&HighsBackend as &dyn SolverBackend, &MicrolpBackend] {
        let r = backend.solve(&tiny_lp()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal, "{}", backend.id());
        assert!((r.objective.unwrap() - 3.0).abs() < 1e-9);
    }
}

#[test]
fn tiny_milp_optimum_accepts_either_support() {
    for backend in [&HighsBackend as &dyn SolverBackend, &MicrolpBackend] {
        let m = tiny_milp();
        let r = backend.solve(&m).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal, "{}", backend.id());
        assert!((r.objective.unwrap() - 1.0).abs() < 1e-9);
        let x = r.value(&m, "x").unwrap();
        let y = r.value(&m, "y").unwrap();
        assert!((x + y - 1.0).abs() < 1e-6);
        // MILP results carry no duals
        assert!(r.row_duals.is_none());
    }
}

#[test]
fn infeasible_reports_no_primal() {
    for backend in [&HighsBackend as &dyn SolverBackend, &MicrolpBackend] {
        let r = backend.solve(&infeasible_lp()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible, "{}", backend.id());
        assert!(r.primal.is_empty());
    }
}

#[test]
fn equality_dual_is_marginal_cost_of_rhs() {
    // min 2a + 5b  s.t. a + b = d, a <= 1  -> at d = 1.5, marginal unit is b
    let mut m = ModelHandle::new("dual_sign");
    let a = m.add_var("a", VarKind::Continuous, 0.0, 1.0, 2.0);
    let b = m.add_var("b", VarKind::Continuous, 0.0, f64::INFINITY, 5.0);
    let row = m.add_con("balance", vec![(a, 1.0), (b, 1.0)], RowSense::Eq, 1.5);
    let r = HighsBackend.solve(&m).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    let duals = r.row_duals.as_ref().unwrap();
    // finite-difference oracle: increase rhs by eps, objective grows by 5*eps
    let mut m2 = m.clone();
    m2.cons[row].rhs += 1e-3;
    let r2 = HighsBackend.solve(&m2).unwrap();
    let fd = (r2.objective.unwrap() - r.objective.unwrap()) / 1e-3;
    assert!(
        (duals[row] - fd).abs() < 1e-6,
        "dual {} vs finite difference {}",
        duals[row],
        fd
    );
    assert!((duals[row] - 5.0).abs() < 1e-6);
}

#[test]
fn backends_agree_on_objective() {
    // small knapsack-style MILP
    let mut m = ModelHandle::new("agree");
    let mut vars = Vec::new();
    let costs = [3.0, 5.0, 4.0, 7.0, 2.0];
    for (i, c) in costs.iter().enumerate() {
        vars.push(m.add_var(format!("x{i}"), VarKind::Binary, 0.0, 1.0, *c));
    }
    let g = m.add_var("gap", VarKind::Continuous, 0.0, 10.0, 0.5);
    m.add_con(
        "need",
        vars.iter().map(|&v| (v, 1.0)).chain([(g, 1.0)]).collect(),
        RowSense::Ge,
        3.0,
    );
    m.add_con("pair", vec![(vars[0], 1.0), (vars[3], 1.0)], RowSense::Le, 1.0);
    let r1 = HighsBackend.solve(&m).unwrap();
    let r2 = MicrolpBackend.solve(&m).unwrap();
    let (o1, o2) = (r1.objective.unwrap(), r2.objective.unwrap());
    assert!(
        (o1 - o2).abs() <= 1e-6 * o1.abs().max(1.0),
        "highs {o1} vs microlp {o2}"
    );
}

#[test]
fn fix_binaries_reproduces_milp_objective_and_exposes_duals() {
    let m = tiny_milp();
    let r = HighsBackend.solve(&m).unwrap();
    let relaxed = fix_binaries_and_relax(&m, &r.primal).unwrap();
    assert!(!relaxed.has_integers());
    for (v, orig) in relaxed.vars.iter().zip(&m.vars) {
        if orig.kind == VarKind::Binary {
            assert_eq!(v.lb, v.ub);
        }
    }
    let lp = HighsBackend.solve(&relaxed).unwrap();
    assert_eq!(lp.status, SolveStatus::Optimal);
    let (a, b) = (r.objective.unwrap(), lp.objective.unwrap());
    assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0));
    assert!(lp.row_duals.is_some());
}

#[test]
fn fix_binaries_rejects_short_incumbent() {
    let m = tiny_milp();
    assert!(fix_binaries_and_relax(&m, &[1.0]).is_err());
}

#[test]
fn lp_text_round_trip_preserves_solve() {
    for m in [tiny_lp(), tiny_milp()] {
        let text = write_lp(&m);
        let back = read_lp(&text).unwrap();
        let r1 = HighsBackend.solve(&m).unwrap();
        let r2 = HighsBackend.solve(&back).unwrap();
        assert_eq!(r1.status, r2.status);
        assert!((r1.objective.unwrap() - r2.objective.unwrap()).abs() < 1e-9);
    }
}

#[test]
fn backend_registry_honours_key_and_env() {
    assert_eq!(backend_from_key(Some("microlp")).unwrap().id(), "microlp");
    assert_eq!(backend_from_key(Some("highs")).unwrap().id(), "highs");
    assert!(backend_from_key(Some("nope")).is_err());
}
