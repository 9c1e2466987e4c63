//! File loading, referential integrity, validation rules and the
//! save/load round trip.

mod common;

use common::GenParams;
use hvdc_uc_core::system::*;
use proptest::prelude::*;
use std::fs;

fn write_minimal(dir: &std::path::Path, gen_bus: &str) -> std::path::PathBuf {
    let json = format!(
        r#"{{
  "base_mva": 1000.0,
  "areas": [{{"id": "A1", "f_base": 50.0, "damping": 1.0, "rocof_limit": 0.625,
             "nadir_limit": 0.7, "ssfd_limit": 0.35, "dimensioning_incident": 0.1,
             "turbine_time_const": 8.0}}],
  "buses": [{{"id": "B1", "area": "A1"}}],
  "generators": [{{"id": "G1", "area": "A1", "bus": "{gen_bus}", "p_min": 0.1, "p_max": 0.5,
                  "ramp_up": 0.5, "ramp_down": 0.5, "t_on": 2, "t_off": 2,
                  "cost_energy": 40000, "cost_startup": 10000, "cost_shutdown": 1000,
                  "cost_reserve": 5000, "inertia": 5.0, "droop": 0.05,
                  "turbine_fraction": 0.3, "turbine_time": 8.0}}],
  "loads": [{{"id": "D1", "bus": "B1", "voll": 3000000}}],
  "series": {{"loads": "loads.csv", "res": "res.csv"}}
}}"#
    );
    let path = dir.join("sys.json");
    fs::write(&path, json).unwrap();
    fs::write(dir.join("loads.csv"), "period,D1\n1,0.3\n2,0.25\n").unwrap();
    fs::write(dir.join("res.csv"), "period\n1\n2\n").unwrap();
    path
}

#[test]
fn loads_minimal_system() {
    let dir = tempfile::tempdir().unwrap();
    let spec = load_system(write_minimal(dir.path(), "B1")).unwrap();
    assert_eq!(spec.areas.len(), 1);
    assert_eq!(spec.generators.len(), 1);
    assert_eq!(spec.series.horizon, 2);
    assert_eq!(spec.series.load[0], vec![0.3, 0.25]);
    // defaults: gain 1, overload 0
    assert_eq!(spec.generators[0].gain, 1.0);
    assert!(validate(&spec).is_empty());
}

#[test]
fn dangling_bus_reference_is_reported_with_id() {
    let dir = tempfile::tempdir().unwrap();
    let err = load_system(write_minimal(dir.path(), "B9")).unwrap_err();
    match err {
        LoadError::DanglingReference { owner, target, .. } => {
            assert_eq!(owner, "G1");
            assert_eq!(target, "B9");
        }
        other => panic!("expected dangling reference, got {other}"),
    }
}

#[test]
fn parse_error_carries_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, "{\n  \"base_mva\": oops\n}").unwrap();
    match load_system(&path).unwrap_err() {
        LoadError::Parse { line, .. } => assert_eq!(line, 2),
        other => panic!("expected parse error, got {other}"),
    }
}

#[test]
fn empty_generator_list_loads_fine() {
    let dir = tempfile::tempdir().unwrap();
    let json = r#"{
  "areas": [{"id": "A1", "f_base": 50.0, "damping": 1.0, "rocof_limit": 0.625,
             "nadir_limit": 0.7, "ssfd_limit": 0.35, "dimensioning_incident": 0.1,
             "turbine_time_const": 8.0}],
  "buses": [{"id": "B1", "area": "A1"}],
  "generators": [],
  "loads": [{"id": "D1", "bus": "B1", "voll": 3000000}],
  "series": {"loads": "loads.csv", "res": "res.csv"}
}"#;
    let path = dir.path().join("sys.json");
    fs::write(&path, json).unwrap();
    fs::write(dir.path().join("loads.csv"), "period,D1\n1,0.3\n").unwrap();
    fs::write(dir.path().join("res.csv"), "period\n1\n").unwrap();
    let spec = load_system(&path).unwrap();
    assert!(spec.generators.is_empty());
    assert_eq!(spec.base_mva, 1000.0, "base defaults to 1000 MVA");
}

#[test]
fn unknown_series_column_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_minimal(dir.path(), "B1");
    fs::write(dir.path().join("loads.csv"), "period,D1,D9\n1,0.3,0.1\n").unwrap();
    assert!(matches!(load_system(&path), Err(LoadError::Series { .. })));
}

#[test]
fn validation_flags_nonpositive_droop() {
    let mut p = GenParams::default();
    p.droop = 0.05;
    let mut spec = common::single_area_system(vec![common::gen("G1", "A1", "B1", &p)], 0.3, 2);
    spec.generators[0].droop = 0.0;
    let v = validate(&spec);
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].entity, "G1");
    assert_eq!(v[0].rule, "droop must be positive");
}

#[test]
fn validation_flags_cross_area_ac_line() {
    let mut spec = common::two_area_system(common::TwoAreaConfig {
        gens_a: vec![GenParams::default()],
        gens_b: vec![GenParams::default()],
        link_capacity: 0.2,
        link_droop: 0.1,
        load_a: 0.2,
        load_b: 0.2,
        horizon: 1,
        incident_a: 0.1,
        incident_b: 0.1,
    });
    spec.ac_lines.push(AcLineSpec {
        id: "X1".into(),
        from_bus: "B1".into(),
        to_bus: "B2".into(),
        susceptance: 10.0,
        limit: 0.5,
    });
    let spec = SystemSpec::from_parts(
        SystemFile {
            base_mva: spec.base_mva,
            areas: spec.areas.clone(),
            buses: spec.buses.clone(),
            generators: spec.generators.clone(),
            converters: spec.converters.clone(),
            ac_lines: spec.ac_lines.clone(),
            loads: spec.loads.clone(),
            res: spec.res.clone(),
            series: SeriesRefs {
                loads: "x".into(),
                res: "x".into(),
            },
        },
        spec.series.clone(),
    )
    .unwrap();
    let v = validate(&spec);
    assert!(v.iter().any(|v| v.entity == "X1" && v.rule == "AC line spans areas"));
}

#[test]
fn validation_is_sorted_and_pure() {
    let mut spec = common::single_area_system(
        vec![
            common::gen("GB", "A1", "B1", &GenParams::default()),
            common::gen("GA", "A1", "B1", &GenParams::default()),
        ],
        0.3,
        2,
    );
    spec.generators[0].droop = -1.0; // GB
    spec.generators[0].inertia = 0.0;
    spec.generators[1].droop = -1.0; // GA
    let v1 = validate(&spec);
    let v2 = validate(&spec);
    assert_eq!(v1, v2);
    let keys: Vec<(String, String)> = v1
        .iter()
        .map(|v| (v.entity.clone(), v.rule.clone()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted, "violations sorted by entity then rule");
}

#[test]
fn save_load_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = common::two_area_system(common::TwoAreaConfig {
        gens_a: vec![GenParams::default()],
        gens_b: vec![GenParams::default()],
        link_capacity: 0.2,
        link_droop: 0.1,
        load_a: 0.2,
        load_b: 0.2,
        horizon: 3,
        incident_a: 0.1,
        incident_b: 0.1,
    });
    // awkward numbers must survive exactly
    spec.generators[0].p_max = 0.1 + 0.2 * 0.3;
    spec.series.load[0][1] = 1.0 / 3.0;
    spec.areas[1].damping = f64::MIN_POSITIVE;
    let path = dir.path().join("sys.json");
    save_system(&spec, &path).unwrap();
    let back = load_system(&path).unwrap();
    assert_eq!(back.generators[0].p_max, spec.generators[0].p_max);
    assert_eq!(back.series.load[0][1], spec.series.load[0][1]);
    assert_eq!(back.areas[1].damping, spec.areas[1].damping);
    assert_eq!(back.areas, spec.areas);
    assert_eq!(back.generators, spec.generators);
    assert_eq!(back.series, spec.series);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn round_trip_arbitrary_numeric_fields(
        p_max in 0.01_f64..2.0,
        droop in prop::num::f64::NORMAL.prop_filter("positive", |v| *v > 1e-6 && *v < 1.0),
        load0 in 0.0_f64..3.0,
    ) {
        let dir = tempfile::tempdir().unwrap();
        let mut p = GenParams::default();
        p.p_max = p_max;
        p.droop = droop;
        let mut spec = common::single_area_system(vec![common::gen("G1", "A1", "B1", &p)], 0.3, 2);
        spec.series.load[0][0] = load0;
        let path = dir.path().join("sys.json");
        save_system(&spec, &path).unwrap();
        let back = load_system(&path).unwrap();
        prop_assert_eq!(back.generators[0].p_max.to_bits(), spec.generators[0].p_max.to_bits());
        prop_assert_eq!(back.generators[0].droop.to_bits(), spec.generators[0].droop.to_bits());
        prop_assert_eq!(back.series.load[0][0].to_bits(), spec.series.load[0][0].to_bits());
    }
}
