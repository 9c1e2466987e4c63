//! Programmatic synthetic systems shared by the integration tests.

#![allow(dead_code)]

use hvdc_uc_core::system::*;

pub struct GenParams {
    pub p_max: f64,
    pub inertia: f64,
    pub droop: f64,
    pub turbine_fraction: f64,
    pub turbine_time: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            p_max: 0.5,
            inertia: 5.0,
            droop: 0.05,
            turbine_fraction: 0.3,
            turbine_time: 8.0,
        }
    }
}

pub fn area(id: &str, incident: f64) -> AreaSpec {
    AreaSpec {
        id: id.into(),
        f_base: 50.0,
        damping: 1.0,
        rocof_limit: 0.625,
        nadir_limit: 0.7,
        ssfd_limit: 0.35,
        dimensioning_incident: incident,
        turbine_time_const: 8.0,
    }
}

pub fn gen(id: &str, area: &str, bus: &str, p: &GenParams) -> GeneratorSpec {
    GeneratorSpec {
        id: id.into(),
        area: area.into(),
        bus: bus.into(),
        p_min: 0.2 * p.p_max,
        p_max: p.p_max,
        ramp_up: p.p_max,
        ramp_down: p.p_max,
        t_on: 1,
        t_off: 1,
        cost_energy: 40_000.0,
        cost_startup: 10_000.0,
        cost_shutdown: 1_000.0,
        cost_reserve: 5_000.0,
        inertia: p.inertia,
        droop: p.droop,
        gain: 1.0,
        turbine_fraction: p.turbine_fraction,
        turbine_time: p.turbine_time,
    }
}

pub fn vsc(id: &str, from_bus: &str, to_bus: &str, capacity: f64, droop: f64) -> ConverterLinkSpec {
    ConverterLinkSpec {
        id: id.into(),
        from_bus: from_bus.into(),
        to_bus: to_bus.into(),
        capacity,
        technology: ConverterTechnology::Vsc,
        pole_config: PoleConfig::Bipole,
        droop,
        gain: 1.0,
        time_const: 0.1,
        overload_factor: 0.0,
    }
}

/// One area, one bus, `gens` generators, one flat load per period.
pub fn single_area_system(gens: Vec<GeneratorSpec>, load: f64, horizon: usize) -> SystemSpec {
    let file = SystemFile {
        base_mva: 1000.0,
        areas: vec![area("A1", 0.1)],
        buses: vec![BusSpec {
            id: "B1".into(),
            area: "A1".into(),
        }],
        generators: gens,
        converters: vec![],
        ac_lines: vec![],
        loads: vec![LoadSpec {
            id: "D1".into(),
            bus: "B1".into(),
            voll: 3_000_000.0,
        }],
        res: vec![],
        series: SeriesRefs {
            loads: "inline".into(),
            res: "inline".into(),
        },
    };
    let series = DemandAndResSeries {
        horizon,
        load: vec![vec![load; horizon]],
        res: vec![],
    };
    SystemSpec::from_parts(file, series).expect("valid synthetic system")
}

/// Two single-bus areas joined by one VSC bipole link.
pub struct TwoAreaConfig {
    pub gens_a: Vec<GenParams>,
    pub gens_b: Vec<GenParams>,
    pub link_capacity: f64,
    pub link_droop: f64,
    pub load_a: f64,
    pub load_b: f64,
    pub horizon: usize,
    pub incident_a: f64,
    pub incident_b: f64,
}

pub fn two_area_system(cfg: TwoAreaConfig) -> SystemSpec {
    let mut generators = Vec::new();
    for (i, p) in cfg.gens_a.iter().enumerate() {
        generators.push(gen(&format!("A1G{}", i + 1), "A1", "B1", p));
    }
    for (i, p) in cfg.gens_b.iter().enumerate() {
        generators.push(gen(&format!("A2G{}", i + 1), "A2", "B2", p));
    }
    let file = SystemFile {
        base_mva: 1000.0,
        areas: vec![area("A1", cfg.incident_a), area("A2", cfg.incident_b)],
        buses: vec![
            BusSpec {
                id: "B1".into(),
                area: "A1".into(),
            },
            BusSpec {
                id: "B2".into(),
                area: "A2".into(),
            },
        ],
        generators,
        converters: vec![vsc("L1", "B1", "B2", cfg.link_capacity, cfg.link_droop)],
        ac_lines: vec![],
        loads: vec![
            LoadSpec {
                id: "D1".into(),
                bus: "B1".into(),
                voll: 3_000_000.0,
            },
            LoadSpec {
                id: "D2".into(),
                bus: "B2".into(),
                voll: 3_000_000.0,
            },
        ],
        res: vec![],
        series: SeriesRefs {
            loads: "inline".into(),
            res: "inline".into(),
        },
    };
    let series = DemandAndResSeries {
        horizon: cfg.horizon,
        load: vec![
            vec![cfg.load_a; cfg.horizon],
            vec![cfg.load_b; cfg.horizon],
        ],
        res: vec![],
    };
    SystemSpec::from_parts(file, series).expect("valid synthetic system")
}
