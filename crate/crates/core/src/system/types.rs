//! Entity records as they appear in the system JSON file.

use serde::{Deserialize, Serialize};

fn one() -> f64 {
    1.0
}

fn default_base() -> f64 {
    1000.0
}

/// An asynchronous AC area together with its security limits and the
/// parameters of the reduced second-order frequency model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaSpec {
    pub id: String,
    /// Nominal frequency (Hz).
    pub f_base: f64,
    /// Aggregate load damping (pu power per pu frequency), a fixed
    /// exogenous parameter of the area.
    pub damping: f64,
    /// Max admissible |RoCoF| (Hz/s).
    pub rocof_limit: f64,
    /// Max admissible frequency nadir (Hz).
    pub nadir_limit: f64,
    /// Max admissible steady-state frequency deviation (Hz).
    pub ssfd_limit: f64,
    /// Dimensioning incident (pu on the system base): the largest credible
    /// single unit outage the area must survive.
    pub dimensioning_incident: f64,
    /// Common turbine time constant of the area (s), used by the analytic
    /// metrics. Individual units may deviate in the dynamic simulator.
    pub turbine_time_const: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusSpec {
    pub id: String,
    pub area: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub id: String,
    pub area: String,
    pub bus: String,
    /// Output bounds (pu).
    pub p_min: f64,
    pub p_max: f64,
    /// Per-period ramp limits (pu/h).
    pub ramp_up: f64,
    pub ramp_down: f64,
    /// Minimum online / offline durations (periods).
    pub t_on: usize,
    pub t_off: usize,
    /// Costs: energy (EUR/puh), start-up and shut-down (EUR), reserve
    /// capacity (EUR/puh).
    pub cost_energy: f64,
    pub cost_startup: f64,
    pub cost_shutdown: f64,
    pub cost_reserve: f64,
    /// Inertia constant H (s).
    pub inertia: f64,
    /// Governor droop R (pu).
    pub droop: f64,
    /// Mechanical power gain factor K (defaults to 1).
    #[serde(default = "one")]
    pub gain: f64,
    /// Fraction of total power produced by the turbine (0..1).
    pub turbine_fraction: f64,
    /// Turbine time constant (s), used by the dynamic simulator.
    pub turbine_time: f64,
}

impl GeneratorSpec {
    /// Droop gain contribution K/R * Pmax (pu).
    pub fn droop_gain(&self) -> f64 {
        self.gain / self.droop * self.p_max
    }

    /// Turbine-fraction-weighted gain K*F/R * Pmax (pu).
    pub fn turbine_gain(&self) -> f64 {
        self.gain * self.turbine_fraction / self.droop * self.p_max
    }

    /// Inertia contribution 2*H*Pmax (pu s).
    pub fn inertia_contrib(&self) -> f64 {
        2.0 * self.inertia * self.p_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConverterTechnology {
    /// Line-commutated converter: cannot rapidly reverse the flow direction.
    Lcc,
    /// Voltage-source converter: symmetric bidirectional operation.
    Vsc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoleConfig {
    Monopole,
    Bipole,
}

/// An HVDC link between buses of two different synchronous areas, including
/// the droop parameters of its supplementary power controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConverterLinkSpec {
    pub id: String,
    pub from_bus: String,
    pub to_bus: String,
    /// Thermal rating (pu).
    pub capacity: f64,
    pub technology: ConverterTechnology,
    pub pole_config: PoleConfig,
    /// Frequency droop of the power controller (pu).
    pub droop: f64,
    /// Electric power gain factor (defaults to 1).
    #[serde(default = "one")]
    pub gain: f64,
    /// Controller time constant (s).
    pub time_const: f64,
    /// Fraction of the rating usable for frequency support beyond the
    /// nominal limit (0 disables overloading).
    #[serde(default)]
    pub overload_factor: f64,
}

impl ConverterLinkSpec {
    /// Droop gain contribution K/R * Pdc (pu).
    pub fn droop_gain(&self) -> f64 {
        self.gain / self.droop * self.capacity
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcLineSpec {
    pub id: String,
    pub from_bus: String,
    pub to_bus: String,
    /// Susceptance (pu).
    pub susceptance: f64,
    /// Thermal limit (pu).
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadSpec {
    pub id: String,
    pub bus: String,
    /// Value of lost load (EUR/puh).
    pub voll: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResSpec {
    pub id: String,
    pub bus: String,
    /// Value of curtailed production (EUR/puh).
    pub curtail_value: f64,
}

/// References to the time-series CSV files, relative to the system file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRefs {
    pub loads: String,
    pub res: String,
}

/// Top-level JSON schema of a system file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(default = "default_base")]
    pub base_mva: f64,
    pub areas: Vec<AreaSpec>,
    pub buses: Vec<BusSpec>,
    pub generators: Vec<GeneratorSpec>,
    #[serde(default)]
    pub converters: Vec<ConverterLinkSpec>,
    #[serde(default)]
    pub ac_lines: Vec<AcLineSpec>,
    pub loads: Vec<LoadSpec>,
    #[serde(default)]
    pub res: Vec<ResSpec>,
    pub series: SeriesRefs,
}

/// Hourly demand and RES availability, one row per period.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DemandAndResSeries {
    /// Horizon length T (periods).
    pub horizon: usize,
    /// `load[j][t]`: consumption of load j in period t (pu).
    pub load: Vec<Vec<f64>>,
    /// `res[r][t]`: available output of producer r in period t (pu).
    pub res: Vec<Vec<f64>>,
}
