//! Data model for multi-area AC/DC systems: file schema, loading, validation.
//!
//! All powers are per-unit on a single system base (`base_mva`, default
//! 1000 MVA). Frequencies are in Hz, times in seconds, costs in EUR per
//! pu-hour on the system base. The period length is fixed at one hour.

mod io;
mod types;
mod validate;

pub use io::{load_system, save_system, LoadError};
pub use types::{
    AcLineSpec, AreaSpec, BusSpec, ConverterLinkSpec, ConverterTechnology, DemandAndResSeries,
    GeneratorSpec, LoadSpec, PoleConfig, ResSpec, SeriesRefs, SystemFile,
};
pub use validate::{validate, Violation};

use std::collections::HashMap;

/// A fully resolved system: raw entity records plus index maps and the
/// attached time series. Immutable after load; cheap to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub base_mva: f64,
    pub areas: Vec<AreaSpec>,
    pub buses: Vec<BusSpec>,
    pub generators: Vec<GeneratorSpec>,
    pub converters: Vec<ConverterLinkSpec>,
    pub ac_lines: Vec<AcLineSpec>,
    pub loads: Vec<LoadSpec>,
    pub res: Vec<ResSpec>,
    pub series: DemandAndResSeries,

    // resolved cross-references (recomputed on load, not serialized)
    pub bus_area: Vec<usize>,
    pub gen_bus: Vec<usize>,
    pub gen_area: Vec<usize>,
    pub conv_from_bus: Vec<usize>,
    pub conv_to_bus: Vec<usize>,
    pub conv_from_area: Vec<usize>,
    pub conv_to_area: Vec<usize>,
    pub line_from_bus: Vec<usize>,
    pub line_to_bus: Vec<usize>,
    pub load_bus: Vec<usize>,
    pub res_bus: Vec<usize>,
    /// Generator indices per area.
    pub area_gens: Vec<Vec<usize>>,
    /// Converter indices incident to each area.
    pub area_links: Vec<Vec<usize>>,
    /// Bus indices per area.
    pub area_buses: Vec<Vec<usize>>,
}

impl SystemSpec {
    pub fn area_index(&self, id: &str) -> Option<usize> {
        self.areas.iter().position(|a| a.id == id)
    }

    pub fn converter_index(&self, id: &str) -> Option<usize> {
        self.converters.iter().position(|c| c.id == id)
    }

    /// The area on the other end of link `k`, seen from `area`.
    pub fn link_peer_area(&self, k: usize, area: usize) -> Option<usize> {
        if self.conv_from_area[k] == area {
            Some(self.conv_to_area[k])
        } else if self.conv_to_area[k] == area {
            Some(self.conv_from_area[k])
        } else {
            None
        }
    }

    /// HVDC incidence coefficient of link `k` at bus `n`: +1 at the from
    /// bus (positive flow leaves), -1 at the to bus, 0 elsewhere.
    pub fn incidence(&self, n: usize, k: usize) -> f64 {
        if self.conv_from_bus[k] == n {
            1.0
        } else if self.conv_to_bus[k] == n {
            -1.0
        } else {
            0.0
        }
    }

    /// Sign with which a support response toward `area` enters the signed
    /// link flow: +1 when `area` is on the to side (support raises the
    /// flow), -1 when on the from side.
    pub fn support_sign(&self, k: usize, area: usize) -> f64 {
        if self.conv_to_area[k] == area {
            1.0
        } else {
            -1.0
        }
    }

    /// Dimensioning incident of an area in pu (the largest credible unit
    /// outage, a fixed parameter of the area).
    pub fn incident(&self, area: usize) -> f64 {
        self.areas[area].dimensioning_incident
    }

    /// Outage magnitude of link `k`: full capacity for monopoles, half for
    /// bipoles (one pole lost). Capacity based, independent of dispatch.
    pub fn link_outage_magnitude(&self, k: usize) -> f64 {
        let c = &self.converters[k];
        match c.pole_config {
            PoleConfig::Monopole => c.capacity,
            PoleConfig::Bipole => 0.5 * c.capacity,
        }
    }

    /// Largest link-outage magnitude among links incident to `area`, or
    /// zero when the area has no DC connection.
    pub fn max_link_outage(&self, area: usize) -> f64 {
        self.area_links[area]
            .iter()
            .map(|&k| self.link_outage_magnitude(k))
            .fold(0.0, f64::max)
    }

    /// Builds a resolved spec from in-memory parts, checking every
    /// cross-reference. `load_system` routes through this.
    pub fn from_parts(file: SystemFile, series: DemandAndResSeries) -> Result<Self, LoadError> {
        Self::resolve(file, series)
    }

    pub(crate) fn resolve(file: SystemFile, series: DemandAndResSeries) -> Result<Self, LoadError> {
        let area_idx: HashMap<&str, usize> = file
            .areas
            .iter()
            .enumerate()
            .map(|(i, a)| (a.id.as_str(), i))
            .collect();
        let bus_idx: HashMap<&str, usize> = file
            .buses
            .iter()
            .enumerate()
            .map(|(i, b)| (b.id.as_str(), i))
            .collect();

        let dangling = |kind: &str, owner: &str, target: &str| LoadError::DanglingReference {
            kind: kind.to_string(),
            owner: owner.to_string(),
            target: target.to_string(),
        };

        let mut bus_area = Vec::with_capacity(file.buses.len());
        for b in &file.buses {
            bus_area.push(
                *area_idx
                    .get(b.area.as_str())
                    .ok_or_else(|| dangling("area", &b.id, &b.area))?,
            );
        }

        let mut gen_bus = Vec::new();
        let mut gen_area = Vec::new();
        for g in &file.generators {
            let bi = *bus_idx
                .get(g.bus.as_str())
                .ok_or_else(|| dangling("bus", &g.id, &g.bus))?;
            let ai = *area_idx
                .get(g.area.as_str())
                .ok_or_else(|| dangling("area", &g.id, &g.area))?;
            if bus_area[bi] != ai {
                return Err(LoadError::Inconsistent {
                    entity: g.id.clone(),
                    detail: format!(
                        "generator area `{}` does not match area of bus `{}`",
                        g.area, g.bus
                    ),
                });
            }
            gen_bus.push(bi);
            gen_area.push(ai);
        }

        let mut conv_from_bus = Vec::new();
        let mut conv_to_bus = Vec::new();
        for c in &file.converters {
            conv_from_bus.push(
                *bus_idx
                    .get(c.from_bus.as_str())
                    .ok_or_else(|| dangling("bus", &c.id, &c.from_bus))?,
            );
            conv_to_bus.push(
                *bus_idx
                    .get(c.to_bus.as_str())
                    .ok_or_else(|| dangling("bus", &c.id, &c.to_bus))?,
            );
        }
        let conv_from_area: Vec<usize> = conv_from_bus.iter().map(|&b| bus_area[b]).collect();
        let conv_to_area: Vec<usize> = conv_to_bus.iter().map(|&b| bus_area[b]).collect();

        let mut line_from_bus = Vec::new();
        let mut line_to_bus = Vec::new();
        for l in &file.ac_lines {
            line_from_bus.push(
                *bus_idx
                    .get(l.from_bus.as_str())
                    .ok_or_else(|| dangling("bus", &l.id, &l.from_bus))?,
            );
            line_to_bus.push(
                *bus_idx
                    .get(l.to_bus.as_str())
                    .ok_or_else(|| dangling("bus", &l.id, &l.to_bus))?,
            );
        }

        let mut load_bus = Vec::new();
        for d in &file.loads {
            load_bus.push(
                *bus_idx
                    .get(d.bus.as_str())
                    .ok_or_else(|| dangling("bus", &d.id, &d.bus))?,
            );
        }
        let mut res_bus = Vec::new();
        for r in &file.res {
            res_bus.push(
                *bus_idx
                    .get(r.bus.as_str())
                    .ok_or_else(|| dangling("bus", &r.id, &r.bus))?,
            );
        }

        let n_areas = file.areas.len();
        let mut area_gens = vec![Vec::new(); n_areas];
        for (i, &a) in gen_area.iter().enumerate() {
            area_gens[a].push(i);
        }
        let mut area_links = vec![Vec::new(); n_areas];
        for k in 0..file.converters.len() {
            area_links[conv_from_area[k]].push(k);
            if conv_to_area[k] != conv_from_area[k] {
                area_links[conv_to_area[k]].push(k);
            }
        }
        let mut area_buses = vec![Vec::new(); n_areas];
        for (b, &a) in bus_area.iter().enumerate() {
            area_buses[a].push(b);
        }

        Ok(SystemSpec {
            base_mva: file.base_mva,
            areas: file.areas,
            buses: file.buses,
            generators: file.generators,
            converters: file.converters,
            ac_lines: file.ac_lines,
            loads: file.loads,
            res: file.res,
            series,
            bus_area,
            gen_bus,
            gen_area,
            conv_from_bus,
            conv_to_bus,
            conv_from_area,
            conv_to_area,
            line_from_bus,
            line_to_bus,
            load_bus,
            res_bus,
            area_gens,
            area_links,
            area_buses,
        })
    }
}
