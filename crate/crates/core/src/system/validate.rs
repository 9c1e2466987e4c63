//! Structural and physical consistency checks.

use super::SystemSpec;
use std::collections::HashSet;
use std::fmt;

/// One broken invariant. Violations are data, not errors: a spec may carry
/// any number of them and still be inspected.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Violation {
    pub entity: String,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.rule)
    }
}

/// Checks every type invariant and returns the violations sorted by entity
/// id, then rule. Pure: the same spec always yields the same list.
pub fn validate(spec: &SystemSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |entity: &str, rule: &str| {
        out.push(Violation {
            entity: entity.to_string(),
            rule: rule.to_string(),
        })
    };

    let mut seen = HashSet::new();
    let all_ids = spec
        .areas
        .iter()
        .map(|a| &a.id)
        .chain(spec.buses.iter().map(|b| &b.id))
        .chain(spec.generators.iter().map(|g| &g.id))
        .chain(spec.converters.iter().map(|c| &c.id))
        .chain(spec.ac_lines.iter().map(|l| &l.id))
        .chain(spec.loads.iter().map(|l| &l.id))
        .chain(spec.res.iter().map(|r| &r.id));
    for id in all_ids {
        if !seen.insert(id.clone()) {
            push(id, "duplicate id");
        }
    }

    for a in &spec.areas {
        if !(a.f_base > 0.0) {
            push(&a.id, "nominal frequency must be positive");
        }
        if !(a.rocof_limit > 0.0) {
            push(&a.id, "RoCoF limit must be positive");
        }
        if !(a.nadir_limit > 0.0) {
            push(&a.id, "nadir limit must be positive");
        }
        if !(a.ssfd_limit > 0.0) {
            push(&a.id, "SSFD limit must be positive");
        }
        if !(a.dimensioning_incident > 0.0) {
            push(&a.id, "dimensioning incident must be positive");
        }
        if !(a.turbine_time_const > 0.0) {
            push(&a.id, "turbine time constant must be positive");
        }
        if a.damping < 0.0 {
            push(&a.id, "damping must be non-negative");
        }
    }

    for g in &spec.generators {
        if !(g.p_min >= 0.0 && g.p_min <= g.p_max) {
            push(&g.id, "output bounds must satisfy 0 <= p_min <= p_max");
        }
        if !(g.droop > 0.0) {
            push(&g.id, "droop must be positive");
        }
        if !(g.inertia > 0.0) {
            push(&g.id, "inertia must be positive");
        }
        if !(0.0..=1.0).contains(&g.turbine_fraction) {
            push(&g.id, "turbine fraction must lie in [0, 1]");
        }
        if !(g.turbine_time > 0.0) {
            push(&g.id, "turbine time constant must be positive");
        }
        if g.ramp_up < 0.0 || g.ramp_down < 0.0 {
            push(&g.id, "ramp limits must be non-negative");
        }
    }

    for (k, c) in spec.converters.iter().enumerate() {
        if !(c.capacity > 0.0) {
            push(&c.id, "capacity must be positive");
        }
        if !(c.droop > 0.0) {
            push(&c.id, "droop must be positive");
        }
        if !(c.time_const > 0.0) {
            push(&c.id, "time constant must be positive");
        }
        if !(0.0..=0.2).contains(&c.overload_factor) {
            push(&c.id, "overload factor must lie in [0, 0.2]");
        }
        if spec.conv_from_area[k] == spec.conv_to_area[k] {
            push(&c.id, "endpoints must belong to distinct areas");
        }
    }

    for (l, line) in spec.ac_lines.iter().enumerate() {
        if spec.bus_area[spec.line_from_bus[l]] != spec.bus_area[spec.line_to_bus[l]] {
            push(&line.id, "AC line spans areas");
        }
        if !(line.susceptance > 0.0) {
            push(&line.id, "susceptance must be positive");
        }
        if !(line.limit > 0.0) {
            push(&line.id, "thermal limit must be positive");
        }
    }

    // each area's AC subgraph must be connected
    for (a, area) in spec.areas.iter().enumerate() {
        if !area_connected(spec, a) {
            push(&area.id, "AC subgraph is not connected");
        }
    }

    for (j, l) in spec.loads.iter().enumerate() {
        if spec.series.load[j].iter().any(|&v| v < 0.0) {
            push(&l.id, "load series must be non-negative");
        }
    }
    for (r, res) in spec.res.iter().enumerate() {
        if spec.series.res[r].iter().any(|&v| v < 0.0) {
            push(&res.id, "RES series must be non-negative");
        }
    }

    out.sort_by(|x, y| x.entity.cmp(&y.entity).then_with(|| x.rule.cmp(&y.rule)));
    out
}

fn area_connected(spec: &SystemSpec, area: usize) -> bool {
    let buses = &spec.area_buses[area];
    if buses.len() <= 1 {
        return true;
    }
    let mut adj: std::collections::HashMap<usize, Vec<usize>> = std::collections::HashMap::new();
    for l in 0..spec.ac_lines.len() {
        let (f, t) = (spec.line_from_bus[l], spec.line_to_bus[l]);
        if spec.bus_area[f] == area && spec.bus_area[t] == area {
            adj.entry(f).or_default().push(t);
            adj.entry(t).or_default().push(f);
        }
    }
    let mut seen: HashSet<usize> = HashSet::new();
    let mut stack = vec![buses[0]];
    seen.insert(buses[0]);
    while let Some(b) = stack.pop() {
        if let Some(next) = adj.get(&b) {
            for &n in next {
                if seen.insert(n) {
                    stack.push(n);
                }
            }
        }
    }
    buses.iter().all(|b| seen.contains(b))
}
