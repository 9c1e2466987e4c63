//! Time-domain integration of the full per-device frequency response model.
//!
//! Per area: swing dynamics M*df' = -D*df + sum of device injections minus
//! the event power. Per participating generator: governor/turbine lead-lag
//! K(1+s*F*T)/(R(1+s*T)). Per active HVDC link: first-order droop lag
//! K/(R(1+s*Tc)) driven by the supported area's deviation (unilateral) or by
//! the difference of both (bilateral). Fixed-step RK4 keeps runs
//! bit-reproducible; this module is the ground-truth oracle for the
//! closed-form metrics and the ex-post validator for commitment solutions.

use crate::metrics::FrequencyMetrics;
use crate::system::SystemSpec;

#[derive(Debug, thiserror::Error)]
pub enum DynamicsError {
    #[error("unknown {kind} `{id}`")]
    Unknown { kind: &'static str, id: String },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("integration diverged (|df| > 10 Hz) at t = {t:.3} s; reduce dt")]
    Diverged { t: f64 },
    #[error("trajectory not settled: |d(df)/dt| = {rate:.2e} Hz/s at horizon end")]
    NotSettled { rate: f64 },
    #[error("flag vector length mismatch: expected {expected}, got {got}")]
    FlagLength { expected: usize, got: usize },
}

/// SPC mode of one link in a snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkSpcMode {
    Off,
    /// Reacts to the frequency of `supported_area` only.
    Unilateral { supported_area: usize },
    /// Reacts to the frequency difference across the link.
    Bilateral,
}

/// Commitment, participation and scheduled flows at one period.
#[derive(Debug, Clone)]
pub struct DynamicSnapshot {
    pub committed: Vec<bool>,
    pub participating: Vec<bool>,
    pub link_mode: Vec<LinkSpcMode>,
    /// Scheduled signed flow per link (pu), used to orient outage events.
    pub link_flow: Vec<f64>,
}

/// The disturbance applied at t = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DisturbanceEvent {
    /// Loss of `power` pu of generation in `area`.
    GeneratorTrip { area: usize, power: f64 },
    /// Loss of one pole (bipole) or the whole link (monopole): simultaneous
    /// loss of import in one area and of export in the other, with the
    /// faulted link's SPC branch removed.
    HvdcOutage { link: usize },
}

#[derive(Debug, Clone)]
pub struct DynamicScenario {
    pub snapshot: DynamicSnapshot,
    pub event: DisturbanceEvent,
    /// Time step (s).
    pub dt: f64,
    /// Simulation horizon (s); must cover at least ten times the largest
    /// device time constant.
    pub horizon: f64,
}

impl DynamicScenario {
    /// Default integration settings: dt = 1 ms, horizon = max(30 s, 10x the
    /// largest time constant among the committed devices).
    pub fn new(spec: &SystemSpec, snapshot: DynamicSnapshot, event: DisturbanceEvent) -> Self {
        let horizon = 30.0_f64.max(10.0 * max_time_constant(spec, &snapshot));
        DynamicScenario {
            snapshot,
            event,
            dt: 1e-3,
            horizon,
        }
    }

    fn check(&self, spec: &SystemSpec) -> Result<(), DynamicsError> {
        let expect = |got: usize, expected: usize| {
            if got != expected {
                Err(DynamicsError::FlagLength { expected, got })
            } else {
                Ok(())
            }
        };
        expect(self.snapshot.committed.len(), spec.generators.len())?;
        expect(self.snapshot.participating.len(), spec.generators.len())?;
        expect(self.snapshot.link_mode.len(), spec.converters.len())?;
        expect(self.snapshot.link_flow.len(), spec.converters.len())?;
        if !(self.dt > 0.0) {
            return Err(DynamicsError::InvalidScenario("dt must be positive".into()));
        }
        let tmax = max_time_constant(spec, &self.snapshot);
        if self.horizon < 10.0 * tmax {
            return Err(DynamicsError::InvalidScenario(format!(
                "horizon {} s is below 10x the largest time constant ({} s)",
                self.horizon,
                10.0 * tmax
            )));
        }
        match self.event {
            DisturbanceEvent::GeneratorTrip { area, .. } if area >= spec.areas.len() => {
                Err(DynamicsError::Unknown {
                    kind: "area",
                    id: area.to_string(),
                })
            }
            DisturbanceEvent::HvdcOutage { link } if link >= spec.converters.len() => {
                Err(DynamicsError::Unknown {
                    kind: "link",
                    id: link.to_string(),
                })
            }
            _ => Ok(()),
        }
    }
}

fn max_time_constant(spec: &SystemSpec, snap: &DynamicSnapshot) -> f64 {
    let mut tmax: f64 = 0.0;
    for (i, g) in spec.generators.iter().enumerate() {
        if snap.participating[i] {
            tmax = tmax.max(g.turbine_time);
        }
    }
    for (k, c) in spec.converters.iter().enumerate() {
        if snap.link_mode[k] != LinkSpcMode::Off {
            tmax = tmax.max(c.time_const);
        }
    }
    tmax
}

/// Simulated response: all series share the time grid and start at zero.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    /// `area_df_hz[a][n]`: frequency deviation of area a (Hz).
    pub area_df_hz: Vec<Vec<f64>>,
    /// `gen_dp_pu[i][n]`: mechanical power deviation of generator i (pu).
    pub gen_dp_pu: Vec<Vec<f64>>,
    /// `link_dp_pu[k][n]`: SPC power deviation of link k (pu).
    pub link_dp_pu: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn samples(&self) -> usize {
        self.area_df_hz.first().map(Vec::len).unwrap_or(0)
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    /// CSV export with deterministic column order (sorted ids):
    /// `t,<area>_df_hz,...,<gen>_dp_pu,...,<link>_dp_pu`.
    pub fn to_csv(&self, spec: &SystemSpec) -> String {
        let mut areas: Vec<usize> = (0..spec.areas.len()).collect();
        areas.sort_by(|&x, &y| spec.areas[x].id.cmp(&spec.areas[y].id));
        let mut gens: Vec<usize> = (0..spec.generators.len()).collect();
        gens.sort_by(|&x, &y| spec.generators[x].id.cmp(&spec.generators[y].id));
        let mut links: Vec<usize> = (0..spec.converters.len()).collect();
        links.sort_by(|&x, &y| spec.converters[x].id.cmp(&spec.converters[y].id));

        let mut out = String::from("t");
        for &a in &areas {
            out.push_str(&format!(",{}_df_hz", spec.areas[a].id));
        }
        for &i in &gens {
            out.push_str(&format!(",{}_dp_pu", spec.generators[i].id));
        }
        for &k in &links {
            out.push_str(&format!(",{}_dp_pu", spec.converters[k].id));
        }
        out.push('\n');
        for n in 0..self.samples() {
            out.push_str(&format!("{}", self.time(n)));
            for &a in &areas {
                out.push_str(&format!(",{}", self.area_df_hz[a][n]));
            }
            for &i in &gens {
                out.push_str(&format!(",{}", self.gen_dp_pu[i][n]));
            }
            for &k in &links {
                out.push_str(&format!(",{}", self.link_dp_pu[k][n]));
            }
            out.push('\n');
        }
        out
    }
}

struct GovState {
    gen: usize,
    area: usize,
    /// K/R * Pmax (pu).
    gain: f64,
    frac: f64,
    t_g: f64,
}

struct LinkState {
    link: usize,
    /// K/R * Pdc (pu).
    gain: f64,
    t_c: f64,
    /// Area whose deviation drives the controller with +1.
    drive_pos: usize,
    /// For bilateral: the area entering with -1.
    drive_neg: Option<usize>,
    /// Area receiving the response power with +1 (the other endpoint gets -1).
    inject_into: usize,
    other_end: usize,
}

/// Integrates one scenario. Trips inject -dP into the event area at t = 0;
/// outages inject the capacity-based magnitude into both endpoint areas with
/// opposite signs and with the faulted link's controller removed.
pub fn simulate(spec: &SystemSpec, scenario: &DynamicScenario) -> Result<Trajectory, DynamicsError> {
    scenario.check(spec)?;
    let n_areas = spec.areas.len();
    let snap = &scenario.snapshot;

    // per-area inertia and damping
    let mut inertia = vec![0.0; n_areas];
    for (i, g) in spec.generators.iter().enumerate() {
        if snap.committed[i] {
            inertia[spec.gen_area[i]] += g.inertia_contrib();
        }
    }
    let damping: Vec<f64> = spec.areas.iter().map(|a| a.damping).collect();

    let (faulted_link, mut event_inject) = match scenario.event {
        DisturbanceEvent::GeneratorTrip { area, power } => {
            let mut inj = vec![0.0; n_areas];
            inj[area] = -power;
            (None, inj)
        }
        DisturbanceEvent::HvdcOutage { link } => {
            let mag = spec.link_outage_magnitude(link);
            let mut inj = vec![0.0; n_areas];
            // positive scheduled flow goes from the from side to the to side
            let (importer, exporter) = if snap.link_flow[link] >= 0.0 {
                (spec.conv_to_area[link], spec.conv_from_area[link])
            } else {
                (spec.conv_from_area[link], spec.conv_to_area[link])
            };
            inj[importer] = -mag;
            inj[exporter] = mag;
            (Some(link), inj)
        }
    };
    for (a, inj) in event_inject.iter_mut().enumerate() {
        if inertia[a] <= 0.0 && *inj != 0.0 {
            return Err(DynamicsError::InvalidScenario(format!(
                "event area `{}` has no online inertia",
                spec.areas[a].id
            )));
        }
    }

    let govs: Vec<GovState> = spec
        .generators
        .iter()
        .enumerate()
        .filter(|(i, _)| snap.participating[*i])
        .map(|(i, g)| GovState {
            gen: i,
            area: spec.gen_area[i],
            gain: g.droop_gain(),
            frac: g.turbine_fraction,
            t_g: g.turbine_time,
        })
        .collect();

    let links: Vec<LinkState> = spec
        .converters
        .iter()
        .enumerate()
        .filter(|(k, _)| Some(*k) != faulted_link)
        .filter_map(|(k, c)| {
            let (from_a, to_a) = (spec.conv_from_area[k], spec.conv_to_area[k]);
            match snap.link_mode[k] {
                LinkSpcMode::Off => None,
                LinkSpcMode::Unilateral { supported_area } => Some(LinkState {
                    link: k,
                    gain: c.droop_gain(),
                    t_c: c.time_const,
                    drive_pos: supported_area,
                    drive_neg: None,
                    inject_into: supported_area,
                    other_end: if supported_area == from_a { to_a } else { from_a },
                }),
                LinkSpcMode::Bilateral => Some(LinkState {
                    link: k,
                    gain: c.droop_gain(),
                    t_c: c.time_const,
                    drive_pos: from_a,
                    drive_neg: Some(to_a),
                    inject_into: from_a,
                    other_end: to_a,
                }),
            }
        })
        .collect();

    // state layout: [df per area | governor lag per participating gen | link lag]
    let nf = n_areas;
    let ng = govs.len();
    let nl = links.len();
    let dim = nf + ng + nl;
    let mut x = vec![0.0; dim];
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];

    let deriv = |x: &[f64], dx: &mut [f64]| {
        // area swing accumulators start from event injection
        for a in 0..nf {
            dx[a] = event_inject[a];
        }
        for (gi, gov) in govs.iter().enumerate() {
            let df = x[gov.area];
            let lag = x[nf + gi];
            // lead-lag output: K/R * (F*df + (1-F)*lag); opposes the deviation
            let mech = -gov.gain * (gov.frac * df + (1.0 - gov.frac) * lag);
            dx[gov.area] += mech;
            dx[nf + gi] = (df - lag) / gov.t_g;
        }
        for (li, ls) in links.iter().enumerate() {
            let p = x[nf + ng + li];
            dx[ls.inject_into] += p;
            dx[ls.other_end] -= p;
            let drive = x[ls.drive_pos] - ls.drive_neg.map_or(0.0, |a| x[a]);
            dx[nf + ng + li] = (-ls.gain * drive - p) / ls.t_c;
        }
        for a in 0..nf {
            dx[a] = if inertia[a] > 0.0 {
                (dx[a] - damping[a] * x[a]) / inertia[a]
            } else {
                0.0
            };
        }
    };

    let steps = (scenario.horizon / scenario.dt).round() as usize;
    let mut area_df = vec![Vec::with_capacity(steps + 1); n_areas];
    let mut gen_dp = vec![Vec::with_capacity(steps + 1); spec.generators.len()];
    let mut link_dp = vec![Vec::with_capacity(steps + 1); spec.converters.len()];

    let record = |x: &[f64],
                  area_df: &mut Vec<Vec<f64>>,
                  gen_dp: &mut Vec<Vec<f64>>,
                  link_dp: &mut Vec<Vec<f64>>| {
        for a in 0..nf {
            area_df[a].push(x[a] * spec.areas[a].f_base);
        }
        for s in gen_dp.iter_mut() {
            s.push(0.0);
        }
        for (gi, gov) in govs.iter().enumerate() {
            let mech =
                -gov.gain * (gov.frac * x[gov.area] + (1.0 - gov.frac) * x[nf + gi]);
            *gen_dp[gov.gen].last_mut().unwrap() = mech;
        }
        for s in link_dp.iter_mut() {
            s.push(0.0);
        }
        for (li, ls) in links.iter().enumerate() {
            *link_dp[ls.link].last_mut().unwrap() = x[nf + ng + li];
        }
    };

    record(&x, &mut area_df, &mut gen_dp, &mut link_dp);
    let h = scenario.dt;
    for step in 0..steps {
        deriv(&x, &mut k1);
        for i in 0..dim {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        deriv(&tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        deriv(&tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = x[i] + h * k3[i];
        }
        deriv(&tmp, &mut k4);
        for i in 0..dim {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        for a in 0..nf {
            if (x[a] * spec.areas[a].f_base).abs() > 10.0 {
                return Err(DynamicsError::Diverged {
                    t: (step + 1) as f64 * h,
                });
            }
        }
        record(&x, &mut area_df, &mut gen_dp, &mut link_dp);
    }

    Ok(Trajectory {
        dt: h,
        area_df_hz: area_df,
        gen_dp_pu: gen_dp,
        link_dp_pu: link_dp,
    })
}

/// Measures RoCoF, nadir, SSFD and time to nadir from a trajectory.
/// Requires the trajectory to have settled: |d(df)/dt| < 1e-4 Hz/s at the
/// horizon end. RoCoF is the largest centred difference within the first
/// second; the SSFD is the mean of the last 5% of samples.
pub fn extract_metrics(traj: &Trajectory, area: usize) -> Result<FrequencyMetrics, DynamicsError> {
    let s = &traj.area_df_hz[area];
    let n = s.len();
    if n < 3 {
        return Err(DynamicsError::InvalidScenario(
            "trajectory too short".into(),
        ));
    }
    let end_rate = (s[n - 1] - s[n - 3]).abs() / (2.0 * traj.dt);
    if end_rate >= 1e-4 {
        return Err(DynamicsError::NotSettled { rate: end_rate });
    }

    let first_second = ((1.0 / traj.dt) as usize).min(n - 2);
    let mut rocof: f64 = 0.0;
    for i in 1..=first_second {
        rocof = rocof.max(((s[i + 1] - s[i - 1]) / (2.0 * traj.dt)).abs());
    }
    let (mut nadir, mut t_nadir) = (0.0_f64, 0.0_f64);
    for (i, &v) in s.iter().enumerate() {
        if v.abs() > nadir {
            nadir = v.abs();
            t_nadir = i as f64 * traj.dt;
        }
    }
    let tail = (n / 20).max(1);
    let ssfd = s[n - tail..].iter().sum::<f64>().abs() / tail as f64;
    Ok(FrequencyMetrics {
        rocof_max: rocof,
        nadir,
        ssfd,
        t_nadir,
        modal: None,
    })
}

/// Result of an HVDC outage simulation: one coupled run covering both
/// endpoint areas, with the affected sides labelled.
#[derive(Debug)]
pub struct HvdcOutageResult {
    pub trajectory: Trajectory,
    pub importer_area: usize,
    pub exporter_area: usize,
}

/// Simulates the loss of link `link` under a solution snapshot: the importer
/// loses the capacity-based magnitude, the exporter gains it, and the
/// faulted link's SPC branch is removed.
pub fn simulate_hvdc_outage(
    spec: &SystemSpec,
    snapshot: &DynamicSnapshot,
    link: &str,
) -> Result<HvdcOutageResult, DynamicsError> {
    let k = spec
        .converter_index(link)
        .ok_or_else(|| DynamicsError::Unknown {
            kind: "link",
            id: link.to_string(),
        })?;
    let (importer, exporter) = if snapshot.link_flow[k] >= 0.0 {
        (spec.conv_to_area[k], spec.conv_from_area[k])
    } else {
        (spec.conv_from_area[k], spec.conv_to_area[k])
    };
    let scenario = DynamicScenario::new(
        spec,
        snapshot.clone(),
        DisturbanceEvent::HvdcOutage { link: k },
    );
    let trajectory = simulate(spec, &scenario)?;
    Ok(HvdcOutageResult {
        trajectory,
        importer_area: importer,
        exporter_area: exporter,
    })
}
