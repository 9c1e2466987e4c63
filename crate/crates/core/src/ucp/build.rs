//! Assembly of the unit-commitment MILP.
//!
//! Variable names are dot-separated (`g.G12.7` is the output of G12 in hour
//! 7, 1-based) so the model exports cleanly to LP text. The builder records
//! every variable index in [`VarIds`] for direct extraction.

use super::{Mode, ReserveGranularity, ScenarioConfig, UcpError, BIG_M};
use crate::nadir::Scheme;
use crate::solver::{ModelHandle, ObjSense, RowSense, VarKind};
use crate::system::{ConverterTechnology, SystemSpec};
use std::collections::BTreeMap;

/// Per-area segment breakpoints of the piecewise McCormick relaxation:
/// geometric spacing keeps the relative product error uniform across cells.
#[derive(Debug, Clone)]
pub struct McCormickRanges {
    /// `r_breaks[a]`: segment boundaries of the droop aggregate, length
    /// segments+1. The reciprocal segments of S are derived from these.
    pub r_breaks: Vec<Vec<f64>>,
}

/// Indices of every variable family, `usize::MAX` never used: families not
/// present in a mode hold empty vectors.
#[derive(Debug, Clone, Default)]
pub struct VarIds {
    pub t_count: usize,
    // per generator per period
    pub g: Vec<Vec<usize>>,
    pub gs: Vec<Vec<usize>>,
    pub u: Vec<Vec<usize>>,
    pub y: Vec<Vec<usize>>,
    pub z: Vec<Vec<usize>>,
    pub vg: Vec<Vec<usize>>,
    pub vsg: Vec<Vec<usize>>,
    // per load / res / bus / link per period
    pub ds: Vec<Vec<usize>>,
    pub wc: Vec<Vec<usize>>,
    pub theta: Vec<Vec<usize>>,
    pub pdc: Vec<Vec<usize>>,
    /// (link, supported area) -> per-period response capacity.
    pub ps: BTreeMap<(usize, usize), Vec<usize>>,
    /// (link, supported area) -> per-period big-M product with S.
    pub vsc: BTreeMap<(usize, usize), Vec<usize>>,
    /// (supported area a, supporting area b) -> per-period participation.
    pub vc: BTreeMap<(usize, usize), Vec<usize>>,
    /// LCC direction binaries per link per block.
    pub ulcc: Vec<Vec<usize>>,
    // per area per period aggregates (frequency modes only)
    pub rg: Vec<Vec<usize>>,
    pub fg: Vec<Vec<usize>>,
    pub rhat: Vec<Vec<usize>>,
    pub fhat: Vec<Vec<usize>>,
    pub mhat: Vec<Vec<usize>>,
    pub shat: Vec<Vec<usize>>,
    /// (a, b) -> per-period converter droop between the pair, seen from a.
    pub rcpair: BTreeMap<(usize, usize), Vec<usize>>,
    // McCormick cell variables [area][t][cell = x*segments+y]
    pub mc_w: Vec<Vec<Vec<usize>>>,
    pub mc_r: Vec<Vec<Vec<usize>>>,
    pub mc_s: Vec<Vec<Vec<usize>>>,
    // dual-bearing rows
    pub balance_rows: Vec<Vec<usize>>,
    pub shed_rows: Vec<Vec<usize>>,
}

pub struct BuiltModel {
    pub model: ModelHandle,
    pub ids: VarIds,
    pub ranges: McCormickRanges,
    /// Adjacent area pairs (a < b) that share at least one link.
    pub pairs: Vec<(usize, usize)>,
}

/// SSFD-driven lower bound on the droop aggregate of an area; the explicit
/// R >= 1 floor backs the big-M argument.
pub fn droop_floor(spec: &SystemSpec, a: usize) -> f64 {
    let ar = &spec.areas[a];
    (ar.f_base * ar.dimensioning_incident / ar.ssfd_limit - ar.damping).max(1.0)
}

/// Inertia floor from the RoCoF bound.
pub fn inertia_floor(spec: &SystemSpec, a: usize) -> f64 {
    let ar = &spec.areas[a];
    ar.f_base * ar.dimensioning_incident / ar.rocof_limit
}

fn fleet_droop_max(spec: &SystemSpec, a: usize) -> f64 {
    spec.area_gens[a]
        .iter()
        .map(|&i| spec.generators[i].droop_gain())
        .sum()
}

fn fleet_inertia_max(spec: &SystemSpec, a: usize) -> f64 {
    spec.area_gens[a]
        .iter()
        .map(|&i| spec.generators[i].inertia_contrib())
        .sum()
}

fn conv_droop_max(spec: &SystemSpec, a: usize) -> f64 {
    spec.area_links[a]
        .iter()
        .map(|&k| spec.converters[k].droop_gain())
        .sum()
}

fn day_anchor(t: usize) -> usize {
    t - t % 24
}

/// Builds the full MILP for one scenario. Fails fast on configuration
/// errors and on structural infeasibility that no commitment can repair.
pub fn build_ucp(spec: &SystemSpec, cfg: &ScenarioConfig) -> Result<BuiltModel, UcpError> {
    let t_count = match cfg.horizon {
        Some(h) => {
            if h == 0 || h > spec.series.horizon {
                return Err(UcpError::Config(format!(
                    "horizon {h} outside the series length {}",
                    spec.series.horizon
                )));
            }
            h
        }
        None => spec.series.horizon,
    };
    if t_count == 0 {
        return Err(UcpError::Config("empty horizon".into()));
    }
    if cfg.mccormick_segments == 0 {
        return Err(UcpError::Config("mccormick_segments must be >= 1".into()));
    }
    if cfg.lcc_block_len == 0 {
        return Err(UcpError::Config("lcc_block_len must be >= 1".into()));
    }

    let freq = cfg.mode.uses_frequency_constraints();
    let spc = cfg.mode.uses_spc();

    // adjacent pairs (a<b) sharing links
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for k in 0..spec.converters.len() {
        let (x, y) = (spec.conv_from_area[k], spec.conv_to_area[k]);
        let p = (x.min(y), x.max(y));
        if !pairs.contains(&p) {
            pairs.push(p);
        }
    }
    pairs.sort_unstable();

    // pre-solve structural checks and hyperplane presence
    let mut ranges = McCormickRanges {
        r_breaks: vec![Vec::new(); spec.areas.len()],
    };
    if freq {
        for (a, ar) in spec.areas.iter().enumerate() {
            if spec.area_gens[a].is_empty() {
                continue;
            }
            let m_need = inertia_floor(spec, a);
            let m_have = fleet_inertia_max(spec, a);
            if m_have < m_need {
                return Err(UcpError::StructuralInfeasibility {
                    area: ar.id.clone(),
                    check: "RoCoF inertia floor",
                    required: m_need,
                    available: m_have,
                });
            }
            let r_need = droop_floor(spec, a);
            let r_have = fleet_droop_max(spec, a);
            if r_have < r_need {
                return Err(UcpError::StructuralInfeasibility {
                    area: ar.id.clone(),
                    check: "SSFD droop floor",
                    required: r_need,
                    available: r_have,
                });
            }
            let plane = cfg
                .planes
                .get(&ar.id)
                .ok_or_else(|| UcpError::MissingHyperplane(ar.id.clone()))?;
            if plane.diagnostics.false_feasible_count != 0 {
                return Err(UcpError::BadHyperplane {
                    area: ar.id.clone(),
                    detail: "certification reports false-feasible points".into(),
                });
            }
            let want = match cfg.mode {
                Mode::Bilateral => Scheme::Bilateral,
                _ => Scheme::Unilateral,
            };
            if plane.scheme != want {
                return Err(UcpError::BadHyperplane {
                    area: ar.id.clone(),
                    detail: format!("plane scheme {:?} does not fit mode {:?}", plane.scheme, cfg.mode),
                });
            }

            // geometric segmentation of [r_lo, r_hi]
            let r_lo = r_need;
            let r_hi = r_have + if spc { conv_droop_max(spec, a) } else { 0.0 };
            let n = cfg.mccormick_segments;
            let ratio = r_hi / r_lo;
            let breaks: Vec<f64> = (0..=n)
                .map(|i| r_lo * ratio.powf(i as f64 / n as f64))
                .collect();
            ranges.r_breaks[a] = breaks;
        }
    }

    let mut m = ModelHandle::new(format!("ucp.{}", cfg.mode.as_str()));
    m.sense = ObjSense::Minimize;
    m.options = cfg.solver.clone();

    let gens = &spec.generators;
    let n_a = spec.areas.len();
    let t1 = |t: usize| t + 1; // 1-based period labels

    let mut ids = VarIds {
        t_count,
        ..Default::default()
    };

    // --- variables -------------------------------------------------------
    for (i, g) in gens.iter().enumerate() {
        let gid = &g.id;
        ids.g.push(Vec::new());
        ids.gs.push(Vec::new());
        ids.u.push(Vec::new());
        ids.y.push(Vec::new());
        ids.z.push(Vec::new());
        ids.vg.push(Vec::new());
        ids.vsg.push(Vec::new());
        for t in 0..t_count {
            let s = t1(t);
            ids.g[i].push(m.add_var(format!("g.{gid}.{s}"), VarKind::Continuous, 0.0, g.p_max, g.cost_energy));
            ids.gs[i].push(m.add_var(format!("gs.{gid}.{s}"), VarKind::Continuous, 0.0, g.p_max, g.cost_reserve));
            ids.u[i].push(m.add_var(format!("u.{gid}.{s}"), VarKind::Binary, 0.0, 1.0, 0.0));
            ids.y[i].push(m.add_var(format!("y.{gid}.{s}"), VarKind::Binary, 0.0, 1.0, g.cost_startup));
            ids.z[i].push(m.add_var(format!("z.{gid}.{s}"), VarKind::Binary, 0.0, 1.0, g.cost_shutdown));
            ids.vg[i].push(m.add_var(format!("vg.{gid}.{s}"), VarKind::Binary, 0.0, 1.0, 0.0));
            if freq {
                ids.vsg[i].push(m.add_var(format!("vsg.{gid}.{s}"), VarKind::Continuous, 0.0, BIG_M, 0.0));
            }
        }
    }
    for (j, l) in spec.loads.iter().enumerate() {
        ids.ds.push(Vec::new());
        for t in 0..t_count {
            ids.ds[j].push(m.add_var(
                format!("ds.{}.{}", l.id, t1(t)),
                VarKind::Continuous,
                0.0,
                f64::INFINITY,
                l.voll,
            ));
        }
    }
    for (r, w) in spec.res.iter().enumerate() {
        ids.wc.push(Vec::new());
        for t in 0..t_count {
            ids.wc[r].push(m.add_var(
                format!("wc.{}.{}", w.id, t1(t)),
                VarKind::Continuous,
                0.0,
                spec.series.res[r][t],
                w.curtail_value,
            ));
        }
    }
    // one angle reference per synchronous area: the lowest-indexed bus
    let mut is_ref = vec![false; spec.buses.len()];
    for a in 0..n_a {
        if let Some(&b) = spec.area_buses[a].first() {
            is_ref[b] = true;
        }
    }
    for (b, bus) in spec.buses.iter().enumerate() {
        ids.theta.push(Vec::new());
        let (lb, ub) = if is_ref[b] {
            (0.0, 0.0)
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        };
        for t in 0..t_count {
            ids.theta[b].push(m.add_var(
                format!("theta.{}.{}", bus.id, t1(t)),
                VarKind::Continuous,
                lb,
                ub,
                0.0,
            ));
        }
    }
    let n_blocks = t_count.div_ceil(cfg.lcc_block_len);
    for (k, c) in spec.converters.iter().enumerate() {
        ids.pdc.push(Vec::new());
        for t in 0..t_count {
            // VSC bounds are plain; LCC flows are constrained via the
            // direction binary below, so keep the box as the outer envelope
            ids.pdc[k].push(m.add_var(
                format!("pdc.{}.{}", c.id, t1(t)),
                VarKind::Continuous,
                -c.capacity,
                c.capacity,
                0.0,
            ));
        }
        if c.technology == ConverterTechnology::Lcc {
            let mut blocks = Vec::new();
            for blk in 0..n_blocks {
                blocks.push(m.add_var(
                    format!("ulcc.{}.{}", c.id, blk + 1),
                    VarKind::Binary,
                    0.0,
                    1.0,
                    0.0,
                ));
            }
            ids.ulcc.push(blocks);
        } else {
            ids.ulcc.push(Vec::new());
        }
    }
    if spc {
        for &(x, y) in &pairs {
            for (a, b) in [(x, y), (y, x)] {
                let mut v = Vec::new();
                for t in 0..t_count {
                    v.push(m.add_var(
                        format!("vc.{}.{}.{}", spec.areas[a].id, spec.areas[b].id, t1(t)),
                        VarKind::Binary,
                        0.0,
                        1.0,
                        0.0,
                    ));
                }
                ids.vc.insert((a, b), v);
            }
        }
        for (k, c) in spec.converters.iter().enumerate() {
            for a in [spec.conv_from_area[k], spec.conv_to_area[k]] {
                let aid = &spec.areas[a].id;
                let mut ps = Vec::new();
                let mut vsc = Vec::new();
                for t in 0..t_count {
                    ps.push(m.add_var(
                        format!("ps.{}.{}.{}", c.id, aid, t1(t)),
                        VarKind::Continuous,
                        0.0,
                        f64::INFINITY,
                        0.0,
                    ));
                    vsc.push(m.add_var(
                        format!("vsc.{}.{}.{}", c.id, aid, t1(t)),
                        VarKind::Continuous,
                        0.0,
                        BIG_M,
                        0.0,
                    ));
                }
                ids.ps.insert((k, a), ps);
                ids.vsc.insert((k, a), vsc);
            }
        }
    }
    if freq {
        for a in 0..n_a {
            let aid = &spec.areas[a].id;
            let (mut rg, mut fg, mut rhat, mut fhat, mut mhat, mut shat) =
                (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
            let breaks = &ranges.r_breaks[a];
            let (r_lo, r_hi) = if breaks.is_empty() {
                (0.0, 0.0)
            } else {
                (breaks[0], breaks[breaks.len() - 1])
            };
            let agg_ub = if breaks.is_empty() { 0.0 } else { f64::INFINITY };
            for t in 0..t_count {
                let s = t1(t);
                rg.push(m.add_var(format!("rg.{aid}.{s}"), VarKind::Continuous, 0.0, agg_ub, 0.0));
                fg.push(m.add_var(format!("fg.{aid}.{s}"), VarKind::Continuous, 0.0, agg_ub, 0.0));
                rhat.push(m.add_var(format!("rhat.{aid}.{s}"), VarKind::Continuous, r_lo, r_hi, 0.0));
                fhat.push(m.add_var(format!("fhat.{aid}.{s}"), VarKind::Continuous, 0.0, agg_ub, 0.0));
                mhat.push(m.add_var(format!("mhat.{aid}.{s}"), VarKind::Continuous, 0.0, agg_ub, 0.0));
                let (s_lo, s_hi) = if r_hi > 0.0 { (1.0 / r_hi, 1.0 / r_lo) } else { (0.0, 0.0) };
                shat.push(m.add_var(format!("shat.{aid}.{s}"), VarKind::Continuous, s_lo, s_hi, 0.0));
            }
            ids.rg.push(rg);
            ids.fg.push(fg);
            ids.rhat.push(rhat);
            ids.fhat.push(fhat);
            ids.mhat.push(mhat);
            ids.shat.push(shat);
        }
        if spc {
            for &(x, y) in &pairs {
                for (a, b) in [(x, y), (y, x)] {
                    let mut v = Vec::new();
                    for t in 0..t_count {
                        v.push(m.add_var(
                            format!("rc.{}.{}.{}", spec.areas[a].id, spec.areas[b].id, t1(t)),
                            VarKind::Continuous,
                            0.0,
                            f64::INFINITY,
                            0.0,
                        ));
                    }
                    ids.rcpair.insert((a, b), v);
                }
            }
        }
        // McCormick cells
        let segs = cfg.mccormick_segments;
        for a in 0..n_a {
            let aid = &spec.areas[a].id;
            let breaks = &ranges.r_breaks[a];
            let mut per_area_w = Vec::new();
            let mut per_area_r = Vec::new();
            let mut per_area_s = Vec::new();
            for t in 0..t_count {
                let s = t1(t);
                let mut wv = Vec::new();
                let mut rv = Vec::new();
                let mut sv = Vec::new();
                if !breaks.is_empty() {
                    for x in 0..segs {
                        for y in 0..segs {
                            wv.push(m.add_var(
                                format!("mcw.{aid}.{s}.{}.{}", x + 1, y + 1),
                                VarKind::Binary,
                                0.0,
                                1.0,
                                0.0,
                            ));
                            rv.push(m.add_var(
                                format!("mcr.{aid}.{s}.{}.{}", x + 1, y + 1),
                                VarKind::Continuous,
                                0.0,
                                breaks[x + 1],
                                0.0,
                            ));
                            sv.push(m.add_var(
                                format!("mcs.{aid}.{s}.{}.{}", x + 1, y + 1),
                                VarKind::Continuous,
                                0.0,
                                1.0 / breaks[segs - 1 - y],
                                0.0,
                            ));
                        }
                    }
                }
                per_area_w.push(wv);
                per_area_r.push(rv);
                per_area_s.push(sv);
            }
            ids.mc_w.push(per_area_w);
            ids.mc_r.push(per_area_r);
            ids.mc_s.push(per_area_s);
        }
    }

    // --- constraints ------------------------------------------------------
    for (i, g) in gens.iter().enumerate() {
        let gid = &g.id;
        for t in 0..t_count {
            let s = t1(t);
            // capacity with commitment
            m.add_con(
                format!("cap_hi.{gid}.{s}"),
                vec![(ids.g[i][t], 1.0), (ids.u[i][t], -g.p_max)],
                RowSense::Le,
                0.0,
            );
            m.add_con(
                format!("cap_lo.{gid}.{s}"),
                vec![(ids.g[i][t], 1.0), (ids.u[i][t], -g.p_min)],
                RowSense::Ge,
                0.0,
            );
            // ramping (units start from zero output before the horizon)
            if t > 0 {
                m.add_con(
                    format!("ramp_up.{gid}.{s}"),
                    vec![(ids.g[i][t], 1.0), (ids.g[i][t - 1], -1.0)],
                    RowSense::Le,
                    g.ramp_up,
                );
                m.add_con(
                    format!("ramp_dn.{gid}.{s}"),
                    vec![(ids.g[i][t - 1], 1.0), (ids.g[i][t], -1.0)],
                    RowSense::Le,
                    g.ramp_down,
                );
            }
            // start/stop definition; u[-1] = 0
            let mut terms = vec![(ids.y[i][t], 1.0), (ids.u[i][t], -1.0)];
            if t > 0 {
                terms.push((ids.u[i][t - 1], 1.0));
            }
            m.add_con(format!("startup.{gid}.{s}"), terms, RowSense::Ge, 0.0);
            if t > 0 {
                m.add_con(
                    format!("shutdown.{gid}.{s}"),
                    vec![(ids.z[i][t], 1.0), (ids.u[i][t - 1], -1.0), (ids.u[i][t], 1.0)],
                    RowSense::Ge,
                    0.0,
                );
            }
            // minimum online duration: a start at t forbids stops in the window
            let on_end = (t + g.t_on.max(1) - 1).min(t_count - 1);
            if on_end > t {
                let mut terms = vec![(ids.y[i][t], 1.0)];
                for tau in t + 1..=on_end {
                    terms.push((ids.z[i][tau], 1.0));
                }
                m.add_con(format!("min_on.{gid}.{s}"), terms, RowSense::Le, 1.0);
            }
            let off_end = (t + g.t_off.max(1) - 1).min(t_count - 1);
            if off_end > t {
                let mut terms = vec![(ids.z[i][t], 1.0)];
                for tau in t + 1..=off_end {
                    terms.push((ids.y[i][tau], 1.0));
                }
                m.add_con(format!("min_off.{gid}.{s}"), terms, RowSense::Le, 1.0);
            }
            // only online units may offer frequency support
            m.add_con(
                format!("part.{gid}.{s}"),
                vec![(ids.vg[i][t], 1.0), (ids.u[i][t], -1.0)],
                RowSense::Le,
                0.0,
            );
            // reserved capacity must fit under the unit ceiling
            m.add_con(
                format!("headroom.{gid}.{s}"),
                vec![(ids.g[i][t], 1.0), (ids.gs[i][t], 1.0), (ids.u[i][t], -g.p_max)],
                RowSense::Le,
                0.0,
            );
            if !freq {
                // without the proportional-share equality the reserve is a
                // free decision gated by participation
                m.add_con(
                    format!("res_gate.{gid}.{s}"),
                    vec![(ids.gs[i][t], 1.0), (ids.vg[i][t], -g.p_max)],
                    RowSense::Le,
                    0.0,
                );
            }
            // daily participation granularity
            if cfg.granularity == ReserveGranularity::Daily {
                let anchor = day_anchor(t);
                if anchor != t {
                    m.add_con(
                        format!("vg_daily.{gid}.{s}"),
                        vec![(ids.vg[i][t], 1.0), (ids.vg[i][anchor], -1.0)],
                        RowSense::Eq,
                        0.0,
                    );
                }
            }
        }
    }

    // AC line flows in both directions
    for (l, line) in spec.ac_lines.iter().enumerate() {
        let (fb, tb) = (spec.line_from_bus[l], spec.line_to_bus[l]);
        for t in 0..t_count {
            let s = t1(t);
            let terms = vec![(ids.theta[fb][t], line.susceptance), (ids.theta[tb][t], -line.susceptance)];
            m.add_con(format!("ac_hi.{}.{}", line.id, s), terms.clone(), RowSense::Le, line.limit);
            m.add_con(format!("ac_lo.{}.{}", line.id, s), terms, RowSense::Ge, -line.limit);
        }
    }

    // LCC direction: flow sign pinned within each block
    for (k, c) in spec.converters.iter().enumerate() {
        if c.technology != ConverterTechnology::Lcc {
            continue;
        }
        for t in 0..t_count {
            let s = t1(t);
            let blk = t / cfg.lcc_block_len;
            let ub = ids.ulcc[k][blk];
            m.add_con(
                format!("lcc_hi.{}.{}", c.id, s),
                vec![(ids.pdc[k][t], 1.0), (ub, -c.capacity)],
                RowSense::Le,
                0.0,
            );
            m.add_con(
                format!("lcc_lo.{}.{}", c.id, s),
                vec![(ids.pdc[k][t], 1.0), (ub, -c.capacity)],
                RowSense::Ge,
                -c.capacity,
            );
        }
    }

    // nodal balance, generation-minus-net-load form: the equality dual is
    // the marginal cost of demand at the bus
    ids.balance_rows = vec![Vec::new(); spec.buses.len()];
    for (b, bus) in spec.buses.iter().enumerate() {
        for t in 0..t_count {
            let mut terms: Vec<(usize, f64)> = Vec::new();
            let mut rhs = 0.0;
            for (i, _) in gens.iter().enumerate().filter(|(i, _)| spec.gen_bus[*i] == b) {
                terms.push((ids.g[i][t], 1.0));
            }
            for (r, _) in spec.res.iter().enumerate().filter(|(r, _)| spec.res_bus[*r] == b) {
                terms.push((ids.wc[r][t], -1.0));
                rhs -= spec.series.res[r][t];
            }
            for (j, _) in spec.loads.iter().enumerate().filter(|(j, _)| spec.load_bus[*j] == b) {
                terms.push((ids.ds[j][t], 1.0));
                rhs += spec.series.load[j][t];
            }
            for (l, line) in spec.ac_lines.iter().enumerate() {
                if spec.line_from_bus[l] == b {
                    terms.push((ids.theta[b][t], -line.susceptance));
                    terms.push((ids.theta[spec.line_to_bus[l]][t], line.susceptance));
                } else if spec.line_to_bus[l] == b {
                    terms.push((ids.theta[b][t], -line.susceptance));
                    terms.push((ids.theta[spec.line_from_bus[l]][t], line.susceptance));
                }
            }
            for k in 0..spec.converters.len() {
                let inc = spec.incidence(b, k);
                if inc != 0.0 {
                    terms.push((ids.pdc[k][t], -inc));
                }
            }
            // parallel lines touch the same angle twice; merge duplicates
            let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
            for (v, c) in terms {
                *merged.entry(v).or_insert(0.0) += c;
            }
            let row = m.add_con(
                format!("bal.{}.{}", bus.id, t1(t)),
                merged.into_iter().collect(),
                RowSense::Eq,
                rhs,
            );
            ids.balance_rows[b].push(row);
        }
    }

    // shedding caps as explicit rows so their duals price lost load
    ids.shed_rows = vec![Vec::new(); spec.loads.len()];
    for (j, l) in spec.loads.iter().enumerate() {
        for t in 0..t_count {
            let row = m.add_con(
                format!("shed.{}.{}", l.id, t1(t)),
                vec![(ids.ds[j][t], 1.0)],
                RowSense::Le,
                spec.series.load[j][t],
            );
            ids.shed_rows[j].push(row);
        }
    }

    // participation exclusivity / symmetry and daily linking
    if spc {
        for &(x, y) in &pairs {
            let (ab, ba) = (&ids.vc[&(x, y)], &ids.vc[&(y, x)]);
            for t in 0..t_count {
                let s = t1(t);
                match cfg.mode {
                    Mode::Unilateral => {
                        m.add_con(
                            format!("vc_excl.{}.{}.{}", spec.areas[x].id, spec.areas[y].id, s),
                            vec![(ab[t], 1.0), (ba[t], 1.0)],
                            RowSense::Le,
                            1.0,
                        );
                    }
                    Mode::Bilateral => {
                        m.add_con(
                            format!("vc_sym.{}.{}.{}", spec.areas[x].id, spec.areas[y].id, s),
                            vec![(ab[t], 1.0), (ba[t], -1.0)],
                            RowSense::Eq,
                            0.0,
                        );
                    }
                    _ => unreachable!(),
                }
                if cfg.granularity == ReserveGranularity::Daily {
                    let anchor = day_anchor(t);
                    if anchor != t {
                        for v in [ab, ba] {
                            let name = format!("vc_daily.{}", m.vars[v[t]].name);
                            m.add_con(name, vec![(v[t], 1.0), (v[anchor], -1.0)], RowSense::Eq, 0.0);
                        }
                    }
                }
            }
        }
    }

    if freq {
        build_frequency_constraints(spec, cfg, &mut m, &mut ids, &ranges, &pairs, t_count)?;
    } else {
        // minimum reserve requirement replaces the frequency constraints
        for (a, ar) in spec.areas.iter().enumerate() {
            if spec.area_gens[a].is_empty() {
                continue;
            }
            for t in 0..t_count {
                let terms: Vec<(usize, f64)> = spec.area_gens[a]
                    .iter()
                    .map(|&i| (ids.gs[i][t], 1.0))
                    .collect();
                m.add_con(
                    format!("min_res.{}.{}", ar.id, t1(t)),
                    terms,
                    RowSense::Ge,
                    ar.dimensioning_incident,
                );
            }
        }
    }

    Ok(BuiltModel {
        model: m,
        ids,
        ranges,
        pairs,
    })
}

/// Aggregate definitions, RoCoF/SSFD bounds, the nadir hyperplane, the
/// piecewise McCormick surrogate for S = 1/R, the big-M reserve shares and
/// the post-contingency headroom and floors.
#[allow(clippy::too_many_arguments)]
fn build_frequency_constraints(
    spec: &SystemSpec,
    cfg: &ScenarioConfig,
    m: &mut ModelHandle,
    ids: &mut VarIds,
    ranges: &McCormickRanges,
    pairs: &[(usize, usize)],
    t_count: usize,
) -> Result<(), UcpError> {
    let spc = cfg.mode.uses_spc();
    let segs = cfg.mccormick_segments;
    let t1 = |t: usize| t + 1;

    for (a, ar) in spec.areas.iter().enumerate() {
        if spec.area_gens[a].is_empty() {
            continue;
        }
        let aid = &ar.id;
        let dp = ar.dimensioning_incident;
        for t in 0..t_count {
            let s = t1(t);
            // aggregate definitions
            let mut rg_terms = vec![(ids.rg[a][t], -1.0)];
            let mut fg_terms = vec![(ids.fg[a][t], -1.0)];
            let mut m_terms = vec![(ids.mhat[a][t], -1.0)];
            for &i in &spec.area_gens[a] {
                let g = &spec.generators[i];
                rg_terms.push((ids.vg[i][t], g.droop_gain()));
                fg_terms.push((ids.vg[i][t], g.turbine_gain()));
                m_terms.push((ids.u[i][t], g.inertia_contrib()));
            }
            m.add_con(format!("def_rg.{aid}.{s}"), rg_terms, RowSense::Eq, 0.0);
            m.add_con(format!("def_fg.{aid}.{s}"), fg_terms, RowSense::Eq, 0.0);
            m.add_con(format!("def_m.{aid}.{s}"), m_terms, RowSense::Eq, 0.0);

            // converter droop aggregates per neighbouring pair
            let mut rc_terms: Vec<(usize, f64)> = Vec::new();
            if spc {
                for &(x, y) in pairs {
                    let b = if x == a {
                        y
                    } else if y == a {
                        x
                    } else {
                        continue;
                    };
                    let pair_var = ids.rcpair[&(a, b)][t];
                    let mut terms = vec![(pair_var, -1.0)];
                    let vc = ids.vc[&(a, b)][t];
                    let gain: f64 = spec.area_links[a]
                        .iter()
                        .filter(|&&k| spec.link_peer_area(k, a) == Some(b))
                        .map(|&k| spec.converters[k].droop_gain())
                        .sum();
                    terms.push((vc, gain));
                    m.add_con(
                        format!("def_rc.{aid}.{}.{s}", spec.areas[b].id),
                        terms,
                        RowSense::Eq,
                        0.0,
                    );
                    rc_terms.push((pair_var, 1.0));
                }
            }
            // rhat = rg + sum rcpair; fhat = fg + sum rcpair
            let mut rhat_terms = vec![(ids.rhat[a][t], -1.0), (ids.rg[a][t], 1.0)];
            let mut fhat_terms = vec![(ids.fhat[a][t], -1.0), (ids.fg[a][t], 1.0)];
            for &(v, _) in &rc_terms {
                rhat_terms.push((v, 1.0));
                fhat_terms.push((v, 1.0));
            }
            m.add_con(format!("def_rhat.{aid}.{s}"), rhat_terms, RowSense::Eq, 0.0);
            m.add_con(format!("def_fhat.{aid}.{s}"), fhat_terms, RowSense::Eq, 0.0);

            // RoCoF and SSFD floors
            m.add_con(
                format!("rocof.{aid}.{s}"),
                vec![(ids.mhat[a][t], 1.0)],
                RowSense::Ge,
                inertia_floor(spec, a),
            );
            m.add_con(
                format!("ssfd.{aid}.{s}"),
                vec![(ids.rg[a][t], 1.0)],
                RowSense::Ge,
                ar.f_base * dp / ar.ssfd_limit - ar.damping,
            );

            // nadir hyperplane
            let plane = &cfg.planes[aid];
            match cfg.mode {
                Mode::NoSpc | Mode::Unilateral => {
                    let a_r = plane.coefficients.get("r_hat").copied().ok_or_else(|| {
                        UcpError::BadHyperplane {
                            area: aid.clone(),
                            detail: "missing coefficient r_hat".into(),
                        }
                    })?;
                    let a_m = plane.coefficients.get("m_hat").copied().ok_or_else(|| {
                        UcpError::BadHyperplane {
                            area: aid.clone(),
                            detail: "missing coefficient m_hat".into(),
                        }
                    })?;
                    m.add_con(
                        format!("nadir.{aid}.{s}"),
                        vec![
                            (ids.fhat[a][t], 1.0),
                            (ids.rhat[a][t], -a_r),
                            (ids.mhat[a][t], -a_m),
                        ],
                        RowSense::Ge,
                        plane.intercept,
                    );
                }
                Mode::Bilateral => {
                    let coef = |key: &str| -> Result<f64, UcpError> {
                        plane.coefficients.get(key).copied().ok_or_else(|| {
                            UcpError::BadHyperplane {
                                area: aid.clone(),
                                detail: format!("missing coefficient {key}"),
                            }
                        })
                    };
                    let mut terms = vec![
                        (ids.fg[a][t], 1.0),
                        (ids.rg[a][t], -coef("rg_a")?),
                        (ids.mhat[a][t], -coef("m_a")?),
                    ];
                    for &(x, y) in pairs {
                        let b = if x == a {
                            y
                        } else if y == a {
                            x
                        } else {
                            continue;
                        };
                        let bid = &spec.areas[b].id;
                        terms.push((ids.rg[b][t], -coef(&format!("rg_b:{bid}"))?));
                        terms.push((ids.mhat[b][t], -coef(&format!("m_b:{bid}"))?));
                        terms.push((ids.fg[b][t], -coef(&format!("fg_b:{bid}"))?));
                        terms.push((ids.rcpair[&(a, b)][t], -coef(&format!("rc:{bid}"))?));
                    }
                    m.add_con(format!("nadir.{aid}.{s}"), terms, RowSense::Ge, plane.intercept);
                }
                Mode::NoLim => unreachable!(),
            }

            // piecewise McCormick for rhat * shat = 1
            let breaks = &ranges.r_breaks[a];
            let w = &ids.mc_w[a][t];
            let r = &ids.mc_r[a][t];
            let sv = &ids.mc_s[a][t];
            let cell = |x: usize, y: usize| x * segs + y;
            let r_b = |x: usize| (breaks[x], breaks[x + 1]);
            // S segment y spans the reciprocals of R segment (segs-1-y),
            // so S breakpoints ascend as y does
            let s_b = |y: usize| {
                let xm = segs - 1 - y;
                (1.0 / breaks[xm + 1], 1.0 / breaks[xm])
            };
            let mut env = |tag: &str, use_r_hi: bool, use_s_hi: bool, sense: RowSense| {
                let mut terms: Vec<(usize, f64)> = Vec::new();
                for x in 0..segs {
                    for y in 0..segs {
                        let (r_lo, r_hi) = r_b(x);
                        let (s_lo, s_hi) = s_b(y);
                        let rb = if use_r_hi { r_hi } else { r_lo };
                        let sb = if use_s_hi { s_hi } else { s_lo };
                        terms.push((r[cell(x, y)], sb));
                        terms.push((sv[cell(x, y)], rb));
                        terms.push((w[cell(x, y)], -sb * rb));
                    }
                }
                m.add_con(format!("mc_{tag}.{aid}.{s}"), terms, sense, 1.0);
            };
            env("ll", false, false, RowSense::Le);
            env("hh", true, true, RowSense::Le);
            env("lh", false, true, RowSense::Ge);
            env("hl", true, false, RowSense::Ge);
            // linking sums and cell gating
            let mut sum_r = vec![(ids.rhat[a][t], -1.0)];
            let mut sum_s = vec![(ids.shat[a][t], -1.0)];
            let mut sum_w: Vec<(usize, f64)> = Vec::new();
            for x in 0..segs {
                for y in 0..segs {
                    let c = cell(x, y);
                    sum_r.push((r[c], 1.0));
                    sum_s.push((sv[c], 1.0));
                    sum_w.push((w[c], 1.0));
                    let (r_lo, r_hi) = r_b(x);
                    let (s_lo, s_hi) = s_b(y);
                    m.add_con(
                        format!("mc_rlo.{aid}.{s}.{}.{}", x + 1, y + 1),
                        vec![(r[c], 1.0), (w[c], -r_lo)],
                        RowSense::Ge,
                        0.0,
                    );
                    m.add_con(
                        format!("mc_rhi.{aid}.{s}.{}.{}", x + 1, y + 1),
                        vec![(r[c], 1.0), (w[c], -r_hi)],
                        RowSense::Le,
                        0.0,
                    );
                    m.add_con(
                        format!("mc_slo.{aid}.{s}.{}.{}", x + 1, y + 1),
                        vec![(sv[c], 1.0), (w[c], -s_lo)],
                        RowSense::Ge,
                        0.0,
                    );
                    m.add_con(
                        format!("mc_shi.{aid}.{s}.{}.{}", x + 1, y + 1),
                        vec![(sv[c], 1.0), (w[c], -s_hi)],
                        RowSense::Le,
                        0.0,
                    );
                }
            }
            m.add_con(format!("mc_sumr.{aid}.{s}"), sum_r, RowSense::Eq, 0.0);
            m.add_con(format!("mc_sums.{aid}.{s}"), sum_s, RowSense::Eq, 0.0);
            m.add_con(format!("mc_sumw.{aid}.{s}"), sum_w, RowSense::Eq, 1.0);

            // big-M share products: gs_i = K P / R * VS_i * dP
            for &i in &spec.area_gens[a] {
                let g = &spec.generators[i];
                let gid = &g.id;
                let c = g.droop_gain() * dp;
                m.add_con(
                    format!("share.{gid}.{s}"),
                    vec![(ids.gs[i][t], 1.0), (ids.vsg[i][t], -c)],
                    RowSense::Eq,
                    0.0,
                );
                m.add_con(
                    format!("bm_gate.{gid}.{s}"),
                    vec![(ids.vsg[i][t], 1.0), (ids.vg[i][t], -BIG_M)],
                    RowSense::Le,
                    0.0,
                );
                m.add_con(
                    format!("bm_hi.{gid}.{s}"),
                    vec![(ids.vsg[i][t], 1.0), (ids.shat[a][t], -1.0)],
                    RowSense::Le,
                    0.0,
                );
                m.add_con(
                    format!("bm_lo.{gid}.{s}"),
                    vec![
                        (ids.vsg[i][t], 1.0),
                        (ids.shat[a][t], -1.0),
                        (ids.vg[i][t], -BIG_M),
                    ],
                    RowSense::Ge,
                    -BIG_M,
                );
            }

            // reserve floor against the worst incident HVDC outage
            let dp_dc = spec.max_link_outage(a);
            if dp_dc > 0.0 {
                let terms: Vec<(usize, f64)> = spec.area_gens[a]
                    .iter()
                    .map(|&i| (ids.gs[i][t], 1.0))
                    .collect();
                m.add_con(
                    format!("dc_floor.{aid}.{s}"),
                    terms,
                    RowSense::Ge,
                    dp_dc,
                );
            }
        }
    }

    // converter reserve shares and post-contingency headroom
    if spc {
        for (k, c) in spec.converters.iter().enumerate() {
            let cid = &c.id;
            let ovl = if cfg.overload_enabled {
                1.0 + c.overload_factor
            } else {
                1.0
            };
            for a in [spec.conv_from_area[k], spec.conv_to_area[k]] {
                let b = spec.link_peer_area(k, a).expect("two distinct endpoints");
                let aid = &spec.areas[a].id;
                let dp = spec.areas[a].dimensioning_incident;
                let share = c.droop_gain() * dp;
                let ps = &ids.ps[&(k, a)];
                let vsc = &ids.vsc[&(k, a)];
                let vc = &ids.vc[&(a, b)];
                let sign = spec.support_sign(k, a);
                for t in 0..t_count {
                    let s = t1(t);
                    m.add_con(
                        format!("cshare.{cid}.{aid}.{s}"),
                        vec![(ps[t], 1.0), (vsc[t], -share)],
                        RowSense::Eq,
                        0.0,
                    );
                    m.add_con(
                        format!("cbm_gate.{cid}.{aid}.{s}"),
                        vec![(vsc[t], 1.0), (vc[t], -BIG_M)],
                        RowSense::Le,
                        0.0,
                    );
                    m.add_con(
                        format!("cbm_hi.{cid}.{aid}.{s}"),
                        vec![(vsc[t], 1.0), (ids.shat[a][t], -1.0)],
                        RowSense::Le,
                        0.0,
                    );
                    m.add_con(
                        format!("cbm_lo.{cid}.{aid}.{s}"),
                        vec![(vsc[t], 1.0), (ids.shat[a][t], -1.0), (vc[t], -BIG_M)],
                        RowSense::Ge,
                        -BIG_M,
                    );
                    // post-contingency flow within (possibly overloaded) limits
                    match c.technology {
                        ConverterTechnology::Vsc => {
                            m.add_con(
                                format!("chm_hi.{cid}.{aid}.{s}"),
                                vec![(ids.pdc[k][t], 1.0), (ps[t], sign)],
                                RowSense::Le,
                                ovl * c.capacity,
                            );
                            m.add_con(
                                format!("chm_lo.{cid}.{aid}.{s}"),
                                vec![(ids.pdc[k][t], 1.0), (ps[t], sign)],
                                RowSense::Ge,
                                -ovl * c.capacity,
                            );
                        }
                        ConverterTechnology::Lcc => {
                            let blk_of = |t: usize| t / cfg.lcc_block_len;
                            let ub = ids.ulcc[k][blk_of(t)];
                            m.add_con(
                                format!("chm_hi.{cid}.{aid}.{s}"),
                                vec![(ids.pdc[k][t], 1.0), (ps[t], sign), (ub, -ovl * c.capacity)],
                                RowSense::Le,
                                0.0,
                            );
                            m.add_con(
                                format!("chm_lo.{cid}.{aid}.{s}"),
                                vec![(ids.pdc[k][t], 1.0), (ps[t], sign), (ub, -ovl * c.capacity)],
                                RowSense::Ge,
                                -ovl * c.capacity,
                            );
                        }
                    }
                }
            }
        }
    }
    Ok(())
}
