//! Nadir feasibility surface: dense evaluation of the nonlinear nadir over
//! parameter grids, boundary-band extraction, inequality-constrained
//! hyperplane fitting and soundness certification.
//!
//! The fitted plane under-approximates the feasible region: every grid point
//! (and, for bilateral fits, every Latin-hypercube certification sample) that
//! the plane classifies as feasible has a nadir within the limit. The plane
//! never lies below an infeasible point; this is imposed as hard constraints
//! in the fit and re-checked by an exhaustive sweep afterwards.

pub mod qp;

use crate::metrics::nadir_step_pu;
use crate::system::SystemSpec;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub use qp::solve_dense;

/// Grids beyond this many points are evaluated on the fly instead of stored.
const DENSE_LIMIT: usize = 4_000_000;
/// Latin-hypercube certification samples for streamed (bilateral) grids.
const LHC_SAMPLES: usize = 100_000;
const LHC_SEED: u64 = 0x5eed_ab1e;
/// The plane must clear every infeasible point by this margin, so that
/// points exactly on the plane are strictly feasible.
const SOUNDNESS_MARGIN: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum NadirError {
    #[error("unknown area `{0}`")]
    UnknownArea(String),
    #[error("fleet of area `{0}` is empty")]
    EmptyFleet(String),
    #[error("area `{0}` has no DC neighbours; a bilateral surface is undefined")]
    NoNeighbors(String),
    #[error("grid needs at least 2 points per axis, got {0}")]
    TooFewPoints(usize),
    #[error(
        "degenerate boundary: {found} points in the band (need at least {need}); widen the band or the axis ranges"
    )]
    DegenerateBoundary { found: usize, need: usize },
    #[error("{share:.0}% of grid points are invalid (negative radicand); adjust axis ranges")]
    TooManyInvalid { share: f64 },
    #[error(
        "axis `{axis}` has inverted range [{lo:.4}, {hi:.4}]: the fleet cannot reach the always-active floors"
    )]
    InfeasibleRanges { axis: String, lo: f64, hi: f64 },
    #[error("hyperplane fit failed: {0}")]
    FitFailed(String),
    #[error(
        "certification failed: {count} points with nadir above the limit are classified feasible"
    )]
    CertificationFailed { count: usize },
    #[error("invalid slice: {0}")]
    InvalidSlice(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Unilateral,
    Bilateral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl AxisSpec {
    pub fn value(&self, i: usize) -> f64 {
        if self.points == 1 {
            return self.lo;
        }
        self.lo + (self.hi - self.lo) * i as f64 / (self.points - 1) as f64
    }
}

/// Everything needed to evaluate the nadir at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NadirContext {
    /// Point layout: [R_hat, F_hat, M_hat].
    Unilateral {
        damping: f64,
        t_a: f64,
        dp: f64,
        f_base: f64,
    },
    /// Point layout: [Rg_a, Fg_a, M_a, then per neighbour (Rg_b, M_b, Fg_b, Rc_ab)].
    Bilateral {
        damping: f64,
        t_a: f64,
        dp: f64,
        f_base: f64,
        /// Step deviation assumed for the supported area (its nadir limit, Hz).
        df_limit: f64,
        neighbors: Vec<NeighborContext>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborContext {
    pub area_id: String,
    pub damping: f64,
    pub t_b: f64,
}

impl NadirContext {
    /// Nadir in Hz at a grid point, or `None` when the parameter combination
    /// is invalid (no inertia, zero total droop or negative radicand).
    pub fn eval(&self, point: &[f64]) -> Option<f64> {
        match self {
            NadirContext::Unilateral {
                damping,
                t_a,
                dp,
                f_base,
            } => {
                let (r, f, m) = (point[0], point[1], point[2]);
                nadir_step_pu(*damping, r, f, m, *t_a, *dp)
                    .ok()
                    .map(|n| n * f_base)
            }
            NadirContext::Bilateral {
                damping,
                t_a,
                dp,
                f_base,
                df_limit,
                neighbors,
            } => {
                let (rg_a, fg_a, m_a) = (point[0], point[1], point[2]);
                let mut rc_total = 0.0;
                let mut dp_eff = *dp;
                for (bi, nb) in neighbors.iter().enumerate() {
                    let base = 3 + 4 * bi;
                    let (rg_b, m_b, fg_b, rc_ab) =
                        (point[base], point[base + 1], point[base + 2], point[base + 3]);
                    rc_total += rc_ab;
                    if rc_ab == 0.0 {
                        continue;
                    }
                    let unit =
                        nadir_step_pu(nb.damping, rg_b + rc_ab, fg_b + rc_ab, m_b, nb.t_b, 1.0)
                            .ok()?;
                    let nadir_b_hz = df_limit * rc_ab * unit;
                    dp_eff += nadir_b_hz / f_base * rc_ab;
                }
                nadir_step_pu(
                    *damping,
                    rg_a + rc_total,
                    fg_a + rc_total,
                    m_a,
                    *t_a,
                    dp_eff,
                )
                .ok()
                .map(|n| n * f_base)
            }
        }
    }
}

/// A dense (or streamed) evaluation of the nadir over a parameter grid.
#[derive(Debug, Clone)]
pub struct ParameterGrid {
    pub scheme: Scheme,
    pub area: String,
    pub axes: Vec<AxisSpec>,
    /// Index of the response axis (the turbine-fraction aggregate the plane
    /// bounds from below).
    pub response_axis: usize,
    pub ctx: NadirContext,
    /// Dense nadir values in row-major axis order; `None` when the grid is
    /// too large to store and is evaluated on the fly.
    pub values: Option<Vec<f64>>,
    pub invalid_count: usize,
}

impl ParameterGrid {
    pub fn total_points(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn point(&self, mut idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (d, ax) in self.axes.iter().enumerate().rev() {
            out[d] = ax.value(idx % ax.points);
            idx /= ax.points;
        }
        out
    }

    /// Nadir at flat index `idx` (NaN marks invalid points in dense storage).
    pub fn nadir_at(&self, idx: usize) -> Option<f64> {
        match &self.values {
            Some(v) => {
                let n = v[idx];
                if n.is_nan() {
                    None
                } else {
                    Some(n)
                }
            }
            None => self.ctx.eval(&self.point(idx)),
        }
    }
}

/// Fitted feasibility plane: the constraint reads
/// `response >= sum_i coefficients[axis_i] * axis_i + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NadirHyperplane {
    pub scheme: Scheme,
    pub area: String,
    /// Nadir limit the plane separates (Hz).
    pub limit: f64,
    /// Half-width of the boundary band used for the fit (Hz).
    pub band: f64,
    pub axes: Vec<AxisSpec>,
    pub response_axis: String,
    /// Coefficients keyed by predictor axis name.
    pub coefficients: BTreeMap<String, f64>,
    pub intercept: f64,
    pub diagnostics: FitDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Number of points in the boundary band.
    pub boundary_count: usize,
    /// Mean of |plane - response| / response over the band.
    pub mean_relative_error: f64,
    /// Grid (plus certification-sample) points classified feasible whose
    /// nadir exceeds the limit. Zero by construction; re-checked ex post.
    pub false_feasible_count: usize,
    /// Share of truly feasible points the plane rejects.
    pub rejected_feasible_share: f64,
    /// Share of grid points with invalid parameter combinations.
    pub invalid_share: f64,
    pub grid_points: usize,
    pub certification_samples: usize,
}

impl NadirHyperplane {
    /// Plane height at a full grid point (predictors read positionally).
    pub fn plane_value(&self, point: &[f64]) -> f64 {
        let mut v = self.intercept;
        for (ax, &x) in self.axes.iter().zip(point) {
            if ax.name != self.response_axis {
                v += self.coefficients[&ax.name] * x;
            }
        }
        v
    }

    /// True when the plane classifies the point as feasible.
    pub fn accepts(&self, point: &[f64]) -> bool {
        let resp_idx = self
            .axes
            .iter()
            .position(|a| a.name == self.response_axis)
            .expect("response axis present");
        point[resp_idx] >= self.plane_value(point) - 1e-12
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn pad_range(lo: f64, hi: f64, floor: f64) -> (f64, f64) {
    let pad = 0.05 * (hi - lo).max(1e-9);
    ((lo - pad).max(floor), hi + pad)
}

struct FleetRanges {
    rg_max: f64,
    fg_max: f64,
    m_max: f64,
    r_lo: f64,
    m_lo: f64,
    /// Any participating set carries at least this much turbine fraction
    /// per unit of droop, so F >= f_lo whenever R >= r_lo.
    f_lo: f64,
}

/// Axis ranges realizable by the fleet of `area`, intersected with the
/// bounds the optimiser always enforces (RoCoF floor on inertia, SSFD floor
/// and R >= 1 on droop), padded by 5%.
fn fleet_ranges(spec: &SystemSpec, a: usize) -> FleetRanges {
    let area = &spec.areas[a];
    let rg_max: f64 = spec.area_gens[a]
        .iter()
        .map(|&i| spec.generators[i].droop_gain())
        .sum();
    let fg_max: f64 = spec.area_gens[a]
        .iter()
        .map(|&i| spec.generators[i].turbine_gain())
        .sum();
    let m_max: f64 = spec.area_gens[a]
        .iter()
        .map(|&i| spec.generators[i].inertia_contrib())
        .sum();
    let dp = area.dimensioning_incident;
    let r_lo = (area.f_base * dp / area.ssfd_limit - area.damping).max(1.0);
    let m_lo = area.f_base * dp / area.rocof_limit;
    let min_frac = spec.area_gens[a]
        .iter()
        .map(|&i| spec.generators[i].turbine_fraction)
        .fold(f64::INFINITY, f64::min);
    let f_lo = if min_frac.is_finite() {
        r_lo * min_frac
    } else {
        0.0
    };
    FleetRanges {
        rg_max,
        fg_max,
        m_max,
        r_lo,
        m_lo,
        f_lo,
    }
}

/// Builds the evaluated grid for one area and scheme. Ranges cover every
/// aggregate value the fleet can realise within the always-active RoCoF and
/// SSFD bounds; points with invalid parameter combinations are excluded and
/// counted. Fails when more than 20% of the grid is invalid.
pub fn build_grid(
    spec: &SystemSpec,
    area: &str,
    scheme: Scheme,
    points_per_axis: usize,
) -> Result<ParameterGrid, NadirError> {
    if points_per_axis < 2 {
        return Err(NadirError::TooFewPoints(points_per_axis));
    }
    let a = spec
        .area_index(area)
        .ok_or_else(|| NadirError::UnknownArea(area.to_string()))?;
    if spec.area_gens[a].is_empty() {
        return Err(NadirError::EmptyFleet(area.to_string()));
    }
    let ar = &spec.areas[a];
    let fr = fleet_ranges(spec, a);
    let (rg_max, fg_max, m_max, r_lo, m_lo) = (fr.rg_max, fr.fg_max, fr.m_max, fr.r_lo, fr.m_lo);
    let rc_max_all: f64 = spec.area_links[a]
        .iter()
        .map(|&k| spec.converters[k].droop_gain())
        .sum();

    let (axes, ctx, response_axis) = match scheme {
        Scheme::Unilateral => {
            let (r0, r1) = pad_range(r_lo, rg_max + rc_max_all, 1e-6);
            let (f0, f1) = pad_range(fr.f_lo, fg_max + rc_max_all, 0.0);
            let (m0, m1) = pad_range(m_lo, m_max, 1e-6);
            let axes = vec![
                AxisSpec { name: "r_hat".into(), lo: r0, hi: r1, points: points_per_axis },
                AxisSpec { name: "f_hat".into(), lo: f0, hi: f1, points: points_per_axis },
                AxisSpec { name: "m_hat".into(), lo: m0, hi: m1, points: points_per_axis },
            ];
            let ctx = NadirContext::Unilateral {
                damping: ar.damping,
                t_a: ar.turbine_time_const,
                dp: ar.dimensioning_incident,
                f_base: ar.f_base,
            };
            (axes, ctx, 1)
        }
        Scheme::Bilateral => {
            let mut neighbor_areas: Vec<usize> = spec.area_links[a]
                .iter()
                .filter_map(|&k| spec.link_peer_area(k, a))
                .collect();
            neighbor_areas.sort_unstable();
            neighbor_areas.dedup();
            if neighbor_areas.is_empty() {
                return Err(NadirError::NoNeighbors(area.to_string()));
            }
            let (r0, r1) = pad_range(r_lo, rg_max, 1e-6);
            let (f0, f1) = pad_range(fr.f_lo, fg_max, 0.0);
            let (m0, m1) = pad_range(m_lo, m_max, 1e-6);
            let mut axes = vec![
                AxisSpec { name: "rg_a".into(), lo: r0, hi: r1, points: points_per_axis },
                AxisSpec { name: "fg_a".into(), lo: f0, hi: f1, points: points_per_axis },
                AxisSpec { name: "m_a".into(), lo: m0, hi: m1, points: points_per_axis },
            ];
            let mut neighbors = Vec::new();
            for &b in &neighbor_areas {
                let frb = fleet_ranges(spec, b);
                let rc_ab: f64 = spec.area_links[a]
                    .iter()
                    .filter(|&&k| spec.link_peer_area(k, a) == Some(b))
                    .map(|&k| spec.converters[k].droop_gain())
                    .sum();
                let bid = &spec.areas[b].id;
                let (br0, br1) = pad_range(frb.r_lo, frb.rg_max, 1e-6);
                let (bm0, bm1) = pad_range(frb.m_lo, frb.m_max, 1e-6);
                let (bf0, bf1) = pad_range(frb.f_lo, frb.fg_max, 0.0);
                let (bc0, bc1) = pad_range(0.0, rc_ab, 0.0);
                axes.push(AxisSpec { name: format!("rg_b:{bid}"), lo: br0, hi: br1, points: points_per_axis });
                axes.push(AxisSpec { name: format!("m_b:{bid}"), lo: bm0, hi: bm1, points: points_per_axis });
                axes.push(AxisSpec { name: format!("fg_b:{bid}"), lo: bf0, hi: bf1, points: points_per_axis });
                axes.push(AxisSpec { name: format!("rc:{bid}"), lo: bc0, hi: bc1, points: points_per_axis });
                neighbors.push(NeighborContext {
                    area_id: bid.clone(),
                    damping: spec.areas[b].damping,
                    t_b: spec.areas[b].turbine_time_const,
                });
            }
            let ctx = NadirContext::Bilateral {
                damping: ar.damping,
                t_a: ar.turbine_time_const,
                dp: ar.dimensioning_incident,
                f_base: ar.f_base,
                df_limit: ar.nadir_limit,
                neighbors,
            };
            (axes, ctx, 1)
        }
    };

    for ax in &axes {
        if !(ax.hi > ax.lo) {
            return Err(NadirError::InfeasibleRanges {
                axis: ax.name.clone(),
                lo: ax.lo,
                hi: ax.hi,
            });
        }
    }
    let mut grid = ParameterGrid {
        scheme,
        area: area.to_string(),
        axes,
        response_axis,
        ctx,
        values: None,
        invalid_count: 0,
    };
    let total = grid.total_points();
    if total <= DENSE_LIMIT {
        let ctx = grid.ctx.clone();
        let axes = grid.axes.clone();
        let decode = |mut idx: usize| {
            let mut p = vec![0.0; axes.len()];
            for (d, ax) in axes.iter().enumerate().rev() {
                p[d] = ax.value(idx % ax.points);
                idx /= ax.points;
            }
            p
        };
        let values: Vec<f64> = (0..total)
            .into_par_iter()
            .map(|idx| ctx.eval(&decode(idx)).unwrap_or(f64::NAN))
            .collect();
        grid.invalid_count = values.iter().filter(|v| v.is_nan()).count();
        grid.values = Some(values);
    } else {
        grid.invalid_count = (0..total)
            .into_par_iter()
            .filter(|&idx| grid.ctx.eval(&grid.point(idx)).is_none())
            .count();
    }
    let share = grid.invalid_count as f64 / total as f64;
    if share > 0.20 {
        return Err(NadirError::TooManyInvalid { share: share * 100.0 });
    }
    Ok(grid)
}

/// Points within `band` Hz of the limit: the set the plane interpolates.
pub fn extract_boundary(
    grid: &ParameterGrid,
    nadir_limit: f64,
    band: f64,
) -> Result<Vec<(Vec<f64>, f64)>, NadirError> {
    let total = grid.total_points();
    let s: Vec<(Vec<f64>, f64)> = (0..total)
        .into_par_iter()
        .filter_map(|idx| {
            grid.nadir_at(idx).and_then(|n| {
                if (n - nadir_limit).abs() <= band {
                    Some((grid.point(idx), n))
                } else {
                    None
                }
            })
        })
        .collect();
    let need = grid.axes.len() + 1;
    if s.len() < need {
        return Err(NadirError::DegenerateBoundary {
            found: s.len(),
            need,
        });
    }
    Ok(s)
}

/// Deterministic Latin-hypercube samples over the grid's axis box.
fn lhc_samples(axes: &[AxisSpec], n: usize, seed: u64) -> Vec<Vec<f64>> {
    let dim = axes.len();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut strata: Vec<Vec<usize>> = (0..dim).map(|_| (0..n).collect()).collect();
    for s in strata.iter_mut() {
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            s.swap(i, j);
        }
    }
    (0..n)
        .map(|i| {
            (0..dim)
                .map(|d| {
                    let u: f64 = rng.gen();
                    let frac = (strata[d][i] as f64 + u) / n as f64;
                    axes[d].lo + frac * (axes[d].hi - axes[d].lo)
                })
                .collect()
        })
        .collect()
}

/// Fits the feasibility hyperplane for one grid: least squares over the
/// boundary band, subject to the plane lying at or above every infeasible
/// point (grid points and, for streamed grids, the certification samples).
/// Certification re-sweeps every point afterwards; any false-feasible point
/// is a hard error.
pub fn fit_hyperplane(
    grid: &ParameterGrid,
    nadir_limit: f64,
    band: f64,
) -> Result<NadirHyperplane, NadirError> {
    let band_points = extract_boundary(grid, nadir_limit, band)?;
    let resp = grid.response_axis;
    let n_axes = grid.axes.len();
    let dim = n_axes; // predictors + intercept
    let predictors: Vec<usize> = (0..n_axes).filter(|&d| d != resp).collect();

    // design row: [predictors..., 1]
    let row_of = |point: &[f64]| -> Vec<f64> {
        let mut r: Vec<f64> = predictors.iter().map(|&d| point[d]).collect();
        r.push(1.0);
        r
    };

    let mut h = vec![0.0; dim * dim];
    let mut g = vec![0.0; dim];
    for (p, _) in &band_points {
        let x = row_of(p);
        let f = p[resp];
        for r in 0..dim {
            for c in 0..dim {
                h[r * dim + c] += x[r] * x[c];
            }
            g[r] += f * x[r];
        }
    }

    // extra certification samples for streamed grids
    let extra: Vec<Vec<f64>> = if grid.values.is_none() {
        lhc_samples(&grid.axes, LHC_SAMPLES, LHC_SEED)
    } else {
        Vec::new()
    };

    let total = grid.total_points();
    // the plane must clear every infeasible point: theta . x >= f + margin
    let find_worst = |theta: &[f64]| -> Option<qp::Cut> {
        let eval_violation = |point: &[f64], nadir: f64| -> Option<(f64, Vec<f64>, f64)> {
            if nadir <= nadir_limit {
                return None;
            }
            let x = row_of(point);
            let plane: f64 = x.iter().zip(theta).map(|(a, b)| a * b).sum();
            let target = point[resp] + SOUNDNESS_MARGIN;
            let viol = target - plane;
            if viol > 1e-9 {
                Some((viol, x, target))
            } else {
                None
            }
        };
        let grid_worst = (0..total)
            .into_par_iter()
            .filter_map(|idx| {
                let n = grid.nadir_at(idx)?;
                eval_violation(&grid.point(idx), n).map(|(v, x, f)| (v, idx as u64, x, f))
            })
            .reduce_with(|a, b| {
                if (b.0, b.1) > (a.0, a.1) {
                    b
                } else {
                    a
                }
            });
        let extra_worst = extra
            .par_iter()
            .enumerate()
            .filter_map(|(i, p)| {
                let n = grid.ctx.eval(p)?;
                eval_violation(p, n).map(|(v, x, f)| (v, (total + i) as u64, x, f))
            })
            .reduce_with(|a, b| if (b.0, b.1) > (a.0, a.1) { b } else { a });
        [grid_worst, extra_worst]
            .into_iter()
            .flatten()
            .max_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap())
            .map(|(_, tag, row, rhs)| qp::Cut { row, rhs, tag })
    };

    let theta = qp::active_set_min(&h, &g, dim, find_worst, 200).ok_or_else(|| {
        NadirError::FitFailed("active-set iteration failed (singular or cycling)".into())
    })?;

    let mut coefficients = BTreeMap::new();
    for (slot, &d) in predictors.iter().enumerate() {
        coefficients.insert(grid.axes[d].name.clone(), theta[slot]);
    }
    let intercept = theta[dim - 1];

    // diagnostics: band error, certification sweep
    let mean_relative_error = band_points
        .iter()
        .map(|(p, _)| {
            let x = row_of(p);
            let plane: f64 = x.iter().zip(&theta).map(|(a, b)| a * b).sum();
            (plane - p[resp]).abs() / p[resp].abs().max(1e-9)
        })
        .sum::<f64>()
        / band_points.len() as f64;

    let classify = |point: &[f64], nadir: f64| -> (bool, bool) {
        let x = row_of(point);
        let plane: f64 = x.iter().zip(&theta).map(|(a, b)| a * b).sum();
        let accepted = point[resp] >= plane - 1e-12;
        (accepted, nadir > nadir_limit + 1e-9)
    };
    let (false_feasible, rejected_feasible, feasible_total) = (0..total)
        .into_par_iter()
        .filter_map(|idx| {
            let n = grid.nadir_at(idx)?;
            let (acc, infeas) = classify(&grid.point(idx), n);
            Some((
                (acc && infeas) as usize,
                (!acc && !infeas) as usize,
                (!infeas) as usize,
            ))
        })
        .reduce(
            || (0, 0, 0),
            |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2),
        );
    let extra_false: usize = extra
        .par_iter()
        .filter_map(|p| {
            let n = grid.ctx.eval(p)?;
            let (acc, infeas) = classify(p, n);
            Some((acc && infeas) as usize)
        })
        .sum();

    let plane = NadirHyperplane {
        scheme: grid.scheme,
        area: grid.area.clone(),
        limit: nadir_limit,
        band,
        axes: grid.axes.clone(),
        response_axis: grid.axes[resp].name.clone(),
        coefficients,
        intercept,
        diagnostics: FitDiagnostics {
            boundary_count: band_points.len(),
            mean_relative_error,
            false_feasible_count: false_feasible + extra_false,
            rejected_feasible_share: if feasible_total > 0 {
                rejected_feasible as f64 / feasible_total as f64
            } else {
                0.0
            },
            invalid_share: grid.invalid_count as f64 / total as f64,
            grid_points: total,
            certification_samples: extra.len(),
        },
    };
    if plane.diagnostics.false_feasible_count > 0 {
        return Err(NadirError::CertificationFailed {
            count: plane.diagnostics.false_feasible_count,
        });
    }
    Ok(plane)
}

/// CSV slice export for plotting: two varied axes, the rest fixed at given
/// values. Rows carry the varied coordinates, the fixed response value, the
/// nadir at the point and the plane height there.
pub fn visualize_export(
    grid: &ParameterGrid,
    plane: &NadirHyperplane,
    axis_x: &str,
    axis_y: &str,
    fixed: &BTreeMap<String, f64>,
) -> Result<String, NadirError> {
    let find = |name: &str| {
        grid.axes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| NadirError::InvalidSlice(format!("unknown axis `{name}`")))
    };
    let xi = find(axis_x)?;
    let yi = find(axis_y)?;
    if xi == yi {
        return Err(NadirError::InvalidSlice("slice axes must differ".into()));
    }
    let mut base = vec![0.0; grid.axes.len()];
    for (d, ax) in grid.axes.iter().enumerate() {
        if d == xi || d == yi {
            continue;
        }
        base[d] = *fixed.get(&ax.name).ok_or_else(|| {
            NadirError::InvalidSlice(format!("missing fixed value for axis `{}`", ax.name))
        })?;
    }
    let mut out = format!("{axis_x},{axis_y},{},nadir,plane_z\n", plane.response_axis);
    for ix in 0..grid.axes[xi].points {
        for iy in 0..grid.axes[yi].points {
            let mut p = base.clone();
            p[xi] = grid.axes[xi].value(ix);
            p[yi] = grid.axes[yi].value(iy);
            let nadir = grid.ctx.eval(&p).unwrap_or(f64::NAN);
            let plane_z = plane.plane_value(&p);
            let resp_val = p[grid.response_axis];
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p[xi], p[yi], resp_val, nadir, plane_z
            ));
        }
    }
    Ok(out)
}
