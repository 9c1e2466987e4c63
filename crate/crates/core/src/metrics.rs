//! Closed-form frequency metrics of the reduced second-order area model.
//!
//! Each asynchronous area is reduced to a second-order system with a zero,
//! parameterised by the weighted aggregates of its online and participating
//! devices. All metrics are returned as magnitudes in Hz (or Hz/s); the
//! underlying deviations are negative for a loss-of-generation event.

use crate::system::SystemSpec;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MetricsError {
    #[error("unknown area `{0}`")]
    UnknownArea(String),
    #[error("no inertia: aggregate M is zero")]
    NoInertia,
    #[error("degenerate system: damping plus droop is zero")]
    Degenerate,
    #[error("negative radicand: R < F is not a valid parameterization")]
    NegativeRadicand,
    #[error("flag vector length mismatch: expected {expected}, got {got}")]
    FlagLength { expected: usize, got: usize },
}

/// Weighted model parameters of one area for one commitment/participation
/// snapshot. Sums of droop gains are in pu power per pu frequency; inertia
/// is in pu s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AreaAggregates {
    /// Total inertia of online units, sum of 2*H*Pmax (pu s).
    pub inertia: f64,
    /// Load damping of the area (pu).
    pub damping: f64,
    /// Sum of participating generator droop gains K/R * Pmax (pu).
    pub gen_droop: f64,
    /// Sum of participating converter droop gains K/R * Pdc (pu).
    pub conv_droop: f64,
    /// Turbine-fraction-weighted generator gains K*F/R * Pmax (pu).
    pub gen_turbine: f64,
}

impl AreaAggregates {
    /// Total droop R = generator + converter contributions. The identity
    /// holds exactly by construction.
    pub fn total_droop(&self) -> f64 {
        self.gen_droop + self.conv_droop
    }

    /// Equivalent turbine fraction gain F = generator turbine gains plus
    /// converter droop (converters act without a washout zero).
    pub fn total_turbine(&self) -> f64 {
        self.gen_turbine + self.conv_droop
    }

    /// Aggregates containing only the generator-side response, as seen by an
    /// area whose converters do not react to its own frequency.
    pub fn generators_only(&self) -> AreaAggregates {
        AreaAggregates {
            conv_droop: 0.0,
            ..*self
        }
    }
}

/// Natural frequency, damping ratio and time to nadir of the reduced model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModalParams {
    /// Natural frequency (rad/s).
    pub omega_n: f64,
    /// Damping ratio (dimensionless).
    pub zeta: f64,
}

/// Frequency metrics of one area for one event, as magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyMetrics {
    /// Max |df/dt| (Hz/s).
    pub rocof_max: f64,
    /// Max transient |deviation| (Hz).
    pub nadir: f64,
    /// Quasi-steady |deviation| after containment (Hz).
    pub ssfd: f64,
    /// Time of the maximum deviation (s).
    pub t_nadir: f64,
    /// Modal parameters of the reduced model; absent for metrics extracted
    /// from a simulated trajectory.
    pub modal: Option<ModalParams>,
}

impl FrequencyMetrics {
    pub const ZERO: FrequencyMetrics = FrequencyMetrics {
        rocof_max: 0.0,
        nadir: 0.0,
        ssfd: 0.0,
        t_nadir: 0.0,
        modal: None,
    };
}

/// Sums the weighted model parameters of `area` for a given commitment and
/// participation snapshot. `commitment` and `gen_participation` are indexed
/// by generator, `link_support[k]` states whether link k currently supports
/// this area (i.e. reacts to its frequency).
pub fn aggregate_area(
    spec: &SystemSpec,
    commitment: &[bool],
    gen_participation: &[bool],
    link_support: &[bool],
    area: &str,
) -> Result<AreaAggregates, MetricsError> {
    let a = spec
        .area_index(area)
        .ok_or_else(|| MetricsError::UnknownArea(area.to_string()))?;
    let check = |len: usize, expected: usize| {
        if len != expected {
            Err(MetricsError::FlagLength { expected, got: len })
        } else {
            Ok(())
        }
    };
    check(commitment.len(), spec.generators.len())?;
    check(gen_participation.len(), spec.generators.len())?;
    check(link_support.len(), spec.converters.len())?;

    let mut agg = AreaAggregates {
        damping: spec.areas[a].damping,
        ..Default::default()
    };
    for &i in &spec.area_gens[a] {
        let g = &spec.generators[i];
        if commitment[i] {
            agg.inertia += g.inertia_contrib();
        }
        if gen_participation[i] {
            agg.gen_droop += g.droop_gain();
            agg.gen_turbine += g.turbine_gain();
        }
    }
    for &k in &spec.area_links[a] {
        if link_support[k] {
            agg.conv_droop += spec.converters[k].droop_gain();
        }
    }
    Ok(agg)
}

/// Natural frequency and damping ratio of the reduced model:
/// omega = sqrt((D+R)/(M*T)), zeta = (M + T*(D+F)) / (2*sqrt(M*T*(D+R))).
pub fn second_order_params(agg: &AreaAggregates, t_a: f64) -> Result<ModalParams, MetricsError> {
    if agg.inertia <= 0.0 {
        return Err(MetricsError::NoInertia);
    }
    let dr = agg.damping + agg.total_droop();
    if dr <= 0.0 {
        return Err(MetricsError::Degenerate);
    }
    let omega_n = (dr / (agg.inertia * t_a)).sqrt();
    let zeta = (agg.inertia + t_a * (agg.damping + agg.total_turbine()))
        / (2.0 * (agg.inertia * t_a * dr).sqrt());
    Ok(ModalParams { omega_n, zeta })
}

/// Time of the first zero of the frequency derivative after a step event.
///
/// The step response of the second-order-with-zero model has derivative
/// proportional to exp(-s*t) * (w^2*T*cos(wd*t) + w^2*(1-s*T)/wd * sin(wd*t))
/// in the underdamped case, whose first positive root is
/// atan2(wd*T, s*T - 1) / wd. For zeta >= 1 the derivative is a sum of two
/// real exponentials and the root is found numerically (documented branch).
pub fn time_to_nadir(agg: &AreaAggregates, t_a: f64) -> Result<f64, MetricsError> {
    let m = second_order_params(agg, t_a)?;
    Ok(time_to_nadir_modal(&m, t_a))
}

pub(crate) fn time_to_nadir_modal(m: &ModalParams, t_a: f64) -> f64 {
    let sigma = m.zeta * m.omega_n;
    if m.zeta < 1.0 - 1e-12 {
        let wd = m.omega_n * (1.0 - m.zeta * m.zeta).sqrt();
        return (wd * t_a).atan2(sigma * t_a - 1.0) / wd;
    }
    // real poles p1 >= p2; derivative ~ (1+p1*T)*p1*e^{p1 t}/(p1-p2) + ...
    let disc = (m.zeta * m.zeta - 1.0).max(0.0).sqrt() * m.omega_n;
    let (p1, p2) = (-sigma + disc, -sigma - disc);
    let deriv = |t: f64| -> f64 {
        if (p1 - p2).abs() < 1e-12 {
            // critically damped limit: h(t) = e^{pt} (1 + (1+pT) p t / T) / T
            let p = p1;
            (1.0 + (1.0 + p * t_a) * p * t) * (p * t).exp()
        } else {
            ((1.0 + p1 * t_a) * (p1 * t).exp() - (1.0 + p2 * t_a) * (p2 * t).exp()) / (p1 - p2)
        }
    };
    // bracket the first sign change, then bisect
    let horizon = 40.0 / sigma.max(1e-9);
    let n = 4000;
    let dt = horizon / n as f64;
    let mut lo = 1e-9;
    let mut flo = deriv(lo);
    let mut hi = lo;
    let mut bracketed = false;
    for i in 1..=n {
        hi = i as f64 * dt;
        let fhi = deriv(hi);
        if flo * fhi <= 0.0 {
            bracketed = true;
            break;
        }
        lo = hi;
        flo = fhi;
    }
    if !bracketed {
        // monotone approach: the extremum is asymptotic
        return horizon;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if deriv(lo) * deriv(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Nadir magnitude (pu) of an area with aggregates (d, r, f, m) under a step
/// loss `dp` (pu): dp/(d+r) * (1 + sqrt(T*(r-f)/m) * exp(-zeta*omega*tm)).
pub(crate) fn nadir_step_pu(
    d: f64,
    r: f64,
    f: f64,
    m_inertia: f64,
    t_a: f64,
    dp: f64,
) -> Result<f64, MetricsError> {
    if dp == 0.0 {
        return Ok(0.0);
    }
    if m_inertia <= 0.0 {
        return Err(MetricsError::NoInertia);
    }
    let dr = d + r;
    if dr <= 0.0 {
        return Err(MetricsError::Degenerate);
    }
    if r < f {
        return Err(MetricsError::NegativeRadicand);
    }
    let agg = AreaAggregates {
        inertia: m_inertia,
        damping: d,
        gen_droop: r,
        conv_droop: 0.0,
        gen_turbine: f,
    };
    let modal = second_order_params(&agg, t_a)?;
    let tm = time_to_nadir_modal(&modal, t_a);
    let overshoot = (t_a * (r - f) / m_inertia).sqrt() * (-modal.zeta * modal.omega_n * tm).exp();
    Ok(dp / dr * (1.0 + overshoot))
}

/// Metrics of an area containing its own incident, with any unilateral HVDC
/// support already folded into the aggregates. `dp` is the step loss in pu.
/// The SSFD counts only generator droop: converters do not take part in
/// frequency restoration.
pub fn metrics_ucs_supported(
    agg: &AreaAggregates,
    t_a: f64,
    dp: f64,
    f_base: f64,
) -> Result<FrequencyMetrics, MetricsError> {
    if dp == 0.0 {
        return Ok(FrequencyMetrics::ZERO);
    }
    if agg.inertia <= 0.0 {
        return Err(MetricsError::NoInertia);
    }
    let modal = second_order_params(agg, t_a)?;
    let tm = time_to_nadir_modal(&modal, t_a);
    let nadir = f_base
        * nadir_step_pu(
            agg.damping,
            agg.total_droop(),
            agg.total_turbine(),
            agg.inertia,
            t_a,
            dp,
        )?;
    Ok(FrequencyMetrics {
        rocof_max: f_base * dp / agg.inertia,
        nadir,
        ssfd: f_base * dp / (agg.damping + agg.gen_droop),
        t_nadir: tm,
        modal: Some(modal),
    })
}

/// Metrics of the area on the supporting side of a unilateral scheme. The
/// supported-area deviation is approximated as a step of `df_a_max` (Hz);
/// `rc_ab` is the droop gain of the interconnecting links. The supporting
/// area responds with generators only, so the caller passes generator-only
/// aggregates (see [`AreaAggregates::generators_only`]); its SSFD is zero.
pub fn metrics_ucs_supporting(
    agg_b: &AreaAggregates,
    t_b: f64,
    rc_ab: f64,
    df_a_max: f64,
    dp_a: f64,
    m_a: f64,
    f_base: f64,
) -> Result<FrequencyMetrics, MetricsError> {
    if rc_ab == 0.0 {
        return Ok(FrequencyMetrics::ZERO);
    }
    if agg_b.inertia <= 0.0 || m_a <= 0.0 {
        return Err(MetricsError::NoInertia);
    }
    let modal = second_order_params(agg_b, t_b)?;
    let tm = time_to_nadir_modal(&modal, t_b);
    let nadir = df_a_max
        * rc_ab
        * nadir_step_pu(
            agg_b.damping,
            agg_b.total_droop(),
            agg_b.total_turbine(),
            agg_b.inertia,
            t_b,
            1.0,
        )?;
    Ok(FrequencyMetrics {
        rocof_max: f_base * dp_a * rc_ab / (m_a * agg_b.inertia),
        nadir,
        ssfd: 0.0,
        t_nadir: tm,
        modal: Some(modal),
    })
}

/// Metrics of both areas under the bilateral scheme for an incident `dp_a`
/// in area a. Converters participate in both areas, so both aggregate sets
/// carry the converter terms. The supported-area deviation fed to area b is
/// a step at the regulatory limit `df_a_limit` (Hz), which overestimates
/// both nadirs; the area-a nadir then adds the reflected feedback term.
#[allow(clippy::too_many_arguments)]
pub fn metrics_bcs(
    agg_a: &AreaAggregates,
    agg_b: &AreaAggregates,
    rc_ab: f64,
    t_a: f64,
    t_b: f64,
    dp_a: f64,
    df_a_limit: f64,
    f_base: f64,
) -> Result<(FrequencyMetrics, FrequencyMetrics), MetricsError> {
    if dp_a == 0.0 {
        return Ok((FrequencyMetrics::ZERO, FrequencyMetrics::ZERO));
    }
    if agg_a.inertia <= 0.0 {
        return Err(MetricsError::NoInertia);
    }

    let fm_b = if rc_ab == 0.0 {
        FrequencyMetrics::ZERO
    } else {
        if agg_b.inertia <= 0.0 {
            return Err(MetricsError::NoInertia);
        }
        let modal_b = second_order_params(agg_b, t_b)?;
        let tm_b = time_to_nadir_modal(&modal_b, t_b);
        let nadir_b = df_a_limit
            * rc_ab
            * nadir_step_pu(
                agg_b.damping,
                agg_b.total_droop(),
                agg_b.total_turbine(),
                agg_b.inertia,
                t_b,
                1.0,
            )?;
        FrequencyMetrics {
            rocof_max: f_base * dp_a * rc_ab / (agg_a.inertia * agg_b.inertia),
            nadir: nadir_b,
            ssfd: 0.0,
            t_nadir: tm_b,
            modal: Some(modal_b),
        }
    };

    // effective step for area a: the incident plus the reflected deviation
    // of the supporting area pulling through the converter droop
    let dp_eff = dp_a + fm_b.nadir / f_base * rc_ab;
    let modal_a = second_order_params(agg_a, t_a)?;
    let tm_a = time_to_nadir_modal(&modal_a, t_a);
    let nadir_a = f_base
        * nadir_step_pu(
            agg_a.damping,
            agg_a.total_droop(),
            agg_a.total_turbine(),
            agg_a.inertia,
            t_a,
            dp_eff,
        )?;
    let fm_a = FrequencyMetrics {
        rocof_max: f_base * dp_a / agg_a.inertia,
        nadir: nadir_a,
        ssfd: f_base * dp_a / (agg_a.damping + agg_a.gen_droop),
        t_nadir: tm_a,
        modal: Some(modal_a),
    };
    Ok((fm_a, fm_b))
}
