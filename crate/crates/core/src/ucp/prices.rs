//! Nodal price recovery and the market report.
//!
//! Energy prices come from the fixed-binary LP: the balance-row dual minus
//! the duals of the shedding caps at the bus. Reports aggregate costs,
//! revenues and payments per area, plus the interconnector congestion rent.

use super::solution::{DualSet, UcpSolution};
use super::{ScenarioConfig, UcpError};
use crate::system::SystemSpec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AreaMarketRow {
    pub area: String,
    /// Reserve procurement cost (generators' capacity payments), EUR.
    pub reserve_cost: f64,
    /// Energy production, start/stop, shedding and curtailment costs, EUR.
    pub energy_cost: f64,
    pub total_cost: f64,
    /// Generator revenue: energy at the nodal price plus reserve payments.
    pub gen_revenue: f64,
    /// Load payment: served energy at the nodal price.
    pub load_payment: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarketReport {
    pub mode: String,
    pub objective: f64,
    pub lp_objective: f64,
    /// `energy_price[bus][t]` in EUR/puh.
    pub energy_price: Vec<Vec<f64>>,
    pub areas: Vec<AreaMarketRow>,
    /// Sum over links and hours of |price spread| x |flow|.
    pub hvdc_congestion_rent: f64,
    /// Hours with a nonzero price spread across any link.
    pub congested_hours: usize,
}

impl MarketReport {
    /// CSV table mirroring the per-area cost/revenue rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "row,area,value_eur\n",
        );
        for r in &self.areas {
            out.push_str(&format!("reserve_cost,{},{}\n", r.area, r.reserve_cost));
            out.push_str(&format!("energy_cost,{},{}\n", r.area, r.energy_cost));
            out.push_str(&format!("total_cost,{},{}\n", r.area, r.total_cost));
            out.push_str(&format!("gen_revenue,{},{}\n", r.area, r.gen_revenue));
            out.push_str(&format!("load_payment,{},{}\n", r.area, r.load_payment));
        }
        out.push_str(&format!("hvdc_revenue,-,{}\n", self.hvdc_congestion_rent));
        out.push_str(&format!("congested_hours,-,{}\n", self.congested_hours));
        out
    }
}

/// Builds the market report from a solved UCP whose duals are present.
pub fn recover_prices(
    spec: &SystemSpec,
    cfg: &ScenarioConfig,
    solution: &UcpSolution,
) -> Result<MarketReport, UcpError> {
    let duals: &DualSet = solution.duals.as_ref().ok_or_else(|| {
        UcpError::Integrity("solution carries no duals; re-run with a dual-capable backend".into())
    })?;
    let t_count = solution.horizon;

    // EP_n = lambda_n - sum of shedding-cap duals of loads at the bus
    let mut energy_price = vec![vec![0.0; t_count]; spec.buses.len()];
    for b in 0..spec.buses.len() {
        for t in 0..t_count {
            let mut ep = duals.lambda[b][t];
            for (j, _) in spec.loads.iter().enumerate().filter(|(j, _)| spec.load_bus[*j] == b) {
                ep -= duals.rho[j][t];
            }
            energy_price[b][t] = ep;
        }
    }

    let mut areas = Vec::new();
    for (a, ar) in spec.areas.iter().enumerate() {
        let mut reserve_cost = 0.0;
        let mut energy_cost = 0.0;
        let mut gen_revenue = 0.0;
        let mut load_payment = 0.0;
        for &i in &spec.area_gens[a] {
            let g = &spec.generators[i];
            let bus = spec.gen_bus[i];
            for t in 0..t_count {
                reserve_cost += g.cost_reserve * solution.reserve[i][t];
                energy_cost += g.cost_energy * solution.dispatch[i][t]
                    + g.cost_startup * (solution.startup[i][t] as u8 as f64)
                    + g.cost_shutdown * (solution.shutdown[i][t] as u8 as f64);
                gen_revenue += energy_price[bus][t] * solution.dispatch[i][t]
                    + g.cost_reserve * solution.reserve[i][t];
            }
        }
        for (j, l) in spec.loads.iter().enumerate() {
            if spec.bus_area[spec.load_bus[j]] != a {
                continue;
            }
            for t in 0..t_count {
                energy_cost += l.voll * solution.shed[j][t];
                load_payment +=
                    energy_price[spec.load_bus[j]][t] * (spec.series.load[j][t] - solution.shed[j][t]);
            }
        }
        for (r, w) in spec.res.iter().enumerate() {
            if spec.bus_area[spec.res_bus[r]] != a {
                continue;
            }
            for t in 0..t_count {
                energy_cost += w.curtail_value * solution.curtail[r][t];
            }
        }
        areas.push(AreaMarketRow {
            area: ar.id.clone(),
            reserve_cost,
            energy_cost,
            total_cost: reserve_cost + energy_cost,
            gen_revenue,
            load_payment,
        });
    }

    // congestion rent: price spread times flow, summed over links and hours
    let mut rent = 0.0;
    let mut congested = vec![false; t_count];
    for k in 0..spec.converters.len() {
        let (fb, tb) = (spec.conv_from_bus[k], spec.conv_to_bus[k]);
        for t in 0..t_count {
            let spread = (energy_price[fb][t] - energy_price[tb][t]).abs();
            rent += spread * solution.link_flow[k][t].abs();
            // spreads below one cent per puh are numerical noise
            if spread > 1e-2 {
                congested[t] = true;
            }
        }
    }

    Ok(MarketReport {
        mode: cfg.mode.as_str().to_string(),
        objective: solution.objective,
        lp_objective: duals.lp_objective,
        energy_price,
        areas,
        hvdc_congestion_rent: rent,
        congested_hours: congested.iter().filter(|&&c| c).count(),
    })
}
