//! Error probability against the split of a fixed molecule budget.

use serde_json::json;

use molekom_core::allocation::{sweep_k_slot, sweep_two_slot, AllocationPoint, BudgetProblem, SearchMode};
use molekom_core::NoiseParams;

use super::{d_tot, try_map, Output};
use crate::config::{Config, SearchName};
use crate::error::Result;
use crate::format::{Cell, Table};

struct Curve {
    d_tx: f64,
    d_rx: f64,
    sigma2_o: f64,
    points: Vec<AllocationPoint>,
    best: AllocationPoint,
}

fn joined(counts: &[u32]) -> String {
    counts.iter().map(u32::to_string).collect::<Vec<_>>().join(";")
}

/// One curve per (mobility, σ_o²). With two slots the whole `Q[1]` range
/// is swept; with more, only the optimum is reported.
pub fn budget(cfg: &Config) -> Result<Output> {
    let s = &cfg.sweep;
    let points: Vec<(usize, f64)> =
        (0..s.mobility.len()).flat_map(|mi| s.sigma2_o.iter().map(move |&v| (mi, v))).collect();
    let curves = try_map(&points, |idx, &(mi, s2)| {
        let m = s.mobility[mi];
        let noise = NoiseParams::new(cfg.noise.mu_o, s2)?;
        let problem = BudgetProblem::new(s.budget, s.budget_slots, &cfg.channel_with(&m)?, noise, cfg.schedule.beta)?;
        let (points, best) = if s.budget_slots == 2 {
            let sweep = sweep_two_slot(&problem)?;
            let best = sweep.best().clone();
            (sweep.curve, best)
        } else {
            let mode = match s.search {
                SearchName::Exhaustive => SearchMode::Exhaustive,
                SearchName::CoordinateDescent => SearchMode::CoordinateDescent {
                    restarts: s.restarts,
                    seed: crate::parallel::point_seed(cfg.seed, idx),
                },
            };
            let a = sweep_k_slot(&problem, mode)?;
            let best =
                AllocationPoint { gaussian_valid: problem.gaussian_valid(&a.counts)?, counts: a.counts, p_e: a.p_e };
            (Vec::new(), best)
        };
        Ok(Curve { d_tx: m.d_tx_m2s, d_rx: m.d_rx_m2s, sigma2_o: s2, points, best })
    })?;

    let mut table =
        Table::new(&["kind", "D_tx", "D_rx", "mu_o", "sigma2_o", "Q1", "Q2", "allocation", "Pe", "gaussian_valid"]);
    let row = |kind: &str, c: &Curve, p: &AllocationPoint| -> Vec<Cell> {
        vec![
            kind.into(),
            c.d_tx.into(),
            c.d_rx.into(),
            cfg.noise.mu_o.into(),
            c.sigma2_o.into(),
            p.counts[0].into(),
            p.counts[1].into(),
            joined(&p.counts).as_str().into(),
            p.p_e.into(),
            p.gaussian_valid.into(),
        ]
    };
    for c in &curves {
        for p in &c.points {
            table.push(row("curve", c, p));
        }
        table.push(row("argmin", c, &c.best));
    }

    let equal = s.budget / s.budget_slots as u32;
    let argmins: Vec<_> = curves
        .iter()
        .map(|c| {
            json!({
                "D_tx_m2s": c.d_tx,
                "D_rx_m2s": c.d_rx,
                "sigma2_o": c.sigma2_o,
                "allocation": c.best.counts,
                "Pe": c.best.p_e,
                "equal_split_optimal": c.best.counts.iter().all(|&q| q == equal),
            })
        })
        .collect();

    // first-slot share of the optimum: up with noise, down with mobility
    let first = |mi: usize, si: usize| curves[mi * s.sigma2_o.len() + si].best.counts[0];
    let mut noise_trend = true;
    let mut mobility_trend = true;
    let mut s_order: Vec<usize> = (0..s.sigma2_o.len()).collect();
    s_order.sort_by(|&a, &b| s.sigma2_o[a].total_cmp(&s.sigma2_o[b]));
    let mut m_order: Vec<usize> = (0..s.mobility.len()).collect();
    m_order.sort_by(|&a, &b| d_tot(&s.mobility[a]).total_cmp(&d_tot(&s.mobility[b])));
    for mi in 0..s.mobility.len() {
        noise_trend &= s_order.windows(2).all(|w| first(mi, w[1]) >= first(mi, w[0]));
    }
    for si in 0..s.sigma2_o.len() {
        mobility_trend &= m_order.windows(2).all(|w| first(w[1], si) <= first(w[0], si));
    }
    let summary = json!({
        "budget": s.budget,
        "slots": s.budget_slots,
        "argmins": argmins,
        "first_slot_share_non_decreasing_in_sigma2_o": noise_trend,
        "first_slot_share_non_increasing_in_mobility": mobility_trend,
    });
    Ok(Output { table, summary })
}
