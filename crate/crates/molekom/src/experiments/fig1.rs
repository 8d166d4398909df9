//! Detection, error and capacity curves with mobile nanomachines.

use serde_json::{json, Value};

use molekom_core::perf::{self, roc_dominates, RocPoint};
use molekom_core::stats::link_moments;
use molekom_core::{ArrivalTable, NoiseParams, TxSchedule};

use super::{d_tot, non_decreasing, non_increasing, simulate, try_map, Output};
use crate::config::{Config, Mobility};
use crate::error::{Result, RunError};
use crate::format::{Cell, Table};

fn table_for(cfg: &Config, m: &Mobility, k: usize) -> Result<ArrivalTable> {
    Ok(ArrivalTable::compute(k, &cfg.channel_with(m)?)?)
}

/// Indices of `items` ordered by `key`, stable.
fn order_by<T>(items: &[T], key: impl Fn(&T) -> f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.sort_by(|&a, &b| key(&items[a]).total_cmp(&key(&items[b])));
    idx
}

struct RocCurve {
    mobility: Mobility,
    q: u32,
    slot: usize,
    points: Vec<RocPoint>,
    operating: Value,
}

/// ROC curves per (mobility, Q, slot) plus the operating point of the
/// optimal threshold.
pub fn roc(cfg: &Config) -> Result<Output> {
    let s = &cfg.sweep;
    let k = cfg.schedule.k;
    if let Some(&bad) = s.slots.iter().find(|&&j| j > k) {
        return Err(RunError::Validation(format!("sweep.slots entry {bad} exceeds k = {k}")));
    }
    let noise = cfg.noise()?;
    let tables = try_map(&s.mobility, |_, m| table_for(cfg, m, k))?;
    let points: Vec<(usize, u32)> = (0..s.mobility.len()).flat_map(|mi| s.q.iter().map(move |&q| (mi, q))).collect();
    let curves = try_map(&points, |idx, &(mi, q)| {
        let m = s.mobility[mi];
        let sched = TxSchedule::uniform(q, k, cfg.schedule.beta)?;
        let moments = link_moments(&sched, &noise, &tables[mi])?;
        let mc = simulate(cfg, &cfg.channel_with(&m)?, &sched, &noise, &tables[mi], idx)?;
        s.slots
            .iter()
            .map(|&slot| {
                let mom = &moments[slot - 1];
                let perf = perf::slot_performance(mom, cfg.schedule.beta)?;
                let est = mc.as_ref().map(|e| e.slots[slot - 1]);
                Ok(RocCurve {
                    mobility: m,
                    q,
                    slot,
                    points: perf::roc_sweep(mom, s.roc_points)?,
                    operating: json!({
                        "D_tx_m2s": m.d_tx_m2s,
                        "D_rx_m2s": m.d_rx_m2s,
                        "Q": q,
                        "slot": slot,
                        "gamma_prime": perf.rule.threshold().map(|t| t.gamma_prime),
                        "P_D": perf.p_d,
                        "P_FA": perf.p_fa,
                        "P_D_mc": est.map(|e| e.p_d),
                        "P_D_mc_se": est.map(|e| e.p_d_se),
                        "P_FA_mc": est.map(|e| e.p_fa),
                        "P_FA_mc_se": est.map(|e| e.p_fa_se),
                    }),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?
    .into_iter()
    .flatten()
    .collect::<Vec<_>>();

    let mut table = Table::new(&["D_tx", "D_rx", "Q", "slot", "gamma_prime", "P_FA", "P_D"]);
    for c in &curves {
        for pt in &c.points {
            table.push(vec![
                c.mobility.d_tx_m2s.into(),
                c.mobility.d_rx_m2s.into(),
                c.q.into(),
                c.slot.into(),
                pt.gamma_prime.into(),
                pt.p_fa.into(),
                pt.p_d.into(),
            ]);
        }
    }

    // more molecules dominate fewer; less mobility dominates more
    let find = |mi: usize, q: u32, slot: usize| {
        curves.iter().find(|c| c.mobility == s.mobility[mi] && c.q == q && c.slot == slot).expect("curve")
    };
    let mut q_sorted = s.q.clone();
    q_sorted.sort_unstable();
    q_sorted.dedup();
    let mob_order = order_by(&s.mobility, d_tot);
    let mut by_q = Vec::new();
    let mut by_mobility = Vec::new();
    for &slot in &s.slots {
        for mi in 0..s.mobility.len() {
            for w in q_sorted.windows(2) {
                let ok = roc_dominates(&find(mi, w[1], slot).points, &find(mi, w[0], slot).points, 1e-12);
                by_q.push(json!({"slot": slot, "D_tot_m2s": d_tot(&s.mobility[mi]), "Q_more": w[1], "Q_fewer": w[0], "dominates": ok}));
            }
        }
        for &q in &q_sorted {
            for w in mob_order.windows(2) {
                let ok = roc_dominates(&find(w[0], q, slot).points, &find(w[1], q, slot).points, 1e-12);
                by_mobility.push(json!({"slot": slot, "Q": q, "D_tot_less": d_tot(&s.mobility[w[0]]), "D_tot_more": d_tot(&s.mobility[w[1]]), "dominates": ok}));
            }
        }
    }
    let all = |v: &[Value]| v.iter().all(|x| x["dominates"] == true);
    let summary = json!({
        "operating_points": curves.iter().map(|c| c.operating.clone()).collect::<Vec<_>>(),
        "more_molecules_dominate": all(&by_q),
        "less_mobility_dominates": all(&by_mobility),
        "dominance_by_Q": by_q,
        "dominance_by_mobility": by_mobility,
    });
    Ok(Output { table, summary })
}

/// Average error probability against MSI variance, analytic and MC.
pub fn error_vs_noise(cfg: &Config) -> Result<Output> {
    let s = &cfg.sweep;
    let k = cfg.schedule.k;
    let sched = cfg.schedule()?;
    let tables = try_map(&s.mobility, |_, m| table_for(cfg, m, k))?;
    let points: Vec<(usize, f64)> =
        (0..s.mobility.len()).flat_map(|mi| s.sigma2_o.iter().map(move |&v| (mi, v))).collect();
    let results = try_map(&points, |idx, &(mi, s2)| {
        let noise = NoiseParams::new(cfg.noise.mu_o, s2)?;
        let analytic = perf::avg_error_prob(&sched, &noise, &tables[mi])?;
        let mc = simulate(cfg, &cfg.channel_with(&s.mobility[mi])?, &sched, &noise, &tables[mi], idx)?;
        Ok((analytic, mc.map(|e| (e.p_e, e.p_e_se))))
    })?;

    let mut table = Table::new(&["sigma2_o", "D_tx", "D_rx", "Pe_analytic", "Pe_mc", "mc_stderr"]);
    let mut max_z: f64 = 0.0;
    for (&(mi, s2), &(analytic, mc)) in points.iter().zip(&results) {
        let m = s.mobility[mi];
        table.push(vec![
            s2.into(),
            m.d_tx_m2s.into(),
            m.d_rx_m2s.into(),
            analytic.into(),
            mc.map(|x| x.0).into(),
            mc.map(|x| x.1).into(),
        ]);
        if let Some((pe, se)) = mc {
            max_z = max_z.max((pe - analytic).abs() / se);
        }
    }

    let at = |mi: usize, si: usize| results[mi * s.sigma2_o.len() + si].0;
    let s_order = order_by(&s.sigma2_o, |&v| v);
    let m_order = order_by(&s.mobility, d_tot);
    let in_noise: Vec<bool> = (0..s.mobility.len())
        .map(|mi| non_decreasing(&s_order.iter().map(|&si| at(mi, si)).collect::<Vec<_>>()))
        .collect();
    let in_mobility: Vec<bool> = (0..s.sigma2_o.len())
        .map(|si| non_decreasing(&m_order.iter().map(|&mi| at(mi, si)).collect::<Vec<_>>()))
        .collect();
    let summary = json!({
        "non_decreasing_in_sigma2_o": in_noise.iter().all(|&b| b),
        "non_decreasing_in_mobility": in_mobility.iter().all(|&b| b),
        "mc_trials": if cfg.mc.enabled { Some(cfg.mc.n_trials) } else { None },
        "max_abs_z": if cfg.mc.enabled { Some(max_z) } else { None },
    });
    Ok(Output { table, summary })
}

/// Capacity and its maximizing prior against MSI variance, per slot count.
pub fn capacity(cfg: &Config) -> Result<Output> {
    let s = &cfg.sweep;
    let k_max = *s.k.iter().max().expect("validated non-empty");
    let grid = cfg.beta_grid();
    let tables = try_map(&s.mobility, |_, m| table_for(cfg, m, k_max))?;
    let points: Vec<(usize, usize, f64)> = (0..s.mobility.len())
        .flat_map(|mi| s.k.iter().flat_map(move |&k| s.sigma2_o.iter().map(move |&v| (mi, k, v))))
        .collect();
    let results = try_map(&points, |idx, &(mi, k, s2)| {
        let noise = NoiseParams::new(cfg.noise.mu_o, s2)?;
        let template = TxSchedule::uniform(cfg.schedule.q_per_slot, k, cfg.schedule.beta)?;
        let c = perf::capacity(&template, &noise, &tables[mi], &grid)?;
        let at_star = template.with_beta(c.beta_star)?;
        let mc = simulate(cfg, &cfg.channel_with(&s.mobility[mi])?, &at_star, &noise, &tables[mi], idx)?;
        let mc_capacity = mc.map(|e| {
            e.slots.iter().map(|slot| perf::mutual_information(slot.p_d, slot.p_fa, c.beta_star)).sum::<f64>()
                / k as f64
        });
        Ok((c, mc_capacity))
    })?;

    let mut table = Table::new(&["D_tx", "D_rx", "k", "sigma2_o", "capacity", "beta_star", "capacity_mc"]);
    for (&(mi, k, s2), (c, mc)) in points.iter().zip(&results) {
        let m = s.mobility[mi];
        table.push(vec![
            m.d_tx_m2s.into(),
            m.d_rx_m2s.into(),
            k.into(),
            s2.into(),
            c.capacity.into(),
            c.beta_star.into(),
            Cell::from(*mc),
        ]);
    }

    let (nk, ns) = (s.k.len(), s.sigma2_o.len());
    let at = |mi: usize, ki: usize, si: usize| results[(mi * nk + ki) * ns + si].0;
    let s_order = order_by(&s.sigma2_o, |&v| v);
    let k_order = order_by(&s.k, |&k| k as f64);
    let mut in_noise = true;
    let mut in_k = true;
    for mi in 0..s.mobility.len() {
        for ki in 0..nk {
            in_noise &= non_increasing(&s_order.iter().map(|&si| at(mi, ki, si).capacity).collect::<Vec<_>>());
        }
        for si in 0..ns {
            in_k &= non_increasing(&k_order.iter().map(|&ki| at(mi, ki, si).capacity).collect::<Vec<_>>());
        }
    }
    let betas: Vec<f64> = results.iter().map(|(c, _)| c.beta_star).collect();
    let summary = json!({
        "non_increasing_in_sigma2_o": in_noise,
        "non_increasing_in_k": in_k,
        "beta_star_min": betas.iter().cloned().fold(f64::INFINITY, f64::min),
        "beta_star_max": betas.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    });
    Ok(Output { table, summary })
}
