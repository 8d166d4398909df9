//! Cross-checks of the closed forms against simulation.

use serde_json::json;

use molekom_core::channel::arrival_prob;
use molekom_core::mc::slot_level::SlotLevelSim;
use molekom_core::mc::TrajectorySim;
use molekom_core::ArrivalTable;

use super::{try_map, Output};
use crate::config::Config;
use crate::error::Result;
use crate::format::Table;
use crate::parallel;

/// Allowance for the late bias of discrete-step crossing detection.
pub const DISCRETIZATION_ALLOWANCE: f64 = 0.01;

/// Standard errors allowed between an estimate and its analytic value.
pub const Z_TOLERANCE: f64 = 3.0;

/// Walked arrival histograms, at `dt` and `dt / refine` on shared paths,
/// against quadrature.
pub fn arrivals(cfg: &Config) -> Result<Output> {
    let s = &cfg.sweep;
    let channel = cfg.channel_params()?;
    let horizon = s.offsets;
    let results = try_map(&s.slots, |idx, &slot| {
        let mc = cfg.trajectory(&channel, parallel::point_seed(cfg.seed, idx), horizon)?;
        let sim = TrajectorySim::new(&channel, slot, cfg.mc.n_molecules, &mc, cfg.mc.refine)?;
        let (coarse, fine) = parallel::trajectory(&sim);
        let exact = (0..horizon).map(|o| arrival_prob(o, slot, &channel)).collect::<molekom_core::Result<Vec<_>>>()?;
        Ok((sim.coarse_dt(), coarse, fine, exact))
    })?;

    let mut table = Table::new(&[
        "slot",
        "offset",
        "q_analytic",
        "q_dt",
        "stderr_dt",
        "q_fine",
        "stderr_fine",
        "tolerance",
        "pass_dt",
        "pass_fine",
    ]);
    let mut per_slot = Vec::new();
    let mut all_pass = true;
    let mut all_shrink = true;
    for (&slot, (dt, coarse, fine, exact)) in s.slots.iter().zip(&results) {
        let mut l1 = (0.0, 0.0);
        let mut slot_pass = true;
        for (o, &q) in exact.iter().enumerate() {
            let tol = Z_TOLERANCE * coarse.stderr(o) + DISCRETIZATION_ALLOWANCE;
            let (qc, qf) = (coarse.fraction(o), fine.fraction(o));
            let (pass_c, pass_f) =
                ((qc - q).abs() <= tol, (qf - q).abs() <= Z_TOLERANCE * fine.stderr(o) + DISCRETIZATION_ALLOWANCE);
            slot_pass &= pass_c;
            l1.0 += (qc - q).abs();
            l1.1 += (qf - q).abs();
            table.push(vec![
                slot.into(),
                o.into(),
                q.into(),
                qc.into(),
                coarse.stderr(o).into(),
                qf.into(),
                fine.stderr(o).into(),
                tol.into(),
                pass_c.into(),
                pass_f.into(),
            ]);
        }
        let shrinks = l1.1 < l1.0;
        all_pass &= slot_pass;
        all_shrink &= shrinks;
        per_slot.push(json!({
            "slot": slot,
            "dt_s": dt,
            "dt_fine_s": dt / cfg.mc.refine as f64,
            "molecules": coarse.molecules,
            "loss_fraction_dt": coarse.loss_fraction(),
            "loss_fraction_fine": fine.loss_fraction(),
            "l1_discrepancy_dt": l1.0,
            "l1_discrepancy_fine": l1.1,
            "within_tolerance": slot_pass,
            "discrepancy_shrinks": shrinks,
        }));
    }
    let summary = json!({
        "pass": all_pass && all_shrink,
        "within_tolerance": all_pass,
        "discrepancy_shrinks": all_shrink,
        "slots": per_slot,
    });
    Ok(Output { table, summary })
}

/// Empirical moments of the received count under each hypothesis against
/// the analytic moments.
pub fn moments(cfg: &Config) -> Result<Output> {
    let channel = cfg.channel_params()?;
    let sched = cfg.schedule()?;
    let noise = cfg.noise()?;
    let qtab = ArrivalTable::compute(sched.k(), &channel)?;
    let mc = cfg.slot_level(&channel, parallel::point_seed(cfg.seed, 0))?;
    let sim = SlotLevelSim::new(&sched, &noise, &qtab, mc)?;
    let est = parallel::slot_level(&sim).estimates();

    let mut table = Table::new(&[
        "slot",
        "hypothesis",
        "n",
        "mean_analytic",
        "mean_mc",
        "mean_se",
        "mean_z",
        "var_analytic",
        "var_mc",
        "var_se",
        "var_z",
        "pass",
    ]);
    let mut max_z: f64 = 0.0;
    let mut all_pass = true;
    for (s, m) in est.slots.iter().zip(sim.moments()) {
        for (h, e) in [(0u8, &s.h0), (1u8, &s.h1)] {
            let (mu, var) = m.under(h);
            let (zm, zv) = ((e.mean - mu) / e.mean_se, (e.var - var) / e.var_se);
            // a hypothesis never realized has no estimate
            let pass = e.n > 1 && zm.abs() <= Z_TOLERANCE && zv.abs() <= Z_TOLERANCE;
            if e.n > 1 {
                max_z = max_z.max(zm.abs()).max(zv.abs());
            }
            all_pass &= pass;
            table.push(vec![
                s.slot.into(),
                (h as u32).into(),
                e.n.into(),
                mu.into(),
                e.mean.into(),
                e.mean_se.into(),
                zm.into(),
                var.into(),
                e.var.into(),
                e.var_se.into(),
                zv.into(),
                pass.into(),
            ]);
        }
    }
    let summary = json!({
        "pass": all_pass,
        "trials": est.trials,
        "max_abs_z": max_z,
        "z_tolerance": Z_TOLERANCE,
    });
    Ok(Output { table, summary })
}
