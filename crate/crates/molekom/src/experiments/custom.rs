//! Full per-slot report of a single user scenario.

use serde_json::json;

use molekom_core::perf;
use molekom_core::stats::gaussian_validity;
use molekom_core::ArrivalTable;

use super::{rule_name, simulate, Output};
use crate::config::Config;
use crate::error::Result;
use crate::format::Table;

pub fn scenario(cfg: &Config) -> Result<Output> {
    let channel = cfg.channel_params()?;
    let sched = cfg.schedule()?;
    let noise = cfg.noise()?;
    let qtab = ArrivalTable::compute(sched.k(), &channel)?;
    let link = perf::link_performance(&sched, &noise, &qtab)?;
    let cap = perf::capacity(&sched, &noise, &qtab, &cfg.beta_grid())?;
    let mc = simulate(cfg, &channel, &sched, &noise, &qtab, 0)?;

    let mut table = Table::new(&[
        "slot",
        "Q",
        "q0",
        "mu0",
        "sigma2_0",
        "mu1",
        "sigma2_1",
        "rule",
        "gamma_prime",
        "P_D",
        "P_FA",
        "P_e",
        "MI",
        "gaussian_valid",
        "P_D_mc",
        "P_FA_mc",
        "P_e_mc",
        "P_e_mc_se",
    ]);
    for (s, m) in link.slots.iter().zip(&link.moments) {
        let est = mc.as_ref().map(|e| e.slots[s.slot - 1]);
        table.push(vec![
            s.slot.into(),
            sched.count(s.slot).into(),
            qtab.q(0, s.slot).into(),
            m.mu0.into(),
            m.sigma2_0.into(),
            m.mu1.into(),
            m.sigma2_1.into(),
            rule_name(&s.rule).into(),
            s.rule.threshold().map(|t| t.gamma_prime).into(),
            s.p_d.into(),
            s.p_fa.into(),
            s.p_e.into(),
            s.mutual_info.into(),
            gaussian_validity(s.slot, &sched, &qtab).valid.into(),
            est.map(|e| e.p_d).into(),
            est.map(|e| e.p_fa).into(),
            est.map(|e| e.p_e).into(),
            est.map(|e| e.p_e_se).into(),
        ]);
    }
    let summary = json!({
        "k": link.k,
        "beta": link.beta,
        "P_D": link.p_d,
        "P_FA": link.p_fa,
        "P_e": link.p_e,
        "mutual_information": link.mutual_info,
        "capacity": cap.capacity,
        "beta_star": cap.beta_star,
        "mc": mc.map(|e| json!({
            "trials": e.trials,
            "P_D": e.p_d,
            "P_D_se": e.p_d_se,
            "P_FA": e.p_fa,
            "P_FA_se": e.p_fa_se,
            "P_e": e.p_e,
            "P_e_se": e.p_e_se,
        })),
    });
    Ok(Output { table, summary })
}
