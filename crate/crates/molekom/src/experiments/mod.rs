//! The registered experiments.
//!
//! Each experiment turns a resolved [`Config`] into one CSV table (curves)
//! and one JSON summary (scalars and checks). Sweep points are evaluated in
//! parallel, collected in order, and seeded from the config seed and their
//! index, so output bytes depend only on the config.

mod custom;
mod fig1;
mod fig2;
mod validate;

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use molekom_core::detector::{DecisionRule, Fallback};
use molekom_core::mc::slot_level::{SlotLevelEstimates, SlotLevelSim};
use molekom_core::{ArrivalTable, NoiseParams, TxSchedule};

use crate::config::{Config, Mobility};
use crate::error::{Result, RunError};
use crate::format::Table;
use crate::parallel::{self, Pool};

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub table: Table,
    pub summary: Value,
}

/// Runs `cfg.experiment` on `pool`.
pub fn run(cfg: &Config, pool: &Pool) -> Result<Output> {
    pool.install(|| match cfg.experiment.as_str() {
        "fig1a" => fig1::roc(cfg),
        "fig1b" => fig1::error_vs_noise(cfg),
        "fig1c" => fig1::capacity(cfg),
        "fig2a" | "fig2b" => fig2::budget(cfg),
        "validate-q" => validate::arrivals(cfg),
        "validate-moments" => validate::moments(cfg),
        "custom" => custom::scenario(cfg),
        other => Err(RunError::Validation(format!("unknown experiment `{other}`"))),
    })
}

/// Header block shared by every output file: enough to rerun.
pub fn header(cfg: &Config) -> String {
    format!("molekom {} experiment {}\nresolved config:\n{}", env!("CARGO_PKG_VERSION"), cfg.experiment, cfg.to_json())
}

pub fn render_csv(cfg: &Config, out: &Output) -> String {
    out.table.to_csv(&header(cfg))
}

/// Summary object with the resolved config embedded.
pub fn render_summary(cfg: &Config, out: &Output) -> String {
    let doc = serde_json::json!({
        "experiment": cfg.experiment,
        "config": serde_json::to_value(cfg).expect("serializable"),
        "summary": out.summary,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
    text.push('\n');
    text
}

/// Writes `<dir>/<experiment>.csv` and `<dir>/<experiment>.summary.json`.
pub fn write(cfg: &Config, out: &Output, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    let csv = dir.join(format!("{}.csv", cfg.experiment));
    let json = dir.join(format!("{}.summary.json", cfg.experiment));
    fs::write(&csv, render_csv(cfg, out)).map_err(|e| RunError::io(&csv, e))?;
    fs::write(&json, render_summary(cfg, out)).map_err(|e| RunError::io(&json, e))?;
    Ok(vec![csv, json])
}

/// Evaluates `f` on every item in parallel; the first error by index wins.
fn try_map<T: Sync, R: Send>(items: &[T], f: impl Fn(usize, &T) -> Result<R> + Sync) -> Result<Vec<R>> {
    parallel::map(items, f).into_iter().collect()
}

/// Slot-level MC of one sweep point, or `None` when MC is disabled.
fn simulate(
    cfg: &Config,
    channel: &molekom_core::ChannelParams,
    sched: &TxSchedule,
    noise: &NoiseParams,
    table: &ArrivalTable,
    point: usize,
) -> Result<Option<SlotLevelEstimates>> {
    if !cfg.mc.enabled {
        return Ok(None);
    }
    let mc = cfg.slot_level(channel, parallel::point_seed(cfg.seed, point))?;
    let sim = SlotLevelSim::new(sched, noise, table, mc)?;
    Ok(Some(parallel::slot_level(&sim).estimates()))
}

fn rule_name(rule: &DecisionRule) -> &'static str {
    match rule {
        DecisionRule::Threshold(_) => "threshold",
        DecisionRule::Constant { reason: Fallback::DegenerateHypotheses, .. } => "prior-only",
        DecisionRule::Constant { reason: Fallback::NegativeDiscriminant, .. } => "always-one",
    }
}

fn d_tot(m: &Mobility) -> f64 {
    m.d_tx_m2s + m.d_rx_m2s
}

/// True if the sequence never decreases.
fn non_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] >= w[0])
}

fn non_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0])
}
