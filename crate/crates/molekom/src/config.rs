//! Scenario files.
//!
//! A config is JSON with the units in the field names (`d_um`, `tau_ms`,
//! `D_p_m2s`). Every field is optional in a user file: it is merged over the
//! bundled default of its experiment, and the fully expanded result is
//! what runs and what gets written into output headers.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use molekom_core::mc::{Fidelity, IsiModel, McConfig, SignalModel};
use molekom_core::perf::BetaGrid;
use molekom_core::{ChannelParams, IndexOrigin, NoiseParams, TxSchedule};

use crate::error::{Result, RunError};

pub const EXPERIMENTS: [&str; 8] =
    ["fig1a", "fig1b", "fig1c", "fig2a", "fig2b", "validate-q", "validate-moments", "custom"];

const BUNDLED: [(&str, &str); 8] = [
    ("fig1a", include_str!("../configs/fig1a.json")),
    ("fig1b", include_str!("../configs/fig1b.json")),
    ("fig1c", include_str!("../configs/fig1c.json")),
    ("fig2a", include_str!("../configs/fig2a.json")),
    ("fig2b", include_str!("../configs/fig2b.json")),
    ("validate-q", include_str!("../configs/validate-q.json")),
    ("validate-moments", include_str!("../configs/validate-moments.json")),
    ("custom", include_str!("../configs/custom.json")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: String,
    pub seed: u64,
    pub output_dir: String,
    pub channel: ChannelConfig,
    pub schedule: ScheduleConfig,
    pub noise: NoiseConfig,
    pub mc: McSection,
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub d_um: f64,
    pub tau_ms: f64,
    #[serde(rename = "D_p_m2s")]
    pub d_p_m2s: f64,
    #[serde(rename = "D_tx_m2s")]
    pub d_tx_m2s: f64,
    #[serde(rename = "D_rx_m2s")]
    pub d_rx_m2s: f64,
    pub index_origin: OriginName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OriginName {
    ReleaseSlot,
    SlotStart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    /// Molecules per slot when `Q` is not given.
    #[serde(rename = "Q_per_slot")]
    pub q_per_slot: u32,
    pub k: usize,
    /// Explicit per-slot counts; overrides `Q_per_slot` and must have `k` entries.
    #[serde(rename = "Q")]
    pub q: Option<Vec<u32>>,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub mu_o: f64,
    pub sigma2_o: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub enabled: bool,
    pub n_trials: u64,
    pub n_molecules: u64,
    pub fidelity: FidelityName,
    /// Trajectory step; `null` means τ/1000.
    pub dt_ms: Option<f64>,
    /// Coupled refinement factor for trajectory runs.
    pub refine: u32,
    pub horizon_slots: usize,
    pub isi_model: IsiName,
    pub signal_model: SignalName,
    pub counting_error: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FidelityName {
    SlotLevel,
    Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsiName {
    Categorical,
    IndependentBinomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalName {
    Exact,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchName {
    Exhaustive,
    CoordinateDescent,
}

/// Mobility setting of one curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mobility {
    #[serde(rename = "D_tx_m2s")]
    pub d_tx_m2s: f64,
    #[serde(rename = "D_rx_m2s")]
    pub d_rx_m2s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaGridConfig {
    pub lo: f64,
    pub hi: f64,
    pub coarse_step: f64,
    pub fine_step: f64,
}

/// Knobs of the sweeping experiments. Each experiment reads the fields it
/// needs and ignores the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Curves over transmitter/receiver mobility; replaces the channel's
    /// `D_tx_m2s`/`D_rx_m2s`.
    pub mobility: Vec<Mobility>,
    pub sigma2_o: Vec<f64>,
    #[serde(rename = "Q")]
    pub q: Vec<u32>,
    pub k: Vec<usize>,
    /// Slots whose ROC (fig1a) or arrival histogram (validate-q) is reported.
    pub slots: Vec<usize>,
    pub roc_points: usize,
    /// Slot offsets checked by validate-q.
    pub offsets: usize,
    pub budget: u32,
    /// Slots the budget is spread over (fig2a/fig2b use 2).
    pub budget_slots: usize,
    pub search: SearchName,
    pub restarts: usize,
    pub beta_grid: BetaGridConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            experiment: "custom".into(),
            seed: 1,
            output_dir: "results".into(),
            channel: ChannelConfig {
                d_um: 1.0,
                tau_ms: 10.0,
                d_p_m2s: 5e-10,
                d_tx_m2s: 1e-10,
                d_rx_m2s: 1e-10,
                index_origin: OriginName::ReleaseSlot,
            },
            schedule: ScheduleConfig { q_per_slot: 30, k: 20, q: None, beta: 0.5 },
            noise: NoiseConfig { mu_o: 10.0, sigma2_o: 10.0 },
            mc: McSection {
                enabled: true,
                n_trials: 20_000,
                n_molecules: 20_000,
                fidelity: FidelityName::SlotLevel,
                dt_ms: None,
                refine: 4,
                horizon_slots: 4,
                isi_model: IsiName::Categorical,
                signal_model: SignalName::Exact,
                counting_error: true,
            },
            sweep: SweepConfig {
                mobility: vec![
                    Mobility { d_tx_m2s: 1e-11, d_rx_m2s: 1e-11 },
                    Mobility { d_tx_m2s: 1e-10, d_rx_m2s: 1e-10 },
                    Mobility { d_tx_m2s: 1e-9, d_rx_m2s: 1e-9 },
                ],
                sigma2_o: vec![1.0, 5.0, 10.0, 15.0, 20.0],
                q: vec![20, 30],
                k: vec![5, 10, 20],
                slots: vec![1],
                roc_points: 201,
                offsets: 4,
                budget: 60,
                budget_slots: 2,
                search: SearchName::Exhaustive,
                restarts: 5,
                beta_grid: BetaGridConfig { lo: 0.01, hi: 0.99, coarse_step: 0.01, fine_step: 0.001 },
            },
        }
    }
}

/// Recursively overlays `patch` on `base`; objects merge, anything else replaces.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (key, value) in p {
                match b.get_mut(&key) {
                    Some(slot) => merge(slot, value),
                    None => {
                        b.insert(key, value);
                    }
                }
            }
        }
        (slot, value) => *slot = value,
    }
}

/// The bundled default config text of `experiment`.
pub fn bundled(experiment: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(name, _)| *name == experiment).map(|(_, text)| *text)
}

fn parse_value(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| RunError::Parse(e.to_string()))
}

impl Config {
    /// Parses a user config and expands every omitted field from the
    /// defaults of its experiment.
    pub fn from_json(text: &str) -> Result<Config> {
        let user = parse_value(text)?;
        if !user.is_object() {
            return Err(RunError::Parse("top level must be a JSON object".into()));
        }
        let experiment = match user.get("experiment") {
            Some(Value::String(name)) => name.clone(),
            Some(_) => return Err(RunError::Parse("`experiment` must be a string".into())),
            None => return Err(RunError::Validation("missing `experiment`".into())),
        };
        Config::layered(&experiment, user)
    }

    /// The bundled config of `experiment`.
    pub fn for_experiment(experiment: &str) -> Result<Config> {
        Config::layered(experiment, Value::Object(Default::default()))
    }

    fn layered(experiment: &str, user: Value) -> Result<Config> {
        let text = bundled(experiment).ok_or_else(|| {
            RunError::Validation(format!(
                "unknown experiment `{experiment}` (expected one of {})",
                EXPERIMENTS.join(", ")
            ))
        })?;
        let mut value = serde_json::to_value(Config::default()).expect("serializable");
        merge(&mut value, parse_value(text).expect("bundled configs are valid JSON"));
        merge(&mut value, user);
        let mut cfg: Config = serde_json::from_value(value).map_err(|e| RunError::Parse(e.to_string()))?;
        if cfg.mc.dt_ms.is_none() {
            cfg.mc.dt_ms = Some(cfg.channel.tau_ms / 1000.0);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Pretty JSON of the resolved config.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(RunError::Validation(msg.to_string()));
        if !EXPERIMENTS.contains(&self.experiment.as_str()) {
            return fail("unknown experiment");
        }
        self.channel_params()?;
        self.schedule()?;
        self.noise()?;
        self.mc_config(&self.channel_params()?)?;
        if let Some(q) = &self.schedule.q {
            if q.len() != self.schedule.k {
                return fail("schedule.Q must have k entries");
            }
        }
        let s = &self.sweep;
        for m in &s.mobility {
            self.channel_with(m)?;
        }
        for &v in &s.sigma2_o {
            NoiseParams::new(self.noise.mu_o, v)?;
        }
        if s.k.contains(&0) {
            return fail("sweep.k entries must be at least 1");
        }
        if s.slots.contains(&0) {
            return fail("sweep.slots entries start at 1");
        }
        if s.roc_points < 2 {
            return fail("sweep.roc_points must be at least 2");
        }
        if s.offsets == 0 {
            return fail("sweep.offsets must be at least 1");
        }
        if s.budget_slots < 2 || (s.budget as usize) < s.budget_slots {
            return fail("sweep.budget_slots must be at least 2 and at most sweep.budget");
        }
        if s.restarts == 0 {
            return fail("sweep.restarts must be at least 1");
        }
        let g = s.beta_grid;
        let grid_ok = g.lo > 0.0
            && g.hi < 1.0
            && g.lo <= g.hi
            && g.coarse_step > 0.0
            && g.fine_step > 0.0
            && g.fine_step <= g.coarse_step;
        if !grid_ok {
            return fail("sweep.beta_grid needs 0 < lo <= hi < 1 and 0 < fine_step <= coarse_step");
        }
        let needs_sweep: &[(&str, bool)] = &[
            ("sweep.mobility", s.mobility.is_empty()),
            ("sweep.sigma2_o", s.sigma2_o.is_empty()),
            ("sweep.Q", s.q.is_empty()),
            ("sweep.k", s.k.is_empty()),
            ("sweep.slots", s.slots.is_empty()),
        ];
        for (name, empty) in needs_sweep {
            if *empty {
                return Err(RunError::Validation(format!("{name} must not be empty")));
            }
        }
        Ok(())
    }

    pub fn index_origin(&self) -> IndexOrigin {
        match self.channel.index_origin {
            OriginName::ReleaseSlot => IndexOrigin::ReleaseSlot,
            OriginName::SlotStart => IndexOrigin::SlotStart,
        }
    }

    /// Channel in SI units.
    pub fn channel_params(&self) -> Result<ChannelParams> {
        self.channel_with(&Mobility { d_tx_m2s: self.channel.d_tx_m2s, d_rx_m2s: self.channel.d_rx_m2s })
    }

    /// Channel with the mobility of one sweep curve.
    pub fn channel_with(&self, m: &Mobility) -> Result<ChannelParams> {
        let c = &self.channel;
        Ok(ChannelParams::new(c.d_um * 1e-6, c.d_p_m2s, m.d_tx_m2s, m.d_rx_m2s, c.tau_ms * 1e-3)?
            .with_index_origin(self.index_origin()))
    }

    pub fn schedule(&self) -> Result<TxSchedule> {
        let s = &self.schedule;
        let counts = s.q.clone().unwrap_or_else(|| vec![s.q_per_slot; s.k]);
        Ok(TxSchedule::new(counts, s.beta)?)
    }

    pub fn noise(&self) -> Result<NoiseParams> {
        Ok(NoiseParams::new(self.noise.mu_o, self.noise.sigma2_o)?)
    }

    pub fn beta_grid(&self) -> BetaGrid {
        let g = self.sweep.beta_grid;
        BetaGrid { lo: g.lo, hi: g.hi, coarse_step: g.coarse_step, fine_step: g.fine_step }
    }

    /// Core MC settings; `seed` is the per-point seed, not the config seed.
    pub fn mc_config(&self, channel: &ChannelParams) -> Result<McConfig> {
        let m = &self.mc;
        let dt = m.dt_ms.unwrap_or(self.channel.tau_ms / 1000.0) * 1e-3;
        let cfg = McConfig {
            n_trials: match m.fidelity {
                FidelityName::SlotLevel => m.n_trials,
                FidelityName::Trajectory => m.n_molecules,
            },
            seed: self.seed,
            fidelity: match m.fidelity {
                FidelityName::SlotLevel => Fidelity::SlotLevel,
                FidelityName::Trajectory => Fidelity::Trajectory,
            },
            dt: Some(dt),
            horizon_slots: m.horizon_slots,
            isi_model: match m.isi_model {
                IsiName::Categorical => IsiModel::Categorical,
                IsiName::IndependentBinomial => IsiModel::IndependentBinomial,
            },
            signal_model: match m.signal_model {
                SignalName::Exact => SignalModel::Exact,
                SignalName::Gaussian => SignalModel::Gaussian,
            },
            counting_error: m.counting_error,
        };
        if m.refine == 0 {
            return Err(RunError::Validation("mc.refine must be at least 1".into()));
        }
        let mut trajectory = cfg;
        trajectory.fidelity = Fidelity::Trajectory;
        trajectory.n_trials = m.n_molecules;
        trajectory.validate(channel)?;
        let mut slot = cfg;
        slot.fidelity = Fidelity::SlotLevel;
        slot.n_trials = m.n_trials;
        slot.validate(channel)?;
        Ok(cfg)
    }

    /// Slot-level settings for one sweep point.
    pub fn slot_level(&self, channel: &ChannelParams, seed: u64) -> Result<McConfig> {
        let mut cfg = self.mc_config(channel)?;
        cfg.fidelity = Fidelity::SlotLevel;
        cfg.n_trials = self.mc.n_trials;
        cfg.seed = seed;
        Ok(cfg)
    }

    /// Trajectory settings for one sweep point, with `horizon` slots.
    pub fn trajectory(&self, channel: &ChannelParams, seed: u64, horizon: usize) -> Result<McConfig> {
        let mut cfg = self.mc_config(channel)?;
        cfg.fidelity = Fidelity::Trajectory;
        cfg.n_trials = self.mc.n_molecules;
        cfg.horizon_slots = horizon;
        cfg.seed = seed;
        Ok(cfg)
    }
}
