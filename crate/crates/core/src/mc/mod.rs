//! Monte Carlo validation of the analytic pipeline.
//!
//! Two fidelities: [`slot_level`] samples received counts from the
//! generative model given the arrival table, and [`trajectory`] walks
//! individual molecules and nanomachines to check the arrival table itself.
//!
//! Every trial (or molecule) draws from its own stream, and trials are
//! grouped in fixed blocks whose tallies are merged in block order, so a
//! result depends only on the seed, never on how blocks were scheduled.

pub mod slot_level;
pub mod trajectory;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::ChannelParams;
use crate::error::{Error, Result};

pub use slot_level::{simulate_slot_level, SlotLevelEstimates, SlotLevelSim, SlotLevelTally, TrialResult};
pub use trajectory::{simulate_trajectory, simulate_trajectory_refined, ArrivalHistogram, TrajectorySim};

/// Deterministic random stream `stream_id` of `seed`.
///
/// ChaCha8 keyed by the seed, with the stream id on ChaCha's 64-bit stream
/// counter, so distinct ids never overlap.
pub fn rng_stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fidelity {
    #[default]
    SlotLevel,
    Trajectory,
}

/// How molecules released in one slot are spread over later slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IsiModel {
    /// Each molecule arrives in at most one slot (multinomial over offsets).
    #[default]
    Categorical,
    /// Independent Binomial(Q, q_i) per offset, as in the ISI sum taken
    /// literally; a molecule may be counted more than once.
    IndependentBinomial,
}

/// What the slot-level simulator samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignalModel {
    /// Exact binomial arrivals plus Gaussian MSI and counting error.
    #[default]
    Exact,
    /// R[j] drawn directly from the Gaussian N(μ_x, σ_x²) of the realized
    /// hypothesis. Checks the detection formulas in isolation from the
    /// Gaussian approximation.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    /// Trials (slot level) or molecules (trajectory).
    pub n_trials: u64,
    pub seed: u64,
    pub fidelity: Fidelity,
    /// Trajectory time step in seconds.
    pub dt: Option<f64>,
    /// Trajectory horizon in slots; later arrivals count as lost.
    pub horizon_slots: usize,
    pub isi_model: IsiModel,
    pub signal_model: SignalModel,
    /// Adds the N(0, E{R}) counting error.
    pub counting_error: bool,
}

impl McConfig {
    pub fn slot_level(n_trials: u64, seed: u64) -> Self {
        McConfig {
            n_trials,
            seed,
            fidelity: Fidelity::SlotLevel,
            dt: None,
            horizon_slots: 4,
            isi_model: IsiModel::default(),
            signal_model: SignalModel::default(),
            counting_error: true,
        }
    }

    pub fn trajectory(n_molecules: u64, seed: u64, dt: f64, horizon_slots: usize) -> Self {
        McConfig {
            fidelity: Fidelity::Trajectory,
            dt: Some(dt),
            horizon_slots,
            ..McConfig::slot_level(n_molecules, seed)
        }
    }

    pub fn validate(&self, channel: &ChannelParams) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::invalid("n_trials", "need at least one trial"));
        }
        if self.fidelity == Fidelity::Trajectory {
            let dt = self.dt.ok_or(Error::invalid("dt", "required in trajectory mode"))?;
            if !(dt > 0.0 && dt <= channel.tau() / 100.0 * (1.0 + 1e-12)) {
                return Err(Error::invalid("dt", "must satisfy 0 < dt <= tau/100"));
            }
            if self.horizon_slots == 0 {
                return Err(Error::invalid("horizon_slots", "need at least one slot"));
            }
        }
        Ok(())
    }
}
