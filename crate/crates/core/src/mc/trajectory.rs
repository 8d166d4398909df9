//! Particle-level simulation of the mobile channel.
//!
//! The transmitter and receiver diffuse from t = 0 until the release; their
//! positions at release are drawn exactly from the Brownian marginals. After
//! release the molecule (D_p) and receiver (D_rx) take Gaussian steps of
//! variance `2·D·dt`, and the molecule is absorbed at the first step on
//! which it is found on the other side of the receiver. No bridge
//! correction is applied, so arrivals are biased late by `O(√dt)`.

use alloc::vec::Vec;

use libm::{round, sqrt};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{rng_stream, Fidelity, McConfig};
use crate::channel::ChannelParams;
use crate::error::{Error, Result};

pub const MOLECULES_PER_BLOCK: u64 = 1024;

/// Absorption counts per slot offset, plus molecules still free at the horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrivalHistogram {
    pub counts: Vec<u64>,
    pub lost: u64,
    pub molecules: u64,
}

impl ArrivalHistogram {
    fn empty(horizon_slots: usize) -> Self {
        ArrivalHistogram { counts: alloc::vec![0; horizon_slots], lost: 0, molecules: 0 }
    }

    fn record(&mut self, offset: Option<u64>) {
        self.molecules += 1;
        match offset {
            Some(o) => self.counts[o as usize] += 1,
            None => self.lost += 1,
        }
    }

    pub fn merge(&mut self, other: &ArrivalHistogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.lost += other.lost;
        self.molecules += other.molecules;
    }

    /// Empirical `q(offset)`.
    pub fn fraction(&self, offset: usize) -> f64 {
        self.counts[offset] as f64 / self.molecules as f64
    }

    /// Binomial standard error of [`fraction`](Self::fraction).
    pub fn stderr(&self, offset: usize) -> f64 {
        let p = self.fraction(offset);
        sqrt(p * (1.0 - p) / self.molecules as f64)
    }

    pub fn loss_fraction(&self) -> f64 {
        self.lost as f64 / self.molecules as f64
    }
}

/// Walker for molecules released in one transmit slot.
///
/// With `refine > 1` each path is stepped at `dt / refine` and monitored
/// twice: at every fine step and at every `refine`-th step. The coarse
/// monitor sees exactly a `dt`-step walk, so the two histograms are a
/// coupled pair whose difference is pure discretization bias.
#[derive(Debug, Clone)]
pub struct TrajectorySim {
    params: ChannelParams,
    slot: usize,
    n_molecules: u64,
    seed: u64,
    horizon_slots: usize,
    fine_steps_per_slot: u64,
    refine: u64,
}

impl TrajectorySim {
    pub fn new(params: &ChannelParams, slot: usize, n_molecules: u64, cfg: &McConfig, refine: u32) -> Result<Self> {
        if cfg.fidelity != Fidelity::Trajectory {
            return Err(Error::invalid("fidelity", "trajectory simulation needs trajectory fidelity"));
        }
        cfg.validate(params)?;
        if slot < 1 {
            return Err(Error::invalid("slot", "transmit slot index starts at 1"));
        }
        if n_molecules == 0 {
            return Err(Error::invalid("n_molecules", "need at least one molecule"));
        }
        if refine == 0 {
            return Err(Error::invalid("refine", "must be at least 1"));
        }
        let dt = cfg.dt.expect("validated");
        // dt is snapped so a slot holds a whole number of steps
        let coarse_steps = round(params.tau() / dt).max(1.0) as u64;
        Ok(TrajectorySim {
            params: *params,
            slot,
            n_molecules,
            seed: cfg.seed,
            horizon_slots: cfg.horizon_slots,
            fine_steps_per_slot: coarse_steps * refine as u64,
            refine: refine as u64,
        })
    }

    pub fn block_count(&self) -> u64 {
        self.n_molecules.div_ceil(MOLECULES_PER_BLOCK)
    }

    /// Step actually used by the coarse monitor.
    pub fn coarse_dt(&self) -> f64 {
        self.params.tau() * self.refine as f64 / self.fine_steps_per_slot as f64
    }

    /// `(coarse, fine)` absorption offsets of molecule `index`.
    fn walk(&self, index: u64) -> (Option<u64>, Option<u64>) {
        let p = &self.params;
        let mut rng = rng_stream(self.seed, index);
        let release = p.release_time(self.slot);
        let z_tx: f64 = rng.sample(StandardNormal);
        let z_rx: f64 = rng.sample(StandardNormal);
        let mut molecule = sqrt(2.0 * p.d_tx() * release) * z_tx;
        let mut receiver = p.distance() + sqrt(2.0 * p.d_rx() * release) * z_rx;
        let start_side = receiver > molecule;

        let dt = p.tau() / self.fine_steps_per_slot as f64;
        let sd_mol = sqrt(2.0 * p.d_p() * dt);
        let sd_rx = sqrt(2.0 * p.d_rx() * dt);
        let total = self.horizon_slots as u64 * self.fine_steps_per_slot;
        let mut fine_hit = None;
        for step in 1..=total {
            let z: f64 = rng.sample(StandardNormal);
            molecule += sd_mol * z;
            if sd_rx > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                receiver += sd_rx * z;
            }
            if (receiver > molecule) == start_side {
                continue;
            }
            let offset = (step - 1) / self.fine_steps_per_slot;
            if fine_hit.is_none() {
                fine_hit = Some(offset);
            }
            if step % self.refine == 0 {
                return (Some(offset), fine_hit);
            }
        }
        (None, fine_hit)
    }

    /// `(coarse, fine)` histograms of the molecules in `block`.
    pub fn run_block(&self, block: u64) -> (ArrivalHistogram, ArrivalHistogram) {
        let mut coarse = ArrivalHistogram::empty(self.horizon_slots);
        let mut fine = ArrivalHistogram::empty(self.horizon_slots);
        let start = block * MOLECULES_PER_BLOCK;
        let end = (start + MOLECULES_PER_BLOCK).min(self.n_molecules);
        for index in start..end {
            let (c, f) = self.walk(index);
            coarse.record(c);
            fine.record(f);
        }
        (coarse, fine)
    }

    pub fn run(&self) -> (ArrivalHistogram, ArrivalHistogram) {
        let mut coarse = ArrivalHistogram::empty(self.horizon_slots);
        let mut fine = ArrivalHistogram::empty(self.horizon_slots);
        for block in 0..self.block_count() {
            let (c, f) = self.run_block(block);
            coarse.merge(&c);
            fine.merge(&f);
        }
        (coarse, fine)
    }
}

/// Absorption histogram of `n_molecules` released in `slot`, stepping at `cfg.dt`.
pub fn simulate_trajectory(
    params: &ChannelParams,
    slot: usize,
    n_molecules: u64,
    cfg: &McConfig,
) -> Result<ArrivalHistogram> {
    Ok(TrajectorySim::new(params, slot, n_molecules, cfg, 1)?.run().0)
}

/// Coupled `(dt, dt / refine)` histograms from shared fine paths.
pub fn simulate_trajectory_refined(
    params: &ChannelParams,
    slot: usize,
    n_molecules: u64,
    cfg: &McConfig,
    refine: u32,
) -> Result<(ArrivalHistogram, ArrivalHistogram)> {
    Ok(TrajectorySim::new(params, slot, n_molecules, cfg, refine)?.run())
}
