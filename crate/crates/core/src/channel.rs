//! First hitting time of a molecule released by a mobile transmitter at a
//! mobile absorbing receiver, and the per-slot arrival probabilities.
//!
//! All quantities are SI: meters, seconds, m²/s.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{erf, exp, sqrt};

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

/// How the transmit-slot index maps to the mobility spread at release.
///
/// `ReleaseSlot` uses `i·τ`. With d = 1 µm, D_p = 5e-10, D_tx = D_rx = 1e-9
/// and τ = 10 ms it gives `q(0, 1) = 0.4505`.
/// `SlotStart` uses `(i−1)·τ`, the start of slot `i`, so slot 1 releases
/// from the initial geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndexOrigin {
    #[default]
    ReleaseSlot,
    SlotStart,
}

/// Physical constants of the link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    distance: f64,
    d_p: f64,
    d_tx: f64,
    d_rx: f64,
    tau: f64,
    origin: IndexOrigin,
}

impl ChannelParams {
    /// `distance` between transmitter and receiver at t = 0, diffusion
    /// coefficients of the molecule, transmitter and receiver, and slot
    /// duration `tau`.
    pub fn new(distance: f64, d_p: f64, d_tx: f64, d_rx: f64, tau: f64) -> Result<Self> {
        if !(distance > 0.0 && distance.is_finite()) {
            return Err(Error::invalid("distance", "must be positive and finite"));
        }
        if !(d_p > 0.0 && d_p.is_finite()) {
            return Err(Error::invalid("D_p", "must be positive and finite"));
        }
        if !(d_tx >= 0.0 && d_tx.is_finite()) {
            return Err(Error::invalid("D_tx", "must be non-negative and finite"));
        }
        if !(d_rx >= 0.0 && d_rx.is_finite()) {
            return Err(Error::invalid("D_rx", "must be non-negative and finite"));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::invalid("tau", "must be positive and finite"));
        }
        Ok(ChannelParams { distance, d_p, d_tx, d_rx, tau, origin: IndexOrigin::default() })
    }

    pub fn with_index_origin(mut self, origin: IndexOrigin) -> Self {
        self.origin = origin;
        self
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn d_p(&self) -> f64 {
        self.d_p
    }

    pub fn d_tx(&self) -> f64 {
        self.d_tx
    }

    pub fn d_rx(&self) -> f64 {
        self.d_rx
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn index_origin(&self) -> IndexOrigin {
        self.origin
    }

    /// Relative mobility of the two nanomachines, `D_tx + D_rx`.
    pub fn d_tot(&self) -> f64 {
        self.d_tx + self.d_rx
    }

    /// Relative diffusion of molecule and receiver, `D_rx + D_p`.
    pub fn d_p_eff(&self) -> f64 {
        self.d_rx + self.d_p
    }

    /// Elapsed time between t = 0 and the release in slot `i`.
    pub fn release_time(&self, slot: usize) -> f64 {
        match self.origin {
            IndexOrigin::ReleaseSlot => slot as f64 * self.tau,
            IndexOrigin::SlotStart => (slot - 1) as f64 * self.tau,
        }
    }

    /// Half the variance of the transmitter–receiver offset at release.
    fn mobility_spread(&self, slot: usize) -> f64 {
        self.release_time(slot) * self.d_tot()
    }
}

/// Hitting density at elapsed time `t` after release, with `spread` the
/// accumulated `T_release · D_tot`.
fn density(t: f64, spread: f64, p: &ChannelParams) -> f64 {
    let d = p.distance;
    let de = p.d_p_eff();
    if spread == 0.0 {
        // Static transmitter: the classical 1D absorbing-boundary density.
        return d / sqrt(4.0 * PI * de * t * t * t) * exp(-d * d / (4.0 * de * t));
    }
    let mixed = spread + t * de;
    let direct = sqrt(spread * de) / (PI * sqrt(t) * mixed) * exp(-d * d / (4.0 * spread));
    let shifted = t + spread / de;
    let drift = d / sqrt(4.0 * PI * de * shifted * shifted * shifted)
        * exp(-d * d / (4.0 * de * shifted))
        * erf(d * sqrt(t * de) / (2.0 * sqrt(spread * mixed)));
    direct + drift
}

/// First-hitting-time density f(t; i) (1/s) of a molecule released in
/// transmit slot `slot`, `t` seconds after release.
pub fn hitting_time_pdf(t: f64, slot: usize, p: &ChannelParams) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", "must be positive and finite"));
    }
    if slot < 1 {
        return Err(Error::invalid("slot", "transmit slot index starts at 1"));
    }
    Ok(density(t, p.mobility_spread(slot), p))
}

/// ∫ f(t; slot) dt over `[lo, hi]`. Intervals starting at zero are
/// integrated in `u = √t`, which removes the `1/√t` spike of the direct term.
fn integrate_density(lo: f64, hi: f64, slot: usize, p: &ChannelParams, tol: Tolerance) -> Result<f64> {
    let spread = p.mobility_spread(slot);
    if lo == 0.0 {
        quad::integrate(|u| 2.0 * u * density(u * u, spread, p), 0.0, sqrt(hi), tol)
    } else {
        quad::integrate(|t| density(t, spread, p), lo, hi, tol)
    }
}

/// Probability that a molecule released in slot `slot` arrives during the
/// slot `offset` intervals later.
pub fn arrival_prob(offset: usize, slot: usize, p: &ChannelParams) -> Result<f64> {
    arrival_prob_with(offset, slot, p, Tolerance::default())
}

pub fn arrival_prob_with(offset: usize, slot: usize, p: &ChannelParams, tol: Tolerance) -> Result<f64> {
    if slot < 1 {
        return Err(Error::invalid("slot", "transmit slot index starts at 1"));
    }
    let lo = offset as f64 * p.tau;
    let hi = (offset + 1) as f64 * p.tau;
    integrate_density(lo, hi, slot, p, tol).map(|q| q.clamp(0.0, 1.0))
}

/// ∫₀^horizon f(t; slot) dt, integrated over geometrically growing pieces
/// so the long `t^{-3/2}` tail stays accurate.
pub fn cumulative_arrival(horizon: f64, slot: usize, p: &ChannelParams) -> Result<f64> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::invalid("horizon", "must be non-negative and finite"));
    }
    if slot < 1 {
        return Err(Error::invalid("slot", "transmit slot index starts at 1"));
    }
    if horizon == 0.0 {
        return Ok(0.0);
    }
    let tol = Tolerance::default();
    let first = horizon.min(p.tau);
    let mut total = integrate_density(0.0, first, slot, p, tol)?;
    let mut lo = first;
    while lo < horizon {
        let hi = (2.0 * lo).min(horizon);
        total += integrate_density(lo, hi, slot, p, tol)?;
        lo = hi;
    }
    Ok(total)
}

/// Memoized `q(offset, i)` for `1 ≤ i ≤ k`, `0 ≤ offset ≤ k − i`.
///
/// Built once per `(k, params)`; immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalTable {
    rows: Vec<Vec<f64>>,
}

impl ArrivalTable {
    pub fn compute(k: usize, p: &ChannelParams) -> Result<Self> {
        if k < 1 {
            return Err(Error::invalid("k", "need at least one slot"));
        }
        let mut rows = Vec::with_capacity(k);
        for slot in 1..=k {
            let row = (0..=k - slot).map(|offset| arrival_prob(offset, slot, p)).collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(ArrivalTable { rows })
    }

    /// Builds a table from explicit rows; row `i − 1` holds the `k − i + 1`
    /// offsets of transmit slot `i`. Useful for synthetic channels.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::invalid("rows", "need at least one slot"));
        }
        for (idx, row) in rows.iter().enumerate() {
            if row.len() != k - idx {
                return Err(Error::invalid("rows", "row i must hold k - i + 1 offsets"));
            }
            if row.iter().any(|q| !(0.0..=1.0).contains(q)) {
                return Err(Error::invalid("rows", "probabilities must lie in [0, 1]"));
            }
            if row.iter().sum::<f64>() > 1.0 + 1e-9 {
                return Err(Error::invalid("rows", "row mass exceeds one"));
            }
        }
        Ok(ArrivalTable { rows })
    }

    /// Number of slots covered.
    pub fn k(&self) -> usize {
        self.rows.len()
    }

    /// `q(offset, slot)`; panics outside the table.
    pub fn q(&self, offset: usize, slot: usize) -> f64 {
        self.rows[slot - 1][offset]
    }

    /// All offsets for transmit slot `slot`.
    pub fn row(&self, slot: usize) -> &[f64] {
        &self.rows[slot - 1]
    }
}
