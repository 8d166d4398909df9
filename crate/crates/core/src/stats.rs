//! Gaussian model of the received molecule count in each slot.
//!
//! Under H0 the count is ISI + MSI + counting error; under H1 the current
//! slot's own arrivals are added. Sums run over all previous slots with no
//! truncation.

use alloc::vec::Vec;

use crate::channel::ArrivalTable;
use crate::error::{Error, Result};

/// Per-slot emission counts and the prior of symbol 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TxSchedule {
    counts: Vec<u32>,
    beta: f64,
}

impl TxSchedule {
    pub fn new(counts: Vec<u32>, beta: f64) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::invalid("Q", "need at least one slot"));
        }
        check_beta(beta)?;
        Ok(TxSchedule { counts, beta })
    }

    /// Same count `q` in each of `k` slots.
    pub fn uniform(q: u32, k: usize, beta: f64) -> Result<Self> {
        TxSchedule::new(alloc::vec![q; k], beta)
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Ok(TxSchedule { counts: self.counts.clone(), beta })
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// `Q[slot]`, 1-based.
    pub fn count(&self, slot: usize) -> u32 {
        self.counts[slot - 1]
    }

    /// Total molecules over all slots.
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&q| q as u64).sum()
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("beta", "prior must lie strictly inside (0, 1)"))
    }
}

/// Multi-source interference, modelled as N(μ_o, σ_o²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    mu_o: f64,
    sigma2_o: f64,
}

impl NoiseParams {
    pub fn new(mu_o: f64, sigma2_o: f64) -> Result<Self> {
        if !(mu_o >= 0.0 && mu_o.is_finite()) {
            return Err(Error::invalid("mu_o", "must be non-negative and finite"));
        }
        if !(sigma2_o >= 0.0 && sigma2_o.is_finite()) {
            return Err(Error::invalid("sigma2_o", "must be non-negative and finite"));
        }
        Ok(NoiseParams { mu_o, sigma2_o })
    }

    pub fn mu_o(&self) -> f64 {
        self.mu_o
    }

    pub fn sigma2_o(&self) -> f64 {
        self.sigma2_o
    }
}

/// Mean and variance of R[j] under H0 and H1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisMoments {
    pub slot: usize,
    pub mu0: f64,
    pub sigma2_0: f64,
    pub mu1: f64,
    pub sigma2_1: f64,
}

impl HypothesisMoments {
    /// `(mean, variance)` under hypothesis `symbol`.
    pub fn under(&self, symbol: u8) -> (f64, f64) {
        if symbol == 0 {
            (self.mu0, self.sigma2_0)
        } else {
            (self.mu1, self.sigma2_1)
        }
    }
}

fn check_slot(slot: usize, sched: &TxSchedule, qtab: &ArrivalTable) -> Result<()> {
    if slot < 1 || slot > sched.k() {
        return Err(Error::invalid("slot", "must lie in 1..=k"));
    }
    if qtab.k() < sched.k() {
        return Err(Error::invalid("qtab", "arrival table covers fewer slots than the schedule"));
    }
    Ok(())
}

/// Mean and variance of the ISI sum in `slot`. Offset `i` comes from
/// transmit slot `slot − i`, so `q_i = q(i, slot − i)`.
fn isi(slot: usize, sched: &TxSchedule, qtab: &ArrivalTable) -> (f64, f64) {
    let beta = sched.beta();
    let mut mean = 0.0;
    let mut var = 0.0;
    for offset in 1..slot {
        let tx = slot - offset;
        let q = qtab.q(offset, tx);
        let signal = sched.count(tx) as f64 * q;
        mean += beta * signal;
        var += beta * signal * (1.0 - q) + beta * (1.0 - beta) * signal * signal;
    }
    (mean, var)
}

/// `(μ0[j], σ0²[j])`. The counting-error variance equals μ0.
pub fn moments_h0(slot: usize, sched: &TxSchedule, noise: &NoiseParams, qtab: &ArrivalTable) -> Result<(f64, f64)> {
    check_slot(slot, sched, qtab)?;
    let (isi_mean, isi_var) = isi(slot, sched, qtab);
    let mu0 = isi_mean + noise.mu_o;
    Ok((mu0, isi_var + noise.sigma2_o + mu0))
}

/// `(μ1[j], σ1²[j])`. The counting-error variance equals μ1.
pub fn moments_h1(slot: usize, sched: &TxSchedule, noise: &NoiseParams, qtab: &ArrivalTable) -> Result<(f64, f64)> {
    check_slot(slot, sched, qtab)?;
    let (isi_mean, isi_var) = isi(slot, sched, qtab);
    let q0 = qtab.q(0, slot);
    let signal = sched.count(slot) as f64 * q0;
    let mu1 = signal + isi_mean + noise.mu_o;
    Ok((mu1, signal * (1.0 - q0) + isi_var + noise.sigma2_o + mu1))
}

pub fn slot_moments(
    slot: usize,
    sched: &TxSchedule,
    noise: &NoiseParams,
    qtab: &ArrivalTable,
) -> Result<HypothesisMoments> {
    let (mu0, sigma2_0) = moments_h0(slot, sched, noise, qtab)?;
    let (mu1, sigma2_1) = moments_h1(slot, sched, noise, qtab)?;
    Ok(HypothesisMoments { slot, mu0, sigma2_0, mu1, sigma2_1 })
}

/// Moments of every slot `1..=k`.
pub fn link_moments(sched: &TxSchedule, noise: &NoiseParams, qtab: &ArrivalTable) -> Result<Vec<HypothesisMoments>> {
    (1..=sched.k()).map(|slot| slot_moments(slot, sched, noise, qtab)).collect()
}

/// Rule-of-thumb check for the Gaussian approximation of the signal binomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianValidity {
    pub valid: bool,
    /// `Q[j]·q₀`
    pub signal: f64,
    /// `Q[j]·(1 − q₀)`
    pub complement: f64,
}

pub fn gaussian_validity(slot: usize, sched: &TxSchedule, qtab: &ArrivalTable) -> GaussianValidity {
    let q0 = qtab.q(0, slot);
    let n = sched.count(slot) as f64;
    let signal = n * q0;
    let complement = n * (1.0 - q0);
    GaussianValidity { valid: signal > 5.0 && complement > 5.0, signal, complement }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn table() -> ArrivalTable {
        ArrivalTable::from_rows(vec![vec![0.45, 0.11, 0.06], vec![0.35, 0.10], vec![0.30]]).unwrap()
    }

    #[test]
    fn schedule_validation() {
        assert!(TxSchedule::new(vec![], 0.5).is_err());
        assert!(TxSchedule::new(vec![1], 0.0).is_err());
        assert!(TxSchedule::new(vec![1], 1.0).is_err());
        assert!(NoiseParams::new(-1.0, 1.0).is_err());
        assert!(NoiseParams::new(1.0, -1.0).is_err());
    }

    #[test]
    fn first_slot_has_no_isi() {
        let s = TxSchedule::uniform(30, 3, 0.5).unwrap();
        let n = NoiseParams::new(4.0, 10.0).unwrap();
        let (mu0, v0) = moments_h0(1, &s, &n, &table()).unwrap();
        assert_eq!(mu0, 4.0);
        assert_eq!(v0, 14.0);
        let (mu1, v1) = moments_h1(1, &s, &n, &table()).unwrap();
        let sig = 30.0 * 0.45;
        assert!((mu1 - (sig + 4.0)).abs() < 1e-12);
        assert!((v1 - (sig * 0.55 + 10.0 + mu1)).abs() < 1e-12);
    }

    #[test]
    fn near_certain_prior_kills_mixture_term() {
        let beta = 1.0 - 1e-12;
        let s = TxSchedule::new(vec![20, 30, 10], beta).unwrap();
        let n = NoiseParams::new(2.0, 3.0).unwrap();
        let (mu0, v0) = moments_h0(2, &s, &n, &table()).unwrap();
        let sig = 20.0 * 0.11;
        assert!((mu0 - (sig + 2.0)).abs() < 1e-9);
        assert!((v0 - (sig * 0.89 + 3.0 + mu0)).abs() < 1e-9);
    }

    #[test]
    fn silent_slot_has_equal_hypotheses() {
        let s = TxSchedule::new(vec![20, 0, 10], 0.4).unwrap();
        let n = NoiseParams::new(2.0, 3.0).unwrap();
        let m = slot_moments(2, &s, &n, &table()).unwrap();
        assert_eq!(m.mu0, m.mu1);
        assert_eq!(m.sigma2_0, m.sigma2_1);
    }

    #[test]
    fn isi_uses_transmit_slot_rows() {
        // slot 3: offset 1 from tx 2 (0.10) and offset 2 from tx 1 (0.06)
        let s = TxSchedule::new(vec![10, 20, 30], 0.5).unwrap();
        let n = NoiseParams::new(0.0, 1.0).unwrap();
        let (mu0, _) = moments_h0(3, &s, &n, &table()).unwrap();
        assert!((mu0 - 0.5 * (20.0 * 0.10 + 10.0 * 0.06)).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_slot() {
        let s = TxSchedule::uniform(5, 3, 0.5).unwrap();
        let n = NoiseParams::new(0.0, 1.0).unwrap();
        assert!(moments_h0(0, &s, &n, &table()).is_err());
        assert!(moments_h1(4, &s, &n, &table()).is_err());
        let long = TxSchedule::uniform(5, 4, 0.5).unwrap();
        assert!(moments_h0(1, &long, &n, &table()).is_err());
    }

    #[test]
    fn validity_rule() {
        let one = |q0: f64, n: u32| {
            let t = ArrivalTable::from_rows(vec![vec![q0]]).unwrap();
            gaussian_validity(1, &TxSchedule::uniform(n, 1, 0.5).unwrap(), &t)
        };
        let v = one(0.4505, 30);
        assert!(v.valid);
        assert!((v.signal - 13.515).abs() < 1e-9 && (v.complement - 16.485).abs() < 1e-9);
        assert!(!one(0.4505, 0).valid);
        assert!(one(0.5, 11).valid);
        assert!(!one(0.5, 10).valid);
    }
}
