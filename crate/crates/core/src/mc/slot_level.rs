//! Slot-level simulation of the received-count model.
//!
//! Per trial: symbols `x[j] ~ Bernoulli(β)`; the molecules of every slot
//! with `x = 1` are spread over the current and later slots with the
//! arrival probabilities; MSI `N(μ_o, σ_o²)` and counting error
//! `N(0, μ_x[j])` are added, where `μ_x` is the analytic mean of the
//! realized hypothesis. Decisions use the analytic optimal rule.

use alloc::vec::Vec;

use libm::sqrt;
use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

use super::{rng_stream, IsiModel, McConfig, SignalModel};
use crate::channel::ArrivalTable;
use crate::detector::DecisionRule;
use crate::error::{Error, Result};
use crate::stats::{self, HypothesisMoments, NoiseParams, TxSchedule};

pub const TRIALS_PER_BLOCK: u64 = 4096;

/// One simulated frame of `k` slots.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub symbols: Vec<u8>,
    /// Received counts as used by the detector (may be negative).
    pub received: Vec<f64>,
    /// `max(R[j], 0)`, for reporting.
    pub received_clamped: Vec<f64>,
    pub decisions: Vec<u8>,
}

/// Mergeable statistics of R[j] under one hypothesis. Power sums are
/// taken about `shift` (the analytic mean) for numerical stability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisAccum {
    pub n: u64,
    pub decided_one: u64,
    pub shift: f64,
    sums: [f64; 4],
}

impl HypothesisAccum {
    fn new(shift: f64) -> Self {
        HypothesisAccum { n: 0, decided_one: 0, shift, sums: [0.0; 4] }
    }

    fn push(&mut self, received: f64, decision: u8) {
        let y = received - self.shift;
        let y2 = y * y;
        self.n += 1;
        self.decided_one += decision as u64;
        self.sums[0] += y;
        self.sums[1] += y2;
        self.sums[2] += y2 * y;
        self.sums[3] += y2 * y2;
    }

    fn merge(&mut self, other: &HypothesisAccum) {
        debug_assert_eq!(self.shift, other.shift);
        self.n += other.n;
        self.decided_one += other.decided_one;
        for (a, b) in self.sums.iter_mut().zip(other.sums.iter()) {
            *a += b;
        }
    }

    fn estimate(&self) -> HypothesisEstimate {
        if self.n < 2 {
            return HypothesisEstimate {
                n: self.n,
                mean: f64::NAN,
                mean_se: f64::NAN,
                var: f64::NAN,
                var_se: f64::NAN,
                decide_one: if self.n == 0 { f64::NAN } else { self.decided_one as f64 },
            };
        }
        let n = self.n as f64;
        let m1 = self.sums[0] / n;
        let m2 = self.sums[1] / n;
        let m3 = self.sums[2] / n;
        let m4 = self.sums[3] / n;
        let central2 = m2 - m1 * m1;
        let central4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1 * m1 * m1 * m1;
        let var = central2 * n / (n - 1.0);
        HypothesisEstimate {
            n: self.n,
            mean: self.shift + m1,
            mean_se: sqrt(var / n),
            var,
            var_se: sqrt(((central4 - central2 * central2) / n).max(0.0)),
            decide_one: self.decided_one as f64 / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotLevelTally {
    pub trials: u64,
    /// `[H0, H1]` per slot.
    pub slots: Vec<[HypothesisAccum; 2]>,
    pub errors: Vec<u64>,
}

impl SlotLevelTally {
    fn empty(moments: &[HypothesisMoments]) -> Self {
        SlotLevelTally {
            trials: 0,
            slots: moments.iter().map(|m| [HypothesisAccum::new(m.mu0), HypothesisAccum::new(m.mu1)]).collect(),
            errors: alloc::vec![0; moments.len()],
        }
    }

    /// Adds `other` into `self`; merge in block order for reproducible sums.
    pub fn merge(&mut self, other: &SlotLevelTally) {
        self.trials += other.trials;
        for (mine, theirs) in self.slots.iter_mut().zip(&other.slots) {
            mine[0].merge(&theirs[0]);
            mine[1].merge(&theirs[1]);
        }
        for (a, b) in self.errors.iter_mut().zip(&other.errors) {
            *a += b;
        }
    }

    pub fn estimates(&self) -> SlotLevelEstimates {
        let n = self.trials as f64;
        let slots: Vec<SlotEstimate> = self
            .slots
            .iter()
            .zip(&self.errors)
            .enumerate()
            .map(|(idx, (acc, &errors))| {
                let h0 = acc[0].estimate();
                let h1 = acc[1].estimate();
                let p_e = errors as f64 / n;
                SlotEstimate {
                    slot: idx + 1,
                    p_d: h1.decide_one,
                    p_d_se: binomial_se(h1.decide_one, acc[1].n),
                    p_fa: h0.decide_one,
                    p_fa_se: binomial_se(h0.decide_one, acc[0].n),
                    p_e,
                    p_e_se: binomial_se(p_e, self.trials),
                    h0,
                    h1,
                }
            })
            .collect();
        let k = slots.len() as f64;
        let mean = |f: fn(&SlotEstimate) -> f64| slots.iter().map(f).sum::<f64>() / k;
        let pooled = |f: fn(&SlotEstimate) -> f64| sqrt(slots.iter().map(|s| f(s) * f(s)).sum::<f64>()) / k;
        SlotLevelEstimates {
            trials: self.trials,
            p_d: mean(|s| s.p_d),
            p_d_se: pooled(|s| s.p_d_se),
            p_fa: mean(|s| s.p_fa),
            p_fa_se: pooled(|s| s.p_fa_se),
            p_e: mean(|s| s.p_e),
            p_e_se: pooled(|s| s.p_e_se),
            slots,
        }
    }
}

fn binomial_se(p: f64, n: u64) -> f64 {
    if n == 0 {
        f64::NAN
    } else {
        sqrt(p * (1.0 - p) / n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisEstimate {
    pub n: u64,
    pub mean: f64,
    pub mean_se: f64,
    /// Unbiased sample variance.
    pub var: f64,
    pub var_se: f64,
    /// Fraction of these trials decided as 1.
    pub decide_one: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotEstimate {
    pub slot: usize,
    pub h0: HypothesisEstimate,
    pub h1: HypothesisEstimate,
    pub p_d: f64,
    pub p_d_se: f64,
    pub p_fa: f64,
    pub p_fa_se: f64,
    pub p_e: f64,
    pub p_e_se: f64,
}

/// Empirical metrics; link-level standard errors treat slots as independent.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotLevelEstimates {
    pub trials: u64,
    pub p_d: f64,
    pub p_d_se: f64,
    pub p_fa: f64,
    pub p_fa_se: f64,
    pub p_e: f64,
    pub p_e_se: f64,
    pub slots: Vec<SlotEstimate>,
}

/// Precomputed state shared read-only by all trials.
#[derive(Debug, Clone)]
pub struct SlotLevelSim {
    counts: Vec<u32>,
    beta: f64,
    noise: NoiseParams,
    /// Arrival probabilities of each transmit slot over offsets `0..=k−i`.
    rows: Vec<Vec<f64>>,
    moments: Vec<HypothesisMoments>,
    rules: Vec<DecisionRule>,
    cfg: McConfig,
}

impl SlotLevelSim {
    pub fn new(sched: &TxSchedule, noise: &NoiseParams, qtab: &ArrivalTable, cfg: McConfig) -> Result<Self> {
        if cfg.n_trials == 0 {
            return Err(Error::invalid("n_trials", "need at least one trial"));
        }
        let moments = stats::link_moments(sched, noise, qtab)?;
        let rules = moments.iter().map(|m| DecisionRule::optimal(m, sched.beta())).collect::<Result<Vec<_>>>()?;
        let k = sched.k();
        let rows = (1..=k).map(|i| qtab.row(i)[..=k - i].to_vec()).collect();
        Ok(SlotLevelSim {
            counts: sched.counts().to_vec(),
            beta: sched.beta(),
            noise: *noise,
            rows,
            moments,
            rules,
            cfg,
        })
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn moments(&self) -> &[HypothesisMoments] {
        &self.moments
    }

    pub fn rules(&self) -> &[DecisionRule] {
        &self.rules
    }

    pub fn config(&self) -> &McConfig {
        &self.cfg
    }

    pub fn block_count(&self) -> u64 {
        self.cfg.n_trials.div_ceil(TRIALS_PER_BLOCK)
    }

    /// Simulates trial `index` on its own stream.
    pub fn trial(&self, index: u64) -> TrialResult {
        let k = self.k();
        let mut symbols = alloc::vec![0u8; k];
        let mut received = alloc::vec![0.0; k];
        self.sample(index, &mut symbols, &mut received);
        let decisions = received.iter().zip(&self.rules).map(|(&r, rule)| rule.decide(r)).collect();
        TrialResult { received_clamped: received.iter().map(|&r| r.max(0.0)).collect(), symbols, received, decisions }
    }

    fn sample(&self, index: u64, symbols: &mut [u8], received: &mut [f64]) {
        let mut rng = rng_stream(self.cfg.seed, index);
        let k = self.k();
        for x in symbols.iter_mut() {
            *x = (rng.random::<f64>() < self.beta) as u8;
        }
        match self.cfg.signal_model {
            SignalModel::Gaussian => {
                for j in 0..k {
                    let (mu, var) = self.moments[j].under(symbols[j]);
                    let z: f64 = rng.sample(StandardNormal);
                    received[j] = mu + sqrt(var) * z;
                }
            }
            SignalModel::Exact => {
                received.fill(0.0);
                for tx in 0..k {
                    if symbols[tx] == 1 {
                        self.spread(&mut rng, tx, &mut received[tx..]);
                    }
                }
                let sd_o = sqrt(self.noise.sigma2_o());
                for j in 0..k {
                    let z: f64 = rng.sample(StandardNormal);
                    received[j] += self.noise.mu_o() + sd_o * z;
                    if self.cfg.counting_error {
                        let (mu, _) = self.moments[j].under(symbols[j]);
                        let c: f64 = rng.sample(StandardNormal);
                        received[j] += sqrt(mu.max(0.0)) * c;
                    }
                }
            }
        }
    }

    /// Distributes the molecules of transmit slot `tx` (0-based) over
    /// `out[offset]`.
    fn spread<R: Rng>(&self, rng: &mut R, tx: usize, out: &mut [f64]) {
        let n = self.counts[tx] as u64;
        let row = &self.rows[tx];
        match self.cfg.isi_model {
            IsiModel::Categorical => {
                let mut remaining = n;
                let mut mass = 1.0;
                for (offset, &q) in row.iter().enumerate() {
                    if remaining == 0 || mass <= 0.0 {
                        break;
                    }
                    let got = binomial(rng, remaining, q / mass);
                    out[offset] += got as f64;
                    remaining -= got;
                    mass -= q;
                }
            }
            IsiModel::IndependentBinomial => {
                for (offset, &q) in row.iter().enumerate() {
                    out[offset] += binomial(rng, n, q) as f64;
                }
            }
        }
    }

    /// Tally of trials belonging to `block`.
    pub fn run_block(&self, block: u64) -> SlotLevelTally {
        let mut tally = SlotLevelTally::empty(&self.moments);
        let start = block * TRIALS_PER_BLOCK;
        let end = (start + TRIALS_PER_BLOCK).min(self.cfg.n_trials);
        let k = self.k();
        let mut symbols = alloc::vec![0u8; k];
        let mut received = alloc::vec![0.0; k];
        for index in start..end {
            self.sample(index, &mut symbols, &mut received);
            for j in 0..k {
                let x = symbols[j];
                let decision = self.rules[j].decide(received[j]);
                tally.slots[j][x as usize].push(received[j], decision);
                tally.errors[j] += (decision != x) as u64;
            }
            tally.trials += 1;
        }
        tally
    }

    /// All blocks, sequentially.
    pub fn run(&self) -> SlotLevelTally {
        let mut total = SlotLevelTally::empty(&self.moments);
        for block in 0..self.block_count() {
            total.merge(&self.run_block(block));
        }
        total
    }
}

fn binomial<R: Rng>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        0
    } else if p >= 1.0 {
        n
    } else {
        Binomial::new(n, p).expect("p in (0, 1)").sample(rng)
    }
}

/// Runs every trial sequentially and returns the empirical metrics.
pub fn simulate_slot_level(
    sched: &TxSchedule,
    noise: &NoiseParams,
    qtab: &ArrivalTable,
    cfg: McConfig,
) -> Result<SlotLevelEstimates> {
    Ok(SlotLevelSim::new(sched, noise, qtab, cfg)?.run().estimates())
}
