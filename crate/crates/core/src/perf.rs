//! Closed-form detection, error and information metrics.

use alloc::vec::Vec;

use libm::{erfc, log2, sqrt};

use crate::channel::ArrivalTable;
use crate::detector::{DecisionRule, Fallback, SlotThreshold};
use crate::error::{Error, Result};
use crate::stats::{self, HypothesisMoments, NoiseParams, TxSchedule};

/// Tail probability of the standard normal, `Q(x) = ½·erfc(x/√2)`.
pub fn q_tail(x: f64) -> f64 {
    0.5 * erfc(x / core::f64::consts::SQRT_2)
}

/// `(P_D[j], P_FA[j])` for a threshold test.
pub fn slot_pd_pfa(m: &HypothesisMoments, thr: &SlotThreshold) -> (f64, f64) {
    threshold_pd_pfa(m, thr.gamma_prime)
}

fn threshold_pd_pfa(m: &HypothesisMoments, gamma_prime: f64) -> (f64, f64) {
    (q_tail((gamma_prime - m.mu1) / sqrt(m.sigma2_1)), q_tail((gamma_prime - m.mu0) / sqrt(m.sigma2_0)))
}

/// `(P_D[j], P_FA[j])` for any decision rule; constant rules give (0, 0)
/// or (1, 1).
pub fn rule_pd_pfa(m: &HypothesisMoments, rule: &DecisionRule) -> (f64, f64) {
    match rule {
        DecisionRule::Threshold(thr) => slot_pd_pfa(m, thr),
        DecisionRule::Constant { symbol, .. } => {
            let p = *symbol as f64;
            (p, p)
        }
    }
}

/// Bayes risk `β(1 − P_D) + (1 − β)·P_FA`.
pub fn bayes_risk(p_d: f64, p_fa: f64, beta: f64) -> f64 {
    beta * (1.0 - p_d) + (1.0 - beta) * p_fa
}

/// Bayes risk of the test `R > gamma_prime` under the Gaussian model.
pub fn risk_at_threshold(m: &HypothesisMoments, gamma_prime: f64, beta: f64) -> f64 {
    let (p_d, p_fa) = threshold_pd_pfa(m, gamma_prime);
    bayes_risk(p_d, p_fa, beta)
}

const LOG_CLAMP: f64 = 1e-15;

/// `I(X; Y)` in bits for the binary channel with `P(y=1|x=1) = p_d`,
/// `P(y=1|x=0) = p_fa` and `P(x=1) = beta`.
#[allow(clippy::needless_range_loop)]
pub fn mutual_information(p_d: f64, p_fa: f64, beta: f64) -> f64 {
    let clamp = |p: f64| p.clamp(LOG_CLAMP, 1.0 - LOG_CLAMP);
    // rows: x = 0, 1; columns: y = 0, 1
    let cond = [[1.0 - p_fa, p_fa], [1.0 - p_d, p_d]];
    let prior = [1.0 - beta, beta];
    let mut info = 0.0;
    for y in 0..2 {
        let marginal = prior[0] * clamp(cond[0][y]) + prior[1] * clamp(cond[1][y]);
        for x in 0..2 {
            let weight = cond[x][y] * prior[x];
            if weight > 0.0 {
                info += weight * log2(clamp(cond[x][y]) / marginal);
            }
        }
    }
    info.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotPerformance {
    pub slot: usize,
    pub p_d: f64,
    pub p_fa: f64,
    pub p_e: f64,
    /// Bits per slot.
    pub mutual_info: f64,
    pub rule: DecisionRule,
}

impl SlotPerformance {
    pub fn fallback(&self) -> Option<Fallback> {
        self.rule.fallback()
    }
}

/// Everything about one slot under its optimal rule.
pub fn slot_performance(m: &HypothesisMoments, beta: f64) -> Result<SlotPerformance> {
    let rule = DecisionRule::optimal(m, beta)?;
    let (p_d, p_fa) = rule_pd_pfa(m, &rule);
    Ok(SlotPerformance {
        slot: m.slot,
        p_d,
        p_fa,
        p_e: bayes_risk(p_d, p_fa, beta),
        mutual_info: mutual_information(p_d, p_fa, beta),
        rule,
    })
}

/// Slot metrics averaged over `1..=k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkPerformance {
    pub k: usize,
    pub beta: f64,
    pub p_d: f64,
    pub p_fa: f64,
    pub p_e: f64,
    /// Mean mutual information per slot at this β (bits/slot).
    pub mutual_info: f64,
    pub slots: Vec<SlotPerformance>,
    pub moments: Vec<HypothesisMoments>,
}

pub fn link_performance(sched: &TxSchedule, noise: &NoiseParams, qtab: &ArrivalTable) -> Result<LinkPerformance> {
    let moments = stats::link_moments(sched, noise, qtab)?;
    let slots = moments.iter().map(|m| slot_performance(m, sched.beta())).collect::<Result<Vec<_>>>()?;
    let k = slots.len();
    let mean = |f: fn(&SlotPerformance) -> f64| slots.iter().map(f).sum::<f64>() / k as f64;
    Ok(LinkPerformance {
        k,
        beta: sched.beta(),
        p_d: mean(|s| s.p_d),
        p_fa: mean(|s| s.p_fa),
        p_e: mean(|s| s.p_e),
        mutual_info: mean(|s| s.mutual_info),
        slots,
        moments,
    })
}

/// Average probability of error over the schedule's `k` slots.
pub fn avg_error_prob(sched: &TxSchedule, noise: &NoiseParams, qtab: &ArrivalTable) -> Result<f64> {
    link_performance(sched, noise, qtab).map(|l| l.p_e)
}

/// Two-stage β grid used by [`capacity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaGrid {
    pub lo: f64,
    pub hi: f64,
    pub coarse_step: f64,
    pub fine_step: f64,
}

impl Default for BetaGrid {
    fn default() -> Self {
        BetaGrid { lo: 0.01, hi: 0.99, coarse_step: 0.01, fine_step: 0.001 }
    }
}

impl BetaGrid {
    fn validate(&self) -> Result<()> {
        let ok = self.lo > 0.0
            && self.hi < 1.0
            && self.lo <= self.hi
            && self.coarse_step > 0.0
            && self.fine_step > 0.0
            && self.fine_step <= self.coarse_step;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("beta_grid", "need 0 < lo <= hi < 1 and 0 < fine <= coarse"))
        }
    }

    /// Coarse grid points, `lo, lo + step, …` up to `hi`.
    pub fn coarse(&self) -> Vec<f64> {
        steps(self.lo, self.hi, self.coarse_step)
    }

    /// Fine grid one coarse step either side of `centre`, clipped to the range.
    pub fn refine(&self, centre: f64) -> Vec<f64> {
        let lo = (centre - self.coarse_step).max(self.lo);
        let hi = (centre + self.coarse_step).min(self.hi);
        steps(lo, hi, self.fine_step)
    }
}

fn steps(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = libm::floor((hi - lo) / step + 1e-9) as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capacity {
    pub k: usize,
    /// `C[k]` in bits/slot.
    pub capacity: f64,
    pub beta_star: f64,
}

/// Mean per-slot mutual information at prior `beta`; moments, thresholds
/// and the information measure are all re-evaluated.
pub fn mean_mutual_information(
    template: &TxSchedule,
    noise: &NoiseParams,
    qtab: &ArrivalTable,
    beta: f64,
) -> Result<f64> {
    let sched = template.with_beta(beta)?;
    link_performance(&sched, noise, qtab).map(|l| l.mutual_info)
}

/// Best β over an explicit list; ties keep the earliest point.
pub fn capacity_on_grid(
    template: &TxSchedule,
    noise: &NoiseParams,
    qtab: &ArrivalTable,
    betas: &[f64],
) -> Result<Capacity> {
    if betas.is_empty() {
        return Err(Error::invalid("beta_grid", "must not be empty"));
    }
    let mut best = Capacity { k: template.k(), capacity: f64::NEG_INFINITY, beta_star: betas[0] };
    for &beta in betas {
        let mi = mean_mutual_information(template, noise, qtab, beta)?;
        if mi > best.capacity {
            best.capacity = mi;
            best.beta_star = beta;
        }
    }
    Ok(best)
}

/// `C[k] = max_β (1/k) Σ_j I(X[j]; Y[j])`, searched on a coarse grid and
/// then refined around the coarse maximizer.
pub fn capacity(template: &TxSchedule, noise: &NoiseParams, qtab: &ArrivalTable, grid: &BetaGrid) -> Result<Capacity> {
    grid.validate()?;
    let coarse = capacity_on_grid(template, noise, qtab, &grid.coarse())?;
    let fine = capacity_on_grid(template, noise, qtab, &grid.refine(coarse.beta_star))?;
    Ok(if fine.capacity >= coarse.capacity { fine } else { coarse })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub gamma_prime: f64,
    pub p_fa: f64,
    pub p_d: f64,
}

/// Operating curve obtained by sweeping the one-sided threshold γ′ over
/// `[μ0 − 6σ0, μ1 + 6σ1]`, returned with P_FA ascending.
pub fn roc_sweep(m: &HypothesisMoments, n_points: usize) -> Result<Vec<RocPoint>> {
    if n_points < 2 {
        return Err(Error::invalid("n_points", "need at least two points"));
    }
    if !(m.sigma2_0 > 0.0 && m.sigma2_1 > 0.0) {
        return Err(Error::NonPositiveVariance { slot: m.slot });
    }
    let lo = m.mu0 - 6.0 * sqrt(m.sigma2_0);
    let hi = m.mu1 + 6.0 * sqrt(m.sigma2_1);
    let span = hi - lo;
    // highest threshold first gives the smallest false-alarm rate first
    Ok((0..n_points)
        .map(|i| {
            let gamma_prime = hi - span * i as f64 / (n_points - 1) as f64;
            let (p_d, p_fa) = threshold_pd_pfa(m, gamma_prime);
            RocPoint { gamma_prime, p_fa, p_d }
        })
        .collect())
}

/// Linear interpolation of P_D at `p_fa` along a curve sorted by P_FA.
pub fn roc_interpolate(curve: &[RocPoint], p_fa: f64) -> f64 {
    let first = curve.first().expect("non-empty curve");
    let last = curve.last().expect("non-empty curve");
    if p_fa <= first.p_fa {
        return first.p_d;
    }
    if p_fa >= last.p_fa {
        return last.p_d;
    }
    let idx = curve.partition_point(|pt| pt.p_fa < p_fa);
    let (a, b) = (&curve[idx - 1], &curve[idx]);
    if b.p_fa == a.p_fa {
        return b.p_d.max(a.p_d);
    }
    a.p_d + (b.p_d - a.p_d) * (p_fa - a.p_fa) / (b.p_fa - a.p_fa)
}

/// True if `upper` has P_D at least that of `lower`, up to `slack`, at
/// every false-alarm rate sampled by either curve.
pub fn roc_dominates(upper: &[RocPoint], lower: &[RocPoint], slack: f64) -> bool {
    upper.iter().chain(lower).all(|pt| roc_interpolate(upper, pt.p_fa) + slack >= roc_interpolate(lower, pt.p_fa))
}
