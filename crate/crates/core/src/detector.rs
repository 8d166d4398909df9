//! Optimal per-slot symbol detection.
//!
//! The log-likelihood ratio of two Gaussians with unequal variances is
//! quadratic in R; completing the square gives `(R + α)² ≷ γ`, and keeping
//! the upper root gives the one-sided test `R ≷ γ′ = √γ − α`.

use libm::{log, sqrt};

use crate::error::{Error, Result};
use crate::stats::HypothesisMoments;

/// Relative guard on `σ1² − σ0²` below which a slot is treated as carrying
/// no signal.
pub const DEGENERATE_VARIANCE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotThreshold {
    pub slot: usize,
    /// Completed-square shift α.
    pub alpha: f64,
    /// Squared threshold γ.
    pub gamma: f64,
    /// Decision threshold γ′ on the received count.
    pub gamma_prime: f64,
}

impl SlotThreshold {
    /// The discarded lower root `−√γ − α` of the quadratic test.
    pub fn lower_root(&self) -> f64 {
        -sqrt(self.gamma) - self.alpha
    }
}

fn check_variances(m: &HypothesisMoments) -> Result<()> {
    let ok = |v: f64| v > 0.0 && v.is_finite();
    if ok(m.sigma2_0) && ok(m.sigma2_1) {
        Ok(())
    } else {
        Err(Error::NonPositiveVariance { slot: m.slot })
    }
}

/// Optimal threshold for prior `beta` of symbol 1.
pub fn threshold(m: &HypothesisMoments, beta: f64) -> Result<SlotThreshold> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::invalid("beta", "prior must lie strictly inside (0, 1)"));
    }
    check_variances(m)?;
    let (v0, v1) = (m.sigma2_0, m.sigma2_1);
    let dv = v1 - v0;
    if libm::fabs(dv) < DEGENERATE_VARIANCE_EPS * v0 {
        return Err(Error::DegenerateHypotheses { slot: m.slot });
    }
    if dv < 0.0 {
        return Err(Error::invalid("moments", "H1 variance must exceed H0 variance"));
    }
    let alpha = (m.mu1 * v0 - m.mu0 * v1) / dv;
    let gamma = 2.0 * v1 * v0 / dv * log((1.0 - beta) / beta * sqrt(v1 / v0))
        + alpha * alpha
        + (m.mu1 * m.mu1 * v0 - m.mu0 * m.mu0 * v1) / dv;
    if gamma < 0.0 {
        return Err(Error::NegativeDiscriminant { slot: m.slot, gamma });
    }
    Ok(SlotThreshold { slot: m.slot, alpha, gamma, gamma_prime: sqrt(gamma) - alpha })
}

/// 1 iff `received > γ′`; a tie decides 0.
pub fn decide(received: f64, thr: &SlotThreshold) -> u8 {
    (received > thr.gamma_prime) as u8
}

/// `ln p(R|H1) − ln p(R|H0)` for the Gaussian model.
pub fn log_likelihood_ratio(received: f64, m: &HypothesisMoments) -> f64 {
    let (v0, v1) = (m.sigma2_0, m.sigma2_1);
    let d0 = received - m.mu0;
    let d1 = received - m.mu1;
    0.5 * log(v0 / v1) + (d0 * d0 * v1 - d1 * d1 * v0) / (2.0 * v0 * v1)
}

/// The full two-sided likelihood-ratio decision, without the square-root
/// simplification. Disagrees with [`decide`] only below the lower root.
pub fn llrt_decide(received: f64, m: &HypothesisMoments, beta: f64) -> u8 {
    (log_likelihood_ratio(received, m) > log((1.0 - beta) / beta)) as u8
}

/// Why a slot uses a constant decision instead of a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fallback {
    /// No usable signal (or non-positive variances): decide by the prior alone.
    DegenerateHypotheses,
    /// γ < 0: `(R + α)² > γ` holds for every R, always decide 1.
    NegativeDiscriminant,
}

/// The decision a receiver actually applies in one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecisionRule {
    Threshold(SlotThreshold),
    Constant { symbol: u8, reason: Fallback },
}

impl DecisionRule {
    /// The optimal rule, falling back to a constant decision when the
    /// threshold is undefined.
    pub fn optimal(m: &HypothesisMoments, beta: f64) -> Result<Self> {
        match threshold(m, beta) {
            Ok(thr) => Ok(DecisionRule::Threshold(thr)),
            Err(Error::DegenerateHypotheses { .. }) | Err(Error::NonPositiveVariance { .. }) => {
                Ok(DecisionRule::Constant { symbol: (beta > 0.5) as u8, reason: Fallback::DegenerateHypotheses })
            }
            Err(Error::NegativeDiscriminant { .. }) => {
                Ok(DecisionRule::Constant { symbol: 1, reason: Fallback::NegativeDiscriminant })
            }
            Err(e) => Err(e),
        }
    }

    pub fn decide(&self, received: f64) -> u8 {
        match self {
            DecisionRule::Threshold(thr) => decide(received, thr),
            DecisionRule::Constant { symbol, .. } => *symbol,
        }
    }

    pub fn threshold(&self) -> Option<&SlotThreshold> {
        match self {
            DecisionRule::Threshold(thr) => Some(thr),
            DecisionRule::Constant { .. } => None,
        }
    }

    pub fn fallback(&self) -> Option<Fallback> {
        match self {
            DecisionRule::Threshold(_) => None,
            DecisionRule::Constant { reason, .. } => Some(*reason),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(mu0: f64, v0: f64, mu1: f64, v1: f64) -> HypothesisMoments {
        HypothesisMoments { slot: 1, mu0, sigma2_0: v0, mu1, sigma2_1: v1 }
    }

    #[test]
    fn threshold_identity() {
        let m = moments(10.0, 20.0, 100.0, 120.0);
        let thr = threshold(&m, 0.3).unwrap();
        assert_eq!(thr.gamma_prime, sqrt(thr.gamma) - thr.alpha);
        assert!(thr.gamma_prime > m.mu0 && thr.gamma_prime < m.mu1);
    }

    #[test]
    fn equal_prior_keeps_only_variance_log_term() {
        let m = moments(10.0, 20.0, 100.0, 120.0);
        let thr = threshold(&m, 0.5).unwrap();
        let dv = 100.0;
        let alpha = (100.0 * 20.0 - 10.0 * 120.0) / dv;
        let expect = 2.0 * 120.0 * 20.0 / dv * log(sqrt(6.0)) + alpha * alpha + (1e4 * 20.0 - 100.0 * 120.0) / dv;
        assert!((thr.gamma - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn degenerate_and_negative_cases() {
        let flat = moments(10.0, 20.0, 10.0, 20.0);
        assert_eq!(threshold(&flat, 0.5), Err(Error::DegenerateHypotheses { slot: 1 }));
        let r = DecisionRule::optimal(&flat, 0.7).unwrap();
        assert_eq!(r.decide(-1e9), 1);
        assert_eq!(r.fallback(), Some(Fallback::DegenerateHypotheses));

        // tiny signal, prior heavily favours H1
        let weak = moments(10.0, 20.0, 10.5, 21.0);
        let beta = 1.0 - 1e-6;
        assert!(matches!(threshold(&weak, beta), Err(Error::NegativeDiscriminant { .. })));
        let r = DecisionRule::optimal(&weak, beta).unwrap();
        assert_eq!(r.decide(-1e9), 1);
        // the full likelihood-ratio test agrees: H1 everywhere
        for &x in &[-100.0, 0.0, 10.0, 1e3] {
            assert_eq!(llrt_decide(x, &weak, beta), 1);
        }

        let zero = moments(0.0, 0.0, 5.0, 5.0);
        assert_eq!(threshold(&zero, 0.5), Err(Error::NonPositiveVariance { slot: 1 }));
    }

    #[test]
    fn tie_goes_to_zero() {
        let thr = threshold(&moments(10.0, 20.0, 100.0, 120.0), 0.5).unwrap();
        assert_eq!(decide(thr.gamma_prime, &thr), 0);
        assert_eq!(decide(thr.gamma_prime + 1.0, &thr), 1);
    }

    #[test]
    fn gamma_falls_with_prior() {
        let m = moments(10.0, 20.0, 100.0, 120.0);
        let mut last = f64::INFINITY;
        let mut last_gp = f64::INFINITY;
        for step in 1..20 {
            let thr = threshold(&m, step as f64 * 0.05).unwrap();
            assert!(thr.gamma < last);
            assert!(thr.gamma_prime <= last_gp);
            last = thr.gamma;
            last_gp = thr.gamma_prime;
        }
    }

    #[test]
    fn agrees_with_llrt_above_lower_root() {
        let m = moments(12.0, 25.0, 40.0, 60.0);
        for &beta in &[0.2, 0.5, 0.8] {
            let thr = threshold(&m, beta).unwrap();
            let mut r = 0.0;
            while r < 120.0 {
                if r >= thr.lower_root() {
                    assert_eq!(decide(r, &thr), llrt_decide(r, &m, beta), "r={r} beta={beta}");
                }
                r += 0.01;
            }
            // the excluded branch: far below the lower root the LLRT prefers H1
            let below = thr.lower_root() - 50.0;
            assert_eq!(llrt_decide(below, &m, beta), 1);
            assert_eq!(decide(below, &thr), 0);
        }
    }
}
