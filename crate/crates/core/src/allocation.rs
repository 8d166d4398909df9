//! Splitting a fixed molecule budget across transmission slots so the
//! average error probability is smallest.
//!
//! Allocations are integer and every slot gets at least one molecule.

use alloc::vec::Vec;

use rand::Rng;

use crate::channel::{ArrivalTable, ChannelParams};
use crate::error::{Error, Result};
use crate::mc::rng_stream;
use crate::perf;
use crate::stats::{self, NoiseParams, TxSchedule};

/// Largest candidate count accepted by [`SearchMode::Exhaustive`].
pub const EXHAUSTIVE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetProblem {
    budget: u32,
    noise: NoiseParams,
    beta: f64,
    table: ArrivalTable,
}

impl BudgetProblem {
    /// Computes the arrival table for `slots` slots of `channel`.
    pub fn new(budget: u32, slots: usize, channel: &ChannelParams, noise: NoiseParams, beta: f64) -> Result<Self> {
        if slots < 2 {
            return Err(Error::invalid("slots", "need at least two slots to allocate over"));
        }
        let table = ArrivalTable::compute(slots, channel)?;
        BudgetProblem::from_table(budget, table, noise, beta)
    }

    /// Uses a precomputed (possibly synthetic) table; its `k` is the slot count.
    pub fn from_table(budget: u32, table: ArrivalTable, noise: NoiseParams, beta: f64) -> Result<Self> {
        let slots = table.k();
        if slots < 2 {
            return Err(Error::invalid("slots", "need at least two slots to allocate over"));
        }
        if (budget as usize) < slots {
            return Err(Error::invalid("budget", "must cover at least one molecule per slot"));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::invalid("beta", "prior must lie strictly inside (0, 1)"));
        }
        Ok(BudgetProblem { budget, noise, beta, table })
    }

    pub fn budget(&self) -> u32 {
        self.budget
    }

    pub fn slots(&self) -> usize {
        self.table.k()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn noise(&self) -> &NoiseParams {
        &self.noise
    }

    pub fn table(&self) -> &ArrivalTable {
        &self.table
    }

    /// Average error probability of one allocation.
    pub fn error_prob(&self, counts: &[u32]) -> Result<f64> {
        if counts.len() != self.slots() {
            return Err(Error::invalid("counts", "one count per slot"));
        }
        if counts.iter().map(|&q| q as u64).sum::<u64>() != self.budget as u64 {
            return Err(Error::invalid("counts", "must sum to the budget"));
        }
        let sched = TxSchedule::new(counts.to_vec(), self.beta)?;
        perf::avg_error_prob(&sched, &self.noise, &self.table)
    }

    /// True iff every slot passes the Gaussian-approximation rule.
    pub fn gaussian_valid(&self, counts: &[u32]) -> Result<bool> {
        let sched = TxSchedule::new(counts.to_vec(), self.beta)?;
        Ok((1..=sched.k()).all(|j| stats::gaussian_validity(j, &sched, &self.table).valid))
    }

    fn point(&self, counts: Vec<u32>) -> Result<AllocationPoint> {
        Ok(AllocationPoint { p_e: self.error_prob(&counts)?, gaussian_valid: self.gaussian_valid(&counts)?, counts })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationPoint {
    pub counts: Vec<u32>,
    pub p_e: f64,
    /// False if any slot fails the Gaussian-approximation rule.
    pub gaussian_valid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSlotSweep {
    /// One point per `Q[1] = 1..M−1`.
    pub curve: Vec<AllocationPoint>,
    /// Index into `curve` of the minimizer (smallest `Q[1]` on ties).
    pub argmin: usize,
}

impl TwoSlotSweep {
    pub fn best(&self) -> &AllocationPoint {
        &self.curve[self.argmin]
    }
}

pub fn sweep_two_slot(problem: &BudgetProblem) -> Result<TwoSlotSweep> {
    if problem.slots() != 2 {
        return Err(Error::invalid("slots", "two-slot sweep needs exactly two slots"));
    }
    let m = problem.budget();
    let curve = (1..m).map(|q1| problem.point(alloc::vec![q1, m - q1])).collect::<Result<Vec<_>>>()?;
    let argmin = first_min(curve.iter().map(|p| p.p_e));
    Ok(TwoSlotSweep { curve, argmin })
}

fn first_min(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (idx, v) in values.enumerate() {
        if v < best.1 {
            best = (idx, v);
        }
    }
    best.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Enumerates every composition of the budget; optimal.
    Exhaustive,
    /// Pairwise-transfer local search from the equal split plus
    /// `restarts − 1` random starts.
    CoordinateDescent { restarts: usize, seed: u64 },
}

impl SearchMode {
    pub fn coordinate_descent(seed: u64) -> Self {
        SearchMode::CoordinateDescent { restarts: 5, seed }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub counts: Vec<u32>,
    pub p_e: f64,
    /// Number of error-probability evaluations performed.
    pub evaluations: u64,
}

/// Number of ways to give each of `slots` slots at least one of `budget`
/// molecules, `C(budget − 1, slots − 1)`.
pub fn composition_count(budget: u32, slots: usize) -> u128 {
    let n = budget as u128 - 1;
    let r = (slots as u128 - 1).min(n - (slots as u128 - 1));
    let mut c: u128 = 1;
    for i in 0..r {
        c = c * (n - i) / (i + 1);
        if c > u64::MAX as u128 {
            return c;
        }
    }
    c
}

pub fn sweep_k_slot(problem: &BudgetProblem, mode: SearchMode) -> Result<Allocation> {
    match mode {
        SearchMode::Exhaustive => exhaustive(problem),
        SearchMode::CoordinateDescent { restarts, seed } => descent(problem, restarts.max(1), seed),
    }
}

fn exhaustive(problem: &BudgetProblem) -> Result<Allocation> {
    let k = problem.slots();
    let m = problem.budget();
    let candidates = composition_count(m, k);
    if candidates > EXHAUSTIVE_LIMIT {
        return Err(Error::CombinatorialBudget { candidates, limit: EXHAUSTIVE_LIMIT });
    }
    let mut counts = alloc::vec![1u32; k];
    counts[k - 1] = m - (k as u32 - 1);
    let mut best = Allocation { counts: counts.clone(), p_e: f64::INFINITY, evaluations: 0 };
    loop {
        let p_e = problem.error_prob(&counts)?;
        best.evaluations += 1;
        if p_e < best.p_e {
            best.p_e = p_e;
            best.counts.clone_from(&counts);
        }
        if !next_composition(&mut counts) {
            break;
        }
    }
    Ok(best)
}

/// Steps to the next composition in lexicographic order of the leading
/// slots; the last slot absorbs the remainder.
fn next_composition(counts: &mut [u32]) -> bool {
    let k = counts.len();
    // rightmost leading slot that can still grow
    for pos in (0..k - 1).rev() {
        if counts[k - 1] > 1 {
            counts[pos] += 1;
            counts[k - 1] -= 1;
            return true;
        }
        // reset this slot to 1 and carry into the one before
        let give_back = counts[pos] - 1;
        counts[pos] = 1;
        counts[k - 1] += give_back;
    }
    false
}

fn random_composition<R: Rng>(rng: &mut R, budget: u32, k: usize) -> Vec<u32> {
    let mut counts = alloc::vec![1u32; k];
    for _ in 0..budget - k as u32 {
        counts[rng.random_range(0..k)] += 1;
    }
    counts
}

fn descent(problem: &BudgetProblem, restarts: usize, seed: u64) -> Result<Allocation> {
    let k = problem.slots();
    let m = problem.budget();
    let mut evaluations = 0u64;
    let mut best: Option<(Vec<u32>, f64)> = None;
    for restart in 0..restarts {
        let start = if restart == 0 {
            let mut even = alloc::vec![m / k as u32; k];
            for slot in even.iter_mut().take((m % k as u32) as usize) {
                *slot += 1;
            }
            even
        } else {
            random_composition(&mut rng_stream(seed, restart as u64), m, k)
        };
        let (counts, p_e) = local_search(problem, start, &mut evaluations)?;
        let better = match &best {
            None => true,
            Some((c, v)) => p_e < *v || (p_e == *v && counts < *c),
        };
        if better {
            best = Some((counts, p_e));
        }
    }
    let (counts, p_e) = best.expect("at least one restart");
    Ok(Allocation { counts, p_e, evaluations })
}

fn local_search(problem: &BudgetProblem, mut counts: Vec<u32>, evaluations: &mut u64) -> Result<(Vec<u32>, f64)> {
    let k = counts.len();
    let mut current = problem.error_prob(&counts)?;
    *evaluations += 1;
    let mut step = (problem.budget() / (2 * k as u32)).max(1);
    loop {
        let mut best_move: Option<(usize, usize, f64)> = None;
        for from in 0..k {
            if counts[from] <= step {
                continue;
            }
            for to in 0..k {
                if to == from {
                    continue;
                }
                counts[from] -= step;
                counts[to] += step;
                let p_e = problem.error_prob(&counts)?;
                *evaluations += 1;
                counts[from] += step;
                counts[to] -= step;
                if p_e < current && best_move.is_none_or(|(_, _, b)| p_e < b) {
                    best_move = Some((from, to, p_e));
                }
            }
        }
        match best_move {
            Some((from, to, p_e)) => {
                counts[from] -= step;
                counts[to] += step;
                current = p_e;
            }
            None if step > 1 => step /= 2,
            None => return Ok((counts, current)),
        }
    }
}
