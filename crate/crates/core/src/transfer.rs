//! The best-response (transfer) map and equilibrium checks.
//!
//! These functions accept negative influences; they are also the reference
//! against which the sweep is tested.

use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::model::{GroupedInstance, Instance, ProbVec};
use crate::rat::{frac, max_abs_diff, median01, Rat};

/// The price each agent faces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PriceAssignment {
    Uniform(Rat),
    PerAgent(Vec<Rat>),
}

impl PriceAssignment {
    pub fn from_groups(ginst: &GroupedInstance, prices: &[Rat]) -> Self {
        PriceAssignment::PerAgent(ginst.agent_prices(prices))
    }

    pub fn price_of(&self, i: usize) -> &Rat {
        match self {
            PriceAssignment::Uniform(p) => p,
            PriceAssignment::PerAgent(ps) => &ps[i],
        }
    }
}

/// Default convergence tolerance of [`iterate_fixed_point`], `10^-9`.
pub fn default_tol() -> Rat {
    frac(1, 1_000_000_000)
}

/// `(b_i - p_i + sum_j T[j][i] q_j) / (b_i - a_i)` for every agent.
pub fn g_value(inst: &Instance, prices: &PriceAssignment, q: &[Rat]) -> Vec<Rat> {
    let n = inst.n();
    (0..n)
        .map(|i| {
            let mut acc = &inst.b[i] - prices.price_of(i);
            for (j, qj) in q.iter().enumerate() {
                let w = &inst.t[j][i];
                if !w.is_zero() && !qj.is_zero() {
                    acc += w * qj;
                }
            }
            acc / inst.width(i)
        })
        .collect()
}

/// Best-response buying probabilities: `med{0, 1, g}` per agent.
pub fn transfer(inst: &Instance, prices: &PriceAssignment, q: &[Rat]) -> ProbVec {
    ProbVec::new_unchecked(g_value(inst, prices, q).iter().map(median01).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedPointRun {
    /// The `iters`-th iterate of the transfer map from the start vector.
    pub q: ProbVec,
    /// One more application moves `q` by at most `tol` in max-norm.
    pub converged: bool,
    pub iters: usize,
}

/// Applies the transfer map until it moves by at most `tol` or `max_iters`
/// applications have been made.
///
/// With non-negative influences, starting from all-zeros (all-ones) the
/// iterates increase (decrease) monotonically to the pessimistic
/// (optimistic) equilibrium, though possibly exponentially slowly.
pub fn iterate_fixed_point(
    inst: &Instance,
    prices: &PriceAssignment,
    start: &ProbVec,
    max_iters: usize,
    tol: &Rat,
) -> FixedPointRun {
    let mut q = start.clone();
    for iters in 0..max_iters {
        let next = transfer(inst, prices, &q);
        if max_abs_diff(&next, &q) <= *tol {
            return FixedPointRun { q, converged: true, iters };
        }
        q = next;
    }
    // The final iterate may itself be a fixed point.
    let converged = max_abs_diff(&transfer(inst, prices, &q), &q) <= *tol;
    FixedPointRun { q, converged, iters: max_iters }
}

pub fn is_equilibrium_exact(inst: &Instance, prices: &PriceAssignment, q: &[Rat]) -> bool {
    *transfer(inst, prices, q) == *q
}

/// Every coordinate is strictly within `eps` of its best response.
pub fn is_eps_approx_equilibrium(
    inst: &Instance,
    prices: &PriceAssignment,
    q: &[Rat],
    eps: &Rat,
) -> bool {
    let best = transfer(inst, prices, q);
    q.iter().zip(best.iter()).all(|(x, y)| (x - y).abs() < *eps)
}

/// Revenue `sum_i p_i q_i` collected under the given prices.
pub fn revenue_of(prices: &PriceAssignment, q: &[Rat]) -> Rat {
    q.iter().enumerate().map(|(i, qi)| prices.price_of(i) * qi).sum()
}
