//! Revenue maximization.
//!
//! Along any one-parameter family of price vectors the revenue is a
//! piecewise quadratic in the parameter, one piece per equilibrium segment,
//! so the optimum is found in closed form. At an equilibrium jump the best
//! revenue may only be a supremum; it is then reported as not attained.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{invariant, Error, Result};
use crate::model::{
    evaluate, Approach, GroupedInstance, Instance, PiecewiseEquilibrium, PricingOutcome, ProbVec,
    Side,
};
use crate::rat::{int, Rat};
use crate::sweep::{build_subproblem, offsets_for, pessimistic_sweep, sweep};

/// `R(t) = a t^2 + b t + c` on one equilibrium segment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RevenuePiece {
    pub lo: Option<Rat>,
    pub hi: Option<Rat>,
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
}

impl RevenuePiece {
    pub fn value_at(&self, t: &Rat) -> Rat {
        (&self.a * t + &self.b) * t + &self.c
    }
}

/// Revenue as a function of the sweep parameter, with the same segment
/// ownership as the equilibrium it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RevenueCurve {
    pub side: Side,
    pub pieces: Vec<RevenuePiece>,
}

impl RevenueCurve {
    /// Agent `i` pays `alpha_i t + beta_i` at parameter `t`.
    pub fn new(pwl: &PiecewiseEquilibrium, alpha: &[Rat], beta: &[Rat]) -> Self {
        let pieces = pwl
            .segments
            .iter()
            .map(|s| {
                let (mut a, mut b, mut c) = (Rat::zero(), Rat::zero(), Rat::zero());
                for i in 0..s.c0.len() {
                    a += &alpha[i] * &s.c1[i];
                    b += &alpha[i] * &s.c0[i] + &beta[i] * &s.c1[i];
                    c += &beta[i] * &s.c0[i];
                }
                RevenuePiece { lo: s.lo.clone(), hi: s.hi.clone(), a, b, c }
            })
            .collect();
        RevenueCurve { side: pwl.side, pieces }
    }

    /// Every agent pays `t + offsets[i]`.
    pub fn shifted(pwl: &PiecewiseEquilibrium, offsets: &[Rat]) -> Self {
        let n = pwl.n();
        let offsets = if offsets.is_empty() { vec![Rat::zero(); n] } else { offsets.to_vec() };
        Self::new(pwl, &vec![Rat::one(); n], &offsets)
    }

    pub fn value_at(&self, t: &Rat) -> Rat {
        let below = |p: &RevenuePiece| match (&p.lo, self.side) {
            (None, _) => false,
            (Some(lo), Side::Pessimistic) => lo > t,
            (Some(lo), Side::Optimistic) => lo >= t,
        };
        self.pieces[self.pieces.partition_point(below)].value_at(t)
    }
}

/// `sum_i (p + offsets[i]) q_i(p)`; empty `offsets` means none.
pub fn revenue_at(pwl: &PiecewiseEquilibrium, offsets: &[Rat], p: &Rat) -> Rat {
    let q = evaluate(pwl, p);
    q.iter()
        .enumerate()
        .map(|(i, qi)| (p + offsets.get(i).cloned().unwrap_or_else(Rat::zero)) * qi)
        .sum()
}

/// The best value of a revenue curve over `t > lower`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Best {
    t: Rat,
    revenue: Rat,
    attained: bool,
    approach: Option<Approach>,
}

impl Best {
    /// Higher revenue, then attained, then smaller parameter.
    fn beats(&self, other: &Best) -> bool {
        if self.revenue != other.revenue {
            return self.revenue > other.revenue;
        }
        if self.attained != other.attained {
            return self.attained;
        }
        self.t < other.t
    }
}

fn maximize(curve: &RevenueCurve, lower: &Rat) -> Result<Best> {
    let pess = curve.side == Side::Pessimistic;
    let mut best: Option<Best> = None;
    let mut offer = |cand: Best| {
        if best.as_ref().is_none_or(|b| cand.beats(b)) {
            best = Some(cand);
        }
    };
    for piece in &curve.pieces {
        if piece.hi.as_ref().is_some_and(|h| h <= lower) {
            continue;
        }
        let (left, left_in) = match &piece.lo {
            Some(lo) if lo > lower => (lo.clone(), pess),
            _ => (lower.clone(), false),
        };
        let (a, b) = (&piece.a, &piece.b);
        if piece.hi.is_none() && (a.is_positive() || (a.is_zero() && b.is_positive())) {
            return Err(invariant("revenue unbounded as the price grows"));
        }
        if a.is_zero() && b.is_zero() {
            let t = match &piece.hi {
                Some(h) => (&left + h) / int(2),
                None => &left + Rat::one(),
            };
            offer(Best { t, revenue: piece.c.clone(), attained: true, approach: None });
            continue;
        }
        offer(Best {
            revenue: piece.value_at(&left),
            t: left.clone(),
            attained: left_in,
            approach: (!left_in).then_some(Approach::FromAbove),
        });
        if let Some(h) = &piece.hi {
            offer(Best {
                revenue: piece.value_at(h),
                t: h.clone(),
                attained: !pess,
                approach: pess.then_some(Approach::FromBelow),
            });
        }
        if a.is_negative() {
            let v = -b / (a * int(2));
            if v > left && piece.hi.as_ref().is_none_or(|h| v < *h) {
                offer(Best { revenue: piece.value_at(&v), t: v, attained: true, approach: None });
            }
        }
    }
    best.ok_or_else(|| invariant("empty revenue domain"))
}

/// Revenue-maximizing uniform price over `p > 0`.
pub fn optimal_uniform_price(pwl: &PiecewiseEquilibrium) -> Result<PricingOutcome> {
    let best = maximize(&RevenueCurve::shifted(pwl, &[]), &Rat::zero())?;
    Ok(PricingOutcome {
        prices: vec![best.t.clone()],
        revenue: best.revenue,
        attained: best.attained,
        approach: best.approach,
        parameter: Some(best.t),
    })
}

fn check_base(ginst: &GroupedInstance, base: &[Rat]) -> Result<()> {
    if base.len() != ginst.k {
        return Err(Error::DimensionMismatch(format!("expected {} base prices", ginst.k)));
    }
    Ok(())
}

/// Best price vector of the form `base + x (1, ..., 1)` with every price
/// positive. The reported parameter is `x`.
pub fn optimal_shifted(ginst: &GroupedInstance, base: &[Rat]) -> Result<PricingOutcome> {
    check_base(ginst, base)?;
    let (offsets, min) = offsets_for(ginst, base)?;
    let pwl = pessimistic_sweep(&ginst.instance, &offsets)?;
    let best = maximize(&RevenueCurve::shifted(&pwl, &offsets), &Rat::zero())?;
    let x = &best.t - &min;
    Ok(PricingOutcome {
        prices: base.iter().map(|b| b + &x).collect(),
        revenue: best.revenue,
        attained: best.attained,
        approach: best.approach,
        parameter: Some(x),
    })
}

/// Best price vector of the form `xi * base` with `xi > 0`. The reported
/// parameter is `xi`.
pub fn optimal_scaled(ginst: &GroupedInstance, base: &[Rat]) -> Result<PricingOutcome> {
    check_base(ginst, base)?;
    if let Some(group) = base.iter().position(|b| !b.is_positive()) {
        return Err(Error::ZeroBasePrice { group });
    }
    let inst = &ginst.instance;
    let scale: Vec<Rat> = ginst.groups.iter().map(|&g| base[g].clone()).collect();
    let n = inst.n();
    let scaled = Instance::new(
        (0..n).map(|i| &inst.a[i] / &scale[i]).collect(),
        (0..n).map(|i| &inst.b[i] / &scale[i]).collect(),
        (0..n).map(|j| (0..n).map(|i| &inst.t[j][i] / &scale[i]).collect()).collect(),
    )?;
    let pwl = pessimistic_sweep(&scaled, &[])?;
    let best = maximize(&RevenueCurve::new(&pwl, &scale, &vec![Rat::zero(); n]), &Rat::zero())?;
    Ok(PricingOutcome {
        prices: base.iter().map(|b| b * &best.t).collect(),
        revenue: best.revenue,
        attained: best.attained,
        approach: best.approach,
        parameter: Some(best.t),
    })
}

/// Pessimistic equilibria of the grouped instance keyed by offset vector, so
/// that price vectors differing by a common shift share one sweep.
#[derive(Debug)]
pub struct SweepCache<'a> {
    ginst: &'a GroupedInstance,
    side: Side,
    cache: BTreeMap<Vec<Rat>, PiecewiseEquilibrium>,
}

impl<'a> SweepCache<'a> {
    pub fn new(ginst: &'a GroupedInstance, side: Side) -> Self {
        SweepCache { ginst, side, cache: BTreeMap::new() }
    }

    pub fn equilibrium_for_offsets(&mut self, offsets: Vec<Rat>) -> Result<&PiecewiseEquilibrium> {
        if !self.cache.contains_key(&offsets) {
            let pwl = sweep(&self.ginst.instance, &offsets, self.side)?.equilibrium;
            self.cache.insert(offsets.clone(), pwl);
        }
        Ok(&self.cache[&offsets])
    }

    /// Equilibrium at a per-group price vector.
    pub fn equilibrium(&mut self, prices: &[Rat]) -> Result<ProbVec> {
        let (offsets, min) = offsets_for(self.ginst, prices)?;
        Ok(evaluate(self.equilibrium_for_offsets(offsets)?, &min))
    }

    /// Revenue `sum_i prices[g_i] q_i` at a per-group price vector.
    pub fn revenue(&mut self, prices: &[Rat]) -> Result<Rat> {
        let q = self.equilibrium(prices)?;
        let groups = &self.ginst.groups;
        Ok(q.iter().enumerate().map(|(i, qi)| &prices[groups[i]] * qi).sum())
    }

    pub fn sweeps(&self) -> usize {
        self.cache.len()
    }
}

/// Upper bounds on the revenue from each group: the best revenue from group
/// `g` when every other group is priced at zero (and so buys for sure).
pub fn group_revenue_bounds(ginst: &GroupedInstance) -> Result<Vec<Rat>> {
    let inst = &ginst.instance;
    (0..ginst.k)
        .map(|g| {
            let members = ginst.members(g);
            if members.is_empty() {
                return Ok(Rat::zero());
            }
            let others: Vec<usize> = (0..inst.n()).filter(|i| ginst.groups[*i] != g).collect();
            let sub = if others.is_empty() { inst.clone() } else { build_subproblem(inst, &others)?.0 };
            Ok(optimal_uniform_price(&pessimistic_sweep(&sub, &[])?)?.revenue)
        })
        .collect()
}

/// Smallest `j >= 0` with `(1 + eps)^j >= target`.
fn log_ceil(eps: &Rat, target: &Rat) -> usize {
    let step = Rat::one() + eps;
    let mut pow = Rat::one();
    let mut j = 0;
    while pow < *target {
        pow *= &step;
        j += 1;
    }
    j
}

/// Price at or above which no agent buys in any equilibrium:
/// `max_i (b_i + sum_j T[j][i])`.
pub fn price_cap(inst: &Instance) -> Rat {
    (0..inst.n()).map(|i| &inst.b[i] + inst.incoming(i)).max().expect("n >= 1")
}

/// Per-group candidate prices: zero and `(1 + eps)^j p_min` for
/// `0 <= j <= J`, with `p_min = eps R / (2kn)`. `J` is
/// `ceil(log_{1+eps}(2kn/eps))`, raised if needed so the grid reaches `cap`;
/// an optimal price can exceed `R` when buying probabilities are small.
pub fn fptas_grid(eps: &Rat, k: usize, n: usize, upper: &Rat, cap: &Rat) -> Result<Vec<Rat>> {
    if !eps.is_positive() || *eps >= Rat::one() {
        return Err(Error::EpsOutOfRange);
    }
    if !upper.is_positive() {
        return Ok(vec![Rat::zero()]);
    }
    let kn2 = Rat::from_integer(BigInt::from(2 * k * n));
    let p_min = eps * upper / &kn2;
    let top = log_ceil(eps, &(&kn2 / eps)).max(log_ceil(eps, &(cap / &p_min)));
    let mut grid = vec![Rat::zero()];
    let mut p = p_min;
    for _ in 0..=top {
        grid.push(p.clone());
        p *= Rat::one() + eps;
    }
    Ok(grid)
}

/// Visits every vector in `grid^k` in lexicographic order.
fn for_each_vector(grid: &[Rat], k: usize, mut f: impl FnMut(&[Rat]) -> Result<()>) -> Result<()> {
    let mut idx = vec![0usize; k];
    let mut v = vec![grid[0].clone(); k];
    loop {
        f(&v)?;
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < grid.len() {
                v[pos] = grid[idx[pos]].clone();
                break;
            }
            idx[pos] = 0;
            v[pos] = grid[0].clone();
        }
    }
}

/// `(1 - eps)`-approximate pessimistic revenue maximization over per-group
/// prices by enumeration of a geometric grid. Ties keep the
/// lexicographically smallest price vector.
pub fn fptas(ginst: &GroupedInstance, eps: &Rat) -> Result<PricingOutcome> {
    if !eps.is_positive() || *eps >= Rat::one() {
        return Err(Error::EpsOutOfRange);
    }
    let upper: Rat = group_revenue_bounds(ginst)?.iter().sum();
    let cap = price_cap(&ginst.instance);
    let grid = fptas_grid(eps, ginst.k, ginst.instance.n(), &upper, &cap)?;
    let mut cache = SweepCache::new(ginst, Side::Pessimistic);
    let mut best: Option<(Rat, Vec<Rat>)> = None;
    for_each_vector(&grid, ginst.k, |prices| {
        let r = cache.revenue(prices)?;
        if best.as_ref().is_none_or(|(b, _)| r > *b) {
            best = Some((r, prices.to_vec()));
        }
        Ok(())
    })?;
    let (revenue, prices) = best.expect("grid is non-empty");
    Ok(PricingOutcome { prices, revenue, attained: true, approach: None, parameter: None })
}

/// Default bound on the number of grid vectors [`grid_bruteforce_opt`]
/// accepts.
pub const DEFAULT_GRID_CAP: u128 = 100_000_000;

/// Exhaustive pessimistic revenue maximization over the grid
/// `{lo + m step : 0 <= m <= (hi - lo) / step}^k`.
///
/// Vectors that differ by a common shift share one sweep, and within each
/// revenue piece only the grid points at the piece ends and around the
/// vertex of the quadratic can be best, so every grid vector is accounted
/// for without evaluating each one separately. Ties keep the
/// lexicographically smallest vector.
pub fn grid_bruteforce_opt(
    ginst: &GroupedInstance,
    lo: &Rat,
    hi: &Rat,
    step: &Rat,
    cap: u128,
) -> Result<PricingOutcome> {
    if lo >= hi || !step.is_positive() {
        return Err(Error::InvalidArgument("grid needs lo < hi and step > 0".into()));
    }
    if lo.is_negative() {
        return Err(Error::NegativePrice);
    }
    let k = ginst.k;
    let m_max = ((hi - lo) / step).floor().to_integer();
    let per_axis = u128::try_from(&m_max + 1u32).unwrap_or(u128::MAX);
    let candidates = per_axis.checked_pow(k as u32).unwrap_or(u128::MAX);
    if candidates > cap {
        return Err(Error::GridTooLarge { candidates, cap });
    }
    let m_max = usize::try_from(m_max).map_err(|_| Error::GridTooLarge { candidates, cap })?;

    let mut cache = SweepCache::new(ginst, Side::Pessimistic);
    let mut best: Option<(Rat, Vec<Rat>)> = None;
    let mut shape = vec![0usize; k];
    loop {
        if shape.contains(&0) {
            let span = m_max - shape.iter().max().expect("k >= 1");
            scan_shape(&mut cache, ginst, lo, step, &shape, span, &mut best)?;
        }
        let mut pos = k;
        loop {
            if pos == 0 {
                let (revenue, prices) = best.expect("grid is non-empty");
                return Ok(PricingOutcome { prices, revenue, attained: true, approach: None, parameter: None });
            }
            pos -= 1;
            shape[pos] += 1;
            if shape[pos] <= m_max {
                break;
            }
            shape[pos] = 0;
        }
    }
}

/// Best grid vector `lo + (m + shape) step` over `0 <= m <= span`.
fn scan_shape(
    cache: &mut SweepCache<'_>,
    ginst: &GroupedInstance,
    lo: &Rat,
    step: &Rat,
    shape: &[usize],
    span: usize,
    best: &mut Option<(Rat, Vec<Rat>)>,
) -> Result<()> {
    let offsets: Vec<Rat> =
        ginst.groups.iter().map(|&g| step * Rat::from_integer(shape[g].into())).collect();
    let pwl = cache.equilibrium_for_offsets(offsets.clone())?;
    let curve = RevenueCurve::shifted(pwl, &offsets);
    let at = |m: usize| lo + step * Rat::from_integer(m.into());
    let index_of = |t: &Rat| ((t - lo) / step).floor().to_integer();
    let span_i = BigInt::from(span);

    for piece in &curve.pieces {
        // Grid indices owned by this piece: lo_piece <= t < hi_piece.
        let first = match &piece.lo {
            Some(l) => {
                let c = ((l - lo) / step).ceil().to_integer();
                c.max(BigInt::zero())
            }
            None => BigInt::zero(),
        };
        let last = match &piece.hi {
            Some(h) => {
                let f = index_of(h);
                let f = if at_index(lo, step, &f) == *h { f - 1 } else { f };
                f.min(span_i.clone())
            }
            None => span_i.clone(),
        };
        if first > last {
            continue;
        }
        let mut cands = vec![first.clone(), last.clone()];
        if piece.a.is_negative() {
            let v = -&piece.b / (&piece.a * int(2));
            let f = index_of(&v);
            for c in [f.clone(), f + 1] {
                if c > first && c < last {
                    cands.push(c);
                }
            }
        }
        cands.sort();
        for c in cands {
            let m = usize::try_from(c).expect("within span");
            let t = at(m);
            let r = piece.value_at(&t);
            if best.as_ref().is_none_or(|(b, _)| r > *b) {
                let prices = shape.iter().map(|&s| at(m + s)).collect();
                *best = Some((r, prices));
            } else if best.as_ref().is_some_and(|(b, _)| r == *b) {
                let prices: Vec<Rat> = shape.iter().map(|&s| at(m + s)).collect();
                if best.as_ref().is_some_and(|(_, p)| prices < *p) {
                    *best = Some((r, prices));
                }
            }
        }
    }
    Ok(())
}

fn at_index(lo: &Rat, step: &Rat, m: &BigInt) -> Rat {
    lo + step * Rat::from_integer(m.clone())
}
