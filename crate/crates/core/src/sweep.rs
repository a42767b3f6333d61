//! Exact line sweep for the pessimistic and optimistic equilibria.
//!
//! The pessimistic sweep starts above every agent's upper bound, where nobody
//! buys, and lowers the price event by event. Between events the partition
//! into zero, working and one sets is fixed and the working agents'
//! probabilities solve a linear system, so the equilibrium is affine in the
//! price. When the working set's normalized influence has spectral radius at
//! least one the equilibrium jumps; the sweep then identifies a pivot agent
//! that buys for sure at every lower price, locks it (with the one set), and
//! recurses on the smaller instance.
//!
//! The optimistic equilibrium is computed by the same routine on a mirrored
//! instance: with `q' = 1 - q` and `p' = -p` the greatest fixed point of the
//! original game becomes the least fixed point of a game with the same
//! influences and bounds `[-b_i - s_i, -a_i - s_i]`, where `s_i` is the total
//! influence received by agent `i`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::error::{invariant, Error, Result};
use crate::linalg::{neumann_inverse, RatMatrix};
use crate::model::{
    evaluate, validate_instance, AffineSegment, GroupedInstance, Instance, Partition,
    PiecewiseEquilibrium, ProbVec, Side,
};
use crate::rat::Rat;

/// Working data of the sweep at threshold price `price`, after the
/// structural changes at that price have been applied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepState {
    /// Event counter.
    pub t: usize,
    pub price: Rat,
    /// Pessimistic equilibrium at `price`.
    pub q: Vec<Rat>,
    pub partition: Partition,
    /// `x_i = (b_i - price - offset_i) / (b_i - a_i)`.
    pub x: Vec<Rat>,
    /// `y_i = 1 / (b_i - a_i)`.
    pub y: Vec<Rat>,
    pub offsets: Vec<Rat>,
}

impl SweepState {
    /// State at `price` for an equilibrium `q` of the instance with offsets,
    /// with the partition already updated for the events at `price`.
    pub fn at(inst: &Instance, offsets: &[Rat], price: Rat, q: Vec<Rat>) -> Result<Self> {
        let offsets = offsets_or_zero(inst.n(), offsets)?;
        let prob = Problem::from_instance(inst, &offsets);
        let l = prob.influence();
        let v = prob.response(&l, &price, &q);
        let mut part = Partition::default();
        for (i, vi) in v.iter().enumerate() {
            if vi.is_negative() {
                part.zero.push(i);
            } else if *vi < Rat::one() {
                part.working.push(i);
            } else {
                part.one.push(i);
            }
        }
        Ok(SweepState { t: 0, x: prob.x(&price), y: prob.y(), price, q, partition: part, offsets })
    }
}

/// Evidence that agent `k` buys with probability one just below the current
/// threshold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PivotCertificate {
    /// Prefix of the working set whose influence has spectral radius < 1.
    pub w1: Vec<usize>,
    /// `w1` plus `w`; spectral radius >= 1.
    pub w2: Vec<usize>,
    pub w: usize,
    /// Quasi-eigenvector: `(I - L[w1,w1])^{-1} L[w1,w]` on `w1`, 1 at `w`,
    /// 0 elsewhere.
    pub u: Vec<Rat>,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PivotEvent {
    /// Threshold price (in the sweep parameter) at which the pivot was taken.
    pub price: Rat,
    /// Indices refer to the agents of the swept instance. For optimistic
    /// sweeps the certificate lives in the mirrored game and `k` is locked at
    /// probability zero.
    pub certificate: PivotCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepOutcome {
    pub equilibrium: PiecewiseEquilibrium,
    /// Whether an equilibrium jump forced the pivot branch anywhere in the
    /// recursion.
    pub pivot_taken: bool,
    pub pivots: Vec<PivotEvent>,
}

/// Sweep input. Unlike [`Instance`], bounds may be negative (after applying
/// offsets or mirroring); influences are non-negative.
#[derive(Clone, Debug)]
struct Problem {
    a: Vec<Rat>,
    b: Vec<Rat>,
    t: Vec<Vec<Rat>>,
}

impl Problem {
    fn from_instance(inst: &Instance, offsets: &[Rat]) -> Self {
        Problem {
            a: inst.a.iter().zip(offsets).map(|(a, d)| a - d).collect(),
            b: inst.b.iter().zip(offsets).map(|(b, d)| b - d).collect(),
            t: inst.t.clone(),
        }
    }

    fn n(&self) -> usize {
        self.a.len()
    }

    fn width(&self, i: usize) -> Rat {
        &self.b[i] - &self.a[i]
    }

    fn incoming(&self, i: usize) -> Rat {
        self.t.iter().map(|row| &row[i]).sum()
    }

    fn y(&self) -> Vec<Rat> {
        (0..self.n()).map(|i| self.width(i).recip()).collect()
    }

    fn x(&self, price: &Rat) -> Vec<Rat> {
        (0..self.n()).map(|i| (&self.b[i] - price) / self.width(i)).collect()
    }

    fn influence(&self) -> RatMatrix {
        let n = self.n();
        let mut l = RatMatrix::zeros(n, n);
        for i in 0..n {
            let w = self.width(i);
            for j in 0..n {
                if !self.t[j][i].is_zero() {
                    l[(i, j)] = &self.t[j][i] / &w;
                }
            }
        }
        l
    }

    /// `x + L q` at `price`, the unclamped best response.
    fn response(&self, l: &RatMatrix, price: &Rat, q: &[Rat]) -> Vec<Rat> {
        let lq = l.mul_vec(q);
        self.x(price).into_iter().zip(lq).map(|(x, s)| x + s).collect()
    }

    fn is_diag_dominant(&self) -> bool {
        (0..self.n()).all(|i| self.incoming(i) < self.width(i))
    }

    fn mirrored(&self) -> Problem {
        let n = self.n();
        let s: Vec<Rat> = (0..n).map(|i| self.incoming(i)).collect();
        Problem {
            a: (0..n).map(|i| -&self.b[i] - &s[i]).collect(),
            b: (0..n).map(|i| -&self.a[i] - &s[i]).collect(),
            t: self.t.clone(),
        }
    }

    /// The game on the unlocked agents when every locked agent buys: each
    /// remaining interval shifts up by the influence received from locked
    /// agents. Returns the map from new to old indices.
    fn lock_ones(&self, locked: &[bool]) -> (Problem, Vec<usize>) {
        let keep: Vec<usize> = (0..self.n()).filter(|&i| !locked[i]).collect();
        let shift = |i: usize| -> Rat {
            (0..self.n()).filter(|&j| locked[j]).map(|j| &self.t[j][i]).sum()
        };
        let sub = Problem {
            a: keep.iter().map(|&i| &self.a[i] + shift(i)).collect(),
            b: keep.iter().map(|&i| &self.b[i] + shift(i)).collect(),
            t: keep.iter().map(|&j| keep.iter().map(|&i| self.t[j][i].clone()).collect()).collect(),
        };
        (sub, keep)
    }
}

fn offsets_or_zero(n: usize, offsets: &[Rat]) -> Result<Vec<Rat>> {
    if offsets.is_empty() {
        return Ok(vec![Rat::zero(); n]);
    }
    if offsets.len() != n {
        return Err(Error::DimensionMismatch(format!("expected {n} offsets")));
    }
    Ok(offsets.to_vec())
}

/// Picks the pivot for a working set whose influence has spectral radius at
/// least one. The working set is scanned in ascending index order for the
/// first prefix that fails the gate; ties in the pivot ratio go to the
/// smallest index.
pub fn find_pivot(state: &SweepState, l: &RatMatrix) -> Result<PivotCertificate> {
    let n = state.q.len();
    let working = &state.partition.working;
    for m in 2..=working.len() {
        let w2 = &working[..m];
        if neumann_inverse(&l.select(w2, w2))?.is_some() {
            continue;
        }
        let (w1, w) = (&working[..m - 1], working[m - 1]);
        let inv = neumann_inverse(&l.select(w1, w1))?
            .ok_or_else(|| invariant("prefix before the first failing gate must pass"))?;
        let col: Vec<Rat> = w1.iter().map(|&i| l[(i, w)].clone()).collect();
        let mut u = vec![Rat::zero(); n];
        for (&i, ui) in w1.iter().zip(inv.mul_vec(&col)) {
            u[i] = ui;
        }
        u[w] = Rat::one();

        let mut best: Option<(Rat, usize)> = None;
        for (i, ui) in u.iter().enumerate() {
            if ui.is_zero() {
                continue;
            }
            let ratio = (Rat::one() - &state.q[i]) / ui;
            if best.as_ref().is_none_or(|(r, _)| ratio < *r) {
                best = Some((ratio, i));
            }
        }
        let (ratio, k) = best.expect("u_w = 1");
        if !ratio.is_positive() {
            return Err(invariant("pivot ratio must be positive"));
        }
        return Ok(PivotCertificate { w1: w1.to_vec(), w2: w2.to_vec(), w, u, k });
    }
    Err(invariant("find_pivot called on a working set that passes the gate"))
}

fn ones_below(n: usize, price: Rat) -> AffineSegment {
    AffineSegment {
        lo: None,
        hi: Some(price),
        c0: vec![Rat::one(); n],
        c1: vec![Rat::zero(); n],
    }
}

/// Pessimistic sweep of `prob`; segments descending, `[lo, hi)` ownership.
fn sweep_problem(prob: &Problem, pivots: &mut Vec<PivotEvent>) -> Result<Vec<AffineSegment>> {
    let n = prob.n();
    let l = prob.influence();
    let y = prob.y();
    let mut price = prob.b.iter().max().expect("non-empty").clone();
    let mut q = vec![Rat::zero(); n];
    let mut segments = vec![AffineSegment {
        lo: Some(price.clone()),
        hi: None,
        c0: vec![Rat::zero(); n],
        c1: vec![Rat::zero(); n],
    }];
    let mut part = Partition { zero: (0..n).collect(), working: vec![], one: vec![] };

    for t in 1.. {
        if t > 2 * n + 2 {
            return Err(invariant("sweep did not terminate within 2n events"));
        }
        let v = prob.response(&l, &price, &q);

        // Step 1: structural changes at this threshold.
        let mut next = Partition { zero: vec![], working: part.working.clone(), one: part.one.clone() };
        for &i in &part.zero {
            if v[i].is_positive() {
                return Err(invariant("zero-set agent with positive response"));
            }
            if v[i].is_zero() {
                next.working.push(i);
            } else {
                next.zero.push(i);
            }
        }
        let mut working = Vec::with_capacity(next.working.len());
        for &i in &next.working {
            if v[i] > Rat::one() {
                return Err(invariant("working agent overshot one"));
            }
            if v[i].is_one() {
                next.one.push(i);
            } else {
                working.push(i);
            }
        }
        working.sort_unstable();
        next.one.sort_unstable();
        next.working = working;
        part = next;

        if part.one.len() == n {
            segments.push(ones_below(n, price));
            break;
        }

        let l_ww = l.select(&part.working, &part.working);
        if let Some(inv) = neumann_inverse(&l_ww)? {
            // Step 2: rate at which responses grow as the price drops.
            let y_w: Vec<Rat> = part.working.iter().map(|&i| y[i].clone()).collect();
            let mut ell = vec![Rat::zero(); n];
            for (&i, e) in part.working.iter().zip(inv.mul_vec(&y_w)) {
                ell[i] = e;
            }
            for &i in &part.zero {
                let mut e = y[i].clone();
                for &j in &part.working {
                    e += &l[(i, j)] * &ell[j];
                }
                ell[i] = e;
            }
            // Step 3: distance to the next event.
            let mut eps: Option<Rat> = None;
            let targets = part.zero.iter().map(|&i| (i, Rat::zero()))
                .chain(part.working.iter().map(|&i| (i, Rat::one())));
            for (i, target) in targets {
                if !ell[i].is_positive() {
                    return Err(invariant("non-positive growth rate with a passing gate"));
                }
                let e = (target - &v[i]) / &ell[i];
                if eps.as_ref().is_none_or(|cur| e < *cur) {
                    eps = Some(e);
                }
            }
            let eps = eps.ok_or_else(|| invariant("no live agents in an unfinished sweep"))?;
            if !eps.is_positive() {
                return Err(invariant("non-positive step to the next event"));
            }
            let lower = &price - &eps;
            let mut c0 = vec![Rat::zero(); n];
            let mut c1 = vec![Rat::zero(); n];
            for &i in &part.one {
                c0[i] = Rat::one();
                q[i] = Rat::one();
            }
            for &i in &part.working {
                c0[i] = &v[i] + &price * &ell[i];
                c1[i] = -&ell[i];
                q[i] = &v[i] + &eps * &ell[i];
            }
            segments.push(AffineSegment { lo: Some(lower.clone()), hi: Some(price), c0, c1 });
            price = lower;
        } else {
            if prob.is_diag_dominant() {
                return Err(invariant("diagonally dominant instance failed the spectral gate"));
            }
            let state = SweepState {
                t,
                price: price.clone(),
                q: q.clone(),
                partition: part.clone(),
                x: prob.x(&price),
                y: y.clone(),
                offsets: vec![Rat::zero(); n],
            };
            let cert = find_pivot(&state, &l)?;
            let mut locked = vec![false; n];
            for &i in state.partition.one.iter().chain(core::iter::once(&cert.k)) {
                locked[i] = true;
            }
            pivots.push(PivotEvent { price: price.clone(), certificate: cert });
            if locked.iter().all(|&x| x) {
                segments.push(ones_below(n, price));
                break;
            }
            let (sub, keep) = prob.lock_ones(&locked);
            let mut sub_pivots = Vec::new();
            let sub_segments = sweep_problem(&sub, &mut sub_pivots)?;
            for ev in sub_pivots.into_iter().filter(|ev| ev.price < price) {
                pivots.push(PivotEvent { price: ev.price, certificate: lift_certificate(ev.certificate, &keep, n) });
            }
            // Only the part strictly below the threshold belongs to us.
            for seg in sub_segments {
                if seg.lo.as_ref().is_some_and(|lo| *lo >= price) {
                    continue;
                }
                let hi = match seg.hi {
                    Some(h) if h < price => h,
                    _ => price.clone(),
                };
                let mut c0 = vec![Rat::one(); n];
                let mut c1 = vec![Rat::zero(); n];
                for (s, &i) in keep.iter().enumerate() {
                    c0[i] = seg.c0[s].clone();
                    c1[i] = seg.c1[s].clone();
                }
                segments.push(AffineSegment { lo: seg.lo, hi: Some(hi), c0, c1 });
            }
            break;
        }
    }
    Ok(merge_equal_neighbours(segments))
}

fn lift_certificate(c: PivotCertificate, keep: &[usize], n: usize) -> PivotCertificate {
    let mut u = vec![Rat::zero(); n];
    for (s, &i) in keep.iter().enumerate() {
        u[i] = c.u[s].clone();
    }
    PivotCertificate {
        w1: c.w1.iter().map(|&i| keep[i]).collect(),
        w2: c.w2.iter().map(|&i| keep[i]).collect(),
        w: keep[c.w],
        u,
        k: keep[c.k],
    }
}

/// Joins neighbouring segments carrying the same affine map.
fn merge_equal_neighbours(segments: Vec<AffineSegment>) -> Vec<AffineSegment> {
    let mut out: Vec<AffineSegment> = Vec::with_capacity(segments.len());
    for seg in segments {
        match out.last_mut() {
            Some(prev) if prev.c0 == seg.c0 && prev.c1 == seg.c1 => prev.lo = seg.lo,
            _ => out.push(seg),
        }
    }
    out
}

/// Pessimistic or optimistic equilibrium of the game in which agent `i` pays
/// `p + offsets[i]`, as a function of `p`. An empty `offsets` means no
/// offsets. Also reports the pivots taken.
pub fn sweep(inst: &Instance, offsets: &[Rat], side: Side) -> Result<SweepOutcome> {
    validate_instance(inst, true)?;
    let offsets = offsets_or_zero(inst.n(), offsets)?;
    if offsets.iter().any(Signed::is_negative) {
        return Err(Error::NegativeOffset);
    }
    let prob = Problem::from_instance(inst, &offsets);
    let mut pivots = Vec::new();
    let segments = match side {
        Side::Pessimistic => sweep_problem(&prob, &mut pivots)?,
        Side::Optimistic => {
            let mirrored = sweep_problem(&prob.mirrored(), &mut pivots)?;
            for ev in &mut pivots {
                ev.price = -&ev.price;
            }
            mirrored
                .into_iter()
                .rev()
                .map(|s| AffineSegment {
                    lo: s.hi.map(|h| -h),
                    hi: s.lo.map(|l| -l),
                    c0: s.c0.iter().map(|c| Rat::one() - c).collect(),
                    c1: s.c1,
                })
                .collect()
        }
    };
    let equilibrium = PiecewiseEquilibrium { side, segments };
    equilibrium.check_well_formed()?;
    Ok(SweepOutcome { pivot_taken: !pivots.is_empty(), pivots, equilibrium })
}

pub fn pessimistic_sweep(inst: &Instance, offsets: &[Rat]) -> Result<PiecewiseEquilibrium> {
    sweep(inst, offsets, Side::Pessimistic).map(|o| o.equilibrium)
}

pub fn optimistic_sweep(inst: &Instance, offsets: &[Rat]) -> Result<PiecewiseEquilibrium> {
    sweep(inst, offsets, Side::Optimistic).map(|o| o.equilibrium)
}

/// The game on the agents outside `locked`, assuming every locked agent
/// buys. Returns the new instance and, for each of its agents, the original
/// index.
pub fn build_subproblem(inst: &Instance, locked: &[usize]) -> Result<(Instance, Vec<usize>)> {
    let n = inst.n();
    let mut mask = vec![false; n];
    for &i in locked {
        if i >= n {
            return Err(Error::InvalidArgument(format!("agent {i} out of range")));
        }
        mask[i] = true;
    }
    let count = mask.iter().filter(|&&m| m).count();
    if count == 0 || count == n {
        return Err(Error::InvalidArgument(
            "locked set must be a non-empty proper subset".into(),
        ));
    }
    let prob = Problem { a: inst.a.clone(), b: inst.b.clone(), t: inst.t.clone() };
    let (sub, keep) = prob.lock_ones(&mask);
    Ok((Instance { a: sub.a, b: sub.b, t: sub.t }, keep))
}

/// Per-agent offsets `prices[g_i] - min(prices)` and the minimum price.
pub fn offsets_for(ginst: &GroupedInstance, prices: &[Rat]) -> Result<(Vec<Rat>, Rat)> {
    if prices.len() != ginst.k {
        return Err(Error::DimensionMismatch(format!("expected {} group prices", ginst.k)));
    }
    if prices.iter().any(Signed::is_negative) {
        return Err(Error::NegativePrice);
    }
    let min = prices.iter().min().expect("k >= 1").clone();
    let offsets = ginst.groups.iter().map(|&g| &prices[g] - &min).collect();
    Ok((offsets, min))
}

/// Equilibrium of the discriminative game with one price per group.
pub fn equilibrium_at_price_vector(
    ginst: &GroupedInstance,
    prices: &[Rat],
    side: Side,
) -> Result<ProbVec> {
    let (offsets, min) = offsets_for(ginst, prices)?;
    let pwl = sweep(&ginst.instance, &offsets, side)?.equilibrium;
    Ok(evaluate(&pwl, &min))
}
