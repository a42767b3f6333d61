//! Domain types: instances, probability vectors, structures and the
//! piecewise-linear equilibrium representation.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rat::Rat;

/// A pricing game: `n` agents with values uniform on `[a_i, b_i]` and an
/// influence matrix where `t[j][i]` is the utility agent `i` receives from
/// agent `j` when both buy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub a: Vec<Rat>,
    pub b: Vec<Rat>,
    pub t: Vec<Vec<Rat>>,
}

impl Instance {
    /// Builds and validates an instance. Negative influences are accepted
    /// here; the sweep rejects them.
    pub fn new(a: Vec<Rat>, b: Vec<Rat>, t: Vec<Vec<Rat>>) -> Result<Self> {
        let inst = Instance { a, b, t };
        validate_instance(&inst, false)?;
        Ok(inst)
    }

    /// Agents with no influence at all.
    pub fn isolated(a: Vec<Rat>, b: Vec<Rat>) -> Result<Self> {
        let n = a.len();
        Self::new(a, b, vec![vec![Rat::zero(); n]; n])
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn width(&self, i: usize) -> Rat {
        &self.b[i] - &self.a[i]
    }

    pub fn has_nonnegative_influence(&self) -> bool {
        self.t.iter().flatten().all(|w| !w.is_negative())
    }

    /// Sum of influences received by agent `i`.
    pub fn incoming(&self, i: usize) -> Rat {
        self.t.iter().map(|row| &row[i]).sum()
    }

    pub fn normalized(&self) -> NormalizedInfluence {
        let n = self.n();
        let y: Vec<Rat> = (0..n).map(|i| self.width(i).recip()).collect();
        let l = (0..n)
            .map(|i| (0..n).map(|j| &self.t[j][i] * &y[i]).collect())
            .collect();
        NormalizedInfluence { l, y }
    }
}

/// Validates the model assumptions: `0 <= a_i < b_i`, no self influence and,
/// when requested, non-negative influences.
pub fn validate_instance(inst: &Instance, require_nonneg_influence: bool) -> Result<()> {
    let n = inst.a.len();
    if n == 0 {
        return Err(Error::EmptyInstance);
    }
    if inst.b.len() != n || inst.t.len() != n || inst.t.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "expected {n} bounds and an {n}x{n} influence matrix"
        )));
    }
    for i in 0..n {
        if inst.a[i].is_negative() {
            return Err(Error::NegativeLowerBound { agent: i });
        }
        if inst.a[i] >= inst.b[i] {
            return Err(Error::DegenerateInterval { agent: i });
        }
        if !inst.t[i][i].is_zero() {
            return Err(Error::SelfLoop { agent: i });
        }
    }
    if require_nonneg_influence {
        for (j, row) in inst.t.iter().enumerate() {
            if let Some(i) = row.iter().position(|w| w.is_negative()) {
                return Err(Error::NegativeInfluence { from: j, to: i });
            }
        }
    }
    Ok(())
}

/// `l[i][j] = T[j][i] / (b_i - a_i)` and `y_i = 1 / (b_i - a_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedInfluence {
    pub l: Vec<Vec<Rat>>,
    pub y: Vec<Rat>,
}

/// Buying probabilities, each in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProbVec(Vec<Rat>);

impl ProbVec {
    pub fn new(q: Vec<Rat>) -> Result<Self> {
        if q.iter().any(|x| x.is_negative() || *x > Rat::one()) {
            return Err(Error::InvalidArgument(
                "probabilities must lie in [0, 1]".into(),
            ));
        }
        Ok(ProbVec(q))
    }

    pub(crate) fn new_unchecked(q: Vec<Rat>) -> Self {
        debug_assert!(q.iter().all(|x| !x.is_negative() && *x <= Rat::one()));
        ProbVec(q)
    }

    pub fn zeros(n: usize) -> Self {
        ProbVec(vec![Rat::zero(); n])
    }

    pub fn ones(n: usize) -> Self {
        ProbVec(vec![Rat::one(); n])
    }

    pub fn into_inner(self) -> Vec<Rat> {
        self.0
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &ProbVec) -> bool {
        self.0.iter().zip(&other.0).all(|(x, y)| x <= y)
    }
}

impl Deref for ProbVec {
    type Target = [Rat];

    fn deref(&self) -> &[Rat] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Zero,
    Star,
    One,
}

impl Label {
    pub fn symbol(self) -> char {
        match self {
            Label::Zero => '0',
            Label::Star => '*',
            Label::One => '1',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Structure(pub Vec<Label>);

pub fn structure_of(q: &ProbVec) -> Structure {
    Structure(
        q.iter()
            .map(|x| {
                if x.is_zero() {
                    Label::Zero
                } else if x.is_one() {
                    Label::One
                } else {
                    Label::Star
                }
            })
            .collect(),
    )
}

/// Zero, working and one sets; ascending agent indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Partition {
    pub zero: Vec<usize>,
    pub working: Vec<usize>,
    pub one: Vec<usize>,
}

impl Partition {
    pub fn from_structure(s: &Structure) -> Self {
        let mut p = Partition::default();
        for (i, l) in s.0.iter().enumerate() {
            match l {
                Label::Zero => p.zero.push(i),
                Label::Star => p.working.push(i),
                Label::One => p.one.push(i),
            }
        }
        p
    }

    pub fn to_structure(&self, n: usize) -> Structure {
        let mut s = vec![Label::Zero; n];
        for &i in &self.working {
            s[i] = Label::Star;
        }
        for &i in &self.one {
            s[i] = Label::One;
        }
        Structure(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Pessimistic,
    Optimistic,
}

/// One linear piece `q(p) = c0 + c1 * p`.
///
/// `None` bounds are infinite. A pessimistic piece covers `[lo, hi)`, an
/// optimistic one `(lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSegment {
    pub lo: Option<Rat>,
    pub hi: Option<Rat>,
    pub c0: Vec<Rat>,
    pub c1: Vec<Rat>,
}

impl AffineSegment {
    pub fn value_at(&self, p: &Rat) -> Vec<Rat> {
        self.c0.iter().zip(&self.c1).map(|(c0, c1)| c0 + c1 * p).collect()
    }

    /// A price strictly inside the segment.
    pub fn interior_point(&self) -> Rat {
        match (&self.lo, &self.hi) {
            (Some(lo), Some(hi)) => (lo + hi) / Rat::from_integer(2.into()),
            (Some(lo), None) => lo + Rat::one(),
            (None, Some(hi)) => hi - Rat::one(),
            (None, None) => Rat::zero(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.c1.iter().all(Zero::is_zero)
    }
}

/// An equilibrium as a function of price: segments ordered from the highest
/// prices down, contiguous, covering the whole line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseEquilibrium {
    pub side: Side,
    pub segments: Vec<AffineSegment>,
}

impl PiecewiseEquilibrium {
    pub fn n(&self) -> usize {
        self.segments.first().map_or(0, |s| s.c0.len())
    }

    /// Breakpoints in descending order.
    pub fn breakpoints(&self) -> Vec<Rat> {
        self.segments.iter().filter_map(|s| s.lo.clone()).collect()
    }

    /// Index of the segment that owns price `p`.
    pub fn segment_index(&self, p: &Rat) -> usize {
        // Segments are sorted by descending lower bound; ownership of the
        // shared endpoint depends on the side.
        let below = |s: &AffineSegment| match (&s.lo, self.side) {
            (None, _) => false,
            (Some(lo), Side::Pessimistic) => lo > p,
            (Some(lo), Side::Optimistic) => lo >= p,
        };
        self.segments.partition_point(below)
    }

    /// Whether the equilibrium is discontinuous at breakpoint `idx` (the
    /// boundary between segment `idx` and `idx + 1`).
    pub fn is_jump(&self, idx: usize) -> bool {
        let (upper, lower) = (&self.segments[idx], &self.segments[idx + 1]);
        let t = upper.lo.as_ref().expect("inner breakpoint is finite");
        upper.value_at(t) != lower.value_at(t)
    }

    /// Checks ordering, contiguity, non-increasing slopes and the `2n + 1`
    /// piece bound.
    pub fn check_well_formed(&self) -> Result<()> {
        let n = self.n();
        let segs = &self.segments;
        let fail = |m: &str| Err(Error::InternalInvariantViolation(m.into()));
        if segs.is_empty() || segs[0].hi.is_some() || segs[segs.len() - 1].lo.is_some() {
            return fail("segments must cover the whole price line");
        }
        if segs.len() > 2 * n + 1 {
            return fail("more than 2n + 1 segments");
        }
        for w in segs.windows(2) {
            if w[0].lo.is_none() || w[0].lo != w[1].hi {
                return fail("segments are not contiguous");
            }
        }
        for s in segs {
            if s.c0.len() != n || s.c1.len() != n {
                return fail("segment dimension mismatch");
            }
            if let (Some(lo), Some(hi)) = (&s.lo, &s.hi) {
                if lo >= hi {
                    return fail("empty segment");
                }
            }
            if s.c1.iter().any(Signed::is_positive) {
                return fail("probability increasing in price");
            }
        }
        Ok(())
    }
}

/// Equilibrium probabilities at price `p`.
pub fn evaluate(pwl: &PiecewiseEquilibrium, p: &Rat) -> ProbVec {
    let seg = &pwl.segments[pwl.segment_index(p)];
    ProbVec::new_unchecked(seg.value_at(p))
}

/// Realized utility of agent `i` under a pure decision profile.
pub fn agent_utility(decisions: &[bool], i: usize, v_i: &Rat, p: &Rat, inst: &Instance) -> Rat {
    if !decisions[i] {
        return Rat::zero();
    }
    let social: Rat = decisions
        .iter()
        .enumerate()
        .filter(|(_, d)| **d)
        .map(|(j, _)| &inst.t[j][i])
        .sum();
    v_i - p + social
}

/// An instance whose agents are split into `k` price groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupedInstance {
    pub instance: Instance,
    pub k: usize,
    /// Zero-based group of every agent.
    pub groups: Vec<usize>,
}

impl GroupedInstance {
    pub fn new(instance: Instance, k: usize, groups: Vec<usize>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("at least one group is required".into()));
        }
        if groups.len() != instance.n() {
            return Err(Error::DimensionMismatch("one group per agent".into()));
        }
        if let Some((agent, &group)) = groups.iter().enumerate().find(|(_, g)| **g >= k) {
            return Err(Error::InvalidGroup { agent, group, k });
        }
        Ok(GroupedInstance { instance, k, groups })
    }

    pub fn single_group(instance: Instance) -> Self {
        let n = instance.n();
        GroupedInstance { instance, k: 1, groups: vec![0; n] }
    }

    pub fn members(&self, group: usize) -> Vec<usize> {
        (0..self.groups.len()).filter(|&i| self.groups[i] == group).collect()
    }

    /// Per-agent prices for a per-group price vector.
    pub fn agent_prices(&self, prices: &[Rat]) -> Vec<Rat> {
        self.groups.iter().map(|&g| prices[g].clone()).collect()
    }
}

/// Which side a supremum is approached from when it is not attained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Approach {
    FromBelow,
    FromAbove,
}

/// Result of a revenue maximization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PricingOutcome {
    /// One price per group (a single entry for uniform pricing).
    pub prices: Vec<Rat>,
    pub revenue: Rat,
    /// False when `revenue` is a supremum only approached as the price tends
    /// to `prices`.
    pub attained: bool,
    pub approach: Option<Approach>,
    /// The one-dimensional sweep parameter at the optimum, for the families
    /// that have one.
    pub parameter: Option<Rat>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gen_jump;
    use crate::rat::{frac, int};

    fn unit(n: usize) -> (Vec<Rat>, Vec<Rat>) {
        (vec![int(0); n], vec![int(1); n])
    }

    #[test]
    fn smallest_instance_is_valid() {
        let (a, b) = unit(1);
        assert!(Instance::isolated(a, b).is_ok());
    }

    #[test]
    fn validation_errors() {
        let (a, b) = unit(2);
        let mut t = vec![vec![int(0); 2]; 2];
        t[1][1] = int(1);
        assert_eq!(Instance::new(a.clone(), b.clone(), t), Err(Error::SelfLoop { agent: 1 }));

        assert_eq!(
            Instance::isolated(vec![int(1)], vec![int(1)]),
            Err(Error::DegenerateInterval { agent: 0 })
        );
        assert_eq!(
            Instance::isolated(vec![int(-1)], vec![int(1)]),
            Err(Error::NegativeLowerBound { agent: 0 })
        );

        let mut t = vec![vec![int(0); 2]; 2];
        t[0][1] = int(-1);
        let inst = Instance::new(a, b, t).unwrap();
        assert_eq!(
            validate_instance(&inst, true),
            Err(Error::NegativeInfluence { from: 0, to: 1 })
        );
        assert!(validate_instance(&inst, false).is_ok());
        assert_eq!(Instance::isolated(vec![], vec![]), Err(Error::EmptyInstance));
    }

    #[test]
    fn structure_cases() {
        let q = ProbVec::new(vec![int(0), frac(1, 2), int(1)]).unwrap();
        assert_eq!(structure_of(&q).0, vec![Label::Zero, Label::Star, Label::One]);
        assert_eq!(structure_of(&ProbVec::zeros(3)).0, vec![Label::Zero; 3]);
        let q = ProbVec::new(vec![frac(1, 2), frac(1, 4), int(1), int(1)]).unwrap();
        assert_eq!(
            structure_of(&q).0,
            vec![Label::Star, Label::Star, Label::One, Label::One]
        );
        let s = structure_of(&q);
        assert_eq!(Partition::from_structure(&s).to_structure(4), s);
    }

    #[test]
    fn probvec_rejects_out_of_range() {
        assert!(ProbVec::new(vec![frac(3, 2)]).is_err());
        assert!(ProbVec::new(vec![frac(-1, 2)]).is_err());
    }

    #[test]
    fn utility() {
        let jump = gen_jump();
        assert_eq!(agent_utility(&[false, true], 0, &int(5), &int(1), &jump), int(0));
        assert_eq!(
            agent_utility(&[true, true], 0, &frac(1, 2), &int(1), &jump),
            frac(3, 2)
        );
        let (a, b) = unit(1);
        let single = Instance::isolated(a, b).unwrap();
        assert_eq!(agent_utility(&[true], 0, &frac(2, 3), &frac(2, 3), &single), int(0));
    }

    #[test]
    fn evaluate_respects_half_open_segments() {
        let mk = |side| PiecewiseEquilibrium {
            side,
            segments: vec![
                AffineSegment { lo: Some(int(1)), hi: None, c0: vec![int(0)], c1: vec![int(0)] },
                AffineSegment { lo: None, hi: Some(int(1)), c0: vec![int(1)], c1: vec![int(0)] },
            ],
        };
        let pess = mk(Side::Pessimistic);
        assert_eq!(evaluate(&pess, &int(1))[0], int(0));
        assert_eq!(evaluate(&pess, &frac(1, 2))[0], int(1));
        let opt = mk(Side::Optimistic);
        assert_eq!(evaluate(&opt, &int(1))[0], int(1));
        assert_eq!(evaluate(&opt, &frac(3, 2))[0], int(0));
        assert!(pess.is_jump(0));
        assert!(pess.check_well_formed().is_ok());
    }

    #[test]
    fn groups_are_checked() {
        let (a, b) = unit(2);
        let inst = Instance::isolated(a, b).unwrap();
        assert!(GroupedInstance::new(inst.clone(), 2, vec![0, 1]).is_ok());
        assert_eq!(
            GroupedInstance::new(inst, 2, vec![0, 2]),
            Err(Error::InvalidGroup { agent: 1, group: 2, k: 2 })
        );
    }
}
