//! Instance generators: the named families, seeded random instances and the
//! bimatrix-game gadget with strategy extraction.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{GroupedInstance, Instance, ProbVec};
use crate::rat::{frac, int, pow2, Rat};

/// The slowly converging chain: agent 1 on `[0, 2]`, the rest on `[0, 1]`,
/// `T[i][i+1] = 1/2` along the chain and a mutual unit link between the last
/// two agents.
pub fn gen_counterexample(n: usize) -> Result<Instance> {
    if n < 3 {
        return Err(Error::InvalidArgument("the chain needs n >= 3".into()));
    }
    let mut b = vec![int(1); n];
    b[0] = int(2);
    let mut t = vec![vec![int(0); n]; n];
    for i in 0..n - 2 {
        t[i][i + 1] = frac(1, 2);
    }
    t[n - 2][n - 1] = int(1);
    t[n - 1][n - 2] = int(1);
    Instance::new(vec![int(0); n], b, t)
}

/// Two unit-interval agents with mutual influence 2.
pub fn gen_jump() -> Instance {
    let t = vec![vec![int(0), int(2)], vec![int(2), int(0)]];
    Instance::new(vec![int(0); 2], vec![int(1); 2], t).expect("valid by construction")
}

/// Default half-width of the near-degenerate intervals of [`gen_expstruct`].
pub fn expstruct_halfwidth() -> Rat {
    pow2(-20)
}

/// Two-price family with exponentially many pessimistic structures; see
/// [`gen_expstruct_with`].
pub fn gen_expstruct(n: usize) -> Result<GroupedInstance> {
    gen_expstruct_with(n, &expstruct_halfwidth())
}

/// Odd agents form group 0 and even agents group 1 (1-based numbering).
/// Agent `i` has value `2^(ceil(i/2) - 1)`, realized as an interval of
/// half-width `h` around it. Agent `j` influences each earlier agent `i` of
/// the other parity in an earlier pair with weight `2^(ceil(j/2) - 1)`.
pub fn gen_expstruct_with(n: usize, h: &Rat) -> Result<GroupedInstance> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::InvalidArgument("n must be even and at least 2".into()));
    }
    if !h.is_positive() || *h >= frac(1, 2) {
        return Err(Error::InvalidArgument("half-width must lie in (0, 1/2)".into()));
    }
    let pair = |i: usize| i.div_ceil(2);
    let value = |i: usize| pow2(pair(i) as i32 - 1);
    let mut t = vec![vec![int(0); n]; n];
    for j in 1..=n {
        for i in 1..j {
            if (j - i) % 2 == 1 && pair(i) < pair(j) {
                t[j - 1][i - 1] = value(j);
            }
        }
    }
    let a = (1..=n).map(|i| value(i) - h).collect();
    let b = (1..=n).map(|i| value(i) + h).collect();
    let groups = (1..=n).map(|i| (i + 1) % 2).collect();
    GroupedInstance::new(Instance::new(a, b, t)?, 2, groups)
}

/// Seeded random instance with endpoints on the quarter grid of `[0, 10]`.
///
/// Each ordered pair gets an edge with probability `density`. Edge weights
/// are multiples of `1/4` up to 2, or, with `diag_dominant`, chosen so that
/// every row of the normalized influence sums to at most `9/10`.
pub fn gen_random(n: usize, density: f64, seed: u64, diag_dominant: bool) -> Result<Instance> {
    if n == 0 {
        return Err(Error::EmptyInstance);
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidArgument("density must lie in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for _ in 0..n {
        let lo = rng.gen_range(0..40i64);
        let hi = rng.gen_range(lo + 1..=40);
        a.push(frac(lo, 4));
        b.push(frac(hi, 4));
    }
    let mut t = vec![vec![int(0); n]; n];
    for i in 0..n {
        let sources: Vec<usize> = (0..n).filter(|&j| j != i && rng.gen_bool(density)).collect();
        let width: Rat = &b[i] - &a[i];
        for &j in &sources {
            t[j][i] = if diag_dominant {
                let w = rng.gen_range(1..=9i64);
                frac(w, 10 * sources.len() as i64) * &width
            } else {
                frac(rng.gen_range(1..=8i64), 4)
            };
        }
    }
    Instance::new(a, b, t)
}

/// A two-player game; `a[i][j]` and `b[i][j]` are the payoffs when the row
/// player plays `i` and the column player plays `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BimatrixGame {
    pub a: Vec<Vec<Rat>>,
    pub b: Vec<Vec<Rat>>,
}

impl BimatrixGame {
    pub fn new(a: Vec<Vec<Rat>>, b: Vec<Vec<Rat>>) -> Result<Self> {
        let n = a.len();
        let square = |m: &Vec<Vec<Rat>>| m.len() == n && m.iter().all(|r| r.len() == n);
        if n == 0 || !square(&a) || !square(&b) {
            return Err(Error::DimensionMismatch("payoff matrices must be n x n".into()));
        }
        if a.iter().chain(&b).flatten().any(|x| x.abs() > Rat::one()) {
            return Err(Error::PayoffOutOfRange);
        }
        Ok(BimatrixGame { a, b })
    }

    pub fn matching_pennies() -> Self {
        let a = vec![vec![int(1), int(-1)], vec![int(-1), int(1)]];
        let b = a.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
        BimatrixGame { a, b }
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// Row player's payoff for strategy `i` against `y`.
    pub fn row_payoff(&self, i: usize, y: &[Rat]) -> Rat {
        self.a[i].iter().zip(y).map(|(p, w)| p * w).sum()
    }

    /// Column player's payoff for strategy `j` against `x`.
    pub fn col_payoff(&self, j: usize, x: &[Rat]) -> Rat {
        x.iter().enumerate().map(|(k, w)| &self.b[k][j] * w).sum()
    }

    /// Whether every strategy that is worse than some other by more than
    /// `slack` gets zero weight, for both players.
    pub fn satisfies_best_response(&self, x: &[Rat], y: &[Rat], slack: &Rat) -> bool {
        let n = self.n();
        let rows: Vec<Rat> = (0..n).map(|i| self.row_payoff(i, y)).collect();
        let cols: Vec<Rat> = (0..n).map(|j| self.col_payoff(j, x)).collect();
        let ok = |pay: &[Rat], w: &[Rat]| {
            (0..n).all(|i| w[i].is_zero() || (0..n).all(|j| &pay[i] + slack >= pay[j]))
        };
        ok(&rows, x) && ok(&cols, y)
    }
}

/// Agent indices of the gadget's roles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PpadRoles {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    /// `u[i][j]` suppresses row strategy `i` when `j` is clearly better.
    pub u: Vec<Vec<usize>>,
    pub v: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PpadGadget {
    /// Has negative influences; only the transfer-map checks accept it.
    pub instance: Instance,
    pub roles: PpadRoles,
    pub delta: Rat,
}

impl PpadGadget {
    /// The price at which the gadget is played.
    pub fn price() -> Rat {
        frac(1, 2)
    }

    /// Lays out a probability vector from the four role blocks.
    pub fn assemble(&self, x: &[Rat], y: &[Rat], u: &[Vec<Rat>], v: &[Vec<Rat>]) -> Result<ProbVec> {
        let r = &self.roles;
        let mut q = vec![Rat::zero(); self.instance.n()];
        for (i, xi) in x.iter().enumerate() {
            q[r.x[i]] = xi.clone();
        }
        for (i, yi) in y.iter().enumerate() {
            q[r.y[i]] = yi.clone();
        }
        for (i, row) in u.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                q[r.u[i][j]] = w.clone();
            }
        }
        for (i, row) in v.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                q[r.v[i][j]] = w.clone();
            }
        }
        ProbVec::new(q)
    }
}

/// Pricing instance whose approximate equilibria at price `1/2` encode
/// approximate Nash equilibria of `game`. Agents are laid out as
/// `X_1..X_n, Y_1..Y_n, U_11..U_nn, V_11..V_nn`.
pub fn gen_ppad(game: &BimatrixGame, delta: &Rat) -> Result<PpadGadget> {
    if !delta.is_positive() || *delta >= frac(1, 2) {
        return Err(Error::DeltaOutOfRange);
    }
    let n = game.n();
    let total = 2 * n + 2 * n * n;
    let roles = PpadRoles {
        x: (0..n).collect(),
        y: (n..2 * n).collect(),
        u: (0..n).map(|i| (0..n).map(|j| 2 * n + i * n + j).collect()).collect(),
        v: (0..n).map(|i| (0..n).map(|j| 2 * n + n * n + i * n + j).collect()).collect(),
    };
    let lo = frac(1, 2) - delta;
    let hi = &lo + delta * delta;
    let mut a = vec![int(0); total];
    let mut b = vec![int(1); total];
    for &s in roles.u.iter().chain(&roles.v).flatten() {
        a[s] = lo.clone();
        b[s] = hi.clone();
    }
    let mut t = vec![vec![int(0); total]; total];
    for i in 0..n {
        for j in 0..n {
            let (u, v) = (roles.u[i][j], roles.v[i][j]);
            for k in 0..n {
                t[roles.y[k]][u] = &game.a[j][k] - &game.a[i][k];
                t[roles.x[k]][v] = &game.b[k][j] - &game.b[k][i];
            }
            t[u][roles.x[i]] = int(-1);
            t[v][roles.y[i]] = int(-1);
        }
    }
    Ok(PpadGadget { instance: Instance::new(a, b, t)?, roles, delta: delta.clone() })
}

/// Mixed strategies read off the `X` and `Y` blocks: entries at most
/// `delta` are dropped and each block is normalized to sum one.
pub fn extract_bimatrix(q: &[Rat], roles: &PpadRoles, delta: &Rat) -> Result<(Vec<Rat>, Vec<Rat>)> {
    let block = |idx: &[usize], name: char| -> Result<Vec<Rat>> {
        let kept: Vec<Rat> =
            idx.iter().map(|&i| if q[i] > *delta { q[i].clone() } else { Rat::zero() }).collect();
        let total: Rat = kept.iter().sum();
        if total.is_zero() {
            return Err(Error::DegenerateExtraction { block: name });
        }
        Ok(kept.into_iter().map(|w| w / &total).collect())
    };
    Ok((block(&roles.x, 'x')?, block(&roles.y, 'y')?))
}
