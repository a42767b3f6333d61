//! Dense linear algebra over exact rationals and the algebraic test for
//! `rho(M) < 1`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::rat::Rat;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        Ok(RatMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// The submatrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut m = Self::zeros(rows.len(), cols.len());
        for (r, &i) in rows.iter().enumerate() {
            for (c, &j) in cols.iter().enumerate() {
                m[(r, c)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        debug_assert_eq!(self.cols, other.rows);
        let mut m = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    m[(i, j)] += a * &other[(k, j)];
                }
            }
        }
        m
    }

    /// `I - self`.
    pub fn identity_minus(&self) -> RatMatrix {
        let mut m = self.clone();
        for x in m.data.iter_mut() {
            *x = -&*x;
        }
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] += Rat::one();
        }
        m
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|x| !x.is_negative())
    }
}

impl Index<(usize, usize)> for RatMatrix {
    type Output = Rat;

    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

/// Gauss-Jordan elimination of `[a | rhs]` in place. Pivots on the first
/// nonzero entry of each column; exact arithmetic needs nothing smarter.
fn eliminate(a: &mut RatMatrix, rhs: &mut RatMatrix) -> Result<()> {
    let n = a.rows;
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[(r, col)].is_zero()).ok_or(Error::Singular)?;
        if pivot != col {
            for j in 0..n {
                a.data.swap(pivot * n + j, col * n + j);
            }
            for j in 0..rhs.cols {
                rhs.data.swap(pivot * rhs.cols + j, col * rhs.cols + j);
            }
        }
        let inv = a[(col, col)].recip();
        for j in 0..n {
            a[(col, j)] *= &inv;
        }
        for j in 0..rhs.cols {
            rhs[(col, j)] *= &inv;
        }
        for r in 0..n {
            if r == col || a[(r, col)].is_zero() {
                continue;
            }
            let factor = a[(r, col)].clone();
            for j in col..n {
                let d = &factor * &a[(col, j)];
                a[(r, j)] -= d;
            }
            for j in 0..rhs.cols {
                let d = &factor * &rhs[(col, j)];
                rhs[(r, j)] -= d;
            }
        }
    }
    Ok(())
}

fn require_square(a: &RatMatrix) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch("matrix must be square".into()))
    }
}

/// Solves `a x = rhs` exactly.
pub fn solve_linear(a: &RatMatrix, rhs: &[Rat]) -> Result<Vec<Rat>> {
    require_square(a)?;
    if rhs.len() != a.rows {
        return Err(Error::DimensionMismatch("right-hand side length".into()));
    }
    let mut work = a.clone();
    let mut b = RatMatrix { rows: rhs.len(), cols: 1, data: rhs.to_vec() };
    eliminate(&mut work, &mut b)?;
    debug_assert_eq!(a.mul_vec(&b.data), rhs);
    Ok(b.data)
}

pub fn invert(a: &RatMatrix) -> Result<RatMatrix> {
    require_square(a)?;
    let mut work = a.clone();
    let mut inv = RatMatrix::identity(a.rows);
    eliminate(&mut work, &mut inv)?;
    Ok(inv)
}

/// `(I - m)^{-1}` when `rho(m) < 1`, else `None`. For non-negative `m` the
/// spectral radius is below one exactly when `I - m` is invertible with a
/// non-negative inverse.
pub fn neumann_inverse(m: &RatMatrix) -> Result<Option<RatMatrix>> {
    require_square(m)?;
    if !m.is_nonnegative() {
        return Err(Error::NonNegativityViolated);
    }
    match invert(&m.identity_minus()) {
        Ok(inv) if inv.is_nonnegative() => Ok(Some(inv)),
        Ok(_) | Err(Error::Singular) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Decides `rho(m) < 1` for a non-negative matrix without computing
/// eigenvalues.
pub fn spectral_radius_below_one(m: &RatMatrix) -> Result<bool> {
    Ok(neumann_inverse(m)?.is_some())
}

/// Every row of the normalized influence matrix sums to less than one.
pub fn is_strictly_diag_dominant(inst: &Instance) -> bool {
    (0..inst.n()).all(|i| inst.incoming(i) < inst.width(i))
}

/// Normalized influence `L` as a matrix.
pub fn influence_matrix(inst: &Instance) -> RatMatrix {
    RatMatrix::from_rows(inst.normalized().l).expect("square by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};
    use proptest::prelude::*;

    fn m(rows: &[&[Rat]]) -> RatMatrix {
        RatMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn solve_cases() {
        let id = RatMatrix::identity(3);
        assert_eq!(solve_linear(&id, &[int(1), int(2), int(3)]).unwrap(), vec![int(1), int(2), int(3)]);
        let a = m(&[&[int(1), int(-2)], &[int(-2), int(1)]]);
        assert_eq!(solve_linear(&a, &[int(1), int(0)]).unwrap(), vec![frac(-1, 3), frac(-2, 3)]);
        let s = m(&[&[int(1), int(-1)], &[int(-1), int(1)]]);
        assert_eq!(solve_linear(&s, &[int(1), int(1)]), Err(Error::Singular));
    }

    #[test]
    fn solve_needs_row_swap() {
        let a = m(&[&[int(0), int(1)], &[int(1), int(0)]]);
        assert_eq!(solve_linear(&a, &[int(5), int(7)]).unwrap(), vec![int(7), int(5)]);
    }

    #[test]
    fn invert_cases() {
        assert_eq!(invert(&RatMatrix::identity(2)).unwrap(), RatMatrix::identity(2));
        let u = m(&[&[int(1), frac(-1, 2)], &[int(0), int(1)]]);
        assert_eq!(invert(&u).unwrap(), m(&[&[int(1), frac(1, 2)], &[int(0), int(1)]]));
        let a = m(&[&[int(1), int(-2)], &[int(-2), int(1)]]);
        let third = frac(-1, 3);
        assert_eq!(
            invert(&a).unwrap(),
            m(&[&[third.clone(), &third * int(2)], &[&third * int(2), third]])
        );
        assert_eq!(invert(&m(&[&[int(1), int(1)], &[int(1), int(1)]])), Err(Error::Singular));
    }

    #[test]
    fn gate_cases() {
        let two = m(&[&[int(0), int(2)], &[int(2), int(0)]]);
        assert!(!spectral_radius_below_one(&two).unwrap());
        let nil = m(&[&[int(0), frac(1, 2)], &[int(0), int(0)]]);
        assert!(spectral_radius_below_one(&nil).unwrap());
        let small = m(&[&[int(0), frac(3, 5)], &[frac(3, 5), int(0)]]);
        assert!(spectral_radius_below_one(&small).unwrap());
        let boundary = m(&[&[int(0), int(1)], &[int(1), int(0)]]);
        assert!(!spectral_radius_below_one(&boundary).unwrap());
        let neg = m(&[&[int(0), int(-1)], &[int(0), int(0)]]);
        assert_eq!(spectral_radius_below_one(&neg), Err(Error::NonNegativityViolated));
        assert!(spectral_radius_below_one(&RatMatrix::zeros(0, 0)).unwrap());
    }

    #[test]
    fn diag_dominance_cases() {
        let iso = Instance::isolated(vec![int(0); 3], vec![int(1); 3]).unwrap();
        assert!(is_strictly_diag_dominant(&iso));
        assert!(!is_strictly_diag_dominant(&crate::instances::gen_jump()));
        let mut t = vec![vec![int(0); 2]; 2];
        t[1][0] = frac(1, 2);
        let inst = Instance::new(vec![int(0); 2], vec![int(1); 2], t).unwrap();
        assert!(is_strictly_diag_dominant(&inst));
    }

    fn small_matrix() -> impl Strategy<Value = RatMatrix> {
        (1usize..5).prop_flat_map(|n| {
            proptest::collection::vec((-6i64..7, 1i64..5), n * n).prop_map(move |e| {
                let rows = e.chunks(n).map(|r| r.iter().map(|&(p, q)| frac(p, q)).collect()).collect();
                RatMatrix::from_rows(rows).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn inverse_is_two_sided(a in small_matrix()) {
            if let Ok(inv) = invert(&a) {
                let n = a.rows();
                prop_assert_eq!(a.mul(&inv), RatMatrix::identity(n));
                prop_assert_eq!(inv.mul(&a), RatMatrix::identity(n));
            }
        }

        #[test]
        fn solution_resubstitutes(a in small_matrix(), seed in 0i64..100) {
            let rhs: Vec<Rat> = (0..a.rows() as i64).map(|i| frac(seed - 3 * i, 1 + i)).collect();
            if let Ok(x) = solve_linear(&a, &rhs) {
                prop_assert_eq!(a.mul_vec(&x), rhs);
            }
        }
    }
}
