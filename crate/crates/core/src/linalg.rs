//! Exact linear algebra over the integers and rationals.
//!
//! Everything here works on small dense matrices (tens of rows at most), so the
//! routines favour clarity over asymptotics. Rank uses fraction-free (Bareiss)
//! elimination on integers; kernels and solves go through reduced row echelon
//! form over `BigRational`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Rank over the rationals by fraction-free elimination.
pub fn rank(rows: &[Vec<BigInt>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut a: Vec<Vec<BigInt>> = rows.to_vec();
    let nrows = a.len();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in (r + 1)..nrows {
            for j in (c + 1)..ncols {
                // Bareiss step: the division is exact.
                let v = &a[r][c] * &a[i][j] - &a[i][c] * &a[r][j];
                a[i][j] = v / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    r
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(a: &mut [Vec<Q>]) -> Vec<usize> {
    let nrows = a.len();
    if nrows == 0 {
        return Vec::new();
    }
    let ncols = a[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..nrows {
            if i != r && !a[i][c].is_zero() {
                let factor = a[i][c].clone();
                let pivot_row = a[r].clone();
                for (x, p) in a[i].iter_mut().zip(&pivot_row) {
                    *x -= &factor * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rational basis of the null space, one vector per free column (in column order).
pub fn rational_kernel(rows: &[Vec<Q>], ncols: usize) -> Vec<Vec<Q>> {
    let mut a = rows.to_vec();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![Q::zero(); ncols];
            v[fc] = Q::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][fc].clone();
            }
            v
        })
        .collect()
}

/// Scales a rational vector to a primitive integer vector whose first non-zero
/// entry is positive. The zero vector maps to the zero vector.
pub fn primitive(v: &[Q]) -> Vec<BigInt> {
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let mut ints: Vec<BigInt> = v.iter().map(|x| (x * Q::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    let flip = ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    for x in ints.iter_mut() {
        *x = &*x / &g;
        if flip {
            *x = -&*x;
        }
    }
    ints
}

/// Integer basis of the null space of an integer matrix: primitive vectors
/// with positive leading entry, ordered by free column.
pub fn integer_kernel(rows: &[Vec<BigInt>], ncols: usize) -> Vec<Vec<BigInt>> {
    let qrows: Vec<Vec<Q>> = rows
        .iter()
        .map(|r| r.iter().map(|x| Q::from_integer(x.clone())).collect())
        .collect();
    rational_kernel(&qrows, ncols)
        .iter()
        .map(|v| primitive(v))
        .collect()
}

/// Outcome of solving `A x = b` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    /// Solution with every free variable set to zero.
    pub particular: Vec<Q>,
    /// Basis of the homogeneous solution space.
    pub kernel: Vec<Vec<Q>>,
}

/// Solves `A x = b` over the rationals; `None` when inconsistent.
pub fn solve(a: &[Vec<Q>], b: &[Q], ncols: usize) -> Option<LinearSolution> {
    let mut aug: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&ncols) {
        return None;
    }
    let mut particular = vec![Q::zero(); ncols];
    for (row, &pc) in pivots.iter().enumerate() {
        particular[pc] = aug[row][ncols].clone();
    }
    Some(LinearSolution {
        particular,
        kernel: rational_kernel(a, ncols),
    })
}

pub fn dot_int(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
