//! Exact linear systems over the rationals.
//!
//! Rows are cleared of denominators and reduced with fraction-free (Bareiss)
//! elimination, so every intermediate entry is an integer minor of the input.

use num::{BigInt, Integer, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::ring::Rational;

/// Echelon data of an integer matrix reduced in place.
struct Echelon {
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

fn integer_row(row: &[Rational]) -> Vec<BigInt> {
    let l = row.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    row.iter().map(|c| c.numer() * (&l / c.denom())).collect()
}

/// Bareiss elimination over the first `ncols` columns; later columns are
/// carried along.
fn bareiss(mut m: Vec<Vec<BigInt>>, ncols: usize) -> Echelon {
    let nrows = m.len();
    let width = m.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..nrows {
            for j in c + 1..width {
                let t = &m[r][c] * &m[i][j] - &m[i][c] * &m[r][j];
                let (q, rem) = t.div_rem(&prev);
                assert!(rem.is_zero(), "fraction-free elimination lost exactness");
                m[i][j] = q;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    Echelon { rows: m, pivots }
}

/// Rank of a rational matrix.
pub fn rank(a: &[Vec<Rational>]) -> usize {
    let ncols = a.first().map_or(0, Vec::len);
    bareiss(a.iter().map(|r| integer_row(r)).collect(), ncols).pivots.len()
}

/// Solves `a x = b` and insists on exactly one solution.
///
/// `context` names the system in error messages.
pub fn solve_unique(a: &[Vec<Rational>], b: &[Rational], ncols: usize, context: &str) -> Result<Vec<Rational>> {
    assert_eq!(a.len(), b.len(), "row count mismatch");
    assert!(a.iter().all(|r| r.len() == ncols), "ragged matrix");
    let augmented: Vec<Vec<BigInt>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut full = row.clone();
            full.push(rhs.clone());
            integer_row(&full)
        })
        .collect();
    let ech = bareiss(augmented, ncols);
    let rank = ech.pivots.len();
    if ech.rows[rank..].iter().any(|row| !row[ncols].is_zero()) {
        return Err(Error::NoSolution(context.to_string()));
    }
    if rank < ncols {
        return Err(Error::NonUniqueSolution { kernel_dim: ncols - rank, context: context.to_string() });
    }
    let mut x = vec![Rational::zero(); ncols];
    for (k, &pc) in ech.pivots.iter().enumerate().rev() {
        let row = &ech.rows[k];
        let mut acc = Rational::from_integer(row[ncols].clone());
        for j in pc + 1..ncols {
            if !row[j].is_zero() {
                acc -= Rational::from_integer(row[j].clone()) * &x[j];
            }
        }
        x[pc] = acc / Rational::from_integer(row[pc].clone());
    }
    for (row, rhs) in a.iter().zip(b) {
        let lhs = row.iter().zip(&x).fold(Rational::zero(), |s, (c, v)| s + c * v);
        assert_eq!(&lhs, rhs, "back substitution failed verification in {}", context);
    }
    Ok(x)
}

/// Largest absolute value of any numerator or denominator, for diagnostics.
pub fn height(x: &[Rational]) -> BigInt {
    x.iter().map(|c| c.numer().abs().max(c.denom().clone())).max().unwrap_or_else(BigInt::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{int, rat};
    use proptest::prelude::*;

    #[test]
    fn small_system() {
        let a = vec![vec![int(2), int(1)], vec![int(1), int(3)], vec![int(3), int(4)]];
        let b = vec![int(3), int(5), int(9)];
        assert!(matches!(solve_unique(&a, &b, 2, "t"), Err(Error::NoSolution(_))));
        assert_eq!(solve_unique(&a, &[int(3), int(5), int(8)], 2, "t").unwrap(), vec![rat(4, 5), rat(7, 5)]);
        let b = vec![int(3), int(4), int(7)];
        assert_eq!(solve_unique(&a, &b, 2, "t").unwrap(), vec![int(1), int(1)]);
        let sq = vec![vec![int(2), int(1)], vec![int(1), int(3)]];
        assert_eq!(solve_unique(&sq, &[int(3), int(5)], 2, "t").unwrap(), vec![rat(4, 5), rat(7, 5)]);
    }

    #[test]
    fn inconsistent_and_underdetermined() {
        let a = vec![vec![int(1), int(1)], vec![int(2), int(2)]];
        assert!(matches!(solve_unique(&a, &[int(1), int(3)], 2, "t"), Err(Error::NoSolution(_))));
        assert!(matches!(
            solve_unique(&a, &[int(1), int(2)], 2, "t"),
            Err(Error::NonUniqueSolution { kernel_dim: 1, .. })
        ));
        assert!(matches!(solve_unique(&[], &[], 1, "t"), Err(Error::NonUniqueSolution { kernel_dim: 1, .. })));
        assert_eq!(solve_unique(&[], &[], 0, "t").unwrap(), vec![]);
    }

    #[test]
    fn skipped_pivot_columns() {
        let a = vec![vec![int(0), rat(1, 2), int(0)], vec![int(0), int(1), int(1)], vec![int(3), int(0), int(0)]];
        let x = solve_unique(&a, &[int(1), int(5), int(6)], 3, "t").unwrap();
        assert_eq!(x, vec![int(2), int(2), int(3)]);
        assert_eq!(rank(&a), 3);
    }

    proptest! {
        #[test]
        fn recovers_planted_solution(
            entries in prop::collection::vec(-6i64..7, 16),
            dens in prop::collection::vec(1i64..5, 16),
            sol in prop::collection::vec((-9i64..10, 1i64..6), 4),
        ) {
            let a: Vec<Vec<Rational>> = (0..4).map(|i| (0..4).map(|j| rat(entries[4 * i + j], dens[4 * i + j])).collect()).collect();
            let x: Vec<Rational> = sol.iter().map(|&(n, d)| rat(n, d)).collect();
            let b: Vec<Rational> = a.iter().map(|r| r.iter().zip(&x).fold(Rational::zero(), |s, (c, v)| s + c * v)).collect();
            match solve_unique(&a, &b, 4, "p") {
                Ok(y) => { prop_assert_eq!(rank(&a), 4); prop_assert_eq!(y, x); }
                Err(Error::NonUniqueSolution { kernel_dim, .. }) => prop_assert_eq!(kernel_dim, 4 - rank(&a)),
                Err(e) => prop_assert!(false, "unexpected {:?}", e),
            }
        }
    }
}
