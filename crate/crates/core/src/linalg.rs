//! Exact Gaussian elimination over the rationals.

use num_traits::Zero;

use crate::series::Rational;

#[derive(Debug, Clone, PartialEq)]
pub enum Solution {
    Unique(Vec<Rational>),
    /// The system has no solution; the index is the first equation that
    /// reduced to `0 = nonzero`.
    Inconsistent(usize),
    /// Consistent, but the columns are linearly dependent.
    Underdetermined,
}

/// Row-reduces `[a | b]` where `a` is given row by row (one row per
/// equation). Every row must have the same length.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Solution {
    assert_eq!(a.len(), b.len());
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<(Vec<Rational>, Rational, usize)> = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(i, (row, rhs))| {
            assert_eq!(row.len(), cols);
            (row.clone(), rhs.clone(), i)
        })
        .collect();

    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..cols {
        let Some(p) = (pivot_row..m.len()).find(|&r| !m[r].0[col].is_zero()) else {
            continue;
        };
        m.swap(pivot_row, p);
        let inv = m[pivot_row].0[col].recip();
        for x in m[pivot_row].0.iter_mut() {
            *x *= &inv;
        }
        m[pivot_row].1 *= &inv;
        let (pivot_coeffs, pivot_rhs) = (m[pivot_row].0.clone(), m[pivot_row].1.clone());
        for (r, row) in m.iter_mut().enumerate() {
            if r == pivot_row || row.0[col].is_zero() {
                continue;
            }
            let f = row.0[col].clone();
            for (x, y) in row.0.iter_mut().zip(&pivot_coeffs) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
            row.1 -= &f * &pivot_rhs;
        }
        pivots.push(col);
        pivot_row += 1;
        if pivot_row == m.len() {
            break;
        }
    }

    if let Some(bad) = m[pivot_row..]
        .iter()
        .filter(|row| !row.1.is_zero())
        .map(|row| row.2)
        .min()
    {
        return Solution::Inconsistent(bad);
    }
    if pivots.len() < cols {
        return Solution::Underdetermined;
    }
    Solution::Unique(m[..cols].iter().map(|row| row.1.clone()).collect())
}

pub fn rank(a: &[Vec<Rational>]) -> usize {
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Rational>> = a.to_vec();
    let mut r = 0;
    for col in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let pivot = m[r].clone();
        for row in m.iter_mut().skip(r + 1) {
            if row[col].is_zero() {
                continue;
            }
            let f = &row[col] / &pivot[col];
            for (x, y) in row.iter_mut().zip(&pivot) {
                *x -= &f * y;
            }
        }
        r += 1;
    }
    r
}

/// Inverse of a square matrix, if it exists.
pub fn invert(a: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = a.len();
    let mut cols: Vec<Vec<Rational>> = vec![Vec::with_capacity(n); n];
    for k in 0..n {
        let e: Vec<Rational> = (0..n)
            .map(|i| if i == k { Rational::from_integer(1.into()) } else { Rational::zero() })
            .collect();
        match solve(a, &e) {
            Solution::Unique(x) => {
                for (i, v) in x.into_iter().enumerate() {
                    cols[i].push(v);
                }
            }
            _ => return None,
        }
    }
    // cols[i][k] is entry (i, k) of the inverse
    Some(cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::int;

    fn row(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn overdetermined_consistent() {
        let a = vec![row(&[1, 1]), row(&[1, -1]), row(&[2, 0])];
        let b = row(&[3, 1, 4]);
        assert_eq!(solve(&a, &b), Solution::Unique(row(&[2, 1])));
    }

    #[test]
    fn inconsistent_reports_equation() {
        let a = vec![row(&[1, 0]), row(&[0, 1]), row(&[1, 1])];
        let b = row(&[1, 1, 3]);
        assert_eq!(solve(&a, &b), Solution::Inconsistent(2));
    }

    #[test]
    fn dependent_columns() {
        let a = vec![row(&[1, 2]), row(&[2, 4])];
        assert_eq!(solve(&a, &row(&[1, 2])), Solution::Underdetermined);
        assert_eq!(rank(&a), 1);
    }

    #[test]
    fn inverse_of_two_by_two() {
        let a = vec![row(&[2, 1]), row(&[1, 1])];
        let inv = invert(&a).unwrap();
        assert_eq!(inv, vec![row(&[1, -1]), row(&[-1, 2])]);
        assert!(invert(&[row(&[1, 1]), row(&[1, 1])]).is_none());
    }
}
