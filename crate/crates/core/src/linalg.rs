//! Exact linear algebra over the rationals.

use crate::symcore::Scalar;

pub type Matrix = Vec<Vec<Scalar>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Scalar::one()
                    } else {
                        Scalar::zero()
                    }
                })
                .collect()
        })
        .collect()
}

/// Inverse of a square matrix, or `None` if it is singular.
pub fn invert(m: &Matrix) -> Option<Matrix> {
    let n = m.len();
    let mut a: Matrix = m
        .iter()
        .zip(identity(n))
        .map(|(row, id)| row.iter().cloned().chain(id).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in 0..2 * n {
                    let sub = &factor * &a[col][c];
                    a[r][c] -= &sub;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn determinant(m: &Matrix) -> Scalar {
    let n = m.len();
    let mut a = m.clone();
    let mut det = Scalar::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Scalar::zero();
        };
        if pivot != col {
            a.swap(col, pivot);
            det = -det;
        }
        det = &det * &a[col][col];
        for r in col + 1..n {
            if !a[r][col].is_zero() {
                let factor = &a[r][col] / &a[col][col];
                for c in col..n {
                    let sub = &factor * &a[col][c];
                    a[r][c] -= &sub;
                }
            }
        }
    }
    det
}

/// Outcome of solving a linear system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    /// A particular solution with free variables set to zero, and the
    /// number of free variables.
    Solved {
        x: Vec<Scalar>,
        free: usize,
    },
    Inconsistent,
}

/// Solves `rows · x = rhs` by Gauss–Jordan elimination.
pub fn solve(rows: &[Vec<Scalar>], rhs: &[Scalar], nvars: usize) -> Solution {
    let mut a: Matrix = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row = r.clone();
            row.resize(nvars, Scalar::zero());
            row.push(b.clone());
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..nvars {
        let Some(p) = (row..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = a[row][col].recip();
        for x in a[row].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..a.len() {
            if r != row && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in col..=nvars {
                    let sub = &factor * &a[row][c];
                    a[r][c] -= &sub;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if a[row..].iter().any(|r| !r[nvars].is_zero()) {
        return Solution::Inconsistent;
    }
    let mut x = vec![Scalar::zero(); nvars];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = a[r][nvars].clone();
    }
    Solution::Solved {
        free: nvars - pivots.len(),
        x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Matrix {
        rows.iter()
            .map(|r| r.iter().map(|&x| Scalar::from_int(x)).collect())
            .collect()
    }

    #[test]
    fn inverse_and_determinant() {
        let a = m(&[&[0, 1], &[1, 0]]);
        assert_eq!(invert(&a).unwrap(), a);
        assert_eq!(determinant(&a), Scalar::from_int(-1));
        assert!(invert(&m(&[&[1, 2], &[2, 4]])).is_none());
    }

    #[test]
    fn underdetermined_system() {
        let rows = m(&[&[1, 1, 0]]);
        match solve(&rows, &[Scalar::from_int(3)], 3) {
            Solution::Solved { x, free } => {
                assert_eq!(free, 2);
                assert_eq!(x[0], Scalar::from_int(3));
            }
            Solution::Inconsistent => panic!(),
        }
        let rows = m(&[&[1, 1], &[1, 1]]);
        let rhs = [Scalar::one(), Scalar::zero()];
        assert_eq!(solve(&rows, &rhs, 2), Solution::Inconsistent);
    }
}
