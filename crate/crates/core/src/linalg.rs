//! Gaussian elimination over an exact field.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("system is singular (rank {rank} < {unknowns} unknowns)")]
    Singular { rank: usize, unknowns: usize },
    #[error("system is inconsistent at row {0}")]
    Inconsistent(usize),
}

/// Solve `A x = b` for a full-column-rank `A` (rows >= columns). Extra rows
/// are checked for consistency rather than ignored.
pub fn solve<S: Scalar>(a: &[Vec<S>], b: &[S]) -> Result<Vec<S>, SolveError> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    assert_eq!(rows, b.len());
    let mut m: Vec<Vec<S>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    let mut pivot_row = 0;
    for col in 0..cols {
        let Some(p) = (pivot_row..rows).find(|&i| !m[i][col].is_negligible()) else {
            return Err(SolveError::Singular { rank: pivot_row, unknowns: cols });
        };
        m.swap(pivot_row, p);
        let inv = S::one() / m[pivot_row][col].clone();
        for v in m[pivot_row].iter_mut().skip(col) {
            *v = v.clone() * inv.clone();
        }
        for i in 0..rows {
            if i == pivot_row || m[i][col].is_negligible() {
                continue;
            }
            let f = m[i][col].clone();
            for j in col..=cols {
                let delta = f.clone() * m[pivot_row][j].clone();
                m[i][j] = m[i][j].clone() - delta;
            }
        }
        pivot_row += 1;
    }
    if let Some(bad) = (cols..rows).find(|&i| !m[i][cols].is_negligible()) {
        return Err(SolveError::Inconsistent(bad));
    }
    Ok((0..cols).map(|i| m[i][cols].clone()).collect())
}

/// Rank of a matrix.
pub fn rank<S: Scalar>(a: &[Vec<S>]) -> usize {
    let mut m = a.to_vec();
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][col].is_negligible()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..rows {
            if m[i][col].is_negligible() {
                continue;
            }
            let f = m[i][col].clone() / m[r][col].clone();
            for j in col..cols {
                let delta = f.clone() * m[r][j].clone();
                m[i][j] = m[i][j].clone() - delta;
            }
        }
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{frac, int, Count};

    #[test]
    fn solves_small_rational_system() {
        let a = vec![vec![int(2), int(1)], vec![int(1), int(3)]];
        let b = vec![int(3), int(5)];
        let x = solve(&a, &b).unwrap();
        assert_eq!(x, vec![frac(4, 5), frac(7, 5)]);
    }

    #[test]
    fn overdetermined_consistency() {
        let a = vec![vec![int(1), int(0)], vec![int(0), int(1)], vec![int(1), int(1)]];
        assert_eq!(solve(&a, &[int(1), int(2), int(3)]).unwrap(), vec![int(1), int(2)]);
        assert_eq!(solve(&a, &[int(1), int(2), int(4)]), Err(SolveError::Inconsistent(2)));
    }

    #[test]
    fn singular_is_reported() {
        let a: Vec<Vec<Count>> = vec![vec![int(1), int(2)], vec![int(2), int(4)]];
        assert!(matches!(solve(&a, &[int(1), int(2)]), Err(SolveError::Singular { .. })));
        assert_eq!(rank(&a), 1);
    }

    #[test]
    fn works_over_floats() {
        let a = vec![vec![4.0, 1.0], vec![2.0, 3.0]];
        let x = solve(&a, &[1.0, 2.0]).unwrap();
        assert!((x[0] - 0.1).abs() < 1e-12 && (x[1] - 0.6).abs() < 1e-12);
    }
}
