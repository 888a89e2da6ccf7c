//! Dense phase-one simplex for `A x = b, x ≥ 0` feasibility.
//!
//! Bland's rule picks the entering column (lowest index with negative
//! reduced cost). The leaving row comes from a Harris two-pass ratio test:
//! the step bound is relaxed by a small feasibility tolerance, and among rows
//! within that bound the largest pivot coefficient wins. At optimality the
//! tableau is rebuilt from the original data for the final basis. Dual
//! simplex steps clear any small negative basic values the rebuild exposes,
//! and primal pivoting resumes if rounding had hidden an improving column.

use crate::{Error, Result, Scalar};

const MAX_REBUILDS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Phase1<T> {
    Feasible(Vec<T>),
    Infeasible { objective: T },
}

struct Tableau<T> {
    /// `m` rows of `[A | I | b]` in the current basis.
    rows: Vec<Vec<T>>,
    /// Reduced costs of the phase-one objective; the last entry is `−objective`.
    z: Vec<T>,
    basis: Vec<usize>,
}

pub(crate) fn phase_one<T: Scalar>(a: &[Vec<T>], b: &[T], max_pivots: usize) -> Result<Phase1<T>> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let rhs = n + m;
    let eps = T::epsilon() * T::lit(1e3);
    let feas_tol = T::lp_tol() * T::lit(1e-3);

    // rows with negative right-hand side are negated so that the all-artificial
    // start is primal feasible
    let full: Vec<Vec<T>> = (0..m)
        .map(|i| {
            let sign = if b[i] < T::zero() { -T::one() } else { T::one() };
            let mut row = vec![T::zero(); n + m + 1];
            for j in 0..n {
                row[j] = sign * a[i][j];
            }
            row[n + i] = T::one();
            row[rhs] = sign * b[i];
            row
        })
        .collect();

    let mut tab = rebuild(&full, n, (n..n + m).collect()).expect("identity basis");
    let mut pivots = 0;
    for _ in 0..MAX_REBUILDS {
        while let Some(enter) = (0..n + m).find(|&j| tab.z[j] < -eps) {
            let Some(row) = leaving_row(&tab, enter, rhs) else {
                // no positive pivot: the objective is bounded below, so only
                // rounding can get here
                break;
            };
            pivot(&mut tab, row, enter);
            pivots += 1;
            if pivots >= max_pivots {
                return Err(Error::LpNotConverged { iterations: pivots });
            }
        }
        // rounding can leave the exact basic solution slightly negative; the
        // basis is still dual feasible, so dual simplex steps repair it
        let Some(mut fresh) = rebuild(&full, n, tab.basis.clone()) else {
            break;
        };
        while let Some((row, value)) = most_negative(&fresh, rhs) {
            if value >= -feas_tol {
                break;
            }
            let Some(enter) = dual_entering(&fresh, row, n + m) else {
                break;
            };
            pivot(&mut fresh, row, enter);
            pivots += 1;
            if pivots >= max_pivots {
                return Err(Error::LpNotConverged { iterations: pivots });
            }
        }
        let Some(fresh) = rebuild(&full, n, fresh.basis.clone()) else {
            break;
        };
        let optimal = (0..n + m).all(|j| fresh.z[j] >= -eps);
        let feasible = fresh.rows.iter().all(|r| r[rhs] >= -feas_tol);
        tab = fresh;
        if optimal && feasible {
            break;
        }
    }

    let worst = tab.rows.iter().map(|r| r[rhs]).fold(T::zero(), T::min);
    if worst < -T::lp_tol() {
        return Err(Error::LpNumerical {
            residual: (-worst).as_f64(),
        });
    }
    let objective = -tab.z[rhs];
    if objective > T::lp_tol() {
        return Ok(Phase1::Infeasible { objective });
    }
    let mut x = vec![T::zero(); n];
    for (i, &j) in tab.basis.iter().enumerate() {
        if j < n {
            x[j] = tab.rows[i][rhs].max(T::zero());
        }
    }
    Ok(Phase1::Feasible(x))
}

fn leaving_row<T: Scalar>(tab: &Tableau<T>, enter: usize, rhs: usize) -> Option<usize> {
    let pivot_tol = T::lp_tol();
    let slack = T::lp_tol() * T::lit(1e-2);
    let candidates = || {
        tab.rows
            .iter()
            .enumerate()
            .filter(|(_, row)| row[enter] > pivot_tol)
    };
    let bound = candidates()
        .map(|(_, row)| (row[rhs].max(T::zero()) + slack) / row[enter])
        .reduce(T::min)?;
    candidates()
        .filter(|(_, row)| row[rhs].max(T::zero()) / row[enter] <= bound)
        .max_by(|(i, a), (j, b)| {
            a[enter]
                .partial_cmp(&b[enter])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| tab.basis[*j].cmp(&tab.basis[*i]))
        })
        .map(|(i, _)| i)
}

fn most_negative<T: Scalar>(tab: &Tableau<T>, rhs: usize) -> Option<(usize, T)> {
    tab.rows
        .iter()
        .enumerate()
        .map(|(i, r)| (i, r[rhs]))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
}

/// Dual ratio test on a row with negative right-hand side.
fn dual_entering<T: Scalar>(tab: &Tableau<T>, row: usize, cols: usize) -> Option<usize> {
    let pivot_tol = T::lp_tol();
    (0..cols)
        .filter(|&j| tab.rows[row][j] < -pivot_tol)
        .min_by(|&i, &j| {
            let ri = tab.z[i].max(T::zero()) / -tab.rows[row][i];
            let rj = tab.z[j].max(T::zero()) / -tab.rows[row][j];
            ri.partial_cmp(&rj)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| tab.rows[row][i].partial_cmp(&tab.rows[row][j]).unwrap_or(std::cmp::Ordering::Equal))
        })
}

fn pivot<T: Scalar>(tab: &mut Tableau<T>, row: usize, col: usize) {
    let p = tab.rows[row][col];
    for v in tab.rows[row].iter_mut() {
        *v = *v / p;
    }
    let pivot_row = tab.rows[row].clone();
    for (i, r) in tab.rows.iter_mut().enumerate() {
        if i == row {
            continue;
        }
        let f = r[col];
        if f != T::zero() {
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                *v = *v - f * *pv;
            }
            r[col] = T::zero();
        }
    }
    let f = tab.z[col];
    if f != T::zero() {
        for (v, pv) in tab.z.iter_mut().zip(&pivot_row) {
            *v = *v - f * *pv;
        }
        tab.z[col] = T::zero();
    }
    tab.basis[row] = col;
}

/// Gauss-Jordan elimination of `[A | I | b]` onto `basis` with partial
/// pivoting; the reduced costs are recomputed from scratch. `None` if the
/// basis matrix is numerically singular.
fn rebuild<T: Scalar>(full: &[Vec<T>], n: usize, basis: Vec<usize>) -> Option<Tableau<T>> {
    let m = full.len();
    let mut rows = full.to_vec();
    for (k, &col) in basis.iter().enumerate() {
        let piv = (k..m).max_by(|&r, &s| {
            rows[r][col]
                .abs()
                .partial_cmp(&rows[s][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if rows[piv][col].abs() <= T::epsilon() * T::lit(1e3) {
            return None;
        }
        rows.swap(k, piv);
        let p = rows[k][col];
        for v in rows[k].iter_mut() {
            *v = *v / p;
        }
        let pivot_row = rows[k].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == k {
                continue;
            }
            let f = row[col];
            if f != T::zero() {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v = *v - f * *pv;
                }
                row[col] = T::zero();
            }
        }
    }
    // phase-one cost: 1 on artificial columns n..n+m
    let width = n + m + 1;
    let mut z = vec![T::zero(); width];
    for zj in &mut z[n..n + m] {
        *zj = T::one();
    }
    for (k, &col) in basis.iter().enumerate() {
        if col >= n && col < n + m {
            for (zj, v) in z.iter_mut().zip(&rows[k]) {
                *zj = *zj - *v;
            }
        }
    }
    Some(Tableau { rows, z, basis })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feasible_system() {
        // x + y = 1, x - y = 0.5
        let a = vec![vec![1.0_f64, 1.0], vec![1.0, -1.0]];
        let Phase1::Feasible(x) = phase_one(&a, &[1.0, 0.5], 100).unwrap() else {
            panic!("expected feasible");
        };
        assert!((x[0] - 0.75).abs() < 1e-14 && (x[1] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn infeasible_system() {
        // x + y = 1, x + y = 2
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(matches!(
            phase_one(&a, &[1.0, 2.0], 100).unwrap(),
            Phase1::Infeasible { .. }
        ));
        // x = -1 with x ≥ 0
        assert!(matches!(
            phase_one(&[vec![1.0]], &[-1.0], 100).unwrap(),
            Phase1::Infeasible { .. }
        ));
    }

    #[test]
    fn redundant_rows_are_fine() {
        let a = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        assert!(matches!(
            phase_one(&a, &[1.0, 2.0], 100).unwrap(),
            Phase1::Feasible(_)
        ));
    }
}
