//! Small dense linear algebra over an ordered field, plus a float spectrum helper.
//!
//! The elimination routines are generic so that exact rational arithmetic and
//! floating point share one code path. Partial pivoting picks the largest
//! magnitude pivot, which is harmless for exact types.

use nalgebra::{Complex, DMatrix, Schur};

use crate::error::{Error, Result};
use crate::scalar::{Field, Real};

fn pivot_row<T: Field>(a: &[Vec<T>], col: usize, from: usize) -> Option<usize> {
    let mut best: Option<usize> = None;
    for r in from..a.len() {
        if a[r][col].is_zero() {
            continue;
        }
        match best {
            Some(b) if a[b][col].abs() >= a[r][col].abs() => {}
            _ => best = Some(r),
        }
    }
    best
}

/// Row-reduce in place; returns the pivot columns.
fn eliminate<T: Field>(a: &mut [Vec<T>]) -> Vec<usize> {
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == a.len() {
            break;
        }
        let Some(p) = pivot_row(a, col, row) else { continue };
        a.swap(row, p);
        let pv = a[row][col].clone();
        for r in row + 1..a.len() {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone() / pv.clone();
            for c in col..cols {
                let delta = factor.clone() * a[row][c].clone();
                a[r][c] = a[r][c].clone() - delta;
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub fn rank<T: Field>(rows: &[Vec<T>]) -> usize {
    let mut a = rows.to_vec();
    eliminate(&mut a).len()
}

pub fn determinant<T: Field>(rows: &[Vec<T>]) -> T {
    let n = rows.len();
    assert!(rows.iter().all(|r| r.len() == n), "determinant of a non-square matrix");
    let mut a = rows.to_vec();
    let mut det = T::one();
    for col in 0..n {
        let Some(p) = pivot_row(&a, col, col) else { return T::zero() };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let pv = a[col][col].clone();
        det = det * pv.clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone() / pv.clone();
            for c in col..n {
                let delta = factor.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - delta;
            }
        }
    }
    det
}

/// Solve the square system `A x = b`; `None` if `A` is singular.
pub fn solve<T: Field>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let n = a.len();
    let mut aug: Vec<Vec<T>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = eliminate(&mut aug);
    if pivots.len() < n || pivots.iter().any(|&c| c >= n) {
        return None;
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut acc = aug[r][n].clone();
        for c in r + 1..n {
            acc = acc - aug[r][c].clone() * x[c].clone();
        }
        x[r] = acc / aug[r][r].clone();
    }
    Some(x)
}

pub fn mat_vec<T: Field>(a: &[Vec<T>], x: &[T]) -> Vec<T> {
    a.iter()
        .map(|row| row.iter().zip(x).fold(T::zero(), |acc, (p, q)| acc + p.clone() * q.clone()))
        .collect()
}

/// Relative asymmetry below which a matrix is treated as symmetric. By
/// Bauer–Fike the symmetrised spectrum is then off by at most about this much.
const SYMMETRY_TOL: f64 = 1e-9;

/// Eigenvalues of a real square matrix, computed in `f64`, sorted by real part.
/// Near-symmetric input goes through the symmetric solver; otherwise a Schur
/// decomposition with a bounded iteration count.
pub fn spectrum<T: Real>(a: &DMatrix<T>) -> Result<Vec<Complex<f64>>> {
    let a64 = a.map(|v| v.to_f64().unwrap_or(f64::NAN));
    if a64.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix passed to spectrum".into()));
    }
    let n = a64.nrows();
    let scale = a64.amax().max(1.0);
    let symmetric = (0..n).all(|i| (0..i).all(|j| (a64[(i, j)] - a64[(j, i)]).abs() <= SYMMETRY_TOL * scale));
    let mut ev: Vec<Complex<f64>> = if symmetric {
        let sym = (&a64 + a64.transpose()) * 0.5;
        sym.symmetric_eigenvalues().iter().map(|&x| Complex::new(x, 0.0)).collect()
    } else {
        let schur = Schur::try_new(a64, f64::EPSILON, 1000 * n.max(1))
            .ok_or_else(|| Error::NoConvergence(format!("Schur decomposition of a {n}x{n} matrix")))?;
        schur.complex_eigenvalues().iter().copied().collect()
    };
    ev.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(ev)
}

/// Group real parts into clusters whose consecutive members differ by at most `tol`.
/// Returns `(mean, count)` in ascending order.
pub fn cluster_real(values: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut start = 0;
    for k in 1..=v.len() {
        if k == v.len() || v[k] - v[k - 1] > tol {
            let chunk = &v[start..k];
            if !chunk.is_empty() {
                out.push((chunk.iter().sum::<f64>() / chunk.len() as f64, chunk.len()));
            }
            start = k;
        }
    }
    out
}
