//! Reference eigenvalue solver used by the validation suites.
//!
//! Deliberately a different algorithm family from the production solver:
//! Householder reduction to tridiagonal form followed by Sturm-sequence
//! bisection. It shares no code path with the Jacobi machinery, so
//! agreement between the two is meaningful evidence rather than a tautology.

use crate::matrix::SymMatrix;

/// Eigenvalues of a symmetric matrix in ascending order, by Householder
/// tridiagonalization and bisection.
pub fn eigenvalues_sym(c: &SymMatrix) -> Vec<f64> {
    let (d, e) = tridiagonalize(c);
    bisect_all(&d, &e)
}

/// Same spectrum, descending, for direct comparison with the solver output.
pub fn eigenvalues_sym_desc(c: &SymMatrix) -> Vec<f64> {
    let mut v = eigenvalues_sym(c);
    v.reverse();
    v
}

/// Reduces a symmetric matrix to tridiagonal form, returning the diagonal
/// `d` (length n) and subdiagonal `e` (length n−1).
#[allow(clippy::needless_range_loop)] // index arithmetic mirrors the update formulas
fn tridiagonalize(c: &SymMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = c.dim();
    let mut a: Vec<f64> = c.as_slice().to_vec();
    let at = |a: &Vec<f64>, r: usize, s: usize| a[r * n + s];

    let mut sub = vec![0.0f64; n.saturating_sub(1)];
    for k in 0..n.saturating_sub(2) {
        // Householder vector over rows k+1..n of column k.
        let mut sigma = 0.0f64;
        for r in (k + 1)..n {
            sigma += at(&a, r, k) * at(&a, r, k);
        }
        let x0 = at(&a, k + 1, k);
        let norm = sigma.sqrt();
        if norm == 0.0 {
            sub[k] = 0.0;
            continue;
        }
        let alpha = -norm.copysign(if x0 == 0.0 { 1.0 } else { x0 });
        let mut v = vec![0.0f64; n];
        v[k + 1] = x0 - alpha;
        for r in (k + 2)..n {
            v[r] = at(&a, r, k);
        }
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv == 0.0 {
            sub[k] = alpha;
            continue;
        }
        let tau = 2.0 / vtv;

        // Symmetric update A ← H·A·H restricted to the trailing block:
        // p = τ·A·v, w = p − (τ·vᵀp/2)·v, A ← A − v·wᵀ − w·vᵀ.
        let mut p = vec![0.0f64; n];
        for r in (k + 1)..n {
            let mut acc = 0.0;
            for s in (k + 1)..n {
                acc += at(&a, r, s) * v[s];
            }
            p[r] = tau * acc;
        }
        let vtp: f64 = v.iter().zip(&p).map(|(x, y)| x * y).sum();
        let kk = tau * vtp / 2.0;
        let w: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - kk * vi).collect();
        for r in (k + 1)..n {
            for s in (k + 1)..n {
                a[r * n + s] -= v[r] * w[s] + w[r] * v[s];
            }
        }
        a[(k + 1) * n + k] = alpha;
        a[k * n + k + 1] = alpha;
        for r in (k + 2)..n {
            a[r * n + k] = 0.0;
            a[k * n + r] = 0.0;
        }
        sub[k] = alpha;
    }
    if n >= 2 {
        sub[n - 2] = a[(n - 1) * n + (n - 2)];
    }
    let diag: Vec<f64> = (0..n).map(|r| a[r * n + r]).collect();
    (diag, sub)
}

/// Number of eigenvalues of the tridiagonal matrix below `x`, via the sign
/// changes of the LDLᵀ pivots. A pivot that lands exactly on zero (x hits
/// an eigenvalue of a leading minor) is nudged negative so the count stays
/// monotone in `x`.
fn count_below(d: &[f64], e: &[f64], x: f64) -> usize {
    let tiny = 1e-300;
    let mut q = d[0] - x;
    if q.abs() < tiny {
        q = -tiny;
    }
    let mut count = usize::from(q < 0.0);
    for i in 1..d.len() {
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if q.abs() < tiny {
            q = -tiny;
        }
        count += usize::from(q < 0.0);
    }
    count
}

fn bisect_all(d: &[f64], e: &[f64]) -> Vec<f64> {
    let n = d.len();
    // Gershgorin bounds.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i < n - 1 { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let scale = hi.abs().max(lo.abs()).max(1e-30);
    let tol = 1e-13 * scale;
    (0..n)
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            let mut iter = 0;
            while b - a > tol && iter < 200 {
                let mid = 0.5 * (a + b);
                if count_below(d, e, mid) > k {
                    b = mid;
                } else {
                    a = mid;
                }
                iter += 1;
            }
            0.5 * (a + b)
        })
        .collect()
}
