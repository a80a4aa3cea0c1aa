//! Small dense linear algebra on row-major `f64` matrices.

use crate::error::{bail, Result};

/// `C = A B` with `A` of shape `m x k` and `B` of shape `k x n`.
pub(crate) fn matmul(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * n];
    for i in 0..m {
        for l in 0..k {
            let x = a[i * k + l];
            if x == 0.0 {
                continue;
            }
            let row = &b[l * n..(l + 1) * n];
            for (cj, &bj) in c[i * n..(i + 1) * n].iter_mut().zip(row) {
                *cj += x * bj;
            }
        }
    }
    c
}

/// Solves `A x = b` in place by Gaussian elimination with partial pivoting.
/// `a` (`n x n`) is overwritten by its factors and `b` by the solution.
pub(crate) fn lu_solve(a: &mut [f64], n: usize, b: &mut [f64]) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for r in col + 1..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 || !best.is_finite() {
            bail!(Internal, "singular or non-finite collocation matrix");
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            a[r * n + col] = f;
            for j in col + 1..n {
                a[r * n + j] -= f * a[col * n + j];
            }
            b[r] -= f * b[col];
        }
    }
    for r in (0..n).rev() {
        let mut s = b[r];
        for j in r + 1..n {
            s -= a[r * n + j] * b[j];
        }
        b[r] = s / a[r * n + r];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_system() {
        let mut a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let x = [1.0, -2.0, 0.5];
        let orig = a.clone();
        let mut b = matmul(&orig, &x, 3, 3, 1);
        lu_solve(&mut a, 3, &mut b).unwrap();
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-15);
        }
        let mut s = vec![1.0, 2.0, 2.0, 4.0];
        assert!(lu_solve(&mut s, 2, &mut [1.0, 1.0]).is_err());
    }
}
