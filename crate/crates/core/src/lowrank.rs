//! Interpolative decomposition by column-pivoted Householder QR.

use num_complex::Complex64;

use crate::error::{bail, Result};

/// `A ~ A[:, skeleton] * R` with `R` of shape `rank x cols`.
#[derive(Clone, Debug)]
pub struct IdFactorization {
    skeleton: Vec<usize>,
    /// row-major `rank x cols`
    interp: Vec<Complex64>,
    cols: usize,
}

impl IdFactorization {
    pub fn rank(&self) -> usize {
        self.skeleton.len()
    }

    /// Selected column indices, in pivot order.
    pub fn skeleton(&self) -> &[usize] {
        &self.skeleton
    }

    /// Interpolation matrix, row-major `rank x cols`.
    pub fn interp(&self) -> &[Complex64] {
        &self.interp
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row `i` of the interpolation matrix.
    pub fn interp_row(&self, i: usize) -> &[Complex64] {
        &self.interp[i * self.cols..(i + 1) * self.cols]
    }

    /// `A[:, skeleton] * R` for a row-major `rows x cols` matrix `a`.
    pub fn reconstruct(&self, a: &[Complex64], rows: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); rows * self.cols];
        for i in 0..rows {
            let orow = &mut out[i * self.cols..(i + 1) * self.cols];
            for (s, &col) in self.skeleton.iter().enumerate() {
                let x = a[i * self.cols + col];
                for (o, r) in orow.iter_mut().zip(self.interp_row(s)) {
                    *o += x * r;
                }
            }
        }
        out
    }
}

/// Factors the row-major `rows x cols` matrix `a`, truncating the pivoted QR
/// at the first diagonal entry below `eps` times the first.
pub fn interpolative_decomposition(a: &[Complex64], rows: usize, cols: usize, eps: f64) -> Result<IdFactorization> {
    if a.len() != rows * cols {
        bail!(Parameter, "matrix has {} entries, expected {rows} x {cols}", a.len());
    }
    if !(eps > 0.0) {
        bail!(Parameter, "ID tolerance must be positive, got {eps}");
    }
    let zero = Complex64::new(0.0, 0.0);
    // column-major working copy
    let mut w: Vec<Vec<Complex64>> = (0..cols).map(|j| (0..rows).map(|i| a[i * cols + j]).collect()).collect();
    let mut perm: Vec<usize> = (0..cols).collect();
    let steps = rows.min(cols);
    let mut first = 0.0;
    let mut rank = 0;
    for k in 0..steps {
        let (piv, best) = (k..cols)
            .map(|j| (j, w[j][k..].iter().map(|z| z.norm_sqr()).sum::<f64>()))
            .fold((k, -1.0), |acc, (j, s)| if s > acc.1 { (j, s) } else { acc });
        let norm = best.sqrt();
        if k == 0 {
            first = norm;
        }
        if norm == 0.0 || norm < eps * first {
            break;
        }
        w.swap(k, piv);
        perm.swap(k, piv);
        // reflector v = x - alpha e1 with alpha = -phase(x0) |x|
        let x0 = w[k][k];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = w[k][k..].to_vec();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        w[k][k] = alpha;
        w[k][k + 1..].iter_mut().for_each(|z| *z = zero);
        if vv > 0.0 {
            for col in w.iter_mut().skip(k + 1) {
                let dot: Complex64 = v.iter().zip(&col[k..]).map(|(vi, ci)| vi.conj() * ci).sum();
                let f = dot * (2.0 / vv);
                for (ci, vi) in col[k..].iter_mut().zip(&v) {
                    *ci -= f * vi;
                }
            }
        }
        rank = k + 1;
    }
    // R11^{-1} R12 by back substitution, one trailing column at a time
    let mut interp = vec![zero; rank * cols];
    for i in 0..rank {
        interp[i * cols + perm[i]] = Complex64::new(1.0, 0.0);
    }
    for j in rank..cols {
        let mut t = w[j][..rank].to_vec();
        for i in (0..rank).rev() {
            let mut s = t[i];
            for l in i + 1..rank {
                s -= w[l][i] * t[l];
            }
            t[i] = s / w[i][i];
        }
        for (i, ti) in t.into_iter().enumerate() {
            interp[i * cols + perm[j]] = ti;
        }
    }
    Ok(IdFactorization { skeleton: perm[..rank].to_vec(), interp, cols })
}
