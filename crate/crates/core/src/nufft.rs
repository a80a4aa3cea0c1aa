//! Nonuniform discrete Fourier transforms on a perturbed uniform grid.
//!
//! Each point `t_j` is split as `2 pi s_j / n + delta_j` with `|delta_j| <= pi / n`.
//! The factor `exp(i k delta_j)` is expanded by Jacobi-Anger in Chebyshev
//! polynomials of the shifted frequency, so a transform costs `K` uniform FFTs.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{bail, Result};
use crate::fft::FftPlan;
use crate::special::bessel_j_orders;

/// Hard limit on the number of expansion terms.
const MAX_TERMS: usize = 40;

/// Direct `O(n m)` evaluation of `sum_k c_k exp(i k t_j)`, `k = 0..n`.
pub fn nudft_direct(coeffs: &[Complex64], points: &[f64]) -> Vec<Complex64> {
    points
        .iter()
        .map(|&t| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, c) in coeffs.iter().enumerate() {
                let (s, co) = (k as f64 * t).sin_cos();
                acc += c * Complex64::new(co, s);
            }
            acc
        })
        .collect()
}

/// Precomputed splitting of a point set for a fixed number of coefficients.
#[derive(Clone, Debug)]
pub struct NufftPlan {
    n: usize,
    eps: f64,
    cells: Vec<usize>,
    /// `g[kappa * m + j]`
    g: Vec<Complex64>,
    terms: usize,
    fft: FftPlan,
}

impl NufftPlan {
    /// Plans transforms between `n` coefficients (frequencies `0..n`) and the
    /// given points. Points are reduced modulo `2 pi`.
    pub fn new(points: &[f64], n: usize, eps: f64) -> Result<Self> {
        if n == 0 {
            bail!(Parameter, "NUFFT needs at least one coefficient");
        }
        if !(eps >= 1e-15) {
            bail!(Parameter, "NUFFT tolerance {eps:e} is below the attainable 1e-15");
        }
        let h = 2.0 * PI / n as f64;
        let mut cells = Vec::with_capacity(points.len());
        let mut deltas = Vec::with_capacity(points.len());
        for &t in points {
            if !t.is_finite() {
                bail!(Domain, "NUFFT point {t} is not finite");
            }
            let t = t.rem_euclid(2.0 * PI);
            let s = (t / h).round();
            let mut delta = t - s * h;
            // offsets at rounding level of t are not resolvable anyway
            if delta.abs() <= 4.0 * f64::EPSILON * t.max(1.0) {
                delta = 0.0;
            }
            cells.push(s as usize % n);
            deltas.push(delta);
        }
        let vmax = deltas.iter().fold(0.0f64, |m, d| m.max(d.abs())) * n as f64 / 2.0;
        let terms = term_count(vmax, eps);
        let c = (n / 2) as f64;
        let m = points.len();
        let mut g = vec![Complex64::new(0.0, 0.0); terms * m];
        let mut jv = vec![0.0; terms];
        for (j, &d) in deltas.iter().enumerate() {
            bessel_j_orders(0.5 * n as f64 * d, &mut jv);
            let shift = Complex64::from_polar(1.0, c * d);
            // eps_kappa i^kappa
            let mut ik = Complex64::new(1.0, 0.0);
            for (kappa, &jk) in jv.iter().enumerate() {
                let e = if kappa == 0 { 1.0 } else { 2.0 };
                g[kappa * m + j] = ik * shift * (e * jk);
                ik *= Complex64::i();
            }
        }
        Ok(Self { n, eps, cells, g, terms, fft: FftPlan::new(n) })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn num_points(&self) -> usize {
        self.cells.len()
    }

    /// Number of expansion terms (uniform FFTs per application).
    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn tolerance(&self) -> f64 {
        self.eps
    }

    /// Uniform grid index assigned to each point.
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    /// `T_kappa(2 (k - c) / n)` for all `k`, kappa by kappa; `None` stands
    /// for the all-ones `T_0`.
    fn for_each_term(&self, mut f: impl FnMut(usize, Option<&[f64]>)) {
        f(0, None);
        if self.terms == 1 {
            return;
        }
        let n = self.n;
        let c = (n / 2) as f64;
        let u: Vec<f64> = (0..n).map(|k| 2.0 * (k as f64 - c) / n as f64).collect();
        let mut prev = vec![1.0; n];
        let mut cur = u.clone();
        for kappa in 1..self.terms {
            f(kappa, Some(&cur));
            for ((p, c), &x) in prev.iter_mut().zip(cur.iter_mut()).zip(&u) {
                let next = 2.0 * x * *c - *p;
                *p = *c;
                *c = next;
            }
        }
    }

    /// Type 2: `v_j = sum_k c_k exp(i k t_j)`.
    pub fn apply(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.cells.len()];
        let mut work = vec![Complex64::new(0.0, 0.0); self.n];
        self.apply_into(coeffs, &mut out, &mut work)?;
        Ok(out)
    }

    /// [`NufftPlan::apply`] into `out`, with `work` of length [`NufftPlan::len`]
    /// as scratch.
    pub fn apply_into(&self, coeffs: &[Complex64], out: &mut [Complex64], work: &mut [Complex64]) -> Result<()> {
        let m = self.cells.len();
        if coeffs.len() != self.n || out.len() != m {
            bail!(Parameter, "expected {} coefficients and {m} outputs, got {} and {}", self.n, coeffs.len(), out.len());
        }
        if work.len() != self.n {
            bail!(Parameter, "scratch length {} differs from {}", work.len(), self.n);
        }
        self.for_each_term(|kappa, h| {
            match h {
                Some(h) => work.iter_mut().zip(coeffs).zip(h).for_each(|((w, c), &hk)| *w = c * hk),
                None => work.copy_from_slice(coeffs),
            }
            self.fft.inverse(work);
            let g = &self.g[kappa * m..(kappa + 1) * m];
            for ((o, &s), gj) in out.iter_mut().zip(&self.cells).zip(g) {
                let v = gj * work[s];
                *o = if kappa == 0 { v } else { *o + v };
            }
        });
        Ok(())
    }

    /// Type 1 (adjoint): `c_k = sum_j v_j exp(-i k t_j)`.
    pub fn apply_adjoint(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        let mut work = vec![Complex64::new(0.0, 0.0); self.n];
        self.apply_adjoint_into(values, &mut out, &mut work)?;
        Ok(out)
    }

    /// [`NufftPlan::apply_adjoint`] into `out`, with `work` of length
    /// [`NufftPlan::len`] as scratch.
    pub fn apply_adjoint_into(&self, values: &[Complex64], out: &mut [Complex64], work: &mut [Complex64]) -> Result<()> {
        let m = self.cells.len();
        if values.len() != m || out.len() != self.n {
            bail!(Parameter, "expected {m} values and {} outputs, got {} and {}", self.n, values.len(), out.len());
        }
        if work.len() != self.n {
            bail!(Parameter, "scratch length {} differs from {}", work.len(), self.n);
        }
        let zero = Complex64::new(0.0, 0.0);
        self.for_each_term(|kappa, h| {
            work.iter_mut().for_each(|w| *w = zero);
            let g = &self.g[kappa * m..(kappa + 1) * m];
            for ((v, &s), gj) in values.iter().zip(&self.cells).zip(g) {
                work[s] += gj.conj() * v;
            }
            self.fft.forward(work);
            match (kappa, h) {
                (0, None) => out.copy_from_slice(work),
                (_, Some(h)) => out.iter_mut().zip(work.iter()).zip(h).for_each(|((o, w), &hk)| *o += w * hk),
                (_, None) => unreachable!("only the first term is all ones"),
            }
        });
        Ok(())
    }
}

/// Smallest `K` with `2 sum_{kappa >= K} |J_kappa(vmax)| <= eps`.
fn term_count(vmax: f64, eps: f64) -> usize {
    if vmax == 0.0 {
        return 1;
    }
    let mut jv = vec![0.0; MAX_TERMS + 8];
    bessel_j_orders(vmax, &mut jv);
    let mut tail = 0.0;
    let mut k = jv.len();
    while k > 1 {
        tail += 2.0 * jv[k - 1].abs();
        if tail > eps {
            break;
        }
        k -= 1;
    }
    k.min(MAX_TERMS)
}
