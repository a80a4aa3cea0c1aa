//! The orthogonal Jacobi transform: coefficients of an expansion in `P~_k`
//! to scaled values `f(t_j) sqrt(w_j)` at the nodes of the modified rule.
//!
//! Degrees below 28 are applied densely. For the rest,
//! `P~_v(t_j) = Re(H(t_j, v) exp(i v tau_j))`, where `tau_j = (j + 1/2) pi / n`
//! and `H = M exp(i (psi - v tau(t)))` is nonoscillatory; `tau(t)` is the
//! phase of `P~_n` rescaled so that it hits `tau_j` at the nodes. An
//! interpolative decomposition of `H` in `v` turns each skeleton degree into
//! one FFT of length `2n`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chebgrid::{bary_weights, PiecewiseChebGrid, MAX_POINTS};
use crate::error::{bail, Result};
use crate::jacobi_ref::{JacobiParams, NormalizedRecurrence};
use crate::lowrank::interpolative_decomposition;
use crate::nufft::NufftPlan;
use crate::phasefn::PhaseExpansion;
use crate::quadrule::{modified_gauss_jacobi, QuadratureRule};

/// Degrees handled by the dense block.
pub const DENSE_DEGREES: usize = 28;
/// Largest `n` accepted by [`dense_jacobi_matrix`].
pub const MAX_DENSE_N: usize = 4096;
/// Sizes up to this are applied as a full dense matrix.
const SMALL_N: usize = 64;
const MAX_RANK: usize = 512;
const AUDIT_POINTS: usize = 200;
const ID_MARGIN: f64 = 0.25;
/// Skeleton columns processed together; bounds the scratch memory.
const GROUP: usize = 4;

/// Row-major `n x n` matrix with entries `P~_k(t_j) sqrt(w_j)`.
pub fn dense_jacobi_matrix(params: &JacobiParams, n: usize) -> Result<Vec<f64>> {
    if n == 0 || n > MAX_DENSE_N {
        bail!(Parameter, "dense transform needs 1 <= n <= {MAX_DENSE_N}, got {n}");
    }
    let rule = modified_gauss_jacobi(params, n)?;
    Ok(dense_rows(params, &rule, n))
}

/// Rows `P~_k(t_j) sqrt(w_j)` for `k < cols`.
fn dense_rows(params: &JacobiParams, rule: &QuadratureRule, cols: usize) -> Vec<f64> {
    let rec = NormalizedRecurrence::new(params, cols.max(1) - 1);
    let mut out = vec![0.0; rule.n() * cols];
    for ((row, &t), &w) in out.chunks_exact_mut(cols).zip(&rule.nodes).zip(&rule.weights) {
        rec.eval_all(t, row);
        let s = w.sqrt();
        row.iter_mut().for_each(|x| *x *= s);
    }
    out
}

/// Interpolation weights on the interval containing `x`, extrapolating from
/// the first or last interval outside the grid.
fn clamped_weights(grid: &PiecewiseChebGrid, x: f64, out: &mut [f64]) -> usize {
    let j = if x <= grid.lo() {
        0
    } else if x >= grid.hi() {
        grid.num_intervals() - 1
    } else {
        grid.locate(x).expect("point inside grid")
    };
    bary_weights(grid.interval_nodes(j), x, out);
    grid.interval_offset(j)
}

fn interval_of(grid: &PiecewiseChebGrid, x: f64) -> usize {
    if x <= grid.lo() {
        0
    } else if x >= grid.hi() {
        grid.num_intervals() - 1
    } else {
        grid.locate(x).expect("point inside grid")
    }
}

#[derive(Clone, Debug)]
struct LowRank {
    tgrid: PiecewiseChebGrid,
    vgrid: PiecewiseChebGrid,
    /// first global `t` node and number of rows kept
    r0: usize,
    rows: usize,
    /// first global `v` node, first and last `v` interval
    c0: usize,
    cols: usize,
    j0: usize,
    j1: usize,
    skeleton: Vec<f64>,
    /// `H(t_i, v_s)` on the kept rows, `rank x rows`
    hcols: Vec<Complex64>,
    /// interpolation matrix, `rank x cols`
    interp: Vec<Complex64>,
    /// `exp(i v pi / 2n)`
    shift: Vec<Complex64>,
    nufft: NufftPlan,
}

impl LowRank {
    fn rank(&self) -> usize {
        self.skeleton.len()
    }

    /// `u_s(t)` for the skeleton indices in `group`.
    fn u_at(&self, t: f64, group: &[usize], out: &mut [Complex64]) {
        let mut w = [0.0; MAX_POINTS];
        let off = clamped_weights(&self.tgrid, t, &mut w) - self.r0;
        self.u_from_weights(off, &w, group, out);
    }

    fn u_from_weights(&self, off: usize, w: &[f64], group: &[usize], out: &mut [Complex64]) {
        let k = self.tgrid.points_per_interval();
        for (o, &s) in out.iter_mut().zip(group) {
            let col = &self.hcols[s * self.rows + off..][..k];
            *o = col.iter().zip(&w[..k]).map(|(h, wi)| h * wi).sum();
        }
    }

    /// Calls `f(j, u_s(t_j) for s in group)` for increasing nodes `t_j`.
    fn for_each_node(&self, nodes: &[f64], group: &[usize], mut f: impl FnMut(usize, &[Complex64])) {
        let mut w = [0.0; MAX_POINTS];
        let mut vals = [Complex64::new(0.0, 0.0); GROUP];
        let bp = self.tgrid.breakpoints();
        let last = self.tgrid.num_intervals() - 1;
        let mut i = interval_of(&self.tgrid, nodes[0]);
        for (j, &t) in nodes.iter().enumerate() {
            while i < last && t > bp[i + 1] {
                i += 1;
            }
            bary_weights(self.tgrid.interval_nodes(i), t, &mut w);
            self.u_from_weights(self.tgrid.interval_offset(i) - self.r0, &w, group, &mut vals);
            f(j, &vals[..group.len()]);
        }
    }

    /// Calls `f(v, R_s(v) for s in group)` for every degree `28 <= v < n`.
    fn for_each_degree(&self, n: usize, group: &[usize], mut f: impl FnMut(usize, &[Complex64])) {
        let mut w = [0.0; MAX_POINTS];
        let mut vals = [Complex64::new(0.0, 0.0); GROUP];
        let k = self.vgrid.points_per_interval();
        let bp = self.vgrid.breakpoints();
        let mut j = self.j0;
        for v in DENSE_DEGREES..n {
            let x = v as f64;
            while j < self.j1 && x > bp[j + 1] {
                j += 1;
            }
            bary_weights(self.vgrid.interval_nodes(j), x, &mut w);
            let off = self.vgrid.interval_offset(j) - self.c0;
            for (o, &s) in vals.iter_mut().zip(group) {
                let row = &self.interp[s * self.cols + off..][..k];
                *o = row.iter().zip(&w[..k]).map(|(r, wi)| r * wi).sum();
            }
            f(v, &vals[..group.len()]);
        }
    }
}

/// A precomputed fast transform of size `n`.
#[derive(Clone, Debug)]
pub struct TransformPlan {
    params: JacobiParams,
    n: usize,
    eps: f64,
    rule: QuadratureRule,
    sqrt_w: Vec<f64>,
    /// `n x dense_cols`, row-major
    dense: Vec<f64>,
    dense_cols: usize,
    lowrank: Option<LowRank>,
    audit_error: f64,
}

impl TransformPlan {
    /// Builds the plan for degrees `0..n` from an expansion covering them.
    pub fn new(exp: &PhaseExpansion, n: usize, eps: f64) -> Result<Self> {
        let params = *exp.params();
        if n == 0 {
            bail!(Parameter, "transform size must be positive");
        }
        if !(1e-14..=1e-6).contains(&eps) {
            bail!(Parameter, "tolerance {eps:e} outside [1e-14, 1e-6]");
        }
        if n > exp.nmax() + 1 {
            bail!(Parameter, "n = {n} needs an expansion with nmax >= {}, have {}", n - 1, exp.nmax());
        }
        let rule = modified_gauss_jacobi(&params, n)?;
        let sqrt_w = rule.weights.iter().map(|w| w.sqrt()).collect();
        let dense_cols = if n <= SMALL_N { n } else { DENSE_DEGREES };
        let dense = dense_rows(&params, &rule, dense_cols);
        let mut plan = Self { params, n, eps, rule, sqrt_w, dense, dense_cols, lowrank: None, audit_error: 0.0 };
        if n > SMALL_N {
            let lr = build_lowrank(exp, &plan.rule, eps)?;
            plan.lowrank = Some(lr);
            plan.audit_error = plan.audit(exp)?;
        }
        Ok(plan)
    }

    pub fn params(&self) -> &JacobiParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tolerance(&self) -> f64 {
        self.eps
    }

    /// The modified Gauss-Jacobi rule whose nodes the samples live on.
    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// Number of skeleton degrees (0 for the dense path).
    pub fn rank(&self) -> usize {
        self.lowrank.as_ref().map_or(0, LowRank::rank)
    }

    /// Skeleton degrees chosen by the decomposition.
    pub fn skeleton_degrees(&self) -> &[f64] {
        self.lowrank.as_ref().map_or(&[], |lr| &lr.skeleton)
    }

    /// Relative reconstruction error of the low-rank factor on a random
    /// sample of entries, measured at construction.
    pub fn audit_error(&self) -> f64 {
        self.audit_error
    }

    fn audit(&self, exp: &PhaseExpansion) -> Result<f64> {
        let lr = self.lowrank.as_ref().expect("low-rank part");
        let n = self.n;
        let (tgrid, vgrid) = (exp.tgrid(), exp.vgrid());
        let (kt, kv) = (tgrid.points_per_interval(), vgrid.points_per_interval());
        let contract = |t: f64, v: f64| {
            let mut wt = [0.0; MAX_POINTS];
            let mut wv = [0.0; MAX_POINTS];
            let to = clamped_weights(tgrid, t, &mut wt);
            let vo = clamped_weights(vgrid, v, &mut wv);
            let mut psi = 0.0;
            let mut amp = 0.0;
            for i in 0..kt {
                for j in 0..kv {
                    let w = wt[i] * wv[j];
                    psi += w * exp.reduced_psi_table().at(to + i, vo + j);
                    amp += w * exp.amp_table().at(to + i, vo + j);
                }
            }
            (psi, amp)
        };
        let nf = n as f64;
        let t0 = self.rule.nodes[0];
        let k_lo = first_zero_index(self.params.p(nf) * t0 + contract(t0, nf).0);
        let c = self.params.p(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let all: Vec<usize> = (0..lr.rank()).collect();
        let mut u = vec![Complex64::new(0.0, 0.0); lr.rank()];
        let (mut worst, mut scale) = (0.0f64, 0.0f64);
        for _ in 0..AUDIT_POINTS {
            let j = rng.random_range(0..n);
            let v = rng.random_range(DENSE_DEGREES..n);
            let t = self.rule.nodes[j];
            let (rho, amp) = contract(t, v as f64);
            let vf = v as f64;
            let want = Complex64::from_polar(amp, reduced_phase(c, vf, nf, t, rho, contract(t, nf).0, k_lo));
            let mut got = Complex64::new(0.0, 0.0);
            for chunk in all.chunks(GROUP) {
                lr.u_at(t, chunk, &mut u[..chunk.len()]);
                let mut r = [Complex64::new(0.0, 0.0); GROUP];
                // R_s(v) for this chunk
                let mut w = [0.0; MAX_POINTS];
                let off = clamped_weights(&lr.vgrid, v as f64, &mut w) - lr.c0;
                for (ri, &s) in r.iter_mut().zip(chunk) {
                    *ri = lr.interp[s * lr.cols + off..][..kv].iter().zip(&w[..kv]).map(|(x, wi)| x * wi).sum();
                }
                got += u[..chunk.len()].iter().zip(&r).map(|(a, b)| a * b).sum::<Complex64>();
            }
            worst = worst.max((got - want).norm());
            scale = scale.max(want.norm());
        }
        Ok(worst / scale)
    }

    /// `f_j sqrt(w_j) = sum_k alpha_k P~_k(t_j) sqrt(w_j)`.
    pub fn forward(&self, alpha: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if alpha.len() != n {
            bail!(Parameter, "expected {n} coefficients, got {}", alpha.len());
        }
        let dc = self.dense_cols;
        let mut out: Vec<f64> = self.dense.chunks_exact(dc).map(|row| row.iter().zip(alpha).map(|(d, a)| d * a).sum()).collect();
        let Some(lr) = &self.lowrank else { return Ok(out) };
        let zero = Complex64::new(0.0, 0.0);
        let g = GROUP.min(lr.rank());
        let mut acc = vec![zero; n];
        let mut bufs = vec![vec![zero; 2 * n]; g];
        let mut sums = vec![vec![zero; n]; g];
        let mut work = vec![zero; 2 * n];
        let skel: Vec<usize> = (0..lr.rank()).collect();
        for group in skel.chunks(GROUP) {
            lr.for_each_degree(n, group, |v, r| {
                let x = lr.shift[v] * alpha[v];
                for (b, ri) in bufs.iter_mut().zip(r) {
                    b[v] = ri * x;
                }
            });
            for (b, s) in bufs.iter().zip(sums.iter_mut()).take(group.len()) {
                lr.nufft.apply_into(b, s, &mut work)?;
            }
            lr.for_each_node(&self.rule.nodes, group, |j, u| {
                acc[j] += u.iter().zip(&sums).map(|(ug, s)| ug * s[j]).sum::<Complex64>();
            });
        }
        for ((o, a), s) in out.iter_mut().zip(&acc).zip(&self.sqrt_w) {
            *o += s * a.re;
        }
        Ok(out)
    }

    /// The transpose (and inverse) of [`TransformPlan::forward`].
    pub fn inverse(&self, samples: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if samples.len() != n {
            bail!(Parameter, "expected {n} samples, got {}", samples.len());
        }
        let dc = self.dense_cols;
        let mut out = vec![0.0; n];
        for (row, &f) in self.dense.chunks_exact(dc).zip(samples) {
            for (o, d) in out.iter_mut().zip(row) {
                *o += d * f;
            }
        }
        let Some(lr) = &self.lowrank else { return Ok(out) };
        let zero = Complex64::new(0.0, 0.0);
        let g = GROUP.min(lr.rank());
        let mut ys = vec![vec![zero; n]; g];
        let mut adj = vec![vec![zero; 2 * n]; g];
        let mut work = vec![zero; 2 * n];
        let skel: Vec<usize> = (0..lr.rank()).collect();
        for group in skel.chunks(GROUP) {
            lr.for_each_node(&self.rule.nodes, group, |j, u| {
                let x = self.sqrt_w[j] * samples[j];
                for (y, ug) in ys.iter_mut().zip(u) {
                    y[j] = (ug * x).conj();
                }
            });
            for (y, a) in ys.iter().zip(adj.iter_mut()).take(group.len()) {
                lr.nufft.apply_adjoint_into(y, a, &mut work)?;
            }
            lr.for_each_degree(n, group, |v, r| {
                let mut s = 0.0;
                for (ri, a) in r.iter().zip(&adj) {
                    s += ((ri * lr.shift[v]).conj() * a[v]).re;
                }
                out[v] += s;
            });
        }
        Ok(out)
    }
}

/// `k` with `psi_n(t_1) = pi/2 + k pi`.
fn first_zero_index(psi_first: f64) -> f64 {
    ((psi_first - 0.5 * PI) / PI).round()
}

/// `psi(t, v) - v tau(t)` from reduced phases `rho = psi - p t`, where
/// `tau = (psi(t, n) - k pi) / n` and `c = p - v`.
fn reduced_phase(c: f64, v: f64, n: f64, t: f64, rho: f64, rho_n: f64, k: f64) -> f64 {
    c * (1.0 - v / n) * t + rho - v / n * (rho_n - k * PI)
}

fn build_lowrank(exp: &PhaseExpansion, rule: &QuadratureRule, eps: f64) -> Result<LowRank> {
    let n = rule.n();
    let tgrid = exp.tgrid().clone();
    let vgrid = exp.vgrid().clone();
    let (kt, kv) = (tgrid.points_per_interval(), vgrid.points_per_interval());
    let nv_all = vgrid.len();

    // reduced phase of P~_n on the t nodes
    let nf = n as f64;
    let mut wv = [0.0; MAX_POINTS];
    let vo = clamped_weights(&vgrid, nf, &mut wv);
    let rho_n = exp.reduced_psi_table().column_at(vo, &wv[..kv]);
    let t_first = rule.nodes[0];
    let first = {
        let mut wt = [0.0; MAX_POINTS];
        let to = clamped_weights(&tgrid, t_first, &mut wt);
        rho_n[to..to + kt].iter().zip(&wt[..kt]).map(|(p, w)| p * w).sum::<f64>()
    };
    let params = exp.params();
    let k_lo = first_zero_index(params.p(nf) * t_first + first);
    let c = params.p(0.0);

    let i0 = interval_of(&tgrid, t_first);
    let i1 = interval_of(&tgrid, rule.nodes[n - 1]);
    let r0 = tgrid.interval_offset(i0);
    let rows = tgrid.interval_offset(i1) + kt - r0;
    let j0 = interval_of(&vgrid, DENSE_DEGREES as f64);
    let j1 = interval_of(&vgrid, (n - 1) as f64);
    let c0 = vgrid.interval_offset(j0);
    let cols = vgrid.interval_offset(j1) + kv - c0;

    let mut a = Vec::with_capacity(rows * cols);
    for i in r0..r0 + rows {
        let t = tgrid.nodes()[i];
        for col in c0..c0 + cols {
            let v = vgrid.nodes()[col];
            let m = exp.amp_table().at(i, col);
            a.push(Complex64::from_polar(m, reduced_phase(c, v, nf, t, exp.reduced_psi_table().at(i, col), rho_n[i], k_lo)));
        }
    }
    debug_assert!(c0 + cols <= nv_all);
    // the decomposition controls column norms; entries need a little margin
    let id = interpolative_decomposition(&a, rows, cols, ID_MARGIN * eps)?;
    let rank = id.rank();
    if rank > MAX_RANK {
        bail!(Accuracy, "transform rank {rank} exceeds {MAX_RANK}; parameters outside the supported range");
    }
    let mut hcols = Vec::with_capacity(rank * rows);
    for &s in id.skeleton() {
        hcols.extend((0..rows).map(|i| a[i * cols + s]));
    }
    let skeleton = id.skeleton().iter().map(|&s| vgrid.nodes()[c0 + s]).collect();
    let shift = (0..n).map(|v| Complex64::from_polar(1.0, v as f64 * PI / (2 * n) as f64)).collect();
    let points: Vec<f64> = (0..n).map(|j| PI * j as f64 / n as f64).collect();
    let nufft = NufftPlan::new(&points, 2 * n, 1e-15)?;
    debug_assert_eq!(nufft.terms(), 1);
    Ok(LowRank { tgrid, vgrid, r0, rows, c0, cols, j0, j1, skeleton, hcols, interp: id.interp().to_vec(), shift, nufft })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::StandardNormal;

    fn matvec(a: &[f64], x: &[f64]) -> Vec<f64> {
        a.chunks_exact(x.len()).map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
    }

    fn matvec_t(a: &[f64], y: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (row, &yj) in a.chunks_exact(n).zip(y) {
            for (o, p) in out.iter_mut().zip(row) {
                *o += p * yj;
            }
        }
        out
    }

    fn norm(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn dense_matrix_basics() {
        let p = JacobiParams::new(-0.25, 0.0).unwrap();
        let one = dense_jacobi_matrix(&p, 1).unwrap();
        assert!((one[0].abs() - 1.0).abs() < 1e-14);
        assert!(dense_jacobi_matrix(&p, 0).is_err());
        assert!(dense_jacobi_matrix(&p, MAX_DENSE_N + 1).is_err());

        let n = 64;
        let j = dense_jacobi_matrix(&p, n).unwrap();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let dot: f64 = (0..n).map(|r| j[r * n + a] * j[r * n + b]).sum();
                worst = worst.max((dot - if a == b { 1.0 } else { 0.0 }).abs());
            }
        }
        assert!(worst <= 1e-13, "{worst:e}");
    }

    #[test]
    fn chebyshev_closed_form() {
        // a = b = -1/2: P~_0 = 1/sqrt(pi), P~_k = sqrt(2/pi) cos(k t), nodes (2j-1) pi / 2n
        let p = JacobiParams::new(-0.5, -0.5).unwrap();
        let n = 32;
        let j = dense_jacobi_matrix(&p, n).unwrap();
        for r in 0..n {
            let t = (2 * r + 1) as f64 * PI / (2 * n) as f64;
            for k in 0..n {
                let want = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() * (k as f64 * t).cos() };
                assert!((j[r * n + k] - want).abs() < 1e-13, "r={r} k={k}");
            }
        }
    }

    #[test]
    fn chebyshev_rank_is_tiny() {
        let p = JacobiParams::new(-0.5, -0.5).unwrap();
        let exp = PhaseExpansion::build(&p, 2048).unwrap();
        let plan = TransformPlan::new(&exp, 2048, 1e-12).unwrap();
        assert!(plan.rank() <= 2, "rank {}", plan.rank());
    }

    #[test]
    fn matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (a, b) in [(-0.25, 0.0), (0.25, -1.0 / 3.0)] {
            let p = JacobiParams::new(a, b).unwrap();
            let exp = PhaseExpansion::build(&p, 1024).unwrap();
            for n in [30, 64, 65, 100, 512, 1024, 1025] {
                let plan = TransformPlan::new(&exp, n, 1e-12).unwrap();
                assert!(plan.audit_error() <= 1e-11, "audit {:e}", plan.audit_error());
                let j = dense_jacobi_matrix(&p, n).unwrap();
                let x = gaussian(&mut rng, n);
                let f = plan.forward(&x).unwrap();
                let err = max_diff(&f, &matvec(&j, &x));
                assert!(err <= 1e-11 * norm(&x), "forward n={n} a={a} err={err:e}");
                let y = gaussian(&mut rng, n);
                let g = plan.inverse(&y).unwrap();
                let err = max_diff(&g, &matvec_t(&j, &y, n));
                assert!(err <= 1e-11 * norm(&y), "inverse n={n} a={a} err={err:e}");
            }
        }
    }

    #[test]
    fn orthogonality_and_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let p = JacobiParams::new(-0.25, 0.0).unwrap();
        let n = 1024;
        let exp = PhaseExpansion::build(&p, n).unwrap();
        let plan = TransformPlan::new(&exp, n, 1e-12).unwrap();
        let col = |k: usize| {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            plan.forward(&e).unwrap()
        };
        for _ in 0..20 {
            let (i, k) = (rng.random_range(0..n), rng.random_range(0..n));
            let dot: f64 = col(i).iter().zip(&col(k)).map(|(x, y)| x * y).sum();
            let want = if i == k { 1.0 } else { 0.0 };
            assert!((dot - want).abs() <= 1e-11, "({i},{k}) {dot}");
        }
        let x = gaussian(&mut rng, n);
        let y = gaussian(&mut rng, n);
        let lhs: f64 = plan.forward(&x).unwrap().iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(&plan.inverse(&y).unwrap()).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() <= 1e-12 * norm(&x) * norm(&y));
        let fx = plan.forward(&x).unwrap();
        assert!((norm(&fx) / norm(&x) - 1.0).abs() <= 1e-11);
        // e_0 gives P~_0 sqrt(w)
        let rec = NormalizedRecurrence::new(&p, 0);
        let mut v = [0.0];
        for (j, f) in col(0).iter().enumerate() {
            rec.eval_all(plan.rule().nodes[j], &mut v);
            assert!((f - v[0] * plan.rule().weights[j].sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let p = JacobiParams::new(0.1, 0.2).unwrap();
        let exp = PhaseExpansion::build(&p, 200).unwrap();
        assert!(TransformPlan::new(&exp, 0, 1e-12).is_err());
        assert!(TransformPlan::new(&exp, 202, 1e-12).is_err());
        assert!(TransformPlan::new(&exp, 100, 1e-15).is_err());
        assert!(TransformPlan::new(&exp, 100, 1e-5).is_err());
        let plan = TransformPlan::new(&exp, 201, 1e-12).unwrap();
        assert!(plan.forward(&[0.0; 200]).is_err());
        assert!(plan.inverse(&[0.0; 202]).is_err());
    }
}
