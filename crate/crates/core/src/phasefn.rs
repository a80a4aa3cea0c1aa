//! Nonoscillatory phase and amplitude functions for the modified Jacobi
//! equation `y'' + q_v(t) y = 0`.
//!
//! For each degree `v >= 27` there are `psi(t, v)` and `M(t, v) > 0` with
//! `P~_v(t) = M cos(psi)` and `Q~_v(t) = M sin(psi)`. `N = M^2` solves the
//! third-order linear equation `N''' + 4 q N' + 2 q' N = 0`, and
//! `psi' = W / N` with the Wronskian `W = 2p/pi`.
//!
//! For large degrees `N` is close to `2/pi` and `psi` close to `p t`, so both
//! are computed through their deviations: `N = (2/pi)(1 + eta)` and the
//! reduced phase `psi - p t`. This keeps the phase free of rounding noise
//! proportional to `p`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::chebgrid::{cell_weights, BivariateChebTable, Lookup, PiecewiseChebGrid};
use crate::error::{bail, Error, Result};
use crate::jacobi_ref::{self, JacobiParams, ASYMPTOTIC_MIN_DEGREE};
use crate::linalg::{lu_solve, matmul};

/// Points per interval of the `t` grid.
pub const T_POINTS: usize = 16;
/// Points per interval of the `v` grid.
pub const V_POINTS: usize = 24;

/// The coefficient `q_v(t)` of the modified Jacobi equation for one degree.
#[derive(Clone, Copy, Debug)]
pub struct CoefficientQ {
    params: JacobiParams,
    nu: f64,
}

impl CoefficientQ {
    pub fn new(params: &JacobiParams, nu: f64) -> Self {
        Self { params: *params, nu }
    }

    /// `p = v + (a + b + 1) / 2`.
    pub fn p(&self) -> f64 {
        self.params.p(self.nu)
    }

    /// Wronskian `2p/pi` of the pair `(P~, Q~)`.
    pub fn wronskian(&self) -> f64 {
        2.0 * self.p() / PI
    }

    /// `(q(t), q'(t))`, without checking the domain.
    #[inline]
    pub fn eval(&self, t: f64) -> (f64, f64) {
        jacobi_ref::ode_coefficient(&self.params, self.nu, t)
    }
}

/// `(q_v(t), q_v'(t))` for `0 < t < pi`.
pub fn q_coefficient(params: &JacobiParams, v: f64, t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0 && t < PI) {
        bail!(Domain, "q is singular at t = {t}; need 0 < t < pi");
    }
    Ok(CoefficientQ::new(params, v).eval(t))
}

/// Number of dyadic levels `L`: the least integer with `(pi/2) 2^(1-L) <= 1/nmax`.
fn dyadic_levels(nmax: usize) -> usize {
    let mut l = 1;
    while FRAC_PI_2 * 2f64.powi(1 - l as i32) > 1.0 / nmax as f64 {
        l += 1;
    }
    l
}

/// The `t` grid for degrees up to `nmax`: breakpoints `(pi/2) 2^(i-L)`,
/// `i = 1..L`, mirrored about `pi/2`, with 16 points per interval.
pub fn t_grid(nmax: usize) -> Result<PiecewiseChebGrid> {
    if nmax == 0 {
        bail!(Parameter, "nmax must be positive");
    }
    let l = dyadic_levels(nmax);
    let mut bp: Vec<f64> = (1..=l).map(|i| FRAC_PI_2 * 2f64.powi(i as i32 - l as i32)).collect();
    let mirror: Vec<f64> = bp.iter().rev().skip(1).map(|a| PI - a).collect();
    bp.extend(mirror);
    PiecewiseChebGrid::with_lookup(bp, T_POINTS, Lookup::SymmetricDyadic)
}

/// Breakpoints `27, 81, 243, ...` capped at `nmax`.
pub fn v_breakpoints(nmax: usize) -> Vec<f64> {
    let mut bp = Vec::new();
    let mut x = 27.0_f64;
    let top = nmax as f64;
    while x < top {
        bp.push(x);
        x *= 3.0;
    }
    bp.push(top);
    bp
}

/// The `v` grid on `[27, nmax]` with 24 points per interval.
pub fn v_grid(nmax: usize) -> Result<PiecewiseChebGrid> {
    PiecewiseChebGrid::with_lookup(v_breakpoints(nmax), V_POINTS, Lookup::Geometric { ratio: 3.0 })
}

/// Both grids for an expansion covering degrees `27..=nmax`.
pub fn build_grids(nmax: usize) -> Result<(PiecewiseChebGrid, PiecewiseChebGrid)> {
    if (nmax as f64) <= ASYMPTOTIC_MIN_DEGREE {
        bail!(Parameter, "nmax must exceed 27, got {nmax}");
    }
    Ok((t_grid(nmax)?, v_grid(nmax)?))
}

/// Integration matrices on the reference interval, anchored at either end,
/// and their second and third powers.
struct PanelOperators {
    k: usize,
    left: [Vec<f64>; 3],
    right: [Vec<f64>; 3],
}

impl PanelOperators {
    fn new(grid: &PiecewiseChebGrid) -> Self {
        let k = grid.points_per_interval();
        let s = grid.reference_integration().to_vec();
        // integral from the right end: subtract the last row
        let mut r = s.clone();
        for i in 0..k {
            for j in 0..k {
                r[i * k + j] -= s[(k - 1) * k + j];
            }
        }
        let powers = |m: Vec<f64>| {
            let m2 = matmul(&m, &m, k, k, k);
            let m3 = matmul(&m2, &m, k, k, k);
            [m, m2, m3]
        };
        Self { k, left: powers(s), right: powers(r) }
    }
}

/// Values of `eta`, `eta'`, `eta''` at the nodes of one interval.
struct PanelSolution {
    y: Vec<f64>,
    dy: Vec<f64>,
    ddy: Vec<f64>,
}

/// Solves `eta''' + 4 q eta' + 2 q' eta = -2 q'` on one interval from data at
/// one end, taking the unknown to be `eta'''` at the nodes.
fn solve_panel(ops: &PanelOperators, coef: &CoefficientQ, nodes: &[f64], from_left: bool, init: [f64; 3]) -> Result<PanelSolution> {
    let k = ops.k;
    let (lo, hi) = (nodes[0], nodes[k - 1]);
    let h = 0.5 * (hi - lo);
    let anchor = if from_left { lo } else { hi };
    let [s1, s2, s3] = if from_left { &ops.left } else { &ops.right };
    let (h2, h3) = (h * h, h * h * h);
    let [n0, n1, n2] = init;
    let mut a = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    let mut tau = vec![0.0; k];
    for i in 0..k {
        let (q, dq) = coef.eval(nodes[i]);
        let ti = nodes[i] - anchor;
        tau[i] = ti;
        for j in 0..k {
            a[i * k + j] = 4.0 * q * h2 * s2[i * k + j] + 2.0 * dq * h3 * s3[i * k + j];
        }
        a[i * k + i] += 1.0;
        rhs[i] = -(4.0 * q * (n1 + n2 * ti) + 2.0 * dq * (1.0 + n0 + n1 * ti + 0.5 * n2 * ti * ti));
    }
    lu_solve(&mut a, k, &mut rhs)?;
    let sigma = rhs;
    let apply = |m: &[f64], scale: f64| -> Vec<f64> { (0..k).map(|i| scale * (0..k).map(|j| m[i * k + j] * sigma[j]).sum::<f64>()).collect() };
    let i1 = apply(s1, h);
    let i2 = apply(s2, h2);
    let i3 = apply(s3, h3);
    let ddy = (0..k).map(|i| n2 + i1[i]).collect();
    let dy = (0..k).map(|i| n1 + n2 * tau[i] + i2[i]).collect();
    let y = (0..k).map(|i| n0 + n1 * tau[i] + 0.5 * n2 * tau[i] * tau[i] + i3[i]).collect();
    Ok(PanelSolution { y, dy, ddy })
}

/// Largest ratio of the two trailing Chebyshev coefficients to the leading
/// magnitude, over all intervals; a measure of how well `vals` is resolved.
fn resolution_defect(grid: &PiecewiseChebGrid, vals: &[f64]) -> f64 {
    let k = grid.points_per_interval();
    let km = (k - 1) as f64;
    let mut worst: f64 = 0.0;
    for j in 0..grid.num_intervals() {
        let off = grid.interval_offset(j);
        let f = &vals[off..off + k];
        let mut coefs = vec![0.0; k];
        for (m, c) in coefs.iter_mut().enumerate() {
            let mut s = 0.0;
            for (i, &fi) in f.iter().enumerate() {
                let w = if i == 0 || i == k - 1 { 0.5 } else { 1.0 };
                s += w * fi * (PI * (m * i) as f64 / km).cos();
            }
            *c = 2.0 * s / km;
        }
        let scale = coefs.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
        let tail = coefs[k - 1].abs().max(coefs[k - 2].abs());
        if scale > 0.0 {
            worst = worst.max(tail / scale);
        }
    }
    worst
}

/// Largest acceptable [`resolution_defect`] of an amplitude solve.
const RESOLUTION_TOLERANCE: f64 = 1e-10;

/// Values of `N = M^2` and `N'` at every node of `tgrid` for degree `gamma`.
/// The grid must have `pi/2` as a breakpoint.
pub fn solve_amplitude_ode(params: &JacobiParams, gamma: f64, tgrid: &PiecewiseChebGrid) -> Result<(Vec<f64>, Vec<f64>)> {
    let (eta, deta) = amplitude_solution(params, gamma, tgrid, &PanelOperators::new(tgrid))?;
    let s = 2.0 / PI;
    Ok((eta.iter().map(|e| s * (1.0 + e)).collect(), deta.iter().map(|d| s * d).collect()))
}

/// Degree from which the midpoint data comes from the WKB expansion.
const WKB_MIN_DEGREE: f64 = 1000.0;

/// `eta`, `eta'`, `eta''` at `pi/2` from the midpoint values of `P~`, `Q~`.
fn series_midpoint_data(params: &JacobiParams, gamma: f64, coef: &CoefficientQ) -> Result<[f64; 3]> {
    let pq = jacobi_ref::pq_at_midpoint(params, gamma)?;
    let (dp, dq) = (pq.dp.unwrap_or(0.0), pq.dq.unwrap_or(0.0));
    let (q0, _) = coef.eval(FRAC_PI_2);
    // the common scale of P~ and Q~ is the least accurate part of the
    // midpoint values at high degree; fix it with the exact Wronskian
    let scale = coef.wronskian() / (pq.p * dq - dp * pq.q);
    let n0 = pq.p * pq.p + pq.q * pq.q;
    let init = [n0, 2.0 * (pq.p * dp + pq.q * dq), 2.0 * (dp * dp + dq * dq) - 2.0 * q0 * n0].map(|x| x * scale * FRAC_PI_2);
    Ok([init[0] - 1.0, init[1], init[2]])
}

/// `eta`, `eta'`, `eta''` at `pi/2` from the fixed point of
/// `alpha^2 = q - alpha''/(2 alpha) + 3/4 (alpha'/alpha)^2`, `alpha = p/(1 + eta)`.
///
/// Written in terms of `u = alpha^2 - p^2` nothing large cancels, so `eta`
/// comes out with full relative accuracy and varies smoothly with degree.
/// The product `P~^2 + Q~^2` loses this at high degree.
fn wkb_midpoint_data(params: &JacobiParams, gamma: f64) -> Result<[f64; 3]> {
    let p = params.p(gamma);
    let p2 = p * p;
    let grid = PiecewiseChebGrid::new(vec![FRAC_PI_2 - 0.5, FRAC_PI_2, FRAC_PI_2 + 0.5], 24)?;
    let ka = 0.25 * (0.25 - params.a() * params.a());
    let kb = 0.25 * (0.25 - params.b() * params.b());
    let r: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&t| {
            let (s, c) = (0.5 * t).sin_cos();
            ka / (s * s) + kb / (c * c)
        })
        .collect();
    let mut u = r.clone();
    for _ in 0..4 {
        let du = grid.differentiate(&u);
        let ddu = grid.differentiate(&du);
        u = (0..u.len())
            .map(|i| {
                let al2 = p2 + u[i];
                r[i] - ddu[i] / (4.0 * al2) + 5.0 * du[i] * du[i] / (16.0 * al2 * al2)
            })
            .collect();
    }
    let eta: Vec<f64> = u
        .iter()
        .map(|&x| {
            let al = (p2 + x).sqrt();
            -x / (al * (p + al))
        })
        .collect();
    let deta = grid.differentiate(&eta);
    let ddeta = grid.differentiate(&deta);
    Ok([grid.eval(&eta, FRAC_PI_2)?, grid.eval(&deta, FRAC_PI_2)?, grid.eval(&ddeta, FRAC_PI_2)?])
}

/// `eta` and `eta'` with `N = (2/pi)(1 + eta)`.
fn amplitude_solution(
    params: &JacobiParams,
    gamma: f64,
    tgrid: &PiecewiseChebGrid,
    ops: &PanelOperators,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if gamma < ASYMPTOTIC_MIN_DEGREE {
        bail!(Domain, "amplitude equation is solved only for degrees >= 27, got {gamma}");
    }
    let bp = tgrid.breakpoints();
    let Some(mid) = bp.iter().position(|&b| b == FRAC_PI_2) else {
        bail!(Parameter, "t grid must have pi/2 as a breakpoint");
    };
    let coef = CoefficientQ::new(params, gamma);
    let init = if gamma >= WKB_MIN_DEGREE { wkb_midpoint_data(params, gamma)? } else { series_midpoint_data(params, gamma, &coef)? };

    let len = tgrid.len();
    let k = tgrid.points_per_interval();
    let mut y = vec![0.0; len];
    let mut dy = vec![0.0; len];
    let mut store = |j: usize, sol: &PanelSolution| {
        let off = tgrid.interval_offset(j);
        y[off..off + k].copy_from_slice(&sol.y);
        dy[off..off + k].copy_from_slice(&sol.dy);
    };
    let mut state = init;
    for j in mid..tgrid.num_intervals() {
        let sol = solve_panel(ops, &coef, tgrid.interval_nodes(j), true, state)?;
        state = [sol.y[k - 1], sol.dy[k - 1], sol.ddy[k - 1]];
        store(j, &sol);
    }
    let mut state = init;
    for j in (0..mid).rev() {
        let sol = solve_panel(ops, &coef, tgrid.interval_nodes(j), false, state)?;
        state = [sol.y[0], sol.dy[0], sol.ddy[0]];
        store(j, &sol);
    }
    let one_plus: Vec<f64> = y.iter().map(|e| 1.0 + e).collect();
    if one_plus.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        bail!(Accuracy, "amplitude solve for degree {gamma} produced a non-positive value");
    }
    let defect = resolution_defect(tgrid, &one_plus);
    if defect > RESOLUTION_TOLERANCE {
        bail!(Accuracy, "amplitude solve for degree {gamma} is under-resolved (defect {defect:e})");
    }
    Ok((y, dy))
}

/// Phase and amplitude for a single degree, tabulated on a `t` grid.
#[derive(Clone, Debug)]
pub struct PhaseColumn {
    nu: f64,
    p: f64,
    grid: PiecewiseChebGrid,
    psi: Vec<f64>,
    reduced: Vec<f64>,
    amp: Vec<f64>,
    dpsi: Vec<f64>,
}

impl PhaseColumn {
    /// Builds the phase for degree `nu` on `tgrid`.
    pub fn build(params: &JacobiParams, nu: f64, tgrid: &PiecewiseChebGrid) -> Result<Self> {
        let ops = PanelOperators::new(tgrid);
        let (reduced, amp, dpsi) = column_tables(params, nu, tgrid, &ops)?;
        let p = params.p(nu);
        let psi = tgrid.nodes().iter().zip(&reduced).map(|(t, r)| p * t + r).collect();
        Ok(Self { nu, p, grid: tgrid.clone(), psi, reduced, amp, dpsi })
    }

    /// The phase for degree `n` on the `t` grid for `nmax = n`.
    pub fn for_degree(params: &JacobiParams, n: usize) -> Result<Self> {
        Self::build(params, n as f64, &t_grid(n)?)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn grid(&self) -> &PiecewiseChebGrid {
        &self.grid
    }

    pub fn psi_values(&self) -> &[f64] {
        &self.psi
    }

    /// `psi(t) - p t` at the nodes.
    pub fn reduced_psi_values(&self) -> &[f64] {
        &self.reduced
    }

    pub fn amp_values(&self) -> &[f64] {
        &self.amp
    }

    pub fn dpsi_values(&self) -> &[f64] {
        &self.dpsi
    }

    /// `(psi, M, psi')` at `t`.
    pub fn eval(&self, t: f64) -> Result<PhaseValue> {
        let mut w = [0.0; crate::chebgrid::MAX_POINTS];
        let off = self.grid.weights_at(t, &mut w)?;
        let k = self.grid.points_per_interval();
        let dot = |v: &[f64]| v[off..off + k].iter().zip(&w[..k]).map(|(a, b)| a * b).sum::<f64>();
        Ok(PhaseValue { psi: self.p * t + dot(&self.reduced), m: dot(&self.amp), dpsi: dot(&self.dpsi) })
    }
}

/// `(psi - p t, M, psi')` tables for one degree.
fn column_tables(params: &JacobiParams, nu: f64, tgrid: &PiecewiseChebGrid, ops: &PanelOperators) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let (eta, deta) = amplitude_solution(params, nu, tgrid, ops)?;
    let p = params.p(nu);
    let dpsi: Vec<f64> = eta.iter().map(|&e| p / (1.0 + e)).collect();
    let dreduced: Vec<f64> = eta.iter().map(|&e| -p * e / (1.0 + e)).collect();
    let mut psi = tgrid.spectral_integrate(&dreduced);
    let amp: Vec<f64> = eta.iter().map(|&e| (2.0 / PI * (1.0 + e)).sqrt()).collect();

    // phase constant from P~ and P~' at the left end, where the series is
    // accurate: P~ = M cos(C), P~' = M' cos(C) - M psi' sin(C)
    let t0 = tgrid.lo();
    let (p0, dp0) = jacobi_ref::series_p(params, nu, t0)?;
    let m0 = amp[0];
    let dm0 = deta[0] / (PI * m0);
    let cos_c = p0 / m0;
    let sin_c = (dm0 * cos_c - dp0) / (m0 * dpsi[0]);
    let c = sin_c.atan2(cos_c) - p * t0;
    for v in &mut psi {
        *v += c;
    }
    Ok((psi, amp, dpsi))
}

/// Phase, amplitude and phase derivative at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseValue {
    pub psi: f64,
    pub m: f64,
    pub dpsi: f64,
}

/// Bivariate piecewise Chebyshev expansions of the reduced phase
/// `psi - p t`, of `M` and of `psi'` over `[alpha_1, pi - alpha_1] x [27, nmax]`.
#[derive(Clone, Debug)]
pub struct PhaseExpansion {
    params: JacobiParams,
    nmax: usize,
    tgrid: PiecewiseChebGrid,
    vgrid: PiecewiseChebGrid,
    psi: BivariateChebTable,
    amp: BivariateChebTable,
    dpsi: BivariateChebTable,
}

/// Format version written by [`PhaseExpansion::save`].
pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"FJPH";

impl PhaseExpansion {
    /// Constructs the expansion; columns for different degrees are solved in
    /// parallel.
    pub fn build(params: &JacobiParams, nmax: usize) -> Result<Self> {
        let (tgrid, vgrid) = build_grids(nmax)?;
        let ops = PanelOperators::new(&tgrid);
        let columns: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> =
            vgrid.nodes().par_iter().map(|&nu| column_tables(params, nu, &tgrid, &ops)).collect::<Result<_>>()?;
        let nt = tgrid.len();
        let nv = vgrid.len();
        let mut psi = vec![0.0; nt * nv];
        let mut amp = vec![0.0; nt * nv];
        let mut dpsi = vec![0.0; nt * nv];
        // keep the phase constant continuous in v
        let mut prev_c: Option<f64> = None;
        for (j, (cpsi, camp, cdpsi)) in columns.iter().enumerate() {
            let mut shift = 0.0;
            let c = cpsi[0];
            if let Some(pc) = prev_c {
                shift = 2.0 * PI * ((pc - c) / (2.0 * PI)).round();
            }
            prev_c = Some(c + shift);
            for i in 0..nt {
                psi[i * nv + j] = cpsi[i] + shift;
                amp[i * nv + j] = camp[i];
                dpsi[i * nv + j] = cdpsi[i];
            }
        }
        let exp = Self {
            params: *params,
            nmax,
            psi: BivariateChebTable::new(&tgrid, &vgrid, psi)?,
            amp: BivariateChebTable::new(&tgrid, &vgrid, amp)?,
            dpsi: BivariateChebTable::new(&tgrid, &vgrid, dpsi)?,
            tgrid,
            vgrid,
        };
        let err = exp.max_wronskian_error();
        if err > 1e-10 {
            bail!(Internal, "Wronskian identity violated by {err:e}");
        }
        Ok(exp)
    }

    pub fn params(&self) -> &JacobiParams {
        &self.params
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    pub fn tgrid(&self) -> &PiecewiseChebGrid {
        &self.tgrid
    }

    pub fn vgrid(&self) -> &PiecewiseChebGrid {
        &self.vgrid
    }

    /// Values of `psi(t, v) - p(v) t`.
    pub fn reduced_psi_table(&self) -> &BivariateChebTable {
        &self.psi
    }

    pub fn amp_table(&self) -> &BivariateChebTable {
        &self.amp
    }

    pub fn dpsi_table(&self) -> &BivariateChebTable {
        &self.dpsi
    }

    /// Bytes occupied by the three tables.
    pub fn table_bytes(&self) -> usize {
        3 * self.psi.values().len() * std::mem::size_of::<f64>()
    }

    /// Largest relative deviation of `M^2 psi'` from `2p/pi` over all nodes.
    pub fn max_wronskian_error(&self) -> f64 {
        let (nt, nv) = self.psi.shape();
        let mut worst: f64 = 0.0;
        for j in 0..nv {
            let w = CoefficientQ::new(&self.params, self.vgrid.nodes()[j]).wronskian();
            for i in 0..nt {
                let m = self.amp.at(i, j);
                worst = worst.max((m * m * self.dpsi.at(i, j) / w - 1.0).abs());
            }
        }
        worst
    }

    /// `(psi, M, psi')` at `(t, v)`.
    pub fn eval(&self, t: f64, v: f64) -> Result<PhaseValue> {
        let w = cell_weights(&self.tgrid, &self.vgrid, t, v)?;
        Ok(PhaseValue { psi: self.params.p(v) * t + self.psi.contract(&w), m: self.amp.contract(&w), dpsi: self.dpsi.contract(&w) })
    }

    /// `P~_v(t) = M cos(psi)`.
    pub fn eval_ptilde(&self, t: f64, v: f64) -> Result<f64> {
        let r = self.eval(t, v)?;
        Ok(r.m * r.psi.cos())
    }

    /// `Q~_v(t) = M sin(psi)`.
    pub fn eval_qtilde(&self, t: f64, v: f64) -> Result<f64> {
        let r = self.eval(t, v)?;
        Ok(r.m * r.psi.sin())
    }

    /// The unnormalized Jacobi function `P_v(x)`, `x = cos t`.
    pub fn eval_p(&self, x: f64, v: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&x) {
            bail!(Domain, "x = {x} outside [-1, 1]");
        }
        let t = x.acos();
        jacobi_ref::p_from_ptilde(&self.params, v, t, self.eval_ptilde(t, v)?)
    }

    /// Writes the expansion in the little-endian `FJPH` format.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&self.params.a().to_le_bytes())?;
        w.write_all(&self.params.b().to_le_bytes())?;
        w.write_all(&(self.nmax as u64).to_le_bytes())?;
        for g in [&self.tgrid, &self.vgrid] {
            w.write_all(&(g.points_per_interval() as u32).to_le_bytes())?;
            w.write_all(&(g.breakpoints().len() as u32).to_le_bytes())?;
            for b in g.breakpoints() {
                w.write_all(&b.to_le_bytes())?;
            }
        }
        for tab in [&self.psi, &self.amp, &self.dpsi] {
            for v in tab.values() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    /// Reads an expansion written by [`PhaseExpansion::write_to`].
    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        read_exact(&mut r, &mut magic)?;
        if &magic != MAGIC {
            bail!(Format, "not a phase expansion file (bad magic)");
        }
        let version = u32::from_le_bytes(read_array(&mut r)?);
        if version != FORMAT_VERSION {
            bail!(Format, "unsupported phase file version {version}");
        }
        let a = f64::from_le_bytes(read_array(&mut r)?);
        let b = f64::from_le_bytes(read_array(&mut r)?);
        let params = JacobiParams::new(a, b).map_err(|e| Error::Format(format!("bad parameters in phase file: {e}")))?;
        let nmax = u64::from_le_bytes(read_array(&mut r)?);
        if (nmax as f64) <= ASYMPTOTIC_MIN_DEGREE || nmax > u32::MAX as u64 {
            bail!(Format, "bad nmax {nmax} in phase file");
        }
        let mut grids = Vec::with_capacity(2);
        for lookup in [Lookup::SymmetricDyadic, Lookup::Geometric { ratio: 3.0 }] {
            let k = u32::from_le_bytes(read_array(&mut r)?) as usize;
            let m = u32::from_le_bytes(read_array(&mut r)?) as usize;
            if m > 1 << 16 {
                bail!(Format, "implausible breakpoint count {m}");
            }
            let bp = read_f64s(&mut r, m)?;
            let g = PiecewiseChebGrid::with_lookup(bp, k, lookup).map_err(|e| Error::Format(format!("bad grid in phase file: {e}")))?;
            grids.push(g);
        }
        let vgrid = grids.pop().unwrap_or_else(|| unreachable!());
        let tgrid = grids.pop().unwrap_or_else(|| unreachable!());
        let count = tgrid.len() * vgrid.len();
        let mut tables = Vec::with_capacity(3);
        for _ in 0..3 {
            tables.push(BivariateChebTable::new(&tgrid, &vgrid, read_f64s(&mut r, count)?)?);
        }
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            bail!(Format, "trailing data after phase tables");
        }
        let dpsi = tables.pop().unwrap_or_else(|| unreachable!());
        let amp = tables.pop().unwrap_or_else(|| unreachable!());
        let psi = tables.pop().unwrap_or_else(|| unreachable!());
        Ok(Self { params, nmax: nmax as usize, tgrid, vgrid, psi, amp, dpsi })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("phase file is truncated".into()),
        _ => Error::Io(e),
    })
}

fn read_array<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    read_exact(r, &mut buf)?;
    Ok(buf)
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; n * 8];
    read_exact(r, &mut bytes)?;
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap_or([0; 8]))).collect())
}
