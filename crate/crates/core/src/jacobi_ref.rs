//! Reference evaluation of normalized Jacobi functions of the first and
//! second kind.
//!
//! `P~_v(t) = C_v P_v(cos t) sin(t/2)^(a+1/2) cos(t/2)^(b+1/2)` with `C_v`
//! chosen so that `P~_v` has unit `L^2(0, pi)` norm. `Q~_v` is defined the
//! same way from the second-kind function.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use crate::chebgrid::PiecewiseChebGrid;
use crate::error::{bail, Error, Result};
use crate::special::{bessel_jy, gamma, gamma_ratio, ln_gamma_ratio, sin_minus_x, x_cos_minus_sin};

/// Smallest degree handled by the asymptotic expansions (and the phase
/// function tables).
pub const ASYMPTOTIC_MIN_DEGREE: f64 = 27.0;

/// Width of the endpoint regions handled by Hahn's expansion.
pub const ENDPOINT_WIDTH: f64 = 0.2;

/// Jacobi parameters `(a, b)`, both in `[-1/2, 1/2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiParams {
    a: f64,
    b: f64,
}

impl JacobiParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(-0.5..=0.5).contains(&a) || !(-0.5..=0.5).contains(&b) {
            bail!(Parameter, "Jacobi parameters must lie in [-1/2, 1/2], got a={a}, b={b}");
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Parameters with `a` and `b` exchanged.
    pub fn swapped(&self) -> Self {
        Self { a: self.b, b: self.a }
    }

    /// `p = v + (a + b + 1) / 2`.
    pub fn p(&self, v: f64) -> f64 {
        v + 0.5 * (self.a + self.b + 1.0)
    }

    /// `ln` of the normalized weight `2^(a+b+1) sin(t/2)^(2a+1) cos(t/2)^(2b+1)`
    /// relating the two quadrature conventions.
    pub fn ln_weight(&self, t: f64) -> f64 {
        let (s, c) = (0.5 * t).sin_cos();
        (self.a + self.b + 1.0) * std::f64::consts::LN_2 + (2.0 * self.a + 1.0) * s.ln() + (2.0 * self.b + 1.0) * c.ln()
    }

    /// `sin(t/2)^(a+1/2) cos(t/2)^(b+1/2)` and its logarithmic derivative.
    fn prefactor(&self, t: f64) -> (f64, f64) {
        let (s, c) = (0.5 * t).sin_cos();
        let f = s.powf(self.a + 0.5) * c.powf(self.b + 0.5);
        let dlog = 0.5 * (self.a + 0.5) * c / s - 0.5 * (self.b + 0.5) * s / c;
        (f, dlog)
    }
}

/// Values of `P~` and `Q~` at one point, with optional `t`-derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PQPair {
    pub p: f64,
    pub q: f64,
    pub dp: Option<f64>,
    pub dq: Option<f64>,
}

/// `ln C_v`.
pub fn ln_norm_constant(params: &JacobiParams, v: f64) -> f64 {
    let (a, b) = (params.a, params.b);
    let f = if v == 0.0 { 1.0 } else { (2.0 * v + a + b + 1.0) / (v + a + b + 1.0) };
    0.5 * (f.ln() + ln_gamma_ratio(v + b + 1.0, a + 1.0) - ln_gamma_ratio(v + 1.0, a))
}

/// The normalization constant `C_v`.
pub fn norm_constant(params: &JacobiParams, v: f64) -> f64 {
    ln_norm_constant(params, v).exp()
}

/// `P_v(cos t)` from `P~_v(t)`, undoing the weight and normalization.
pub fn p_from_ptilde(params: &JacobiParams, v: f64, t: f64, ptilde: f64) -> Result<f64> {
    let (s, c) = (0.5 * t).sin_cos();
    let ln_scale = ln_norm_constant(params, v) + (params.a + 0.5) * s.ln() + (params.b + 0.5) * c.ln();
    if ln_scale < -700.0 {
        bail!(Accuracy, "P_v(x) at x = {} is ill-conditioned (relative condition ~ e^{:.0})", t.cos(), -ln_scale);
    }
    Ok(ptilde / ln_scale.exp())
}

/// Coefficient `q_v(t)` of the modified equation `y'' + q y = 0` satisfied by
/// `P~_v` and `Q~_v`, together with `q'_v(t)`.
pub fn ode_coefficient(params: &JacobiParams, v: f64, t: f64) -> (f64, f64) {
    let p = params.p(v);
    let (s, c) = (0.5 * t).sin_cos();
    let ka = 0.25 * (0.25 - params.a * params.a);
    let kb = 0.25 * (0.25 - params.b * params.b);
    let q = p * p + ka / (s * s) + kb / (c * c);
    let dq = -ka * c / (s * s * s) + kb * s / (c * c * c);
    (q, dq)
}

/// Unnormalized `P_0(x), ..., P_n(x)` via the three-term recurrence.
pub fn recurrence_eval(params: &JacobiParams, n: usize, x: f64) -> Vec<f64> {
    let (a, b) = (params.a, params.b);
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push((a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0));
    for k in 2..=n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let c0 = 2.0 * kf * (kf + a + b) * (s - 2.0);
        let c1 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c2 = 2.0 * (kf + a - 1.0) * (kf + b - 1.0) * s;
        let next = (c1 * out[k - 1] - c2 * out[k - 2]) / c0;
        out.push(next);
    }
    out
}

/// Coefficients of the three-term recurrence for the orthonormal
/// polynomials `p_k = C_k P_k`:
/// `x p_k = beta_{k+1} p_{k+1} + alpha_k p_k + beta_k p_{k-1}`.
#[derive(Clone, Debug)]
pub struct NormalizedRecurrence {
    params: JacobiParams,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    c0: f64,
}

impl NormalizedRecurrence {
    /// Coefficients sufficient for degrees `0..=max_degree`.
    pub fn new(params: &JacobiParams, max_degree: usize) -> Self {
        let (a, b) = (params.a, params.b);
        let mut alpha = Vec::with_capacity(max_degree + 1);
        let mut beta = Vec::with_capacity(max_degree + 1);
        for k in 0..=max_degree {
            let kf = k as f64;
            let s = 2.0 * kf + a + b;
            alpha.push(if k == 0 { (b - a) / (a + b + 2.0) } else { (b * b - a * a) / (s * (s + 2.0)) });
            beta.push(match k {
                0 => 0.0,
                1 => 2.0 / (2.0 + a + b) * ((1.0 + a) * (1.0 + b) / (3.0 + a + b)).sqrt(),
                _ => 2.0 / s * (kf * (kf + a) * (kf + b) * (kf + a + b) / ((s + 1.0) * (s - 1.0))).sqrt(),
            });
        }
        Self { params: *params, alpha, beta, c0: norm_constant(params, 0.0) }
    }

    pub fn max_degree(&self) -> usize {
        self.alpha.len() - 1
    }

    /// Fills `out[k] = P~_k(t)` for `k < out.len()`.
    pub fn eval_all(&self, t: f64, out: &mut [f64]) {
        let n = out.len();
        assert!(n <= self.alpha.len(), "recurrence table too short");
        if n == 0 {
            return;
        }
        let x = t.cos();
        let (pref, _) = self.params.prefactor(t);
        let mut prev = 0.0;
        let mut cur = self.c0;
        out[0] = cur * pref;
        for k in 1..n {
            let next = ((x - self.alpha[k - 1]) * cur - self.beta[k - 1] * prev) / self.beta[k];
            prev = cur;
            cur = next;
            out[k] = cur * pref;
        }
    }

    /// `P~_n(t)` and `dP~_n/dt`.
    pub fn eval_with_derivative(&self, n: usize, t: f64) -> (f64, f64) {
        assert!(n <= self.max_degree(), "recurrence table too short");
        let (a, b) = (self.params.a, self.params.b);
        let x = t.cos();
        let mut prev = 0.0;
        let mut cur = self.c0;
        for k in 1..=n {
            let next = ((x - self.alpha[k - 1]) * cur - self.beta[k - 1] * prev) / self.beta[k];
            prev = cur;
            cur = next;
        }
        let (pref, dlog) = self.params.prefactor(t);
        // -sin(t) p_n'(x)
        let dpx = if n == 0 {
            0.0
        } else {
            let nf = n as f64;
            let s = 2.0 * nf + a + b;
            let num = nf * (a - b - s * x) * cur + self.beta[n] * s * (s + 1.0) * prev;
            -num / (s * t.sin())
        };
        (cur * pref, (dpx + cur * dlog) * pref)
    }
}

/// `P~_n(t)` and its derivative from the normalized recurrence.
pub fn ptilde_recurrence(params: &JacobiParams, n: usize, t: f64) -> (f64, f64) {
    NormalizedRecurrence::new(params, n).eval_with_derivative(n, t)
}

const SERIES_MAX_TERMS: usize = 5000;

/// Sum of `2F1(alpha, beta; gamma; z)`, `z * d/dz 2F1` and the sum of the
/// absolute values of the terms.
fn hypergeometric(alpha: f64, beta: f64, gamma: f64, z: f64) -> Result<(f64, f64, f64)> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut dsum = 0.0;
    let mut abs_sum = 1.0;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= (alpha + kf) * (beta + kf) / ((gamma + kf) * (kf + 1.0)) * z;
        sum += term;
        dsum += (kf + 1.0) * term;
        abs_sum += term.abs();
        if term == 0.0 || (term.abs() <= 1e-17 * sum.abs().max(1e-300) && kf > alpha.abs().max(beta.abs())) {
            return Ok((sum, dsum, abs_sum));
        }
    }
    bail!(Accuracy, "hypergeometric series failed to converge after {SERIES_MAX_TERMS} terms (z={z})")
}

/// Largest estimated absolute error of a series value tolerated before the
/// evaluation is reported as inaccurate.
const SERIES_MAX_ERROR: f64 = 1e-8;

/// Below this `|a|` the second-kind series is replaced by its limit.
const SERIES_SMALL_A: f64 = 1e-3;

/// `P~` and `Q~` (with derivatives) from the hypergeometric series
/// representations. Intended for moderate `v` and `t` not too close to `pi`.
pub fn series_pq(params: &JacobiParams, v: f64, t: f64) -> Result<PQPair> {
    if v < 0.0 || !(t > 0.0 && t < PI) {
        bail!(Domain, "series evaluation requires v >= 0 and 0 < t < pi (v={v}, t={t})");
    }
    if params.a.abs() < SERIES_SMALL_A {
        // Q~ is analytic in a; Richardson extrapolation of symmetric averages
        let delta = 2.0 * SERIES_SMALL_A;
        let at = |d: f64| -> Result<PQPair> { series_pq_raw(&JacobiParams { a: params.a + d, b: params.b }, v, t) };
        let (p1, m1, p2, m2) = (at(delta)?, at(-delta)?, at(2.0 * delta)?, at(-2.0 * delta)?);
        let extrap = |f: fn(&PQPair) -> f64| (4.0 * 0.5 * (f(&p1) + f(&m1)) - 0.5 * (f(&p2) + f(&m2))) / 3.0;
        let exact = series_pq_raw_first_kind(params, v, t)?;
        return Ok(PQPair {
            p: exact.0,
            dp: Some(exact.1),
            q: extrap(|r| r.q),
            dq: Some(extrap(|r| r.dq.unwrap_or(0.0))),
        });
    }
    series_pq_raw(params, v, t)
}

/// `P~` and its derivative from the hypergeometric series.
pub fn series_p(params: &JacobiParams, v: f64, t: f64) -> Result<(f64, f64)> {
    if v < 0.0 || !(t > 0.0 && t < PI) {
        bail!(Domain, "series evaluation requires v >= 0 and 0 < t < pi (v={v}, t={t})");
    }
    series_pq_raw_first_kind(params, v, t)
}

fn series_pq_raw_first_kind(params: &JacobiParams, v: f64, t: f64) -> Result<(f64, f64)> {
    let (a, b) = (params.a, params.b);
    let s = (0.5 * t).sin();
    let z = s * s;
    let dz = 0.5 * t.sin();
    let cn = norm_constant(params, v);
    let (pref, dlog) = params.prefactor(t);
    let (f1, zdf1, abs1) = hypergeometric(-v, v + a + b + 1.0, a + 1.0, z)?;
    let k1 = cn * gamma_ratio(v + 1.0, a) / gamma(a + 1.0);
    let err = 8.0 * f64::EPSILON * k1 * abs1 * pref;
    if err > SERIES_MAX_ERROR {
        bail!(Accuracy, "hypergeometric series loses too much precision at v={v}, t={t} (error ~{err:e})");
    }
    let p = k1 * f1 * pref;
    let dp = k1 * pref * (zdf1 / z * dz + f1 * dlog);
    Ok((p, dp))
}

fn series_pq_raw(params: &JacobiParams, v: f64, t: f64) -> Result<PQPair> {
    let (a, b) = (params.a, params.b);
    let (p, dp) = series_pq_raw_first_kind(params, v, t)?;
    let (s, c) = (0.5 * t).sin_cos();
    let z = s * s;
    let dz = 0.5 * t.sin();
    let cn = norm_constant(params, v);
    let (f2, zdf2, abs2) = hypergeometric(v + 1.0, -v - a - b, 1.0 - a, z)?;
    // Gamma(v+b+1) / Gamma(v+a+b+1); vanishes when v + a + b + 1 = 0
    let inv_r = if v + a + b + 1.0 <= 0.0 { 0.0 } else { (-ln_gamma_ratio(v + b + 1.0, a)).exp() };
    let k2 = cn * gamma(a) / PI * inv_r;
    let pref2 = s.powf(0.5 - a) * c.powf(0.5 - b);
    let dlog2 = 0.5 * (0.5 - a) * c / s - 0.5 * (0.5 - b) * s / c;
    let cot = 1.0 / (a * PI).tan();
    let q = cot * p - k2 * pref2 * f2;
    let dq = cot * dp - k2 * pref2 * (zdf2 / z * dz + f2 * dlog2);
    let err = 8.0 * f64::EPSILON * (cot.abs() * p.abs() + (k2 * pref2).abs() * abs2);
    if err > SERIES_MAX_ERROR {
        bail!(Accuracy, "second-kind series loses too much precision at v={v}, t={t} (error ~{err:e})");
    }
    Ok(PQPair { p, q, dp: Some(dp), dq: Some(dq) })
}

/// Result of Hahn's trigonometric expansion.
#[derive(Clone, Copy, Debug)]
pub struct HahnResult {
    pub pq: PQPair,
    /// Estimated bound on the truncation error of both values.
    pub remainder: f64,
    /// Number of terms summed.
    pub terms: usize,
}

/// `C_v 2^(2p) B(v+a+1, v+b+1) / pi`, computed without overflow.
fn hahn_scale(params: &JacobiParams, v: f64) -> f64 {
    let p = params.p(v);
    let d = 0.5 * (params.a - params.b);
    norm_constant(params, v) / PI.sqrt() * (ln_gamma_ratio(p + 0.5, d) + ln_gamma_ratio(p + 1.0, -0.5 - d)).exp()
}

/// Hahn's trigonometric expansion with `terms` terms (or, when `terms` is
/// `None`, as many as reduce the estimated remainder).
pub fn hahn_asym(params: &JacobiParams, v: f64, t: f64, terms: Option<usize>) -> Result<HahnResult> {
    if v < ASYMPTOTIC_MIN_DEGREE || !(t > 0.0 && t < PI) {
        bail!(Domain, "Hahn expansion requires v >= {ASYMPTOTIC_MIN_DEGREE} and 0 < t < pi (v={v}, t={t})");
    }
    const AUTO_MAX: usize = 400;
    let (a, b) = (params.a, params.b);
    let p = params.p(v);
    let (s, c) = (0.5 * t).sin_cos();
    let (cot, tan) = (c / s, s / c);
    let limit = terms.unwrap_or(AUTO_MAX);
    // u[l] = (1/2+a)_l (1/2-a)_l / (l! (2s)^l), w[k] likewise with b and 2c
    let mut u = vec![1.0];
    let mut w = vec![1.0];
    let (sp, cp) = (p * t).sin_cos();
    let mut sum_p: f64 = 0.0;
    let mut sum_q: f64 = 0.0;
    let mut sum_dp = 0.0;
    let mut sum_dq = 0.0;
    let mut poch = 1.0; // (2p+1)_m
    let mut prev_bound = f64::INFINITY;
    let mut used = 0;
    let mut remainder = 0.0;
    for m in 0..=limit {
        if m > 0 {
            let l = (m - 1) as f64;
            u.push(u[m - 1] * (0.5 + a + l) * (0.5 - a + l) / ((l + 1.0) * 2.0 * s));
            w.push(w[m - 1] * (0.5 + b + l) * (0.5 - b + l) / ((l + 1.0) * 2.0 * c));
            poch *= 2.0 * p + l + 1.0;
        }
        let mut bound = 0.0;
        let mut tp = 0.0;
        let mut tq = 0.0;
        let mut tdp = 0.0;
        let mut tdq = 0.0;
        let mf = m as f64;
        let dtheta = 0.5 * (2.0 * p + mf);
        for l in 0..=m {
            let coef = u[l] * w[m - l] / poch;
            if coef == 0.0 {
                continue;
            }
            bound += coef.abs();
            let lf = l as f64;
            let phi = 0.5 * mf * t - 0.5 * (a + lf + 0.5) * PI;
            let (sphi, cphi) = phi.sin_cos();
            let cth = cp * cphi - sp * sphi;
            let sth = sp * cphi + cp * sphi;
            let dlog = -0.5 * lf * cot + 0.5 * (mf - lf) * tan;
            tp += coef * cth;
            tq += coef * sth;
            tdp += coef * (-sth * dtheta + cth * dlog);
            tdq += coef * (cth * dtheta + sth * dlog);
        }
        if !bound.is_finite() {
            bail!(Accuracy, "Hahn expansion overflows at v={v}, t={t}; at most {m} terms are safe");
        }
        if m == limit || (terms.is_none() && (bound > prev_bound || bound < 1e-17 * sum_p.abs().max(sum_q.abs()))) {
            remainder = 2.0 * bound;
            break;
        }
        sum_p += tp;
        sum_q += tq;
        sum_dp += tdp;
        sum_dq += tdq;
        prev_bound = bound;
        used = m + 1;
    }
    let scale = hahn_scale(params, v);
    Ok(HahnResult {
        pq: PQPair { p: scale * sum_p, q: scale * sum_q, dp: Some(scale * sum_dp), dq: Some(scale * sum_dq) },
        remainder: scale * remainder,
        terms: used,
    })
}

/// `g(t)` and `g'(t)` for the Baratella-Gatteschi coefficients, stable
/// near `t = 0`.
fn bg_g(params: &JacobiParams, t: f64) -> (f64, f64) {
    let ka = 0.25 - params.a * params.a;
    let kb = 0.25 - params.b * params.b;
    if t == 0.0 {
        return (0.0, -ka / 6.0 - 0.5 * kb);
    }
    let x = 0.5 * t;
    let (sx, cx) = x.sin_cos();
    // cot x - 1/x and 1/x^2 - 1/sin^2 x
    let cot_minus = x_cos_minus_sin(x) / (x * sx);
    let smx = sin_minus_x(x);
    let inv_diff = smx * (sx + x) / (x * x * sx * sx);
    let g = ka * cot_minus - kb * sx / cx;
    let dg = 0.5 * ka * inv_diff - 0.5 * kb / (cx * cx);
    (g, dg)
}

/// Tabulated higher-order Baratella-Gatteschi coefficients `B_1`, `A_2`,
/// `B_2` for one parameter pair.
struct BgTables {
    grid: PiecewiseChebGrid,
    b1: Vec<f64>,
    a2: Vec<f64>,
    b2: Vec<f64>,
}

/// Upper end of the tabulated range of the Baratella-Gatteschi coefficients.
const BG_TABLE_END: f64 = PI - 0.15;

impl BgTables {
    fn build(params: &JacobiParams) -> Result<Self> {
        let panels = 12;
        let bps: Vec<f64> = (0..=panels).map(|i| BG_TABLE_END * i as f64 / panels as f64).collect();
        let grid = PiecewiseChebGrid::new(bps, 24)?;
        let nodes = grid.nodes().to_vec();
        let gvals: Vec<(f64, f64)> = nodes.iter().map(|&t| bg_g(params, t)).collect();
        let b0: Vec<f64> = nodes.iter().zip(&gvals).map(|(&t, &(g, dg))| if t == 0.0 { 0.25 * dg } else { 0.25 * g / t }).collect();
        let tb0_prime: Vec<f64> = gvals.iter().map(|&(_, dg)| 0.25 * dg).collect();
        let (_, a1, b1, tb1_prime) = bg_step(params, &grid, &gvals, &b0, &tb0_prime);
        let (_, a2, b2, _) = bg_step(params, &grid, &gvals, &b1, &tb1_prime);
        let _ = a1;
        Ok(Self { grid, b1, a2, b2 })
    }
}

/// One step of the recursion defining the Baratella-Gatteschi coefficients:
/// from `B_{j-1}` and `(t B_{j-1})'` produce `A_j`, `B_j` and `(t B_j)'`.
/// Returns `(alpha_j, A_j, B_j, (t B_j)')`.
fn bg_step(
    params: &JacobiParams,
    grid: &PiecewiseChebGrid,
    gvals: &[(f64, f64)],
    bprev: &[f64],
    tbprev_prime: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let a = params.a;
    let c = a * a - 0.25;
    let nodes = grid.nodes();
    let phi: Vec<f64> = gvals.iter().map(|&(_, dg)| -0.5 * dg).collect();
    let integrand: Vec<f64> = nodes.iter().zip(&phi).zip(bprev).map(|((&t, &f), &bv)| f * t * bv).collect();
    let integral = grid.spectral_integrate(&integrand);
    let b_at_zero = bprev[0];
    let aj: Vec<f64> = (0..nodes.len())
        .map(|i| 0.5 * tbprev_prime[i] + 0.5 * integral[i] - (a + 0.5) * bprev[i] + a * b_at_zero)
        .collect();
    let alpha: Vec<f64> = aj.iter().zip(bprev).map(|(&x, &bv)| x + (a + 0.5) * bv).collect();
    let alpha2 = grid.differentiate(&grid.differentiate(&alpha));
    let bp = grid.differentiate(bprev);
    let bpp0 = grid.differentiate(&bp)[0];
    let h: Vec<f64> = (0..nodes.len())
        .map(|i| {
            let t = nodes[i];
            let bterm = if t == 0.0 { bpp0 } else { bp[i] / t };
            alpha2[i] - 2.0 * c * bterm + phi[i] * alpha[i]
        })
        .collect();
    let tbj_prime: Vec<f64> = h.iter().map(|&x| -0.5 * x).collect();
    let tbj = grid.spectral_integrate(&tbj_prime);
    let bj: Vec<f64> = nodes.iter().zip(&tbj).zip(&tbj_prime).map(|((&t, &x), &d)| if t == 0.0 { d } else { x / t }).collect();
    (alpha, aj, bj, tbj_prime)
}

fn bg_tables(params: &JacobiParams) -> Result<Arc<BgTables>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), Arc<BgTables>>>> = OnceLock::new();
    let key = (params.a.to_bits(), params.b.to_bits());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().map_err(|_| Error::Internal("coefficient cache poisoned".into()))?.get(&key) {
        return Ok(t.clone());
    }
    let tables = Arc::new(BgTables::build(params)?);
    let mut guard = cache.lock().map_err(|_| Error::Internal("coefficient cache poisoned".into()))?;
    Ok(guard.entry(key).or_insert(tables).clone())
}

/// Baratella-Gatteschi expansion of `P~_v` and `Q~_v` keeping the terms
/// `A_0..A_m` and `B_0..B_{m-1}` for `0 <= m <= 2`; `m = 3` additionally
/// keeps `B_2` (no `A_3`). Derivatives are not computed.
pub fn bg_asym(params: &JacobiParams, v: f64, t: f64, m: usize) -> Result<PQPair> {
    if v < ASYMPTOTIC_MIN_DEGREE || !(t > 0.0 && t <= PI - ENDPOINT_WIDTH + 1e-12) {
        bail!(Domain, "Baratella-Gatteschi expansion requires v >= {ASYMPTOTIC_MIN_DEGREE} and 0 < t <= pi - 0.2 (v={v}, t={t})");
    }
    if m > 3 {
        bail!(Parameter, "Baratella-Gatteschi expansion supports at most m = 3, got {m}");
    }
    let a = params.a;
    let b = params.b;
    let p = params.p(v);
    let (g, dg) = bg_g(params, t);
    let b0 = 0.25 * g / t;
    let a1 = dg / 8.0 - (1.0 + 2.0 * a) / (8.0 * t) * g - g * g / 32.0 + a / 24.0 * (3.0 * b * b + a * a - 1.0);
    let mut asum = 1.0;
    let mut bsum = 0.0;
    let p2 = p * p;
    if m >= 1 {
        asum += a1 / p2;
        bsum += b0 / p;
    }
    if m >= 2 {
        let tab = bg_tables(params)?;
        let b1 = tab.grid.eval(&tab.b1, t)?;
        let a2 = tab.grid.eval(&tab.a2, t)?;
        asum += a2 / (p2 * p2);
        bsum += b1 / (p2 * p);
        if m >= 3 {
            bsum += tab.grid.eval(&tab.b2, t)? / (p2 * p2 * p);
        }
    }
    let (ja, ya) = bessel_jy(a, p * t);
    let (ja1, ya1) = bessel_jy(a + 1.0, p * t);
    let scale = (ln_norm_constant(params, v) + ln_gamma_ratio(v + 1.0, a) - a * p.ln()).exp() / std::f64::consts::SQRT_2;
    let rt = t.sqrt();
    let t32 = t * rt;
    Ok(PQPair {
        p: scale * (asum * rt * ja + bsum * t32 * ja1),
        q: scale * (asum * rt * ya + bsum * t32 * ya1),
        dp: None,
        dq: None,
    })
}

/// Evaluates `B_1`, `A_2`, `B_2` at `t` (exposed for testing).
#[doc(hidden)]
pub fn bg_higher_coefficients(params: &JacobiParams, t: f64) -> Result<[f64; 3]> {
    let tab = bg_tables(params)?;
    Ok([tab.grid.eval(&tab.b1, t)?, tab.grid.eval(&tab.a2, t)?, tab.grid.eval(&tab.b2, t)?])
}

/// Hahn's expansion is used whenever its estimated remainder is below this.
const HAHN_MAX_REMAINDER: f64 = 1e-14;

/// `sin(v pi)` and `cos(v pi)` with the argument reduced exactly first.
fn sin_cos_pi(v: f64) -> (f64, f64) {
    let r = v - 2.0 * (0.5 * v).floor();
    (PI * r).sin_cos()
}

/// `P~` and `Q~` for `v >= 27` and `0 < t <= pi/2`.
fn pq_left_half(params: &JacobiParams, v: f64, t: f64) -> Result<PQPair> {
    let h = hahn_asym(params, v, t, None)?;
    if h.remainder <= HAHN_MAX_REMAINDER {
        return Ok(h.pq);
    }
    bg_asym(params, v, t, 3)
}

/// Reference `P~_v(t)` and `Q~_v(t)` for `v >= 27` and `0 < t < pi`.
///
/// On the right half the values are obtained from those of the swapped
/// parameters at `pi - t` through
/// `P~(a,b)(pi - t) = cos(v pi) P~(b,a)(t) + sin(v pi) Q~(b,a)(t)` and
/// `Q~(a,b)(pi - t) = sin(v pi) P~(b,a)(t) - cos(v pi) Q~(b,a)(t)`.
pub fn pq_ref(params: &JacobiParams, v: f64, t: f64) -> Result<PQPair> {
    if v < ASYMPTOTIC_MIN_DEGREE || !(t > 0.0 && t < PI) {
        bail!(Domain, "asymptotic reference requires v >= {ASYMPTOTIC_MIN_DEGREE} and 0 < t < pi (v={v}, t={t})");
    }
    if t <= FRAC_PI_2 {
        return pq_left_half(params, v, t);
    }
    let r = pq_left_half(&params.swapped(), v, PI - t)?;
    let (s, c) = sin_cos_pi(v);
    let flip = |x: Option<f64>| x.map(|d| -d);
    let (dp, dq) = match (flip(r.dp), flip(r.dq)) {
        (Some(dp), Some(dq)) => (Some(c * dp + s * dq), Some(s * dp - c * dq)),
        _ => (None, None),
    };
    Ok(PQPair { p: c * r.p + s * r.q, q: s * r.p - c * r.q, dp, dq })
}

/// Best available reference value of `P~_v(t)`.
pub fn ptilde_ref(params: &JacobiParams, v: f64, t: f64) -> Result<f64> {
    if v < 0.0 || !(t > 0.0 && t < PI) {
        bail!(Domain, "reference evaluation requires v >= 0 and 0 < t < pi (v={v}, t={t})");
    }
    if v < ASYMPTOTIC_MIN_DEGREE {
        if v.fract() == 0.0 {
            return Ok(ptilde_recurrence(params, v as usize, t).0);
        }
        return Ok(series_pq(params, v, t)?.p);
    }
    Ok(pq_ref(params, v, t)?.p)
}

/// `P~`, `Q~` and derivatives at `t = pi/2`, for `v >= 27`.
pub fn pq_at_midpoint(params: &JacobiParams, v: f64) -> Result<PQPair> {
    let h = hahn_asym(params, v, FRAC_PI_2, None)?;
    if h.remainder > 1e-13 {
        bail!(Accuracy, "Hahn expansion at pi/2 did not converge for v={v}");
    }
    Ok(h.pq)
}
