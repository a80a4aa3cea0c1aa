//! Gauss-Jacobi quadrature by inversion of the nonoscillatory phase.
//!
//! The zeros of `P~_n` are `t_k = psi_n^{-1}(pi/2 + k pi)` and the weights of
//! the modified rule on `(0, pi)` are `pi / psi_n'(t_k)`. A recurrence-based
//! rule in double-double arithmetic serves small `n` and testing.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use crate::chebgrid::{PiecewiseChebGrid, MAX_POINTS};
use crate::dd::Dd;
use crate::error::{bail, Result};
use crate::jacobi_ref::{norm_constant, JacobiParams};
use crate::phasefn::PhaseColumn;

/// Smallest degree served by the phase-function path.
pub const MIN_FAST_DEGREE: usize = 28;
/// Largest degree accepted by the O(n^2) reference rule.
pub const MAX_REFERENCE_DEGREE: usize = 2000;
const NEWTON_MAX_ITER: usize = 50;

/// Which integral a rule approximates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleKind {
    /// `int_{-1}^{1} f(x) (1-x)^a (1+x)^b dx`; nodes in `(-1, 1)`.
    Standard,
    /// `int_0^pi f(t) dt` for products of `P~` functions; nodes in `(0, pi)`.
    Modified,
}

impl RuleKind {
    pub fn name(self) -> &'static str {
        match self {
            RuleKind::Standard => "standard",
            RuleKind::Modified => "modified",
        }
    }
}

/// Nodes (ascending) and positive weights of an `n`-point rule.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Phase of `P~_n` on the `t` grid for `nmax = n`.
pub fn phase_for_degree(params: &JacobiParams, n: usize) -> Result<PhaseColumn> {
    if n < MIN_FAST_DEGREE {
        bail!(Parameter, "phase path needs n >= {MIN_FAST_DEGREE}, got {n}");
    }
    PhaseColumn::for_degree(params, n)
}

/// Piecewise Chebyshev representation of `psi^{-1}` on `[psi(lo), psi(hi)]`.
#[derive(Clone, Debug)]
pub struct InversePhase {
    grid: PiecewiseChebGrid,
    values: Vec<f64>,
}

impl InversePhase {
    /// The grid in the phase variable; breakpoints are `psi` at the `t` breakpoints.
    pub fn grid(&self) -> &PiecewiseChebGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `psi^{-1}(xi)`.
    pub fn eval(&self, xi: f64) -> Result<f64> {
        self.grid.eval(&self.values, xi)
    }
}

/// Interpolates one column on interval `j`: `(psi, psi')` at `t`.
struct IntervalPhase<'a> {
    nodes: &'a [f64],
    psi: &'a [f64],
    dpsi: &'a [f64],
}

impl IntervalPhase<'_> {
    fn new(col: &PhaseColumn, j: usize) -> IntervalPhase<'_> {
        let g = col.grid();
        let off = g.interval_offset(j);
        let k = g.points_per_interval();
        IntervalPhase { nodes: g.interval_nodes(j), psi: &col.psi_values()[off..off + k], dpsi: &col.dpsi_values()[off..off + k] }
    }

    fn eval(&self, t: f64) -> (f64, f64) {
        let mut w = [0.0; MAX_POINTS];
        let w = &mut w[..self.nodes.len()];
        crate::chebgrid::bary_weights(self.nodes, t, w);
        let base = self.psi[0];
        let psi = base + self.psi.iter().zip(w.iter()).map(|(a, b)| (a - base) * b).sum::<f64>();
        (psi, self.dpsi.iter().zip(w.iter()).map(|(a, b)| a * b).sum::<f64>())
    }
}

/// Safeguarded Newton for `psi(y) = xi` with `y` in `[lo, hi]`.
fn solve_phase(ip: &IntervalPhase, xi: f64, mut lo: f64, mut hi: f64, guess: f64) -> Result<f64> {
    let mut y = guess.clamp(lo, hi);
    for _ in 0..NEWTON_MAX_ITER {
        let (f, df) = ip.eval(y);
        let r = f - xi;
        if r == 0.0 {
            return Ok(y);
        }
        let delta = r / df;
        if delta.abs() <= 1e-15 * y.abs().max(1e-300) || r.abs() <= 4.0 * f64::EPSILON * xi.abs() {
            return Ok((y - delta).clamp(lo, hi));
        }
        if r > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let next = y - delta;
        y = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * y.abs() {
            return Ok(y);
        }
    }
    bail!(Accuracy, "Newton iteration for the inverse phase did not converge at xi = {xi}")
}

/// Tabulates `psi^{-1}` on a Chebyshev grid whose breakpoints are the images
/// of the `t` breakpoints.
pub fn invert_phase(col: &PhaseColumn) -> Result<InversePhase> {
    let tg = col.grid();
    let k = tg.points_per_interval();
    let bp = tg.breakpoints();
    // psi at every breakpoint is a stored value
    let omega: Vec<f64> = (0..bp.len()).map(|i| col.psi_values()[i * (k - 1)]).collect();
    if omega.windows(2).any(|w| !(w[1] > w[0])) {
        bail!(Accuracy, "phase is not increasing; cannot invert");
    }
    let grid = PiecewiseChebGrid::new(omega, k)?;
    let mut values = vec![0.0; grid.len()];
    let mut guess = tg.hi();
    for j in (0..grid.num_intervals()).rev() {
        let ip = IntervalPhase::new(col, j);
        let off = grid.interval_offset(j);
        let xs = grid.interval_nodes(j);
        values[off + k - 1] = bp[j + 1];
        values[off] = bp[j];
        for i in (1..k - 1).rev() {
            let y = solve_phase(&ip, xs[i], bp[j], bp[j + 1], guess)?;
            values[off + i] = y;
            guess = y;
        }
        guess = bp[j];
    }
    Ok(InversePhase { grid, values })
}

/// The first `count` zeros `t_k` of `P~_n` (ascending) with `psi_n'(t_k)`.
/// Also returns the total number of zeros in the phase range and how many
/// lie in `(0, pi/2]`.
fn zeros_from_phase(col: &PhaseColumn, inv: &InversePhase, count: Option<usize>) -> Result<(Vec<(f64, f64)>, usize, usize)> {
    let om = inv.grid();
    let k_lo = ((om.lo() - FRAC_PI_2) / PI).ceil() as i64;
    let k_hi = ((om.hi() - FRAC_PI_2) / PI).floor() as i64;
    let total = (k_hi - k_lo + 1).max(0) as usize;
    let mid = col.eval(FRAC_PI_2)?.psi;
    let left = (((mid - FRAC_PI_2) / PI).floor() as i64 - k_lo + 1).clamp(0, total as i64) as usize;
    let zeros = (0..count.unwrap_or(left).min(total))
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let xi = FRAC_PI_2 + (k_lo + i as i64) as f64 * PI;
            let t = inv.eval(xi)?;
            // one Newton correction against the phase itself
            let r = col.eval(t)?;
            let t = t - (r.psi - xi) / r.dpsi;
            Ok((t, col.eval(t)?.dpsi))
        })
        .collect::<Result<_>>()?;
    Ok((zeros, total, left))
}

/// Zeros in `(0, pi/2]` as `(t, psi')`, and the rest as `(pi - t, psi')`,
/// each ascending in its own variable. The second half comes from the phase
/// with `a` and `b` exchanged so that zeros near `pi` keep full relative
/// accuracy in `pi - t`.
fn fast_zeros(params: &JacobiParams, n: usize) -> Result<(Vec<(f64, f64)>, Vec<(f64, f64)>)> {
    let col = phase_for_degree(params, n)?;
    let inv = invert_phase(&col)?;
    // with a = b the middle zero belongs to the left half
    let want = (*params == params.swapped()).then_some(n.div_ceil(2));
    let (left, total, n_left) = zeros_from_phase(&col, &inv, want)?;
    let n_left = want.unwrap_or(n_left);
    if total != n {
        bail!(Internal, "phase range holds {total} zeros, expected {n}");
    }
    let n_right = n - n_left;
    let swapped = params.swapped();
    let right = if swapped == *params {
        left[..n_right].to_vec()
    } else {
        let col = phase_for_degree(&swapped, n)?;
        let inv = invert_phase(&col)?;
        zeros_from_phase(&col, &inv, Some(n_right))?.0
    };
    if right.len() != n_right {
        bail!(Internal, "zeros of the two half-ranges do not fit together");
    }
    Ok((left, right))
}

/// `2^{a+b+1} sin^{2a+1}(t/2) cos^{2b+1}(t/2)`, the Jacobian of `x = cos t`
/// times the weight.
fn standard_factor(params: &JacobiParams, t: f64) -> f64 {
    params.ln_weight(t).exp()
}

/// The `n`-point modified rule on `(0, pi)`.
pub fn modified_gauss_jacobi(params: &JacobiParams, n: usize) -> Result<QuadratureRule> {
    if n < MIN_FAST_DEGREE {
        return modified_gauss_jacobi_reference(params, n);
    }
    let (left, right) = fast_zeros(params, n)?;
    let (nodes, weights) = left.iter().map(|&(t, d)| (t, PI / d)).chain(right.iter().rev().map(|&(u, d)| (PI - u, PI / d))).unzip();
    Ok(QuadratureRule { kind: RuleKind::Modified, nodes, weights })
}

/// The `n`-point Gauss-Jacobi rule on `(-1, 1)`.
pub fn gauss_jacobi(params: &JacobiParams, n: usize) -> Result<QuadratureRule> {
    if n < MIN_FAST_DEGREE {
        return gauss_jacobi_reference(params, n);
    }
    let (left, right) = fast_zeros(params, n)?;
    let swapped = params.swapped();
    let (nodes, weights) = right
        .iter()
        .map(|&(u, d)| (-u.cos(), PI / d * standard_factor(&swapped, u)))
        .chain(left.iter().rev().map(|&(t, d)| (t.cos(), PI / d * standard_factor(params, t))))
        .unzip();
    Ok(QuadratureRule { kind: RuleKind::Standard, nodes, weights })
}

/// Maps a modified rule to the standard one: `x_k = cos t_{n-k+1}`.
pub fn standard_from_modified(params: &JacobiParams, rule: &QuadratureRule) -> QuadratureRule {
    debug_assert_eq!(rule.kind, RuleKind::Modified);
    let (nodes, weights) = rule.nodes.iter().zip(&rule.weights).rev().map(|(&t, &w)| (t.cos(), w * standard_factor(params, t))).unzip();
    QuadratureRule { kind: RuleKind::Standard, nodes, weights }
}

/// Orthonormal recurrence in double-double precision, evaluated in the
/// variable `y = 1 - x` so that nodes near `x = 1` keep full relative accuracy.
struct DdRecurrence {
    alpha: Vec<Dd>,
    beta: Vec<Dd>,
    c0: Dd,
}

impl DdRecurrence {
    fn new(params: &JacobiParams, n: usize) -> Self {
        let (a, b) = (Dd::new(params.a()), Dd::new(params.b()));
        let one = Dd::new(1.0);
        let two = Dd::new(2.0);
        let mut alpha = Vec::with_capacity(n + 1);
        let mut beta = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let kd = Dd::new(k as f64);
            let s = two * kd + a + b;
            alpha.push(if k == 0 { (b - a) / (a + b + two) } else { (b * b - a * a) / (s * (s + two)) });
            beta.push(match k {
                0 => Dd::ZERO,
                1 => two / (two + a + b) * ((one + a) * (one + b) / (Dd::new(3.0) + a + b)).sqrt(),
                _ => two / s * (kd * (kd + a) * (kd + b) * (kd + a + b) / ((s + one) * (s - one))).sqrt(),
            });
        }
        Self { alpha, beta, c0: Dd::new(norm_constant(params, 0.0)) }
    }

    /// `(p_n, dp_n/dx, sum_{j<n} p_j^2)` at `x = 1 - y`.
    fn eval(&self, n: usize, y: f64) -> (Dd, Dd, Dd) {
        let x = Dd::new(1.0) - Dd::new(y);
        let (mut p0, mut p1) = (Dd::ZERO, self.c0);
        let (mut d0, mut d1) = (Dd::ZERO, Dd::ZERO);
        let mut sum = Dd::ZERO;
        for k in 0..n {
            sum = sum + p1 * p1;
            let xa = x - self.alpha[k];
            let p2 = (xa * p1 - self.beta[k] * p0) / self.beta[k + 1];
            let d2 = (xa * d1 + p1 - self.beta[k] * d0) / self.beta[k + 1];
            (p0, p1) = (p1, p2);
            (d0, d1) = (d1, d2);
        }
        (p1, d1, sum)
    }
}

/// A zero in the frame where it is closest to `x = 1`.
struct RefZero {
    y: f64,
    christoffel: f64,
    flipped: bool,
}

fn newton_zero(rec: &DdRecurrence, n: usize, t_guess: f64) -> Result<(f64, f64)> {
    let s = (0.5 * t_guess).sin();
    let mut y = 2.0 * s * s;
    for _ in 0..NEWTON_MAX_ITER {
        let (p, dp, _) = rec.eval(n, y);
        let step = (p / dp).to_f64();
        let next = y + step;
        if !(next > 0.0 && next < 2.0) {
            break;
        }
        y = next;
        // quadratic convergence: the remaining error is far below one ulp
        if step.abs() <= 1e-14 * y {
            let (_, _, sum) = rec.eval(n, y);
            return Ok((y, sum.to_f64()));
        }
    }
    bail!(Accuracy, "reference Newton iteration failed for n = {n} near t = {t_guess}")
}

fn reference_zeros(params: &JacobiParams, n: usize) -> Result<Vec<(f64, RefZero)>> {
    if n == 0 {
        bail!(Parameter, "quadrature needs n >= 1");
    }
    if n > MAX_REFERENCE_DEGREE {
        bail!(Parameter, "reference rule supports n <= {MAX_REFERENCE_DEGREE}, got {n}");
    }
    let swapped = params.swapped();
    let rec = DdRecurrence::new(params, n);
    let rec_sw = DdRecurrence::new(&swapped, n);
    let p = params.p(n as f64);
    let zeros: Vec<(f64, RefZero)> = (1..=n)
        .into_par_iter()
        .map(|k| -> Result<(f64, RefZero)> {
            let guess = (k as f64 + 0.5 * params.a() - 0.25) * PI / p;
            if guess <= FRAC_PI_2 {
                let (y, christoffel) = newton_zero(&rec, n, guess)?;
                Ok((2.0 * (0.5 * y).sqrt().asin(), RefZero { y, christoffel, flipped: false }))
            } else {
                let (y, christoffel) = newton_zero(&rec_sw, n, PI - guess)?;
                Ok((PI - 2.0 * (0.5 * y).sqrt().asin(), RefZero { y, christoffel, flipped: true }))
            }
        })
        .collect::<Result<_>>()?;
    if zeros.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        bail!(Accuracy, "reference zeros for n = {n} are not distinct");
    }
    Ok(zeros)
}

/// Recurrence and Newton's method in double-double arithmetic; O(n^2).
pub fn gauss_jacobi_reference(params: &JacobiParams, n: usize) -> Result<QuadratureRule> {
    let zeros = reference_zeros(params, n)?;
    let scale = 2f64.powf(params.a() + params.b() + 1.0);
    let (nodes, weights) = zeros
        .iter()
        .rev()
        .map(|(_, z)| {
            let x = if z.flipped { z.y - 1.0 } else { 1.0 - z.y };
            (x, scale / z.christoffel)
        })
        .unzip();
    Ok(QuadratureRule { kind: RuleKind::Standard, nodes, weights })
}

/// Modified rule from the reference zeros.
pub fn modified_gauss_jacobi_reference(params: &JacobiParams, n: usize) -> Result<QuadratureRule> {
    let zeros = reference_zeros(params, n)?;
    let ln2 = (params.a() + params.b() + 1.0) * std::f64::consts::LN_2;
    // P~_j = s^{a+1/2} c^{b+1/2} p_j
    let (nodes, weights) = zeros.iter().map(|(t, z)| (*t, 1.0 / (z.christoffel * (params.ln_weight(*t) - ln2).exp()))).unzip();
    Ok(QuadratureRule { kind: RuleKind::Modified, nodes, weights })
}

/// `int_{-1}^{1} (1-x)^a (1+x)^b dx = 2^{a+b+1} B(a+1, b+1)`.
pub fn total_mass(params: &JacobiParams) -> f64 {
    use crate::special::ln_gamma;
    let (a, b) = (params.a(), params.b());
    ((a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(a + b + 2.0)).exp()
}
