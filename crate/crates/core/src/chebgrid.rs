//! Piecewise and bivariate Chebyshev discretizations.
//!
//! A `k`-point Chebyshev grid on `[lo, hi]` consists of the extrema of
//! `T_{k-1}` mapped affinely onto the interval, ordered increasingly and
//! including both endpoints. A piecewise grid glues such grids together over
//! a list of breakpoints; adjacent intervals share their common endpoint, so
//! a grid with `m` breakpoints holds `(k-1)(m-1)+1` nodes.
//!
//! Everything here is immutable after construction and safe to share across
//! threads.

use std::f64::consts::PI;

use crate::error::{bail, Result};

/// Largest number of points per interval supported by the fixed-size
/// evaluation buffers.
pub const MAX_POINTS: usize = 32;

/// Nodes of the `k`-point Chebyshev grid on `[lo, hi]`, in increasing order.
pub fn cheb_nodes(k: usize, lo: f64, hi: f64) -> Result<Vec<f64>> {
    if k < 2 {
        bail!(Parameter, "Chebyshev grid needs at least 2 points, got {k}");
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        bail!(Parameter, "invalid interval [{lo}, {hi}]");
    }
    Ok(cheb_nodes_unchecked(k, lo, hi))
}

fn cheb_nodes_unchecked(k: usize, lo: f64, hi: f64) -> Vec<f64> {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let n = (k - 1) as f64;
    // sin form keeps the reference nodes exactly antisymmetric
    let mut nodes: Vec<f64> = (0..k)
        .map(|i| {
            let s = (PI * (2.0 * i as f64 - n) / (2.0 * n)).sin();
            half * s + mid
        })
        .collect();
    nodes[0] = lo;
    nodes[k - 1] = hi;
    nodes
}

/// Barycentric weight of node `j` on a `k`-point Chebyshev grid.
#[inline]
fn bary_weight(j: usize, k: usize) -> f64 {
    let w = if j == 0 || j == k - 1 { 0.5 } else { 1.0 };
    if j % 2 == 0 {
        w
    } else {
        -w
    }
}

/// Fills `out[..k]` with normalized interpolation weights so that the
/// interpolant at `t` equals `sum(out[j] * f[j])`. When `t` coincides with a
/// node the weights are the corresponding unit vector.
pub fn bary_weights(nodes: &[f64], t: f64, out: &mut [f64]) {
    let k = nodes.len();
    let scale = (nodes[k - 1] - nodes[0]).abs();
    for (j, &x) in nodes.iter().enumerate() {
        let d = t - x;
        if d == 0.0 || d.abs() < 1e-30 * scale {
            out[..k].iter_mut().for_each(|w| *w = 0.0);
            out[j] = 1.0;
            return;
        }
    }
    let mut total = 0.0;
    for j in 0..k {
        let w = bary_weight(j, k) / (t - nodes[j]);
        out[j] = w;
        total += w;
    }
    let inv = 1.0 / total;
    out[..k].iter_mut().for_each(|w| *w *= inv);
}

/// Barycentric Chebyshev interpolation on a single-interval grid.
pub fn bary_eval(nodes: &[f64], fvals: &[f64], t: f64) -> f64 {
    debug_assert_eq!(nodes.len(), fvals.len());
    let k = nodes.len();
    let mut num = 0.0;
    let mut den = 0.0;
    let scale = (nodes[k - 1] - nodes[0]).abs();
    for j in 0..k {
        let d = t - nodes[j];
        if d == 0.0 || d.abs() < 1e-30 * scale {
            return fvals[j];
        }
        let w = bary_weight(j, k) / d;
        num += w * fvals[j];
        den += w;
    }
    num / den
}

/// Matrix (row-major `k x k`) mapping values at the reference nodes on
/// `[-1, 1]` to values of the antiderivative vanishing at `-1`.
fn reference_integration_matrix(k: usize) -> Vec<f64> {
    let n = k - 1;
    let theta: Vec<f64> = (0..k).map(|i| PI * (n - i) as f64 / n as f64).collect();
    let mut s = vec![0.0; k * k];
    let mut c = vec![0.0; k + 2];
    let mut d = vec![0.0; k + 1];
    for col in 0..k {
        // Chebyshev coefficients of the `col`-th Lagrange basis function
        for (m, cm) in c.iter_mut().enumerate().take(k) {
            let half = if col == 0 || col == n { 0.5 } else { 1.0 };
            let mut v = 2.0 / n as f64 * half * (m as f64 * theta[col]).cos();
            if m == 0 || m == n {
                v *= 0.5;
            }
            *cm = v;
        }
        c[k] = 0.0;
        c[k + 1] = 0.0;
        d.iter_mut().for_each(|x| *x = 0.0);
        d[1] = c[0] - 0.5 * c[2];
        for m in 2..=k {
            d[m] = (c[m - 1] - c[m + 1]) / (2.0 * m as f64);
        }
        let at_left: f64 = (1..=k).map(|m| if m % 2 == 0 { d[m] } else { -d[m] }).sum();
        for row in 0..k {
            let mut v = 0.0;
            for m in 1..=k {
                v += d[m] * (m as f64 * theta[row]).cos();
            }
            s[row * k + col] = v - at_left;
        }
    }
    // the first node is the left endpoint
    for col in 0..k {
        s[col] = 0.0;
    }
    s
}

/// Differentiation matrix (row-major `k x k`) for the reference nodes.
fn reference_differentiation_matrix(k: usize) -> Vec<f64> {
    let x = cheb_nodes_unchecked(k, -1.0, 1.0);
    let mut dm = vec![0.0; k * k];
    for i in 0..k {
        let mut diag = 0.0;
        for j in 0..k {
            if i != j {
                let v = bary_weight(j, k) / bary_weight(i, k) / (x[i] - x[j]);
                dm[i * k + j] = v;
                diag -= v;
            }
        }
        dm[i * k + i] = diag;
    }
    dm
}

/// How the interval containing a point is located.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lookup {
    /// Binary search over the breakpoints.
    Generic,
    /// Breakpoints `(pi/2) 2^(i-L)` for `i = 1..L`, mirrored about `pi/2`.
    SymmetricDyadic,
    /// Breakpoints `first * ratio^j`, with the final breakpoint possibly
    /// truncated.
    Geometric { ratio: f64 },
}

/// A `k`-point piecewise Chebyshev grid.
#[derive(Debug, Clone)]
pub struct PiecewiseChebGrid {
    breakpoints: Vec<f64>,
    k: usize,
    nodes: Vec<f64>,
    lookup: Lookup,
    integ: Vec<f64>,
    diff: Vec<f64>,
}

impl PiecewiseChebGrid {
    pub fn new(breakpoints: Vec<f64>, k: usize) -> Result<Self> {
        Self::with_lookup(breakpoints, k, Lookup::Generic)
    }

    pub fn with_lookup(breakpoints: Vec<f64>, k: usize, lookup: Lookup) -> Result<Self> {
        if !(2..=MAX_POINTS).contains(&k) {
            bail!(Parameter, "points per interval must be in 2..={MAX_POINTS}, got {k}");
        }
        if breakpoints.len() < 2 {
            bail!(Parameter, "need at least two breakpoints");
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            bail!(Parameter, "non-finite breakpoint");
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            bail!(Parameter, "breakpoints must be strictly increasing");
        }
        let m = breakpoints.len();
        let mut nodes = Vec::with_capacity((k - 1) * (m - 1) + 1);
        for (j, w) in breakpoints.windows(2).enumerate() {
            let local = cheb_nodes_unchecked(k, w[0], w[1]);
            let skip = usize::from(j > 0);
            nodes.extend_from_slice(&local[skip..]);
        }
        Ok(Self {
            breakpoints,
            k,
            nodes,
            lookup,
            integ: reference_integration_matrix(k),
            diff: reference_differentiation_matrix(k),
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn points_per_interval(&self) -> usize {
        self.k
    }

    pub fn num_intervals(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn lookup(&self) -> Lookup {
        self.lookup
    }

    pub fn lo(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn hi(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Offset into `nodes` of the first node of interval `j`.
    #[inline]
    pub fn interval_offset(&self, j: usize) -> usize {
        j * (self.k - 1)
    }

    pub fn interval_nodes(&self, j: usize) -> &[f64] {
        let off = self.interval_offset(j);
        &self.nodes[off..off + self.k]
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo() && t <= self.hi()
    }

    /// Index of the interval containing `t`.
    pub fn locate(&self, t: f64) -> Result<usize> {
        if !self.contains(t) {
            bail!(Domain, "point {t} outside [{}, {}]", self.lo(), self.hi());
        }
        Ok(self.locate_unchecked(t))
    }

    fn locate_unchecked(&self, t: f64) -> usize {
        let bp = &self.breakpoints;
        let last = bp.len() - 2;
        let guess = match self.lookup {
            Lookup::Generic => {
                // first breakpoint strictly greater than t
                let idx = bp.partition_point(|&b| b <= t);
                return idx.saturating_sub(1).min(last);
            }
            Lookup::SymmetricDyadic => {
                let mid = 0.5 * PI;
                let half = bp.len() / 2; // index of the pi/2 breakpoint
                if t <= mid {
                    let lev = (t / mid).log2().floor();
                    (half as f64 + lev).max(0.0) as usize
                } else {
                    let lev = ((PI - t) / mid).log2().floor();
                    let mirrored = (half as f64 + lev).max(0.0) as usize;
                    // interval index mirrors as j -> (m-2) - j
                    last.saturating_sub(mirrored)
                }
            }
            Lookup::Geometric { ratio } => {
                let lev = (t / bp[0]).ln() / ratio.ln();
                if lev.is_finite() && lev > 0.0 {
                    lev.floor() as usize
                } else {
                    0
                }
            }
        };
        let mut j = guess.min(last);
        while j > 0 && t < bp[j] {
            j -= 1;
        }
        while j < last && t >= bp[j + 1] {
            j += 1;
        }
        j
    }

    /// Normalized interpolation weights at `t`; returns the offset of the
    /// first node of the containing interval.
    pub fn weights_at(&self, t: f64, out: &mut [f64]) -> Result<usize> {
        let j = self.locate(t)?;
        bary_weights(self.interval_nodes(j), t, out);
        Ok(self.interval_offset(j))
    }

    /// Evaluates the piecewise interpolant of `fvals` at `t`.
    pub fn eval(&self, fvals: &[f64], t: f64) -> Result<f64> {
        debug_assert_eq!(fvals.len(), self.len());
        let j = self.locate(t)?;
        let off = self.interval_offset(j);
        Ok(bary_eval(self.interval_nodes(j), &fvals[off..off + self.k], t))
    }

    /// Values of `F(t) = int_{lo}^{t} f(s) ds` at every node.
    pub fn spectral_integrate(&self, fvals: &[f64]) -> Vec<f64> {
        assert_eq!(fvals.len(), self.len(), "value count does not match grid");
        let k = self.k;
        let mut out = vec![0.0; self.len()];
        let mut acc = 0.0;
        for j in 0..self.num_intervals() {
            let off = self.interval_offset(j);
            let h = 0.5 * (self.breakpoints[j + 1] - self.breakpoints[j]);
            let f = &fvals[off..off + k];
            for i in 1..k {
                let row = &self.integ[i * k..(i + 1) * k];
                let v: f64 = row.iter().zip(f).map(|(a, b)| a * b).sum();
                out[off + i] = acc + h * v;
            }
            acc = out[off + k - 1];
        }
        out
    }

    /// Spectral derivative of `fvals`, computed per interval. At shared
    /// breakpoints the two one-sided values are averaged.
    pub fn differentiate(&self, fvals: &[f64]) -> Vec<f64> {
        assert_eq!(fvals.len(), self.len(), "value count does not match grid");
        let k = self.k;
        let mut out = vec![0.0; self.len()];
        let mut counts = vec![0u8; self.len()];
        for j in 0..self.num_intervals() {
            let off = self.interval_offset(j);
            let scale = 2.0 / (self.breakpoints[j + 1] - self.breakpoints[j]);
            let f = &fvals[off..off + k];
            for i in 0..k {
                let row = &self.diff[i * k..(i + 1) * k];
                let v: f64 = row.iter().zip(f).map(|(a, b)| a * b).sum();
                out[off + i] += scale * v;
                counts[off + i] += 1;
            }
        }
        for (v, c) in out.iter_mut().zip(counts) {
            *v /= c as f64;
        }
        out
    }

    /// Reference integration matrix on `[-1, 1]` (row-major).
    pub(crate) fn reference_integration(&self) -> &[f64] {
        &self.integ
    }
}

/// Interpolation weights for one point of a bivariate table.
#[derive(Debug, Clone, Copy)]
pub struct CellWeights {
    pub t_offset: usize,
    pub v_offset: usize,
    pub wt: [f64; MAX_POINTS],
    pub wv: [f64; MAX_POINTS],
}

/// Values of a smooth function of `(t, v)` on the tensor product of two
/// piecewise Chebyshev grids. `values[i * nv + j]` is the value at
/// `(tgrid.nodes()[i], vgrid.nodes()[j])`.
#[derive(Debug, Clone)]
pub struct BivariateChebTable {
    nt: usize,
    nv: usize,
    kt: usize,
    kv: usize,
    values: Vec<f64>,
}

impl BivariateChebTable {
    pub fn new(tgrid: &PiecewiseChebGrid, vgrid: &PiecewiseChebGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != tgrid.len() * vgrid.len() {
            bail!(
                Parameter,
                "table has {} values, grids need {} x {}",
                values.len(),
                tgrid.len(),
                vgrid.len()
            );
        }
        Ok(Self {
            nt: tgrid.len(),
            nv: vgrid.len(),
            kt: tgrid.points_per_interval(),
            kv: vgrid.points_per_interval(),
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nt, self.nv)
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nv + j]
    }

    /// Contracts the table against precomputed cell weights.
    #[inline]
    pub fn contract(&self, w: &CellWeights) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.kt {
            let row = &self.values[(w.t_offset + i) * self.nv + w.v_offset..][..self.kv];
            let inner: f64 = row.iter().zip(&w.wv[..self.kv]).map(|(a, b)| a * b).sum();
            acc += w.wt[i] * inner;
        }
        acc
    }

    /// Values along the `t` grid at a fixed `v`, using `v`-weights only.
    pub fn column_at(&self, v_offset: usize, wv: &[f64]) -> Vec<f64> {
        (0..self.nt)
            .map(|i| {
                let row = &self.values[i * self.nv + v_offset..][..self.kv];
                row.iter().zip(wv).map(|(a, b)| a * b).sum()
            })
            .collect()
    }
}

/// Interpolation weights for `(t, v)` on a pair of grids.
pub fn cell_weights(tgrid: &PiecewiseChebGrid, vgrid: &PiecewiseChebGrid, t: f64, v: f64) -> Result<CellWeights> {
    let mut w = CellWeights {
        t_offset: 0,
        v_offset: 0,
        wt: [0.0; MAX_POINTS],
        wv: [0.0; MAX_POINTS],
    };
    w.t_offset = tgrid.weights_at(t, &mut w.wt)?;
    w.v_offset = vgrid.weights_at(v, &mut w.wv)?;
    Ok(w)
}

/// Tensor-product barycentric interpolation of a bivariate table.
pub fn bivar_eval(
    tgrid: &PiecewiseChebGrid,
    vgrid: &PiecewiseChebGrid,
    table: &BivariateChebTable,
    t: f64,
    v: f64,
) -> Result<f64> {
    let w = cell_weights(tgrid, vgrid, t, v)?;
    Ok(table.contract(&w))
}
