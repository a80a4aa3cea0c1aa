//! Complex FFT of arbitrary length: iterative radix-2 for powers of two,
//! Bluestein's chirp convolution otherwise.

use std::f64::consts::PI;

use num_complex::Complex64;

#[derive(Clone, Debug)]
enum Kind {
    Trivial,
    Radix2 { twiddles: Vec<Complex64>, rev: Vec<u32> },
    FourStep(Box<FourStep>),
    Bluestein { inner: Box<FftPlan>, chirp: Vec<Complex64>, filter: Vec<Complex64> },
}

/// A reusable plan for transforms of one length.
#[derive(Clone, Debug)]
pub struct FftPlan {
    n: usize,
    kind: Kind,
}

fn cis(theta: f64) -> Complex64 {
    let (s, c) = theta.sin_cos();
    Complex64::new(c, s)
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        let kind = if n <= 1 {
            Kind::Trivial
        } else if n.is_power_of_two() && n >= FOUR_STEP_MIN {
            Kind::FourStep(Box::new(FourStep::new(n)))
        } else if n.is_power_of_two() {
            let bits = n.trailing_zeros();
            let rev = (0..n as u32).map(|i| i.reverse_bits() >> (32 - bits)).collect();
            Kind::Radix2 { twiddles: stage_twiddles(n), rev }
        } else {
            let m = (2 * n - 1).next_power_of_two();
            let inner = FftPlan::new(m);
            // exp(-i pi j^2 / n), with j^2 reduced mod 2n to keep the argument small
            let chirp: Vec<Complex64> = (0..n).map(|j| cis(-PI * ((j as u128 * j as u128) % (2 * n as u128)) as f64 / n as f64)).collect();
            let mut filter = vec![Complex64::new(0.0, 0.0); m];
            filter[0] = chirp[0].conj();
            for j in 1..n {
                filter[j] = chirp[j].conj();
                filter[m - j] = chirp[j].conj();
            }
            inner.forward(&mut filter);
            let scale = 1.0 / m as f64;
            filter.iter_mut().for_each(|f| *f *= scale);
            Kind::Bluestein { inner: Box::new(inner), chirp, filter }
        };
        Self { n, kind }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In place `X_k = sum_j x_j exp(-2 pi i j k / n)`.
    pub fn forward(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.n, "FFT length mismatch");
        match &self.kind {
            Kind::Trivial => {}
            Kind::Radix2 { twiddles, rev } => radix2(data, twiddles, rev),
            Kind::FourStep(fs) => fs.forward(data),
            Kind::Bluestein { inner, chirp, filter } => {
                let m = inner.len();
                let mut work = vec![Complex64::new(0.0, 0.0); m];
                for ((w, x), c) in work.iter_mut().zip(data.iter()).zip(chirp) {
                    *w = x * c;
                }
                inner.forward(&mut work);
                for (w, f) in work.iter_mut().zip(filter) {
                    *w *= f;
                }
                inner.inverse(&mut work);
                for ((x, w), c) in data.iter_mut().zip(&work).zip(chirp) {
                    *x = w * c;
                }
            }
        }
    }

    /// In place `x_j = sum_k X_k exp(+2 pi i j k / n)` (no `1/n` factor).
    pub fn inverse(&self, data: &mut [Complex64]) {
        data.iter_mut().for_each(|x| *x = x.conj());
        self.forward(data);
        data.iter_mut().for_each(|x| *x = x.conj());
    }
}

/// Sizes from which the cache-friendly split into rows is used.
const FOUR_STEP_MIN: usize = 1 << 16;
const TWIDDLE_SPLIT: usize = 10;
const COLUMN_BATCH: usize = 16;

thread_local! {
    /// Output buffer of the split path, kept to avoid faulting in fresh
    /// pages on every call.
    static SCRATCH: std::cell::RefCell<Vec<Complex64>> = const { std::cell::RefCell::new(Vec::new()) };
}

/// `n = n1 n2`: `n1` transforms of length `n2`, a twiddle multiply, then `n2`
/// transforms of length `n1` written out in output order.
#[derive(Clone, Debug)]
struct FourStep {
    n1: usize,
    n2: usize,
    p1: FftPlan,
    p2: FftPlan,
    fine: Vec<Complex64>,
    coarse: Vec<Complex64>,
}

impl FourStep {
    fn new(n: usize) -> Self {
        let bits = n.trailing_zeros() as usize;
        let n1 = 1 << (bits / 2);
        let n2 = n / n1;
        let fine = (0..1 << TWIDDLE_SPLIT).map(|m| cis(-2.0 * PI * m as f64 / n as f64)).collect();
        let coarse = (0..n >> TWIDDLE_SPLIT).map(|m| cis(-2.0 * PI * (m << TWIDDLE_SPLIT) as f64 / n as f64)).collect();
        Self { n1, n2, p1: FftPlan::new(n1), p2: FftPlan::new(n2), fine, coarse }
    }

    /// `exp(-2 pi i m / n)` for `m < n`; `j1 k2 < n1 n2` always holds.
    #[inline]
    fn twiddle(&self, m: usize) -> Complex64 {
        self.coarse[m >> TWIDDLE_SPLIT] * self.fine[m & ((1 << TWIDDLE_SPLIT) - 1)]
    }

    fn forward(&self, data: &mut [Complex64]) {
        let (n1, n2) = (self.n1, self.n2);
        // x[j1 + n1 j2]: length-n2 transforms down the strided columns, a few
        // columns at a time through a contiguous buffer
        let mut cols = vec![Complex64::new(0.0, 0.0); COLUMN_BATCH * n2];
        for c0 in (0..n1).step_by(COLUMN_BATCH) {
            let nb = COLUMN_BATCH.min(n1 - c0);
            for j2 in 0..n2 {
                let row = &data[c0 + n1 * j2..][..nb];
                for (b, &x) in row.iter().enumerate() {
                    cols[b * n2 + j2] = x;
                }
            }
            for (b, col) in cols.chunks_exact_mut(n2).take(nb).enumerate() {
                self.p2.forward(col);
                let j1 = c0 + b;
                for (k2, v) in col.iter_mut().enumerate().skip(1) {
                    *v *= self.twiddle(j1 * k2);
                }
            }
            for j2 in 0..n2 {
                let row = &mut data[c0 + n1 * j2..][..nb];
                for (b, x) in row.iter_mut().enumerate() {
                    *x = cols[b * n2 + j2];
                }
            }
        }
        // rows are now contiguous in j1; after its transform row k2 holds
        // X[k2 + n2 k1] at position k1, written out a batch of rows at a time
        SCRATCH.with_borrow_mut(|work| {
            if work.len() < n1 * n2 {
                work.resize(n1 * n2, Complex64::new(0.0, 0.0));
            }
            let work = &mut work[..n1 * n2];
            self.rows_to_output(data, work);
            data.copy_from_slice(work);
        });
    }

    fn rows_to_output(&self, data: &mut [Complex64], work: &mut [Complex64]) {
        let (n1, n2) = (self.n1, self.n2);
        for (r, rows) in data.chunks_mut(COLUMN_BATCH * n1).enumerate() {
            let r0 = r * COLUMN_BATCH;
            for row in rows.chunks_exact_mut(n1) {
                self.p1.forward(row);
            }
            let nb = rows.len() / n1;
            for k1 in 0..n1 {
                let dst = &mut work[r0 + n2 * k1..][..nb];
                for (b, d) in dst.iter_mut().enumerate() {
                    *d = rows[b * n1 + k1];
                }
            }
        }
    }
}

/// For each stage half-length `h = 1, 2, 4, ...` the factors
/// `exp(-i pi k / h)`, `k < h`, stored from offset `h - 1`.
fn stage_twiddles(n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n);
    let mut h = 1;
    while h < n {
        out.extend((0..h).map(|k| cis(-PI * k as f64 / h as f64)));
        h *= 2;
    }
    out
}

fn radix2(data: &mut [Complex64], twiddles: &[Complex64], rev: &[u32]) {
    let n = data.len();
    for i in 0..n {
        let j = rev[i] as usize;
        if i < j {
            data.swap(i, j);
        }
    }
    let mut half = 1;
    if n.trailing_zeros() % 2 == 1 {
        for pair in data.chunks_exact_mut(2) {
            let t = pair[1];
            pair[1] = pair[0] - t;
            pair[0] += t;
        }
        half = 2;
    }
    // two radix-2 stages (half h, then 2h) per pass
    while half < n {
        let h = half;
        let tw1 = &twiddles[h - 1..2 * h - 1];
        let tw2 = &twiddles[2 * h - 1..3 * h - 1];
        for block in data.chunks_exact_mut(4 * h) {
            let (q01, q23) = block.split_at_mut(2 * h);
            let (q0, q1) = q01.split_at_mut(h);
            let (q2, q3) = q23.split_at_mut(h);
            for k in 0..h {
                let (w1, w2) = (tw1[k], tw2[k]);
                let (a1, a3) = (q1[k] * w1, q3[k] * w1);
                let (b0, b1) = (q0[k] + a1, q0[k] - a1);
                let (b2, b3) = (q2[k] + a3, q2[k] - a3);
                let c2 = b2 * w2;
                let c3 = b3 * w2;
                // -i * c3
                let c3 = Complex64::new(c3.im, -c3.re);
                q0[k] = b0 + c2;
                q2[k] = b0 - c2;
                q1[k] = b1 + c3;
                q3[k] = b1 - c3;
            }
        }
        half *= 4;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n).map(|k| x.iter().enumerate().map(|(j, v)| v * cis(-2.0 * PI * ((j * k) % n) as f64 / n as f64)).sum()).collect()
    }

    #[test]
    fn matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1usize, 2, 3, 5, 8, 12, 64, 97, 100, 256, 1000, 1 << 16, 1 << 17] {
            let x: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let want = if n <= 4096 {
                naive(&x)
            } else {
                // the radix-2 path as reference for the split path
                let bits = n.trailing_zeros();
                let tw = stage_twiddles(n);
                let rev: Vec<u32> = (0..n as u32).map(|i| i.reverse_bits() >> (32 - bits)).collect();
                let mut y = x.clone();
                radix2(&mut y, &tw, &rev);
                y
            };
            let plan = FftPlan::new(n);
            let mut got = x.clone();
            plan.forward(&mut got);
            let norm: f64 = x.iter().map(|v| v.norm()).sum();
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).norm() <= 1e-14 * norm.max(1.0) / (n as f64).sqrt().max(1.0) * 4.0, "n={n}");
            }
            plan.inverse(&mut got);
            for (g, v) in got.iter().zip(&x) {
                assert!((g / n as f64 - v).norm() <= 1e-14);
            }
        }
    }

    #[test]
    fn impulse_and_constant() {
        let plan = FftPlan::new(16);
        let mut x = vec![Complex64::new(0.0, 0.0); 16];
        x[0] = Complex64::new(1.0, 0.0);
        plan.forward(&mut x);
        assert!(x.iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        plan.forward(&mut x);
        assert!((x[0] - Complex64::new(16.0, 0.0)).norm() < 1e-13);
        assert!(x[1..].iter().all(|v| v.norm() < 1e-13));
    }
}
