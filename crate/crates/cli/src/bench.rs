//! Wall-clock sweeps printed as CSV (`suite,n,median_s,per_item_s`).

use std::io::Write;
use std::time::{Duration, Instant};

use clap::ValueEnum;
use fastjacobi::jacobi_ref::JacobiParams;
use fastjacobi::jactransform::TransformPlan;
use fastjacobi::phasefn::PhaseExpansion;
use fastjacobi::quadrule::gauss_jacobi;
use fastjacobi::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, PartialEq, ValueEnum)]
pub enum Suite {
    Construction,
    Eval,
    Quad,
    Transform,
    All,
}

const EVAL_POINTS: usize = 10_000;

fn median(runs: usize, mut f: impl FnMut() -> Result<()>) -> Result<Duration> {
    let mut times = Vec::with_capacity(runs);
    for _ in 0..runs {
        let t = Instant::now();
        f()?;
        times.push(t.elapsed());
    }
    times.sort();
    Ok(times[runs / 2])
}

fn row(w: &mut impl Write, suite: &str, n: usize, t: Duration, items: usize) -> Result<()> {
    let s = t.as_secs_f64();
    writeln!(w, "{suite},{n},{s:.6e},{:.6e}", s / items as f64)?;
    w.flush()?;
    Ok(())
}

fn capped(sizes: &[usize], max_n: Option<usize>) -> impl Iterator<Item = usize> + '_ {
    sizes.iter().copied().filter(move |&n| max_n.is_none_or(|m| n <= m))
}

pub fn run(suite: Suite, max_n: Option<usize>, runs: usize, w: &mut impl Write) -> Result<()> {
    let params = JacobiParams::new(-0.25, 1.0 / 3.0)?;
    writeln!(w, "suite,n,median_s,per_item_s")?;
    let all = suite == Suite::All;
    if all || suite == Suite::Construction {
        for nmax in capped(&[1_000, 10_000, 100_000, 1_000_000], max_n) {
            let t = median(runs, || PhaseExpansion::build(&params, nmax).map(drop))?;
            row(w, "construction", nmax, t, 1)?;
        }
    }
    if all || suite == Suite::Eval {
        for nmax in capped(&[1 << 10, 1 << 15, 1 << 20], max_n) {
            let exp = PhaseExpansion::build(&params, nmax)?;
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let (lo, hi) = (exp.tgrid().lo(), exp.tgrid().hi());
            let pts: Vec<(f64, f64)> = (0..EVAL_POINTS).map(|_| (rng.random_range(lo..hi), rng.random_range(27.0..nmax as f64))).collect();
            let t = median(runs, || {
                let mut s = 0.0;
                for &(t, v) in &pts {
                    s += exp.eval_ptilde(t, v)?;
                }
                std::hint::black_box(s);
                Ok(())
            })?;
            row(w, "eval", nmax, t, EVAL_POINTS)?;
        }
    }
    if all || suite == Suite::Quad {
        let q = JacobiParams::new(0.0, -0.4)?;
        for n in capped(&[1_000, 10_000, 100_000, 1_000_000], max_n) {
            let t = median(runs, || gauss_jacobi(&q, n).map(drop))?;
            row(w, "quad", n, t, n)?;
        }
    }
    if all || suite == Suite::Transform {
        let p = JacobiParams::new(-0.25, 0.0)?;
        for n in capped(&[1 << 10, 1 << 12, 1 << 14, 1 << 16, 1 << 18, 1 << 20], max_n) {
            let exp = PhaseExpansion::build(&p, n)?;
            let plan = TransformPlan::new(&exp, n, 1e-12)?;
            let alpha: Vec<f64> = (0..n).map(|k| 1.0 / (k + 1) as f64).collect();
            let t = median(runs, || plan.forward(&alpha).map(drop))?;
            row(w, "transform", n, t, n)?;
        }
    }
    Ok(())
}
