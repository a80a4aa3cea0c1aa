use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use fastjacobi::jacobi_ref::{self, JacobiParams, ASYMPTOTIC_MIN_DEGREE};
use fastjacobi::jactransform::{dense_jacobi_matrix, TransformPlan, MAX_DENSE_N};
use fastjacobi::phasefn::PhaseExpansion;
use fastjacobi::quadrule::{self, QuadratureRule, MAX_REFERENCE_DEGREE};
use fastjacobi::vecio;
use fastjacobi::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod bench;

#[derive(Parser)]
#[command(name = "fastjacobi", version, about = "Jacobi polynomials, Gauss-Jacobi rules and Jacobi transforms")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the phase expansion for (a, b) up to degree nmax and save it
    BuildPhase {
        #[arg(short, long, allow_hyphen_values = true)]
        a: f64,
        #[arg(short, long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long)]
        nmax: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Evaluate P~_v(t) (or P_v(x)) from a phase file, as CSV
    Eval(EvalArgs),
    /// Compute a Gauss-Jacobi rule, as CSV
    Quad {
        #[arg(short, long, allow_hyphen_values = true)]
        a: f64,
        #[arg(short, long, allow_hyphen_values = true)]
        b: f64,
        #[arg(short, long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Kind::Standard)]
        kind: Kind,
        /// Output file (default: stdout)
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Compare against the reference rule and report the deviation
        #[arg(long)]
        verify: bool,
    },
    /// Apply the forward or inverse transform to a vector file
    Transform {
        #[arg(long)]
        phase: PathBuf,
        #[arg(long, value_enum, default_value_t = Direction::Forward)]
        direction: Direction,
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        eps: f64,
        /// Compare against the dense matrix (n <= 4096)
        #[arg(long)]
        verify_dense: bool,
        /// Also report max |inverse(forward(x)) - x| (or the reverse order)
        #[arg(long)]
        round_trip: bool,
    },
    /// Timing sweeps, as CSV
    Bench {
        #[arg(value_enum, default_value_t = bench::Suite::All)]
        suite: bench::Suite,
        /// Largest size in the sweeps
        #[arg(long)]
        max_n: Option<usize>,
        /// Runs per measurement; the median is reported
        #[arg(long, default_value_t = 5)]
        runs: usize,
    },
}

#[derive(clap::Args)]
struct EvalArgs {
    #[arg(long)]
    phase: PathBuf,
    /// Degree for the listed points
    #[arg(long)]
    nu: Option<f64>,
    /// Comma-separated angles in (0, pi)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "x")]
    t: Option<Vec<f64>>,
    /// Comma-separated points in [-1, 1]; values are the unnormalized P_v(x)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Option<Vec<f64>>,
    /// Evaluate at this many random (t, v) in the range of the expansion
    #[arg(long, conflicts_with_all = ["t", "x", "nu"])]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Add reference values and report the largest error
    #[arg(long)]
    compare_recurrence: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Standard,
    Modified,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Direction {
    Forward,
    Inverse,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parameter(_) | Error::Domain(_) | Error::Format(_) => 2,
        Error::Accuracy(_) | Error::Internal(_) => 3,
        Error::Io(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cmd: Command) -> fastjacobi::Result<()> {
    match cmd {
        Command::BuildPhase { a, b, nmax, out } => build_phase(a, b, nmax, &out),
        Command::Eval(args) => eval(&args),
        Command::Quad { a, b, n, kind, out, verify } => quad(a, b, n, kind, out.as_deref(), verify),
        Command::Transform { phase, direction, input, out, eps, verify_dense, round_trip } => {
            transform(&phase, direction, &input, &out, eps, verify_dense, round_trip)
        }
        Command::Bench { suite, max_n, runs } => {
            if runs == 0 {
                return Err(Error::Parameter("--runs must be positive".into()));
            }
            bench::run(suite, max_n, runs, &mut io::stdout().lock())
        }
    }
}

fn output(path: Option<&Path>) -> fastjacobi::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn build_phase(a: f64, b: f64, nmax: usize, out: &Path) -> fastjacobi::Result<()> {
    let params = JacobiParams::new(a, b)?;
    let t = Instant::now();
    let exp = PhaseExpansion::build(&params, nmax)?;
    let elapsed = t.elapsed();
    exp.save(out)?;
    let size = std::fs::metadata(out)?.len();
    println!("construction time: {:.6} s", elapsed.as_secs_f64());
    println!("file size: {size} bytes");
    Ok(())
}

/// `P~_v(t)`, falling back to the reference evaluators below the range of
/// the expansion.
fn ptilde(exp: &PhaseExpansion, t: f64, v: f64) -> fastjacobi::Result<f64> {
    if v < ASYMPTOTIC_MIN_DEGREE {
        jacobi_ref::ptilde_ref(exp.params(), v, t)
    } else {
        exp.eval_ptilde(t, v)
    }
}

/// Reference value: the recurrence for integer degrees, the series and
/// asymptotic evaluators otherwise.
fn ptilde_reference(params: &JacobiParams, t: f64, v: f64) -> fastjacobi::Result<f64> {
    if v.fract() == 0.0 && v >= 0.0 {
        Ok(jacobi_ref::ptilde_recurrence(params, v as usize, t).0)
    } else {
        jacobi_ref::ptilde_ref(params, v, t)
    }
}

fn eval(args: &EvalArgs) -> fastjacobi::Result<()> {
    let exp = PhaseExpansion::load(&args.phase)?;
    let params = *exp.params();
    // (t or x, degree, whether the point is x)
    let points: Vec<(f64, f64, bool)> = if let Some(count) = args.random {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let (lo, hi) = (exp.tgrid().lo(), exp.tgrid().hi());
        (0..count).map(|_| (rng.random_range(lo..hi), rng.random_range(ASYMPTOTIC_MIN_DEGREE..exp.nmax() as f64), false)).collect()
    } else {
        let Some(v) = args.nu else {
            return Err(Error::Parameter("--nu is required unless --random is given".into()));
        };
        if !(v >= 0.0) {
            return Err(Error::Parameter(format!("degree must be nonnegative, got {v}")));
        }
        match (&args.t, &args.x) {
            (Some(ts), _) => ts.iter().map(|&t| (t, v, false)).collect(),
            (None, Some(xs)) => xs.iter().map(|&x| (x, v, true)).collect(),
            (None, None) => Vec::new(),
        }
    };
    let x_mode = args.x.is_some() && args.random.is_none();
    let mut w = output(args.out.as_deref())?;
    let var = if x_mode { "x" } else { "t" };
    if args.compare_recurrence {
        writeln!(w, "{var},nu,value,reference,abs_error,status")?;
    } else {
        writeln!(w, "{var},nu,value,status")?;
    }
    let mut worst: f64 = 0.0;
    let mut flagged = 0;
    for &(s, v, is_x) in &points {
        let row = eval_point(&exp, &params, s, v, is_x, args.compare_recurrence);
        match row {
            Ok((val, reference)) => {
                if let Some(r) = reference {
                    let err = (val - r).abs();
                    worst = worst.max(err);
                    writeln!(w, "{s:.16e},{v:.16e},{val:.16e},{r:.16e},{err:.3e},ok")?;
                } else {
                    writeln!(w, "{s:.16e},{v:.16e},{val:.16e},ok")?;
                }
            }
            Err(e) => {
                flagged += 1;
                let status = match e {
                    Error::Domain(_) => "out_of_range",
                    _ => "failed",
                };
                if args.compare_recurrence {
                    writeln!(w, "{s:.16e},{v:.16e},NaN,NaN,NaN,{status}")?;
                } else {
                    writeln!(w, "{s:.16e},{v:.16e},NaN,{status}")?;
                }
            }
        }
    }
    w.flush()?;
    if flagged > 0 {
        eprintln!("{flagged} point(s) flagged");
    }
    if args.compare_recurrence {
        eprintln!("max error: {worst:.3e} over {} point(s)", points.len() - flagged);
    }
    Ok(())
}

fn eval_point(exp: &PhaseExpansion, params: &JacobiParams, s: f64, v: f64, is_x: bool, compare: bool) -> fastjacobi::Result<(f64, Option<f64>)> {
    if is_x {
        if !(-1.0..=1.0).contains(&s) {
            return Err(Error::Domain(format!("x = {s} outside [-1, 1]")));
        }
        let t = s.acos();
        let val = jacobi_ref::p_from_ptilde(params, v, t, ptilde(exp, t, v)?)?;
        let reference = if compare && v.fract() == 0.0 {
            Some(*jacobi_ref::recurrence_eval(params, v as usize, s).last().expect("degree entry"))
        } else if compare {
            Some(jacobi_ref::p_from_ptilde(params, v, t, ptilde_reference(params, t, v)?)?)
        } else {
            None
        };
        return Ok((val, reference));
    }
    if !(s > 0.0 && s < std::f64::consts::PI) {
        return Err(Error::Domain(format!("t = {s} outside (0, pi)")));
    }
    let val = ptilde(exp, s, v)?;
    let reference = if compare { Some(ptilde_reference(params, s, v)?) } else { None };
    Ok((val, reference))
}

fn write_rule<W: Write>(mut w: W, params: &JacobiParams, rule: &QuadratureRule) -> io::Result<()> {
    writeln!(w, "# gauss-jacobi a={} b={} n={} kind={}", params.a(), params.b(), rule.n(), rule.kind.name())?;
    writeln!(w, "node,weight")?;
    for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
        writeln!(w, "{x:.16e},{wt:.16e}")?;
    }
    w.flush()
}

fn quad(a: f64, b: f64, n: usize, kind: Kind, out: Option<&Path>, verify: bool) -> fastjacobi::Result<()> {
    let params = JacobiParams::new(a, b)?;
    let rule = match kind {
        Kind::Standard => quadrule::gauss_jacobi(&params, n)?,
        Kind::Modified => quadrule::modified_gauss_jacobi(&params, n)?,
    };
    write_rule(output(out)?, &params, &rule)?;
    if verify {
        if n > MAX_REFERENCE_DEGREE {
            return Err(Error::Parameter(format!("--verify supports n <= {MAX_REFERENCE_DEGREE}")));
        }
        let reference = match kind {
            Kind::Standard => quadrule::gauss_jacobi_reference(&params, n)?,
            Kind::Modified => quadrule::modified_gauss_jacobi_reference(&params, n)?,
        };
        let node_err = rule.nodes.iter().zip(&reference.nodes).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let weight_err = rule.weights.iter().zip(&reference.weights).map(|(x, y)| ((x - y) / y).abs()).fold(0.0, f64::max);
        eprintln!("max node error: {node_err:.3e}");
        eprintln!("max relative weight error: {weight_err:.3e}");
    }
    Ok(())
}

fn transform(phase: &Path, direction: Direction, input: &Path, out: &Path, eps: f64, verify_dense: bool, round_trip: bool) -> fastjacobi::Result<()> {
    let exp = PhaseExpansion::load(phase)?;
    let x = vecio::load_vector(input)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Format("vector file holds non-finite values".into()));
    }
    let n = x.len();
    let t = Instant::now();
    let plan = TransformPlan::new(&exp, n, eps)?;
    let plan_time = t.elapsed();
    let apply = |v: &[f64], d: Direction| if d == Direction::Forward { plan.forward(v) } else { plan.inverse(v) };
    let t = Instant::now();
    let y = apply(&x, direction)?;
    let apply_time = t.elapsed();
    vecio::save_vector(out, &y)?;
    println!("n: {n}, rank: {}, plan: {:.6} s, apply: {:.6} s", plan.rank(), plan_time.as_secs_f64(), apply_time.as_secs_f64());
    if round_trip {
        let back_dir = if direction == Direction::Forward { Direction::Inverse } else { Direction::Forward };
        let back = apply(&y, back_dir)?;
        let err = back.iter().zip(&x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        println!("round-trip error: {err:.3e}");
    }
    if verify_dense {
        if n > MAX_DENSE_N {
            return Err(Error::Parameter(format!("--verify-dense supports n <= {MAX_DENSE_N}")));
        }
        let d = dense_jacobi_matrix(exp.params(), n)?;
        let want: Vec<f64> = match direction {
            Direction::Forward => d.chunks_exact(n).map(|row| row.iter().zip(&x).map(|(p, q)| p * q).sum()).collect(),
            Direction::Inverse => {
                let mut acc = vec![0.0; n];
                for (row, &xj) in d.chunks_exact(n).zip(&x) {
                    acc.iter_mut().zip(row).for_each(|(o, p)| *o += p * xj);
                }
                acc
            }
        };
        let err = y.iter().zip(&want).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        println!("max deviation from dense: {err:.3e}");
    }
    Ok(())
}
