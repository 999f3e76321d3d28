use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use hyperpower::harness::records::write_records;
use hyperpower::harness::surfaces::{
    emit_mmm_surface, emit_surfaces, write_mmm_surface, write_surface, SurfaceKind,
};
use hyperpower::harness::verify::{verify_tables, TABLE_TOL};
use hyperpower::harness::{
    gen_harmonic_matrix, run_problem, HarmonicRegressorSpec, Method, MethodSpec, Problem, RunOptions,
};
use hyperpower::matrix::io::{format_matrix, format_vector, parse_matrix, parse_vector};
use hyperpower::matrix::{solve_spd, Matrix};
use hyperpower::newton_schulz::{CompositeSpec, Execution, RateSchedule};
use hyperpower::series::{plan_order, split_candidates, table_plans};
use hyperpower::splitting::{split_auto, split_diagonal, split_scalar, split_scalar_default, Splitting};

#[derive(Parser)]
#[command(name = "hyperpower", version, about = "High-order Newton-Schulz inversion and accelerated Richardson iteration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the cheapest factorization found for a series order.
    Plan {
        #[arg(long)]
        order: usize,
    },
    /// Check every tabulated factorization against the direct Horner sum.
    VerifyTables {
        #[arg(long, default_value_t = 50)]
        instances: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Run an inversion method and write one record per step.
    Invert {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum)]
        method: InvertMethod,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, default_value_t = 1)]
        h: usize,
        #[arg(long, default_value_t = 5)]
        steps: usize,
        /// Composite rates: `x1,x2,...` for constant rates or `pow:M:W` for `W` rates of `M^k`.
        #[arg(long)]
        rates: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate θ in Aθ = b and write one record per step.
    Solve {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        rhs: PathBuf,
        /// Reference solution; defaults to a dense Cholesky solve.
        #[arg(long)]
        theta: Option<PathBuf>,
        #[arg(long, value_enum)]
        method: SolveMethod,
        #[arg(long, default_value_t = 3)]
        order: usize,
        /// Neumann order of the direct Richardson form; defaults to the order.
        #[arg(long)]
        q: Option<usize>,
        #[arg(long, default_value_t = 1)]
        h: usize,
        #[arg(long, default_value_t = 5)]
        steps: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Write the information matrix of a harmonic regressor.
    GenHarmonic {
        #[arg(long, value_delimiter = ',', default_value = "0.10,0.11,0.12")]
        freqs: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        bias: bool,
        #[arg(long)]
        out: PathBuf,
        /// Also write b = Aθ_*.
        #[arg(long)]
        rhs_out: Option<PathBuf>,
        /// Also write θ_*.
        #[arg(long)]
        theta_out: Option<PathBuf>,
    },
    /// Tabulate the exponent or multiplication-count surfaces.
    Surfaces {
        #[arg(long, value_enum)]
        kind: SurfaceArg,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, default_value_t = 5)]
        k_max: usize,
        #[arg(long, default_value_t = 1)]
        h: usize,
        #[arg(long, default_value_t = 0.99)]
        rho: f64,
    },
}

#[derive(clap::Args)]
struct Common {
    /// Output file; standard output when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SplitArg::Auto)]
    split: SplitArg,
    /// Offset of the scalar preconditioner; defaults to 1e-3·‖A‖∞.
    #[arg(long)]
    eps: Option<f64>,
    /// Record wall-clock time per step (output is then not reproducible).
    #[arg(long)]
    timing: bool,
    /// Run independent branches on worker threads.
    #[arg(long)]
    concurrent: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum InvertMethod {
    Ns,
    Double,
    Composite,
    Sri,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveMethod {
    Richardson,
    RichardsonRecursive,
    NsEstimator,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SplitArg {
    Auto,
    Diagonal,
    Scalar,
}

#[derive(Clone, Copy, ValueEnum)]
enum SurfaceArg {
    Fig1,
    Fig2,
    Fig3,
}

fn read_matrix(path: &Path) -> Result<Matrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_matrix(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_vector(path: &Path) -> Result<hyperpower::matrix::Vector> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_vector(&text).with_context(|| format!("parsing {}", path.display()))
}

fn splitting(a: &Matrix, common: &Common) -> Result<Splitting> {
    if common.eps.is_some() && common.split == SplitArg::Diagonal {
        bail!("--eps only applies to the scalar splitting");
    }
    Ok(match (common.split, common.eps) {
        (SplitArg::Diagonal, _) => split_diagonal(a)?,
        (_, Some(eps)) => split_scalar(a, eps)?,
        (SplitArg::Scalar, None) => split_scalar_default(a)?,
        (SplitArg::Auto, None) => split_auto(a)?,
    })
}

fn parse_rates(s: &str) -> Result<RateSchedule> {
    if let Some(rest) = s.strip_prefix("pow:") {
        let (m, w) = rest.split_once(':').context("expected pow:M:W")?;
        return Ok(RateSchedule::Power {
            m: m.parse().context("rate base")?,
            w: w.parse().context("rate count")?,
        });
    }
    let rates = s
        .split(',')
        .map(|x| x.trim().parse::<usize>().with_context(|| format!("bad rate {x:?}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(RateSchedule::Constant(CompositeSpec::new(rates)?))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn options(common: &Common) -> RunOptions {
    RunOptions {
        timing: common.timing,
        exec: if common.concurrent { Execution::Concurrent } else { Execution::Serial },
    }
}

fn report_divergence(diverged: &[Method]) {
    for m in diverged {
        eprintln!("warning: {m} diverged (error grew by more than 1e3)");
    }
}

fn plan(order: usize) -> Result<()> {
    let best = plan_order(order)?;
    println!("order {order}: {best}");
    println!("  mmm {} (with Y supplied {}), EI {:.4}", best.mmm_cost(), best.poly_cost(), best.efficiency_index());
    for t in table_plans().iter().filter(|p| p.order() == order) {
        println!("  table: {t}  mmm {}  {}", t.mmm_cost(), t.label().unwrap_or(""));
    }
    let cands = split_candidates(order)?;
    if !cands.is_empty() {
        println!("  splits:");
        for c in cands {
            println!(
                "    p={} w={}: plain mmm {}, nested mmm {} ({})",
                c.p,
                c.w,
                c.plain.mmm_cost(),
                c.nested.mmm_cost(),
                c.nested
            );
        }
    }
    Ok(())
}

fn verify(instances: usize, seed: u64) -> Result<bool> {
    let report = verify_tables(instances, 5, seed)?;
    for c in &report.checks {
        println!(
            "{} h={} mmm={} max_rel_err={:.3e} {}",
            if c.passed(TABLE_TOL) { "ok  " } else { "FAIL" },
            c.order,
            c.mmm_cost,
            c.max_rel_err,
            c.plan
        );
    }
    let ok = report.passed(TABLE_TOL);
    println!(
        "{} plans on {} instances in {:.2}s: {}",
        report.checks.len(),
        report.instances,
        report.elapsed.as_secs_f64(),
        if ok { "pass" } else { "FAIL" }
    );
    Ok(ok)
}

fn run() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Plan { order } => plan(order)?,
        Command::VerifyTables { instances, seed } => {
            if !verify(instances, seed)? {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Invert {
            matrix,
            method,
            order,
            h,
            steps,
            rates,
            common,
        } => {
            let a = read_matrix(&matrix)?;
            let method = match method {
                InvertMethod::Ns => Method::Ns,
                InvertMethod::Double => Method::Double,
                InvertMethod::Composite => Method::Composite,
                InvertMethod::Sri => Method::Sri,
            };
            let mut spec = MethodSpec::new(method, order).with_h(h);
            if let Some(r) = rates {
                spec = spec.with_rates(parse_rates(&r)?);
            }
            let problem = Problem::inversion(splitting(&a, &common)?);
            let run = run_problem(&problem, &[spec], steps, options(&common))?;
            write_records(&run.records, output(common.csv.as_deref())?)?;
            report_divergence(&run.diverged);
        }
        Command::Solve {
            matrix,
            rhs,
            theta,
            method,
            order,
            q,
            h,
            steps,
            common,
        } => {
            let a = read_matrix(&matrix)?;
            let b = read_vector(&rhs)?;
            let theta_star = match theta {
                Some(p) => read_vector(&p)?,
                None => solve_spd(&a.symmetrized(), &b).context("reference solve")?,
            };
            let method = match method {
                SolveMethod::Richardson => Method::Richardson,
                SolveMethod::RichardsonRecursive => Method::RichardsonRecursive,
                SolveMethod::NsEstimator => Method::NsEstimator,
            };
            let spec = MethodSpec::new(method, order).with_h(h).with_q(q.unwrap_or(order));
            if method == Method::RichardsonRecursive && spec.q != order {
                bail!("the recursive form needs q equal to the order");
            }
            let problem = Problem::estimation(splitting(&a, &common)?, b, theta_star)?;
            let run = run_problem(&problem, &[spec], steps, options(&common))?;
            write_records(&run.records, output(common.csv.as_deref())?)?;
            report_divergence(&run.diverged);
        }
        Command::GenHarmonic {
            freqs,
            samples,
            bias,
            out,
            rhs_out,
            theta_out,
        } => {
            let spec = HarmonicRegressorSpec::with_default_theta(freqs, samples, bias)?;
            let sys = gen_harmonic_matrix(&spec)?;
            fs::write(&out, format_matrix(&sys.a)).with_context(|| format!("writing {}", out.display()))?;
            if let Some(p) = rhs_out {
                fs::write(&p, format_vector(&sys.b)).with_context(|| format!("writing {}", p.display()))?;
            }
            if let Some(p) = theta_out {
                fs::write(&p, format_vector(&sys.theta_star)).with_context(|| format!("writing {}", p.display()))?;
            }
            eprintln!("dim {}, condition number {:.4e}", sys.a.dim(), sys.condition_number);
        }
        Command::Surfaces {
            kind,
            csv,
            n_max,
            k_max,
            h,
            rho,
        } => {
            let out = output(csv.as_deref())?;
            match kind {
                SurfaceArg::Fig1 => write_mmm_surface(&emit_mmm_surface(1..=7, 1..=6), out)?,
                SurfaceArg::Fig2 => write_surface(&emit_surfaces(SurfaceKind::DoubleNs, 2..=n_max, 1..=k_max, h, rho)?, out)?,
                SurfaceArg::Fig3 => {
                    write_surface(&emit_surfaces(SurfaceKind::Richardson, 2..=n_max, 1..=k_max, h, rho)?, out)?
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
