//! Command-line driver: each subcommand exercises one part of the
//! workbench and writes its results under the output directory.
//!
//! Exit codes: 0 on success, 2 when the request itself is invalid,
//! 3 when the numerics cannot deliver the requested result.

mod config;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::{pretty, write_atomic, Context, Overrides, RunConfig};
use fracdense::density::{
    approximate, approximate_smooth, blowup_l1_error, boundary_growth_constant, build_dictionary,
    fit_boundary_growth, growth_profile, span_solve,
};
use fracdense::fraclap::residual_report;
use fracdense::kernel::Bump;
use fracdense::polyapprox::{weierstrass_approx, MultiIndex, Polynomial};
use fracdense::{Error, Result};

#[derive(Parser)]
#[command(
    name = "fracdense",
    version,
    about = "Workbench for s-harmonic extensions: boundary growth, derivative spans, \
             blow-up families, and near-s-harmonic approximation of smooth targets"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Fractional order s in (0, 1)
    #[arg(long, global = true)]
    s: Option<f64>,
    /// Seed for the dictionary placement stream
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory receiving every output file
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// JSON file with run settings; explicit flags win over it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Quadrature tolerance (absolute and relative)
    #[arg(long, global = true)]
    quad_tol: Option<f64>,
    /// Points in the measurement grids
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Approximation method: taylor-rescale or global-lsq
    #[arg(long, global = true)]
    method: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the standard two-bump extension across its ball
    Extend,
    /// Boundary growth constant: closed form vs fitted power law
    Growth,
    /// L1 distance of the rescaled family to its one-sided limit
    Blowup {
        /// Blow-up direction, +1 or -1
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        direction: f64,
        /// Largest index, walked in doublings from 1
        #[arg(long, default_value_t = 64)]
        max_j: usize,
    },
    /// Solve for exterior data whose extension carries a Kronecker jet
    Span {
        /// Derivative order of the target jet
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Dictionary size; defaults to 2(order+1)+4
        #[arg(long)]
        count: Option<usize>,
    },
    /// Build a near-s-harmonic approximant of a target on the unit ball
    Approx {
        /// Builtin (square, cosine, gaussian-bump, runge) or a
        /// polynomial JSON file
        #[arg(long, default_value = "square")]
        target: String,
        /// Norm order k for the C^k certification
        #[arg(long, default_value_t = 0)]
        ck: usize,
        /// Requested C^k tolerance
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
    },
    /// Certify s-harmonicity of the two-bump extension on a grid
    Residual {
        /// Interior certification points across B_0.9
        #[arg(long, default_value_t = 9)]
        points: usize,
    },
    /// Polynomial approximation of a target by mollification
    Mollify {
        /// Builtin name or a polynomial JSON file
        #[arg(long, default_value = "cosine")]
        target: String,
        /// Number of derivatives the measured gap controls
        #[arg(long, default_value_t = 1)]
        smoothness: usize,
        /// Requested C^k budget
        #[arg(long, default_value_t = 0.5)]
        budget: f64,
    },
}

/// The canonical profile bump shared by extend, growth, blowup, and
/// residual.
fn standard_bump() -> Bump {
    Bump::new(2.5, 0.5, 1.0).expect("standard bump is valid")
}

enum Target {
    Poly(Polynomial),
    Smooth(&'static str),
}

fn smooth_eval(name: &str, x: f64) -> f64 {
    match name {
        "square" => 1.0 - x * x,
        "cosine" => x.cos(),
        "gaussian-bump" => (-x * x).exp(),
        "runge" => 1.0 / (1.0 + 25.0 * x * x),
        other => unreachable!("unvetted smooth target {other}"),
    }
}

fn resolve_target(name: &str) -> Result<Target> {
    match name {
        "square" => Ok(Target::Poly(Polynomial::new(vec![1.0, 0.0, -1.0]))),
        "cosine" => Ok(Target::Smooth("cosine")),
        "gaussian-bump" => Ok(Target::Smooth("gaussian-bump")),
        "runge" => Ok(Target::Smooth("runge")),
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::InvalidInput(format!(
                    "target {path:?} is neither a builtin (square, cosine, gaussian-bump, \
                     runge) nor a readable file: {e}"
                ))
            })?;
            Ok(Target::Poly(serde_json::from_str(&text)?))
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidInput(_)
        | Error::Geometry(_)
        | Error::BadExponent(_)
        | Error::BadEta(_)
        | Error::OrderTooHigh { .. }
        | Error::TooCloseToBoundary { .. }
        | Error::Support { .. }
        | Error::Io(_)
        | Error::Json(_) => 2,
        Error::NonConvergence { .. }
        | Error::NonFinite { .. }
        | Error::RankDeficient { .. }
        | Error::Overflow(_) => 3,
    }
}

fn init_thread_pool() {
    if let Ok(v) = std::env::var("FRACDENSE_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring invalid FRACDENSE_THREADS={v:?}"),
        }
    }
}

fn cmd_extend(ctx: &Context) -> Result<()> {
    let profile = growth_profile(&standard_bump(), &ctx.params, &ctx.quad)?;
    let mut csv = String::from("x,u\n");
    for i in 0..ctx.grid {
        let x = -1.0 + 2.0 * i as f64 / (ctx.grid - 1) as f64;
        let u = profile.extend(x)?;
        writeln!(csv, "{x:.16e},{u:.16e}").expect("string write");
    }
    let path = write_atomic(&ctx.out_dir, "extend.csv", &csv)?;
    eprintln!("extend: {} points -> {}", ctx.grid, path.display());
    Ok(())
}

fn cmd_growth(ctx: &Context) -> Result<()> {
    let bump = standard_bump();
    let kappa_direct = boundary_growth_constant(&bump, &ctx.params, &ctx.quad)?;
    let profile = growth_profile(&bump, &ctx.params, &ctx.quad)?;
    let eps: Vec<f64> = (4..10).map(|k| 2f64.powi(-k)).collect();
    let (kappa_fit, s_fit) = fit_boundary_growth(&profile, &eps)?;
    let body = serde_json::json!({
        "kappa_direct": kappa_direct,
        "kappa_fit": kappa_fit,
        "s_fit": s_fit,
    });
    let path = write_atomic(&ctx.out_dir, "growth.json", &pretty(&body)?)?;
    eprintln!(
        "growth: kappa_direct {kappa_direct:.6e}, kappa_fit {kappa_fit:.6e}, s_fit {s_fit:.6} \
         -> {}",
        path.display()
    );
    Ok(())
}

fn cmd_blowup(ctx: &Context, direction: f64, max_j: usize) -> Result<()> {
    if max_j < 1 {
        return Err(Error::InvalidInput(format!(
            "largest blow-up index must be at least 1, got {max_j}"
        )));
    }
    let bump = standard_bump();
    let base = growth_profile(&bump, &ctx.params, &ctx.quad)?;
    let kappa = boundary_growth_constant(&bump, &ctx.params, &ctx.quad)?;
    let mut csv = String::from("j,error\n");
    let mut j = 1usize;
    while j <= max_j {
        let err = blowup_l1_error(direction, j, &base, kappa, &ctx.quad)?;
        writeln!(csv, "{j},{err:.16e}").expect("string write");
        j *= 2;
    }
    let path = write_atomic(&ctx.out_dir, "blowup.csv", &csv)?;
    eprintln!("blowup: direction {direction:+}, j up to {max_j} -> {}", path.display());
    Ok(())
}

fn cmd_span(ctx: &Context, order: usize, count: Option<usize>) -> Result<()> {
    let count = count.unwrap_or(2 * (order + 1) + 4);
    let dict = build_dictionary(&ctx.params, count, &ctx.placement, &ctx.quad)?;
    let sol = span_solve(&dict, &MultiIndex::d1(order), 0.0)?;
    let path = write_atomic(&ctx.out_dir, "span.json", &pretty(&sol)?)?;
    eprintln!(
        "span: order {order} over {count} members, condition {:.3e} -> {}",
        sol.condition_number,
        path.display()
    );
    Ok(())
}

fn cmd_approx(ctx: &Context, target: &str, ck: usize, epsilon: f64) -> Result<()> {
    let t0 = Instant::now();
    let (u, mut report) = match resolve_target(target)? {
        Target::Poly(p) => {
            approximate(&p, ck, epsilon, ctx.method, &ctx.params, &ctx.placement, &ctx.quad)?
        }
        Target::Smooth(name) => {
            let (u, report, _poly) = approximate_smooth(
                |x| smooth_eval(name, x),
                ck,
                epsilon,
                ctx.method,
                &ctx.params,
                &ctx.placement,
                &ctx.quad,
            )?;
            (u, report)
        }
    };
    // wall time varies run to run; outputs must not, so it moves to stderr
    let elapsed = t0.elapsed().as_secs_f64();
    report.wall_time_s = 0.0;
    let report_path = write_atomic(&ctx.out_dir, "approx.json", &pretty(&report)?)?;
    write_atomic(&ctx.out_dir, "approximant.json", &pretty(&u)?)?;
    let worst = report.errors.iter().cloned().fold(0.0, f64::max);
    eprintln!(
        "approx: target {target}, C^{ck} error {worst:.3e} (requested {epsilon:.3e}), \
         relative residual {:.3e}, {elapsed:.1}s -> {}",
        report.residual.relative_max,
        report_path.display()
    );
    Ok(())
}

fn cmd_residual(ctx: &Context, points: usize) -> Result<()> {
    if !(2..=201).contains(&points) {
        return Err(Error::InvalidInput(format!(
            "certification grid must have 2..=201 points, got {points}"
        )));
    }
    let profile = growth_profile(&standard_bump(), &ctx.params, &ctx.quad)?;
    let grid: Vec<f64> = (0..points)
        .map(|i| -0.9 + 1.8 * i as f64 / (points - 1) as f64)
        .collect();
    let report = residual_report(&profile, &grid, &ctx.quad)?;
    let path = write_atomic(&ctx.out_dir, "residual.csv", &report.to_csv())?;
    eprintln!(
        "residual: {points} points, max relative {:.3e} -> {}",
        report.relative_max,
        path.display()
    );
    Ok(())
}

fn cmd_mollify(ctx: &Context, target: &str, smoothness: usize, budget: f64) -> Result<()> {
    let result = match resolve_target(target)? {
        Target::Poly(p) => weierstrass_approx(&|x| p.eval(x), smoothness, budget)?,
        Target::Smooth(name) => {
            weierstrass_approx(&|x| smooth_eval(name, x), smoothness, budget)?
        }
    };
    let path = write_atomic(&ctx.out_dir, "mollify.json", &pretty(&result)?)?;
    eprintln!(
        "mollify: target {target}, degree {}, measured C^{smoothness} error {:.3e} -> {}",
        result.polynomial.degree(),
        result.measured_error,
        path.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let over = Overrides {
        s: cli.common.s,
        seed: cli.common.seed,
        quad_tol: cli.common.quad_tol,
        grid: cli.common.grid,
        out_dir: cli.common.out_dir.clone(),
        method: cli.common.method.clone(),
    };
    let cfg = RunConfig::resolve(cli.common.config.as_deref(), &over)?;
    let ctx = cfg.context()?;
    match &cli.command {
        Command::Extend => cmd_extend(&ctx),
        Command::Growth => cmd_growth(&ctx),
        Command::Blowup { direction, max_j } => cmd_blowup(&ctx, *direction, *max_j),
        Command::Span { order, count } => cmd_span(&ctx, *order, *count),
        Command::Approx { target, ck, epsilon } => cmd_approx(&ctx, target, *ck, *epsilon),
        Command::Residual { points } => cmd_residual(&ctx, *points),
        Command::Mollify { target, smoothness, budget } => {
            cmd_mollify(&ctx, target, *smoothness, *budget)
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_thread_pool();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
