//! Command line front end. Every subcommand writes report.csv into the
//! output directory; `convergence` adds convergence.csv. Exit codes:
//! 0 clean, 1 a checked invariant failed, 2 configuration problems,
//! 3 the march produced non-finite values.

use clap::{Args, Parser, Subcommand};
use nullwave::config::{self, ExperimentConfig, Problem};
use nullwave::report::{self, ReportRow};
use nullwave::runner;
use nullwave::NullwaveError;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "nullwave",
    version,
    about = "Wave-equation reductions on Cauchy, null-plane and null-cone slicings",
    after_help = HELP_FOOTER
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

const HELP_FOOTER: &str = concat!(
    "Configuration keys and their defaults (file lines and --set both use key = value):\n\n",
    "problem = nullplane    # cauchy | nullplane | nullcone | nullplane_deriv | nullcone_deriv\n",
    "n_u = 0                # marching steps; 0 picks the smallest count the cfl allows\n",
    "n_z = 16               # cells along z (plane), r (cone) or x (cauchy); alias n_r\n",
    "n_x = 16               # cells along x (plane/cauchy) or s (cone); alias n_s\n",
    "n_y = 16               # cells along y (plane/cauchy) or phi (cone); alias n_phi\n",
    "order = 2              # scheme order, 2 or 4\n",
    "t_final = 1.0          # run duration\n",
    "cfl = 0.5              # marching step over limiting spacing\n",
    "dissipation = 0.02     # artificial dissipation strength\n",
    "lx, ly, lz = 1.0       # periodic extents\n",
    "r0 = 1.0               # worldtube radius (cone)\n",
    "data = random          # zero | random | oracle | dipole\n",
    "seed = 1\n",
    "count = 100            # runs per verify-estimates sweep\n",
    "levels = 16,32,64      # slab resolutions for the convergence study\n",
    "ratio_lo, ratio_hi     # residual-ratio window; [2.8, 5.2] at order 2, [11, 21] at order 4\n",
    "tol_margin = 0.5       # margin tolerance coefficient on h^2 * data scale\n",
    "tol_oracle = 1.0e-1    # pointwise oracle ceiling\n",
);

#[derive(Args)]
struct Common {
    /// key = value configuration file
    #[arg(long, value_name = "PATH")]
    config: Option<String>,
    /// override one configuration key (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// directory receiving the CSV artifacts
    #[arg(long, value_name = "DIR", default_value = ".")]
    output: String,
    /// override the configured seed
    #[arg(long)]
    seed: Option<u64>,
    /// suppress the stdout summary
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// shrink the duration so the cone growth exponent c T stays at 1/2
    #[arg(long)]
    cap_growth: bool,
}

#[derive(Subcommand)]
enum Command {
    /// March the Cauchy reduction once and check the growth bound
    RunCauchy(Common),
    /// March the null-plane reduction once and check the estimate
    RunNullplane(Common),
    /// March the null-cone reduction once and check the estimate
    RunNullcone(Common),
    /// Sweep seeded data sets and check every estimate margin
    VerifyEstimates(SweepArgs),
    /// Refinement study of the balance or constraint residual
    Convergence(Common),
    /// Run the derivative-system counterpart of the configured problem
    Derivatives(SweepArgs),
}

fn load(common: &Common, forced: Option<Problem>) -> Result<ExperimentConfig, NullwaveError> {
    let mut overrides = common.set.clone();
    if let Some(seed) = common.seed {
        overrides.push(format!("seed={seed}"));
    }
    if let Some(p) = forced {
        overrides.push(format!("problem={}", p.name()));
    }
    config::parse_config(common.config.as_deref(), &overrides)
}

fn artifact(common: &Common, name: &str) -> Result<PathBuf, NullwaveError> {
    let dir = Path::new(&common.output);
    std::fs::create_dir_all(dir)?;
    Ok(dir.join(name))
}

fn finish(
    common: &Common,
    rows: &[ReportRow],
    failures: &[String],
    summary: String,
) -> Result<i32, NullwaveError> {
    let path = artifact(common, "report.csv")?;
    report::write_report(&path, rows)?;
    if !common.quiet {
        println!("{summary}");
        println!("report: {}", path.display());
    }
    for f in failures {
        eprintln!("FAIL: {f}");
    }
    Ok(if failures.is_empty() { 0 } else { 1 })
}

fn cap(cfg: &mut ExperimentConfig) -> Result<String, NullwaveError> {
    if !cfg.problem.is_cone() {
        return Err(NullwaveError::Config {
            key: "problem".into(),
            msg: "--cap-growth applies to the cone problems".into(),
        });
    }
    let c = runner::cap_duration(cfg)?;
    Ok(format!(" (c = {:.6}, T capped at {:.6})", c, cfg.t_final))
}

fn single(common: &Common, cfg: &ExperimentConfig, note: &str) -> Result<i32, NullwaveError> {
    let out = runner::single_run(cfg, cfg.seed)?;
    let summary = format!(
        "{} order {}, T = {:.6}, grid {}x{}x{}x{}{}: margin = {:.6e}, balance residual = {:.6e}",
        out.row.problem,
        out.row.order,
        out.row.t_final,
        out.row.n[0],
        out.row.n[1],
        out.row.n[2],
        out.row.n[3],
        note,
        out.row.margin,
        out.row.balance_residual,
    );
    finish(common, &[out.row], &out.failures, summary)
}

fn run_one(common: &Common, forced: Problem) -> Result<i32, NullwaveError> {
    let cfg = load(common, Some(forced))?;
    single(common, &cfg, "")
}

fn sweep(args: &SweepArgs) -> Result<i32, NullwaveError> {
    let mut cfg = load(&args.common, None)?;
    let note = if args.cap_growth { cap(&mut cfg)? } else { String::new() };
    let (rows, failures) = runner::sweep(&cfg)?;
    let worst = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let summary = format!(
        "{} runs of {}{}: {} violations, smallest margin = {:.6e}",
        rows.len(),
        cfg.problem.name(),
        note,
        failures.len(),
        worst,
    );
    finish(&args.common, &rows, &failures, summary)
}

fn derivatives(args: &SweepArgs) -> Result<i32, NullwaveError> {
    let probe = load(&args.common, None)?;
    let forced = runner::to_derivative(probe.problem).ok_or_else(|| NullwaveError::Config {
        key: "problem".into(),
        msg: "the Cauchy reduction has no derivative counterpart".into(),
    })?;
    let mut cfg = load(&args.common, Some(forced))?;
    let note = if args.cap_growth { cap(&mut cfg)? } else { String::new() };
    single(&args.common, &cfg, &note)
}

fn convergence(common: &Common) -> Result<i32, NullwaveError> {
    let cfg = load(common, None)?;
    let study = runner::refinement_study(&cfg)?;
    let path = artifact(common, "convergence.csv")?;
    report::write_convergence(&path, &study.levels)?;
    if !common.quiet {
        for w in study.levels.windows(2) {
            let ratio = w[0].residual / w[1].residual;
            let order = ratio.ln() / (w[1].resolution as f64 / w[0].resolution as f64).ln();
            println!(
                "N = {:>4} -> {:>4}: residual {:.6e} -> {:.6e}, ratio {:.3} (order {:.2})",
                w[0].resolution, w[1].resolution, w[0].residual, w[1].residual, ratio, order,
            );
        }
        println!("convergence: {}", path.display());
    }
    let summary = format!(
        "{} on {} levels: {} violations",
        cfg.problem.name(),
        study.levels.len(),
        study.failures.len(),
    );
    finish(common, &study.rows, &study.failures, summary)
}

fn dispatch(cli: &Cli) -> Result<i32, NullwaveError> {
    match &cli.command {
        Command::RunCauchy(c) => run_one(c, Problem::Cauchy),
        Command::RunNullplane(c) => run_one(c, Problem::NullPlane),
        Command::RunNullcone(c) => run_one(c, Problem::NullCone),
        Command::VerifyEstimates(a) => sweep(a),
        Command::Convergence(c) => convergence(c),
        Command::Derivatives(a) => derivatives(a),
    }
}

fn exit_code(e: &NullwaveError) -> i32 {
    match e {
        NullwaveError::CheckFailed(_) => 1,
        NullwaveError::NonFinite { .. } => 3,
        _ => 2,
    }
}

fn main() {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}
