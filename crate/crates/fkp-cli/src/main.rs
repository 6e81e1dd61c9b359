//! `fkp` - command-line entry point for the fractional-KP toolkit.
//!
//! Subcommands wrap the library workflows one-to-one: `evolve` runs the
//! pseudospectral solver, `resonance-scan` fits the second-iterate growth
//! exponent over an N ladder, `constraint-demo` emits the windowed-mass
//! table of the free evolution, `ineq` hosts the inequality verifiers and
//! the critical-exponent table, and `validate-symbol` checks a dispersion
//! law against the symbol hypotheses.
//!
//! Exit codes: 0 success, 2 precondition/configuration violation,
//! 3 numerical non-convergence (flagged quadrature, aborted run).

mod config;
mod manifest;

use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use config::{pick, require, Config};
use fkp_core::constraint::{generalized_x_mass, Datum, QuadratureSpec};
use fkp_core::evolution::{run, RunStatus, SolverConfig};
use fkp_core::grid::make_grid;
use fkp_core::inequalities::{critical_exponents, decay_scan, embedding_ratio, gn_ratio};
use fkp_core::io::write_snapshot;
use fkp_core::resonance::{
    build_test_data, growth_exponent_fit, picard_second_norm, Variant,
};
use fkp_core::symbols::{validate_hypotheses_banded, KPSymbol, Kappa, SymbolFamily, TableSymbol};
use fkp_core::Field;
use manifest::RunManifest;

const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (manifest schema ",
    "1",
    ")"
);

#[derive(Parser)]
#[command(name = "fkp", version = VERSION, about = "fractional KP simulation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve initial data under the fKP flow and emit diagnostics CSV
    /// plus field snapshots.
    Evolve(EvolveArgs),
    /// Scan the second Picard iterate over an N ladder and fit the growth
    /// exponent.
    #[command(name = "resonance-scan")]
    ResonanceScan(ResonanceArgs),
    /// Windowed x-mass table of the free evolution (zero-mass demo).
    #[command(name = "constraint-demo")]
    ConstraintDemo(ConstraintArgs),
    /// Inequality verifiers and the critical-exponent table.
    #[command(subcommand)]
    Ineq(IneqCommand),
    /// Check a dispersion symbol against the two-sided envelope hypotheses.
    #[command(name = "validate-symbol")]
    ValidateSymbol(ValidateArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file (`key = value`, `#` comments); flags override.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for Monte-Carlo sampling (quadratures are deterministic).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Dispersion family: power, ilw, whitham.
    #[arg(long)]
    symbol: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Branch sign: 1 (fKP-II) or -1 (fKP-I).
    #[arg(long)]
    kappa: Option<i64>,
    /// ILW depth parameter.
    #[arg(long)]
    delta: Option<f64>,
    /// Whitham surface-tension coefficient.
    #[arg(long)]
    b_whitham: Option<f64>,
    /// Initial data: soliton, gaussian, or file:<path>.
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    soliton_speed: Option<f64>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    width: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    lx: Option<f64>,
    #[arg(long)]
    ly: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    snapshot_every: Option<usize>,
    #[arg(long)]
    diagnostics_every: Option<usize>,
    #[arg(long)]
    xs_order: Option<f64>,
    /// Disable the nonlinearity (free evolution).
    #[arg(long)]
    linear_only: bool,
    /// Disable two-thirds dealiasing.
    #[arg(long)]
    no_dealias: bool,
}

#[derive(Args)]
struct ResonanceArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// fkp2 or fkp1.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    s1: Option<f64>,
    #[arg(long)]
    s2: Option<f64>,
    /// Comma-separated ladder, e.g. 1e2,1e3,1e4.
    #[arg(long, value_name = "N1,N2,...")]
    n_list: Option<String>,
    #[arg(long)]
    t: Option<f64>,
}

#[derive(Args)]
struct ConstraintArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    kappa: Option<i64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    y: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    x_steps: Option<usize>,
    /// Half-width of the excluded band around xi = 0.
    #[arg(long)]
    exclusion: Option<f64>,
}

#[derive(Subcommand)]
enum IneqCommand {
    /// Gagliardo-Nirenberg dilation scan (CSV `a,b,ratio`).
    Gn(GnArgs),
    /// Decay-kernel scan (CSV `lambda,reJ,imJ,absJ,R,flag`).
    Decay(DecayArgs),
    /// Anisotropic embedding ensemble (CSV `draw,ratio`).
    Embed(EmbedArgs),
    /// Print the critical-exponent table for one alpha.
    Critical(CriticalArgs),
}

#[derive(Args)]
struct GnArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    alpha: Option<f64>,
    /// Dilation scan runs over a, b in 2^{-span} .. 2^{span}.
    #[arg(long)]
    span: Option<i32>,
    #[arg(long)]
    nx: Option<usize>,
}

#[derive(Args)]
struct DecayArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long)]
    lambda_steps: Option<usize>,
}

#[derive(Args)]
struct EmbedArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    draws: Option<usize>,
}

#[derive(Args)]
struct CriticalArgs {
    #[arg(long)]
    alpha: f64,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// power, ilw, whitham, or table.
    #[arg(long)]
    symbol: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    xi0: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    b_whitham: Option<f64>,
    /// CSV file `xi,w` for the table family.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    c_lo: Option<f64>,
    #[arg(long)]
    c_hi: Option<f64>,
}

/// Precondition/config problems exit with 2, numerical flags with 3.
enum CliError {
    Precondition(String),
    Numerical(String),
    Io(std::io::Error),
}

impl From<fkp_core::FkpError> for CliError {
    fn from(e: fkp_core::FkpError) -> Self {
        use fkp_core::FkpError::*;
        match e {
            BlowUp { .. } | CflViolation { .. } => CliError::Numerical(e.to_string()),
            Io(io) => CliError::Io(io),
            other => CliError::Precondition(other.to_string()),
        }
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Evolve(args) => cmd_evolve(args),
        Command::ResonanceScan(args) => cmd_resonance(args),
        Command::ConstraintDemo(args) => cmd_constraint(args),
        Command::Ineq(cmd) => match cmd {
            IneqCommand::Gn(args) => cmd_gn(args),
            IneqCommand::Decay(args) => cmd_decay(args),
            IneqCommand::Embed(args) => cmd_embed(args),
            IneqCommand::Critical(args) => cmd_critical(args),
        },
        Command::ValidateSymbol(args) => cmd_validate(args),
    };
    match result {
        Ok(()) => ExitCode::from(0),
        Err(CliError::Precondition(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical flag: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Io(e)) => {
            eprintln!("io error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_config(common: &CommonArgs) -> Result<Config, CliError> {
    match &common.config {
        Some(p) => Ok(Config::load(p)?),
        None => Ok(Config::default()),
    }
}

fn out_dir(common: &CommonArgs, cfg: &Config) -> Result<PathBuf, CliError> {
    let dir = match &common.out {
        Some(p) => p.clone(),
        None => PathBuf::from(cfg.get_str("out").unwrap_or("out")),
    };
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn seed_of(common: &CommonArgs, cfg: &Config) -> Result<u64, CliError> {
    Ok(pick(&common.seed, cfg, "seed", 0u64)?)
}

fn build_family(
    name: &str,
    alpha: f64,
    delta: f64,
    b: f64,
    table: Option<&Path>,
) -> Result<SymbolFamily, CliError> {
    match name {
        "power" => Ok(SymbolFamily::pure_power(alpha)?),
        "ilw" => Ok(SymbolFamily::ilw(delta)?),
        "whitham" => Ok(SymbolFamily::whitham_st(b)?),
        "table" => {
            let path = table.ok_or_else(|| {
                CliError::Precondition("table symbol needs --table <csv>".into())
            })?;
            let text = std::fs::read_to_string(path)?;
            Ok(SymbolFamily::Table(TableSymbol::from_csv(&text)?))
        }
        other => Err(CliError::Precondition(format!(
            "unknown symbol family {other:?} (expected power, ilw, whitham, table)"
        ))),
    }
}

fn cmd_evolve(args: EvolveArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.common)?;
    let dir = out_dir(&args.common, &cfg)?;
    let seed = seed_of(&args.common, &cfg)?;

    let symbol_name = args
        .symbol
        .clone()
        .or_else(|| cfg.get_str("symbol").map(String::from))
        .unwrap_or_else(|| "power".into());
    let alpha = pick(&args.alpha, &cfg, "alpha", 2.0)?;
    let kappa = Kappa::from_int(pick(&args.kappa, &cfg, "kappa", 1)?)?;
    let delta = pick(&args.delta, &cfg, "delta", 1.0)?;
    let b = pick(&args.b_whitham, &cfg, "b_whitham", 1.0)?;
    let family = build_family(&symbol_name, alpha, delta, b, None)?;
    let symbol = KPSymbol::new(family, kappa);

    let nx = pick(&args.nx, &cfg, "nx", 256)?;
    let ny = pick(&args.ny, &cfg, "ny", 256)?;
    let lx = pick(&args.lx, &cfg, "lx", 2.0 * std::f64::consts::PI)?;
    let ly = pick(&args.ly, &cfg, "ly", 2.0 * std::f64::consts::PI)?;
    let dt = require(&args.dt, &cfg, "dt")?;
    let t_end = require(&args.t_end, &cfg, "t_end")?;
    let grid = make_grid(nx, ny, lx, ly)?;

    let init = args
        .init
        .clone()
        .or_else(|| cfg.get_str("init").map(String::from))
        .unwrap_or_else(|| "gaussian".into());
    let u0 = match init.as_str() {
        "soliton" => {
            let c = pick(&args.soliton_speed, &cfg, "soliton_speed", 1.0)?;
            let x0 = 0.5 * lx;
            Field::from_fn(grid, move |x, _| {
                let z = 0.5 * c.sqrt() * (x - x0);
                3.0 * c / (z.cosh() * z.cosh())
            })
        }
        "gaussian" => {
            let amp = pick(&args.amplitude, &cfg, "amplitude", 1.0)?;
            let width = pick(&args.width, &cfg, "width", lx / 16.0)?;
            let (x0, y0) = (0.5 * lx, 0.5 * ly);
            Field::from_fn(grid, move |x, y| {
                amp * (-((x - x0).powi(2) + (y - y0).powi(2)) / (2.0 * width * width)).exp()
            })
        }
        other => {
            if let Some(path) = other.strip_prefix("file:") {
                let f = fkp_core::io::read_snapshot(Path::new(path))?;
                if f.grid().nx != nx || f.grid().ny != ny {
                    return Err(CliError::Precondition(format!(
                        "snapshot grid {}x{} does not match requested {}x{}",
                        f.grid().nx,
                        f.grid().ny,
                        nx,
                        ny
                    )));
                }
                f
            } else {
                return Err(CliError::Precondition(format!(
                    "unknown init {other:?} (expected soliton, gaussian, file:<path>)"
                )));
            }
        }
    };

    let mut solver = SolverConfig::new(symbol, dt, t_end)?;
    solver.snapshot_every = pick(&args.snapshot_every, &cfg, "snapshot_every", usize::MAX)?;
    solver.diagnostics_every = pick(&args.diagnostics_every, &cfg, "diagnostics_every", 1)?;
    solver.xs_order = pick(&args.xs_order, &cfg, "xs_order", 2.0)?;
    solver.linear_only =
        args.linear_only || cfg.get::<bool>("linear_only")?.unwrap_or(false);
    solver.dealias = !args.no_dealias && cfg.get::<bool>("dealias")?.unwrap_or(true);

    let mut manifest = RunManifest::start("evolve", args.common.config.as_deref(), seed);
    let out = run(&u0, &solver)?;
    if out.projected_energy_fraction > 1e-12 {
        eprintln!(
            "note: ingestion projection removed {:.3e} of the datum energy",
            out.projected_energy_fraction
        );
    }

    let diag_path = dir.join("diagnostics.csv");
    std::fs::write(&diag_path, out.diagnostics.to_csv())?;
    manifest.add_output(&diag_path)?;
    for (i, (t, field)) in out.snapshots.iter().enumerate() {
        let path = dir.join(format!("snap_{i:04}_t{t:.6}.fkp"));
        write_snapshot(&path, field)?;
        manifest.add_output(&path)?;
    }
    manifest.finish(&dir)?;

    match out.status {
        RunStatus::Completed => {
            println!("evolve: completed to t = {t_end}; outputs in {}", dir.display());
            Ok(())
        }
        RunStatus::Aborted { t, reason } => Err(CliError::Numerical(format!(
            "run aborted at t = {t}: {reason} (partial outputs kept)"
        ))),
    }
}

fn cmd_resonance(args: ResonanceArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.common)?;
    let dir = out_dir(&args.common, &cfg)?;
    let seed = seed_of(&args.common, &cfg)?;

    let variant = Variant::parse(
        &args
            .variant
            .clone()
            .or_else(|| cfg.get_str("variant").map(String::from))
            .unwrap_or_else(|| "fkp2".into()),
    )?;
    let alpha = pick(&args.alpha, &cfg, "alpha", 1.0)?;
    let theta = pick(&args.theta, &cfg, "theta", 0.01)?;
    let s1 = pick(&args.s1, &cfg, "s1", 0.0)?;
    let s2 = pick(&args.s2, &cfg, "s2", 0.0)?;
    let t = pick(&args.t, &cfg, "t", 1.0)?;
    let n_text = args
        .n_list
        .clone()
        .or_else(|| cfg.get_str("n_list").map(String::from))
        .unwrap_or_else(|| "1e2,1e3,1e4".into());
    let ns: Vec<f64> = n_text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Precondition(format!("bad N value {s:?}")))
        })
        .collect::<Result<_, _>>()?;

    let mut manifest = RunManifest::start("resonance-scan", args.common.config.as_deref(), seed);
    let mut csv = String::from("N,ratio,omega_max,exponent_running\n");
    let mut results = Vec::new();
    let mut any_flag = false;
    for &n in &ns {
        let data = build_test_data(variant, alpha, n, theta, s1, s2)?;
        let r = picard_second_norm(&data, t)?;
        any_flag |= !r.converged;
        let running = if results.is_empty() {
            f64::NAN
        } else {
            let prev: &fkp_core::resonance::PicardResult = results.last().unwrap();
            (r.ratio / prev.ratio).ln() / (n / prev.n).ln()
        };
        csv.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e}\n",
            n, r.ratio, r.omega_max, running
        ));
        results.push(r);
    }
    let csv_path = dir.join("resonance.csv");
    std::fs::write(&csv_path, csv)?;
    manifest.add_output(&csv_path)?;
    manifest.finish(&dir)?;

    let (exponent, r2) = growth_exponent_fit(&results)?;
    let predicted = match variant {
        Variant::Fkp2 => 1.0 - 0.75 * alpha,
        Variant::Fkp1 => 1.0 - 3.0 * alpha / 8.0,
    };
    println!("exponent={exponent:.6} r2={r2:.6} predicted={predicted:.6}");
    if any_flag {
        return Err(CliError::Numerical(
            "picard quadrature did not converge on some N".into(),
        ));
    }
    Ok(())
}

fn cmd_constraint(args: ConstraintArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.common)?;
    let dir = out_dir(&args.common, &cfg)?;
    let seed = seed_of(&args.common, &cfg)?;

    let alpha = pick(&args.alpha, &cfg, "alpha", 2.0)?;
    let kappa = Kappa::from_int(pick(&args.kappa, &cfg, "kappa", 1)?)?;
    let sigma = pick(&args.sigma, &cfg, "sigma", 1.0)?;
    let amplitude = pick(&args.amplitude, &cfg, "amplitude", 1.0)?;
    let t = pick(&args.t, &cfg, "t", 0.1)?;
    let y = pick(&args.y, &cfg, "y", 0.0)?;
    let x_max = pick(&args.x_max, &cfg, "x_max", 40.0)?;
    let x_steps = pick(&args.x_steps, &cfg, "x_steps", 10usize)?;
    if x_steps == 0 {
        return Err(CliError::Precondition("x_steps must be positive".into()));
    }

    let symbol = KPSymbol::pure_power(alpha, kappa)?;
    let datum = Datum::Gaussian { amplitude, sigma };
    let mut q = QuadratureSpec::default_for(sigma);
    if let Some(e) = args.exclusion.or(cfg.get::<f64>("exclusion")?) {
        q.xi_min_exclusion = e;
    }
    let xs: Vec<f64> = (1..=x_steps)
        .map(|k| x_max * k as f64 / x_steps as f64)
        .collect();

    let mut manifest = RunManifest::start("constraint-demo", args.common.config.as_deref(), seed);
    let table = generalized_x_mass(&datum, &symbol, y, t, &xs, &q)?;
    let csv_path = dir.join("mass.csv");
    std::fs::write(&csv_path, table.to_csv())?;
    manifest.add_output(&csv_path)?;
    manifest.finish(&dir)?;
    println!(
        "constraint-demo: M({x_max}) = {:.6e} at t = {t}; table in {}",
        table.entries.last().unwrap().mass,
        csv_path.display()
    );
    if table.flagged {
        return Err(CliError::Numerical(
            "quadrature refinement exceeded tolerance on some window".into(),
        ));
    }
    Ok(())
}

fn cmd_gn(args: GnArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.common)?;
    let dir = out_dir(&args.common, &cfg)?;
    let seed = seed_of(&args.common, &cfg)?;
    let alpha = pick(&args.alpha, &cfg, "alpha", 0.9)?;
    let span = pick(&args.span, &cfg, "span", 3i32)?;
    let nx = pick(&args.nx, &cfg, "nx", 512usize)?;

    let l = 16.0 * std::f64::consts::PI;
    let mut csv = String::from("a,b,ratio\n");
    let mut manifest = RunManifest::start("ineq gn", args.common.config.as_deref(), seed);
    let mut out_of_range = false;
    for ka in -span..=span {
        for kb in -span..=span {
            let (a, b) = (2.0_f64.powi(ka), 2.0_f64.powi(kb));
            let g = make_grid(nx, nx, l, l)?;
            let f = Field::from_fn(g, move |x, y| {
                let (dx, dy) = (a * (x - 0.5 * l), b * (y - 0.5 * l));
                -dx * (-0.5 * (dx * dx + dy * dy)).exp()
            });
            let r = gn_ratio(&f, alpha)?;
            out_of_range |= r.out_of_range;
            csv.push_str(&format!("{a},{b},{:.16e}\n", r.ratio));
        }
    }
    if out_of_range {
        eprintln!("note: alpha = {alpha} lies outside the stated range [4/5, 1)");
    }
    let path = dir.join("gn.csv");
    std::fs::write(&path, csv)?;
    manifest.add_output(&path)?;
    manifest.finish(&dir)?;
    println!("ineq gn: scan written to {}", path.display());
    Ok(())
}

fn cmd_decay(args: DecayArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.common)?;
    let dir = out_dir(&args.common, &cfg)?;
    let seed = seed_of(&args.common, &cfg)?;
    let alpha = pick(&args.alpha, &cfg, "alpha", 2.0)?;
    let r_max = pick(&args.r_max, &cfg, "r_max", 40.0)?;
    let lambda_max = pick(&args.lambda_max, &cfg, "lambda_max", 50.0)?;
    let steps = pick(&args.lambda_steps, &cfg, "lambda_steps", 100usize)?.max(2);

    let lambdas: Vec<f64> = (0..=steps)
        .map(|k| -lambda_max + 2.0 * lambda_max * k as f64 / steps as f64)
        .collect();
    let mut manifest = RunManifest::start("ineq decay", args.common.config.as_deref(), seed);
    let scan = decay_scan(alpha, &lambdas, r_max)?;
    let mut csv = String::from("lambda,reJ,imJ,absJ,R,flag\n");
    for (l, v) in scan.lambdas.iter().zip(&scan.values) {
        csv.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{r_max},{}\n",
            l,
            v.re,
            v.im,
            v.norm(),
            if scan.flagged { 1 } else { 0 }
        ));
    }
    let path = dir.join("decay.csv");
    std::fs::write(&path, csv)?;
    manifest.add_output(&path)?;
    manifest.finish(&dir)?;
    println!(
        "ineq decay: sup|J| = {:.6} R-stability {:.3e}; table in {}",
        scan.sup_abs,
        scan.r_stability,
        path.display()
    );
    if scan.flagged || scan.r_stability >= 0.05 {
        return Err(CliError::Numerical(format!(
            "decay scan unstable under R doubling (change {:.3e})",
            scan.r_stability
        )));
    }
    Ok(())
}

fn cmd_embed(args: EmbedArgs) -> Result<(), CliError> {
    use rand::{Rng, SeedableRng};
    let cfg = load_config(&args.common)?;
    let dir = out_dir(&args.common, &cfg)?;
    let seed = seed_of(&args.common, &cfg)?;
    let s = pick(&args.s, &cfg, "s", 4.5)?;
    let draws = pick(&args.draws, &cfg, "draws", 100usize)?;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut manifest = RunManifest::start("ineq embed", args.common.config.as_deref(), seed);
    let mut csv = String::from("draw,ratio\n");
    let mut max_ratio = 0.0_f64;
    for i in 0..draws {
        let g = make_grid(64, 64, 2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI)?;
        let modes: Vec<(f64, f64, f64, f64)> = (0..12)
            .map(|_| {
                (
                    rng.gen_range(1..=16) as f64,
                    rng.gen_range(0..=16) as f64,
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )
            })
            .collect();
        let f = Field::from_fn(g, move |x, y| {
            modes
                .iter()
                .map(|&(j, k, a, b)| a * (j * x + k * y).cos() + b * (j * x - k * y).sin())
                .sum()
        });
        let r = embedding_ratio(&f, s)?;
        max_ratio = max_ratio.max(r);
        csv.push_str(&format!("{i},{r:.16e}\n"));
    }
    let path = dir.join("embed.csv");
    std::fs::write(&path, csv)?;
    manifest.add_output(&path)?;
    manifest.finish(&dir)?;
    println!("ineq embed: max ratio {max_ratio:.6e} over {draws} draws; table in {}", path.display());
    Ok(())
}

fn cmd_critical(args: CriticalArgs) -> Result<(), CliError> {
    let e = critical_exponents(args.alpha)?;
    println!(
        "s_alpha={} l2_critical={:.4} energy_critical={} l2_scaling_exponent={}",
        e.s_alpha, e.l2_critical, e.energy_critical, e.l2_scaling_exponent
    );
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.common)?;
    let name = args
        .symbol
        .clone()
        .or_else(|| cfg.get_str("symbol").map(String::from))
        .unwrap_or_else(|| "power".into());
    let alpha = pick(&args.alpha, &cfg, "alpha", 1.0)?;
    let xi0 = pick(&args.xi0, &cfg, "xi0", 1.0)?;
    let delta = pick(&args.delta, &cfg, "delta", 1.0)?;
    let b = pick(&args.b_whitham, &cfg, "b_whitham", 1.0)?;
    let c_lo = pick(&args.c_lo, &cfg, "c_lo", 0.3)?;
    let c_hi = pick(&args.c_hi, &cfg, "c_hi", 3.5)?;
    let family = build_family(&name, alpha, delta, b, args.table.as_deref())?;
    let report = validate_hypotheses_banded(&family, alpha, xi0, c_lo, c_hi)?;
    println!("low_freq_max = {:.6e}", report.low_freq_max);
    for (beta, (lo, hi)) in report.ratio_bands.iter().enumerate() {
        println!("beta = {beta}: |d^b w| / |xi|^(a+1-b) in [{lo:.6}, {hi:.6}]");
    }
    println!(
        "hypothesis band [{}, {}]: {}",
        report.c_lo,
        report.c_hi,
        if report.pass { "PASS" } else { "FAIL" }
    );
    Ok(())
}
