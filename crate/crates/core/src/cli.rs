//! Command-line front end. Every command writes a versioned CSV to `--out` (or
//! standard output) and a short human-readable summary to the error stream.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 for numerical failure.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{JobConfig, ModeKey, NestingKey};
use crate::equilibrium::{equity_premium, expected_premium, solve_hjb};
use crate::error::{Error, Result};
use crate::mc::{mc_expectations, mc_fair_strike, sampling_indices, simulate_paths, Path, SimModel};
use crate::moments::CirMomentSpec;
use crate::params::{to_forward, validate, Mode, Validate};
use crate::pricer::fair_strike;
use crate::rates::CirRate;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Largest number of paths `--dump-paths` writes.
pub const MAX_DUMPED_PATHS: usize = 1000;

#[derive(Debug, Parser)]
#[command(name = "varswap", version, about = "Discretely sampled variance and moment swaps under stochastic volatility, stochastic rates and variance-gamma jumps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML job file layered over the built-in default.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides `[mc] seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// CSV destination; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Rate correlation treatment; overrides `[run] mode`
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// Time windows of the two legs; overrides `[run] nesting`
    #[arg(long, global = true, value_enum)]
    pub nesting: Option<NestingArg>,
    /// Report strikes divided by the maturity.
    #[arg(long, global = true)]
    pub annualize: bool,
    /// Write simulated paths to this CSV (`simulate` and `premium`).
    #[arg(long, global = true)]
    pub dump_paths: Option<PathBuf>,
    /// Number of paths written by `--dump-paths`.
    #[arg(long, global = true, default_value_t = 100)]
    pub dump_count: usize,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Analytic fair strike with per-period contributions.
    Price,
    /// Analytic strike against Monte Carlo over a path-count ladder.
    Compare,
    /// Expected equity premium curves.
    Premium,
    /// Zero-coupon bond table.
    Bond,
    /// Monte Carlo summary statistics.
    Simulate,
    /// Exponential fits of the square-root moments.
    FitAbc,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Partial,
    Full,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NestingArg {
    Absolute,
    #[value(name = "paper_literal", alias = "paper-literal")]
    PaperLiteral,
}

/// Parse `args` (program name first), run the command and return the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_validation() {
                EXIT_INVALID
            } else {
                EXIT_NUMERICAL
            }
        }
    }
}

/// Load the configuration with command-line overrides applied.
pub fn job_config(cli: &Cli) -> Result<JobConfig> {
    let mut cfg = match &cli.config {
        Some(path) => JobConfig::load(path)?,
        None => JobConfig::table1(),
    };
    if let Some(seed) = cli.seed {
        cfg.mc.seed = seed;
    }
    if let Some(mode) = cli.mode {
        cfg.run.mode = match mode {
            ModeArg::Partial => ModeKey::Partial,
            ModeArg::Full => ModeKey::Full,
        };
    }
    if let Some(nesting) = cli.nesting {
        cfg.run.nesting = match nesting {
            NestingArg::Absolute => NestingKey::Absolute,
            NestingArg::PaperLiteral => NestingKey::PaperLiteral,
        };
    }
    if cli.annualize {
        cfg.run.annualize = true;
    }
    Ok(cfg)
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let cfg = job_config(cli)?;
    if cli.dump_paths.is_some() && cli.dump_count > MAX_DUMPED_PATHS {
        return Err(Error::ConfigError(format!(
            "--dump-count {} exceeds the cap of {MAX_DUMPED_PATHS}",
            cli.dump_count
        )));
    }
    let mut csv = String::new();
    let mut dump = String::new();
    let dump_count = cli.dump_paths.as_ref().map(|_| cli.dump_count);
    match cli.command {
        Command::Price => cmd_price(&cfg, &mut csv, stderr)?,
        Command::Compare => cmd_compare(&cfg, &mut csv, stderr)?,
        Command::Premium => cmd_premium(&cfg, &mut csv, dump_count.map(|n| (n, &mut dump)), stderr)?,
        Command::Bond => cmd_bond(&cfg, &mut csv, stderr)?,
        Command::Simulate => cmd_simulate(&cfg, &mut csv, dump_count.map(|n| (n, &mut dump)), stderr)?,
        Command::FitAbc => cmd_fit_abc(&cfg, &mut csv, stderr)?,
    }
    match &cli.out {
        Some(path) => std::fs::write(path, &csv).map_err(|e| io_error(path, e))?,
        None => stdout.write_all(csv.as_bytes()).map_err(|e| Error::ConfigError(format!("stdout: {e}")))?,
    }
    if let Some(path) = &cli.dump_paths {
        std::fs::write(path, &dump).map_err(|e| io_error(path, e))?;
    }
    Ok(())
}

fn io_error(path: &std::path::Path, e: std::io::Error) -> Error {
    Error::ConfigError(format!("cannot write {}: {e}", path.display()))
}

/// Blank for an undefined value so a CSV cell never holds `NaN`.
fn cell(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        x.to_string()
    }
}

fn note(stderr: &mut dyn Write, text: std::fmt::Arguments<'_>) {
    let _ = writeln!(stderr, "{text}");
}

/// Per-period contributions followed by a `total` row.
pub fn cmd_price(cfg: &JobConfig, csv: &mut String, stderr: &mut dyn Write) -> Result<()> {
    let contract = cfg.contract()?;
    let p = cfg.forward()?;
    let result = fair_strike(&contract, &p, &cfg.pricing_settings())?;
    let scale = cfg.strike_scale();
    csv.push_str("# schema varswap.price v1\n");
    csv.push_str("period,t_start_years,t_end_years,contribution_log_return_pow_m\n");
    for (i, c) in result.contributions.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            i + 1,
            contract.grid[i],
            contract.grid[i + 1],
            c * contract.notional * scale
        );
    }
    let _ = writeln!(csv, "total,{},{},{}", contract.grid[0], contract.maturity, result.strike * scale);
    note(
        stderr,
        format_args!(
            "fair strike {:.10e} over {} periods (step {:e}, half-step change {:.2e})",
            result.strike * scale,
            contract.periods(),
            result.step,
            result.truncation_estimate() * scale
        ),
    );
    Ok(())
}

/// Analytic strike against Monte Carlo for every rung of the ladder and every rate level.
pub fn cmd_compare(cfg: &JobConfig, csv: &mut String, stderr: &mut dyn Write) -> Result<()> {
    let contract = cfg.contract()?;
    let settings = cfg.pricing_settings();
    let scale = cfg.strike_scale();
    let betas = if cfg.compare.betas.is_empty() {
        vec![cfg.model.beta]
    } else {
        cfg.compare.betas.clone()
    };
    if cfg.compare.ladder.is_empty() {
        return Err(Error::ConfigError("[compare] ladder is empty".into()));
    }
    csv.push_str("# schema varswap.compare v1\n");
    csv.push_str("beta,paths,mc_strike,mc_stderr,analytic_strike,rel_diff\n");
    for beta in betas {
        let mut q = cfg.risk_neutral()?;
        q.beta = beta;
        let p = to_forward(&validate(q)?, contract.maturity)?;
        let analytic = fair_strike(&contract, &p, &settings)?.strike * scale;
        for &paths in &cfg.compare.ladder {
            let sim = crate::mc::SimConfig { paths, ..cfg.sim_config() };
            let e = mc_fair_strike(&contract, &p, cfg.mode(), &sim)?;
            let (mean, se) = (e.mean * scale, e.stderr * scale);
            let rel = (mean - analytic).abs() / analytic.abs();
            let _ = writeln!(csv, "{beta},{paths},{mean},{},{analytic},{rel}", cell(se));
            note(
                stderr,
                format_args!("beta {beta}: {paths} paths, mc {mean:.6e} ± {se:.1e}, analytic {analytic:.6e}, rel diff {rel:.2e}"),
            );
        }
    }
    Ok(())
}

/// `(ϑ, t, E[φ](t))` rows with an optional simulated overlay at `mc_time`.
pub fn cmd_premium(
    cfg: &JobConfig,
    csv: &mut String,
    dump: Option<(usize, &mut String)>,
    stderr: &mut dyn Write,
) -> Result<()> {
    let p = cfg.physical();
    match p.check() {
        Err(Error::FellerViolation(msg)) => note(stderr, format_args!("warning: Feller condition violated: {msg}")),
        other => other?,
    }
    let jumps = cfg.jumps()?;
    let pr = &cfg.premium;
    if pr.varthetas.is_empty() {
        return Err(Error::ConfigError("[premium] varthetas is empty".into()));
    }
    if pr.points < 2 || !(pr.horizon > 0.0) {
        return Err(Error::ConfigError("[premium] needs points ≥ 2 and a positive horizon".into()));
    }
    let rho = p.correlations.rho12;
    let mut risk_prices = Vec::with_capacity(pr.varthetas.len());
    for &vartheta in &pr.varthetas {
        let mut rp = cfg.risk_prices(vartheta);
        rp.validate()?;
        if rho != 0.0 {
            let root = solve_hjb(&p, &rp, &jumps, cfg.gamma_convention())?;
            rp = rp.with_hjb(root.i, root.k, root.m);
        }
        risk_prices.push(rp);
    }

    let times: Vec<f64> = (0..pr.points)
        .map(|j| pr.horizon * j as f64 / (pr.points - 1) as f64)
        .collect();
    let overlay = if pr.mc_paths > 0 {
        let sim = crate::mc::SimConfig { paths: pr.mc_paths, ..cfg.sim_config() };
        let model = SimModel::physical(&p, jumps, cfg.mode())?;
        let at = (pr.mc_time * sim.steps_per_year as f64).round() as usize;
        let estimates = mc_expectations(&model, &sim, pr.mc_time, risk_prices.len(), |path, out| {
            for (slot, rp) in out.iter_mut().zip(&risk_prices) {
                *slot = equity_premium(path.v[at], rp.vartheta, &jumps, rp.i, rho, p.sigma).unwrap_or(f64::NAN);
            }
        })?;
        Some(estimates)
    } else {
        None
    };

    csv.push_str("# schema varswap.premium v1\n");
    csv.push_str("vartheta,t_years,expected_premium_per_year,mc_mean_per_year,mc_stderr_per_year\n");
    for (k, rp) in risk_prices.iter().enumerate() {
        for &t in &times {
            let value = expected_premium(t, &p, rp, &jumps)?;
            let (mc, se) = match &overlay {
                Some(est) if (t - pr.mc_time).abs() < 1e-12 => (cell(est[k].mean), cell(est[k].stderr)),
                _ => (String::new(), String::new()),
            };
            let _ = writeln!(csv, "{},{t},{value},{mc},{se}", rp.vartheta);
        }
        if let Some(est) = &overlay {
            let exact = expected_premium(pr.mc_time, &p, rp, &jumps)?;
            note(
                stderr,
                format_args!(
                    "vartheta {}: E[phi]({}) = {exact:.6e}, simulated {:.6e} ± {:.1e}",
                    rp.vartheta, pr.mc_time, est[k].mean, est[k].stderr
                ),
            );
        }
    }

    if let Some((count, out)) = dump {
        let sim = crate::mc::SimConfig { paths: pr.mc_paths.max(count).max(1), ..cfg.sim_config() };
        let model = SimModel::physical(&p, jumps, cfg.mode())?;
        let paths = simulate_paths(&model, &sim, pr.horizon, count)?;
        out.push_str("# schema varswap.premium_paths v1\n");
        out.push_str("path,t_years,variance");
        for rp in &risk_prices {
            let _ = write!(out, ",premium_vartheta_{}", rp.vartheta);
        }
        out.push('\n');
        for (n, path) in paths.iter().enumerate() {
            for k in 0..=path.steps() {
                let _ = write!(out, "{n},{},{}", path.time(k), path.v[k]);
                for rp in &risk_prices {
                    let phi = equity_premium(path.v[k], rp.vartheta, &jumps, rp.i, rho, p.sigma)?;
                    let _ = write!(out, ",{phi}");
                }
                out.push('\n');
            }
        }
    }
    Ok(())
}

/// `(T, A, B, P)` for each maturity, with a simulated discount factor when enabled.
pub fn cmd_bond(cfg: &JobConfig, csv: &mut String, stderr: &mut dyn Write) -> Result<()> {
    let q = validate(cfg.risk_neutral()?)?;
    let rate = CirRate::new(q.alpha, q.beta, q.eta);
    let maturities = &cfg.bond.maturities;
    if let Some(t) = maturities.iter().find(|&&t| t < 0.0) {
        return Err(Error::ConfigError(format!("bond maturity {t} is negative")));
    }
    let mc = if cfg.bond.mc_paths > 0 && !maturities.is_empty() {
        let sim = crate::mc::SimConfig { paths: cfg.bond.mc_paths, ..cfg.sim_config() };
        let horizon = maturities.iter().copied().fold(0.0, f64::max);
        let model = SimModel::risk_neutral(&q, cfg.mode());
        let dt = 1.0 / sim.steps_per_year as f64;
        let idx = maturities
            .iter()
            .map(|&t| {
                let k = (t / dt).round();
                if (k * dt - t).abs() > 1e-9 * t.max(1.0) {
                    Err(Error::GridMismatch(format!("bond maturity {t} is not on the 1/{} step grid", sim.steps_per_year)))
                } else {
                    Ok(k as usize)
                }
            })
            .collect::<Result<Vec<usize>>>()?;
        Some(mc_expectations(&model, &sim, horizon, idx.len(), |path: &Path, out| {
            for (slot, &k) in out.iter_mut().zip(&idx) {
                *slot = path.discount(k);
            }
        })?)
    } else {
        None
    };
    csv.push_str("# schema varswap.bond v1\n");
    csv.push_str("maturity_years,a,b_years,price");
    if mc.is_some() {
        csv.push_str(",mc_price,mc_stderr,rel_diff");
    }
    csv.push('\n');
    for (j, &t) in maturities.iter().enumerate() {
        let c = rate.coefficients(t);
        let price = rate.price(t, q.initial.r0);
        let _ = write!(csv, "{t},{},{},{price}", c.a, c.b);
        if let Some(est) = &mc {
            let rel = (est[j].mean - price).abs() / price;
            let _ = write!(csv, ",{},{},{rel}", est[j].mean, cell(est[j].stderr));
        }
        csv.push('\n');
    }
    note(stderr, format_args!("{} bond maturities at r0 = {}", maturities.len(), q.initial.r0));
    Ok(())
}

/// Summary statistics of the forward-measure ensemble at the contract maturity.
pub fn cmd_simulate(
    cfg: &JobConfig,
    csv: &mut String,
    dump: Option<(usize, &mut String)>,
    stderr: &mut dyn Write,
) -> Result<()> {
    let contract = cfg.contract()?;
    let p = cfg.forward()?;
    let sim = cfg.sim_config();
    let mode: Mode = cfg.mode();
    let model = SimModel::forward(&p, mode);
    let horizon = contract.maturity;
    let idx = sampling_indices(&contract, sim.steps_per_year).ok();
    let (notional, m) = (contract.notional, contract.moment as i32);
    let mut names = vec!["log_price", "price", "variance", "rate", "discount"];
    if idx.is_some() {
        names.push("realized_moment");
    }
    let est = mc_expectations(&model, &sim, horizon, names.len(), |path, out| {
        let n = path.steps();
        out[0] = path.x[n];
        out[1] = path.price(n);
        out[2] = path.v[n];
        out[3] = path.r[n];
        out[4] = path.discount(n);
        if let Some(idx) = &idx {
            out[5] = notional * idx.windows(2).map(|w| (path.x[w[1]] - path.x[w[0]]).powi(m)).sum::<f64>();
        }
    })?;
    csv.push_str("# schema varswap.simulate v1\n");
    csv.push_str("statistic_at_maturity,mean,stderr,paths,steps_per_year,seed\n");
    for (name, e) in names.iter().zip(&est) {
        let _ = writeln!(csv, "{name},{},{},{},{},{}", e.mean, cell(e.stderr), e.paths, sim.steps_per_year, sim.seed);
    }
    if idx.is_none() {
        note(stderr, format_args!("sampling dates are not resolvable on the step grid; realized moment skipped"));
    }
    note(stderr, format_args!("{} paths to T = {horizon} under the forward measure", sim.paths));

    if let Some((count, out)) = dump {
        let paths = simulate_paths(&model, &sim, horizon, count)?;
        out.push_str("# schema varswap.paths v1\n");
        out.push_str("path,t_years,log_price,variance,rate\n");
        for (n, path) in paths.iter().enumerate() {
            for k in 0..=path.steps() {
                let _ = writeln!(out, "{n},{},{},{},{}", path.time(k), path.x[k], path.v[k], path.r[k]);
            }
        }
    }
    Ok(())
}

/// Fitted `a + b e^{-ct}` for the variance and the short rate.
pub fn cmd_fit_abc(cfg: &JobConfig, csv: &mut String, stderr: &mut dyn Write) -> Result<()> {
    let q = validate(cfg.risk_neutral()?)?;
    let specs = [
        ("variance", CirMomentSpec::new(q.kappa, q.theta, q.sigma, q.initial.v0)),
        ("rate", CirMomentSpec::new(q.alpha, q.beta, q.eta, q.initial.r0)),
    ];
    csv.push_str("# schema varswap.fit_abc v1\n");
    csv.push_str("factor,a_sqrt_per_year,b_sqrt_per_year,c_per_year,sqrt_expectation_at_1y\n");
    for (name, spec) in specs {
        let fit = spec.fit_abc(cfg.b_convention())?;
        let exact = spec.sqrt_expectation_exact(1.0)?;
        let _ = writeln!(csv, "{name},{},{},{},{exact}", fit.a, fit.b, fit.c);
        note(stderr, format_args!("{name}: a = {:.6e}, b = {:.6e}, c = {:.6e}", fit.a, fit.b, fit.c));
    }
    Ok(())
}
