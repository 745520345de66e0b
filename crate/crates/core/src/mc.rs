//! Monte Carlo simulation of (log-price, variance, short rate).
//!
//! Each path (or antithetic pair) draws from its own ChaCha stream keyed by
//! `(seed, index)`, and the reduction sums in a fixed pairwise order, so an
//! estimate is bit-identical for a given configuration whatever the thread
//! count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::levy::Jumps;
use crate::params::{Correlations, ForwardParams, InitialState, Mode, PhysicalParams, RiskNeutralParams, Validated};
use crate::pricer::SwapContract;
use crate::rates::CirRate;

/// Discretisation of the square-root factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Euler with full truncation: drift and diffusion see `max(x, 0)`.
    #[default]
    EulerFullTruncation,
    /// Full truncation plus the Milstein correction `¼ vol² Δ (Z² - 1)`.
    Milstein,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub paths: usize,
    pub steps_per_year: usize,
    pub seed: u64,
    pub scheme: Scheme,
    /// Pair every path with its mirror image (normals negated, gamma clock shared).
    pub antithetic: bool,
}

impl SimConfig {
    pub fn new(paths: usize, steps_per_year: usize, seed: u64) -> Self {
        SimConfig {
            paths,
            steps_per_year,
            seed,
            scheme: Scheme::default(),
            antithetic: false,
        }
    }

    pub fn with_antithetic(mut self, on: bool) -> Self {
        self.antithetic = on;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::ConfigError("at least one path is required".into()));
        }
        if self.steps_per_year < 12 {
            return Err(Error::ConfigError(format!(
                "steps_per_year = {} is below the minimum of 12",
                self.steps_per_year
            )));
        }
        if self.antithetic && self.paths % 2 != 0 {
            return Err(Error::ConfigError(format!(
                "antithetic sampling needs an even path count, got {}",
                self.paths
            )));
        }
        Ok(())
    }

    /// Number of independent samples: pairs when antithetic, paths otherwise.
    fn units(&self) -> usize {
        if self.antithetic {
            self.paths / 2
        } else {
            self.paths
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over independent samples divided by the root of their count.
    /// Antithetic pairs count as one sample each. NaN when there is a single sample.
    pub stderr: f64,
    pub paths: usize,
}

impl McEstimate {
    pub fn rel_diff(&self, reference: f64) -> f64 {
        (self.mean - reference).abs() / reference.abs()
    }

    /// Distance to `reference` in units of the standard error.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.mean - reference).abs() / self.stderr
    }
}

/// Drift specification of the simulated system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    /// `T`-forward measure: the rate drift loses `B(t, T) η² r` and, in full
    /// mode, the log-price and variance pick up the bond-volatility terms.
    Forward { maturity: f64 },
    RiskNeutral,
    /// Physical measure with expected stock return `mu`.
    Physical { mu: f64 },
}

/// Parameters driving the simulation, already specialised to one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimModel {
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    /// Correlations in effect for the chosen mode.
    pub correlations: Correlations,
    pub initial: InitialState,
    pub jumps: Jumps,
    pub measure: Measure,
}

impl SimModel {
    pub fn forward(p: &Validated<ForwardParams>, mode: Mode) -> Self {
        SimModel {
            kappa: p.kappa,
            theta: p.theta,
            sigma: p.sigma,
            alpha: p.alpha,
            beta: p.beta,
            eta: p.eta,
            correlations: p.correlations.effective(mode),
            initial: p.initial,
            jumps: p.jumps,
            measure: Measure::Forward { maturity: p.maturity },
        }
    }

    pub fn risk_neutral(q: &Validated<RiskNeutralParams>, mode: Mode) -> Self {
        SimModel {
            kappa: q.kappa,
            theta: q.theta,
            sigma: q.sigma,
            alpha: q.alpha,
            beta: q.beta,
            eta: q.eta,
            correlations: q.correlations.effective(mode),
            initial: q.initial,
            jumps: q.jumps,
            measure: Measure::RiskNeutral,
        }
    }

    /// Physical dynamics; `jumps` is the jump measure under the physical measure.
    ///
    /// The Feller inequalities are not required: full truncation keeps the
    /// discretised factors well defined when the boundary is attainable.
    pub fn physical(p: &PhysicalParams, jumps: Jumps, mode: Mode) -> Result<Self> {
        jumps.validate()?;
        p.correlations.validate()?;
        Ok(SimModel {
            kappa: p.kappa,
            theta: p.theta,
            sigma: p.sigma,
            alpha: p.alpha,
            beta: p.beta,
            eta: p.eta,
            correlations: p.correlations.effective(mode),
            initial: p.initial,
            jumps,
            measure: Measure::Physical { mu: p.mu },
        })
    }
}

/// One simulated path on the uniform step grid. `v` and `r` are stored truncated at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub dt: f64,
    /// Log-price.
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub r: Vec<f64>,
}

impl Path {
    fn with_steps(n: usize, dt: f64) -> Self {
        Path {
            dt,
            x: vec![0.0; n + 1],
            v: vec![0.0; n + 1],
            r: vec![0.0; n + 1],
        }
    }

    pub fn steps(&self) -> usize {
        self.x.len() - 1
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Grid index of time `t`, if `t` is a grid point.
    pub fn index_at(&self, t: f64) -> Option<usize> {
        grid_index(t, self.dt).filter(|&k| k <= self.steps())
    }

    pub fn price(&self, k: usize) -> f64 {
        self.x[k].exp()
    }

    /// Trapezoidal `∫_0^{t_k} r dt`.
    pub fn integrated_rate(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let inner: f64 = self.r[1..k].iter().sum();
        self.dt * (0.5 * (self.r[0] + self.r[k]) + inner)
    }

    pub fn discount(&self, k: usize) -> f64 {
        (-self.integrated_rate(k)).exp()
    }
}

fn grid_index(t: f64, dt: f64) -> Option<usize> {
    let k = (t / dt).round();
    if k < 0.0 || (k * dt - t).abs() > 1e-9 * t.abs().max(1.0) {
        return None;
    }
    Some(k as usize)
}

/// Per-run constants of the discretisation.
struct Stepper {
    steps: usize,
    dt: f64,
    sqrt_dt: f64,
    chol: [[f64; 3]; 3],
    model: SimModel,
    scheme: Scheme,
    gamma: Option<(Gamma<f64>, f64, f64)>,
    /// Log-price drift not depending on the state: `μ - ψ(1)` or `-ψ(1)`.
    x_const: f64,
    risk_free_drift: bool,
    /// `B(T - t_k) η` for every step under the forward measure, zero otherwise.
    bond_vol: Vec<f64>,
}

impl Stepper {
    fn new(model: &SimModel, cfg: &SimConfig, horizon: f64) -> Result<Self> {
        cfg.validate()?;
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(Error::ConfigError(format!("horizon {horizon} must be finite and non-negative")));
        }
        let dt = 1.0 / cfg.steps_per_year as f64;
        let steps = grid_index(horizon, dt).ok_or_else(|| {
            Error::GridMismatch(format!(
                "horizon {horizon} is not a multiple of the step 1/{}",
                cfg.steps_per_year
            ))
        })?;
        let gamma = match model.jumps.vg() {
            None => None,
            Some(vg) => {
                let dist = Gamma::new(dt / vg.variance_rate, vg.variance_rate)
                    .map_err(|e| Error::ConfigError(format!("gamma clock: {e}")))?;
                Some((dist, vg.drift, vg.volatility))
            }
        };
        let compensator = model.jumps.char_exponent(1.0)?;
        let (x_const, risk_free_drift) = match model.measure {
            Measure::Physical { mu } => (mu - compensator, false),
            _ => (-compensator, true),
        };
        let bond_vol = match model.measure {
            Measure::Forward { maturity } => {
                if horizon > maturity * (1.0 + 1e-12) {
                    return Err(Error::InvalidWindow { t: horizon, maturity });
                }
                let rate = CirRate::new(model.alpha, model.beta, model.eta);
                (0..steps)
                    .map(|k| rate.b((maturity - k as f64 * dt).max(0.0)) * model.eta)
                    .collect()
            }
            _ => vec![0.0; steps],
        };
        Ok(Stepper {
            steps,
            dt,
            sqrt_dt: dt.sqrt(),
            chol: model.correlations.cholesky(),
            model: *model,
            scheme: cfg.scheme,
            gamma,
            x_const,
            risk_free_drift,
            bond_vol,
        })
    }

    fn start(&self, path: &mut Path) -> [f64; 3] {
        let s = self.model.initial;
        let state = [s.s0.ln(), s.v0, s.r0];
        path.x[0] = state[0];
        path.v[0] = state[1];
        path.r[0] = state[2];
        state
    }

    /// Advance one step with independent normals `z` and jump increment `jump`.
    #[inline]
    fn advance(&self, k: usize, state: &mut [f64; 3], z: [f64; 3], jump: f64) {
        let m = &self.model;
        let l = &self.chol;
        let zx = z[0];
        let zv = l[1][0] * z[0] + l[1][1] * z[1];
        let zr = l[2][0] * z[0] + l[2][1] * z[1] + l[2][2] * z[2];
        let v = state[1].max(0.0);
        let r = state[2].max(0.0);
        let dt = self.dt;
        let bond_vol = self.bond_vol[k];
        let cross = if bond_vol != 0.0 { (v * r).sqrt() * bond_vol } else { 0.0 };
        let rate_drift = if self.risk_free_drift { r } else { 0.0 };
        let c = &m.correlations;

        let x_drift = self.x_const + rate_drift - 0.5 * v - c.rho13 * cross;
        state[0] += x_drift * dt + (v * dt).sqrt() * zx + jump;

        let v_drift = m.kappa * (m.theta - v) - c.rho23 * m.sigma * cross;
        let mut dv = v_drift * dt + m.sigma * v.sqrt() * self.sqrt_dt * zv;
        let r_drift = m.alpha * m.beta - m.alpha * r - bond_vol * m.eta * r;
        let mut dr = r_drift * dt + m.eta * r.sqrt() * self.sqrt_dt * zr;
        if self.scheme == Scheme::Milstein {
            dv += 0.25 * m.sigma * m.sigma * dt * (zv * zv - 1.0);
            dr += 0.25 * m.eta * m.eta * dt * (zr * zr - 1.0);
        }
        state[1] += dv;
        state[2] += dr;
    }

    /// Fill `first` (and `second` when given, as the antithetic mirror) from one stream.
    fn fill(&self, rng: &mut ChaCha8Rng, first: &mut Path, mut second: Option<&mut Path>) {
        let mut a = self.start(first);
        let mut b = second.as_deref_mut().map(|p| self.start(p)).unwrap_or(a);
        for k in 0..self.steps {
            let z: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
            let (drift_part, diffusive_part) = match &self.gamma {
                None => (0.0, 0.0),
                Some((dist, drift, vol)) => {
                    let g = dist.sample(rng);
                    let zj: f64 = rng.sample(StandardNormal);
                    (drift * g, vol * g.sqrt() * zj)
                }
            };
            self.advance(k, &mut a, z, drift_part + diffusive_part);
            store(first, k + 1, &a);
            if let Some(p) = second.as_deref_mut() {
                self.advance(k, &mut b, [-z[0], -z[1], -z[2]], drift_part - diffusive_part);
                store(p, k + 1, &b);
            }
        }
    }

    fn rng(&self, seed: u64, unit: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(unit as u64);
        rng
    }
}

#[inline]
fn store(path: &mut Path, k: usize, state: &[f64; 3]) {
    path.x[k] = state[0];
    path.v[k] = state[1].max(0.0);
    path.r[k] = state[2].max(0.0);
}

/// Pairwise summation over a fixed binary split.
fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let (lo, hi) = values.split_at(values.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}

/// Mean and standard error of independent samples. Centred on the first sample so
/// identical samples give a standard error of exactly zero.
pub fn estimate(samples: &[f64], paths: usize) -> McEstimate {
    let n = samples.len();
    if n == 0 {
        return McEstimate { mean: f64::NAN, stderr: f64::NAN, paths };
    }
    let pivot = samples[0];
    let shifted: Vec<f64> = samples.iter().map(|s| s - pivot).collect();
    let mean_shift = pairwise_sum(&shifted) / n as f64;
    let stderr = if n < 2 {
        f64::NAN
    } else {
        let sq: Vec<f64> = shifted.iter().map(|s| (s - mean_shift) * (s - mean_shift)).collect();
        (pairwise_sum(&sq) / (n - 1) as f64 / n as f64).sqrt()
    };
    McEstimate {
        mean: pivot + mean_shift,
        stderr,
        paths,
    }
}

/// Sample mean and standard error of the path functional `f` over `[0, horizon]`.
pub fn mc_expectation<F>(model: &SimModel, cfg: &SimConfig, horizon: f64, f: F) -> Result<McEstimate>
where
    F: Fn(&Path) -> f64 + Sync,
{
    let mut out = mc_expectations(model, cfg, horizon, 1, |path, slot| slot[0] = f(path))?;
    Ok(out.remove(0))
}

/// Several functionals from one path ensemble: `f` writes `outputs` values per path.
pub fn mc_expectations<F>(model: &SimModel, cfg: &SimConfig, horizon: f64, outputs: usize, f: F) -> Result<Vec<McEstimate>>
where
    F: Fn(&Path, &mut [f64]) + Sync,
{
    let stepper = Stepper::new(model, cfg, horizon)?;
    let (n, dt) = (stepper.steps, stepper.dt);
    let samples: Vec<Vec<f64>> = (0..cfg.units())
        .into_par_iter()
        .map_init(
            || (Path::with_steps(n, dt), Path::with_steps(n, dt), vec![0.0; outputs]),
            |(first, second, scratch), unit| {
                let mut rng = stepper.rng(cfg.seed, unit);
                let mut values = vec![0.0; outputs];
                if cfg.antithetic {
                    stepper.fill(&mut rng, first, Some(second));
                    f(first, &mut values);
                    f(second, scratch);
                    for (v, s) in values.iter_mut().zip(scratch.iter()) {
                        *v = 0.5 * (*v + s);
                    }
                } else {
                    stepper.fill(&mut rng, first, None);
                    f(first, &mut values);
                }
                values
            },
        )
        .collect();
    Ok((0..outputs)
        .map(|j| {
            let column: Vec<f64> = samples.iter().map(|s| s[j]).collect();
            estimate(&column, cfg.paths)
        })
        .collect())
}

/// The first `count` paths of the ensemble `mc_expectation` would average, in order.
pub fn simulate_paths(model: &SimModel, cfg: &SimConfig, horizon: f64, count: usize) -> Result<Vec<Path>> {
    let stepper = Stepper::new(model, cfg, horizon)?;
    let count = count.min(cfg.paths);
    let per_unit = if cfg.antithetic { 2 } else { 1 };
    let mut out = Vec::with_capacity(count);
    let mut unit = 0;
    while out.len() < count {
        let mut rng = stepper.rng(cfg.seed, unit);
        let mut first = Path::with_steps(stepper.steps, stepper.dt);
        if per_unit == 2 {
            let mut second = first.clone();
            stepper.fill(&mut rng, &mut first, Some(&mut second));
            out.push(first);
            if out.len() < count {
                out.push(second);
            }
        } else {
            stepper.fill(&mut rng, &mut first, None);
            out.push(first);
        }
        unit += 1;
    }
    Ok(out)
}

/// Minimum number of simulation steps inside every sampling period.
pub const MIN_STEPS_PER_PERIOD: usize = 4;

/// Step indices of the contract's sampling dates.
pub fn sampling_indices(contract: &SwapContract, steps_per_year: usize) -> Result<Vec<usize>> {
    let dt = 1.0 / steps_per_year as f64;
    let idx = contract
        .grid
        .iter()
        .map(|&t| {
            grid_index(t, dt).ok_or_else(|| {
                Error::GridMismatch(format!("sampling date {t} is not on the 1/{steps_per_year} step grid"))
            })
        })
        .collect::<Result<Vec<usize>>>()?;
    if let Some(w) = idx.windows(2).find(|w| w[1] - w[0] < MIN_STEPS_PER_PERIOD) {
        return Err(Error::GridMismatch(format!(
            "a sampling period spans {} steps; at least {MIN_STEPS_PER_PERIOD} are required",
            w[1] - w[0]
        )));
    }
    Ok(idx)
}

/// Monte Carlo fair strike `NA · E^T[Σ (ln S_{t_i} / S_{t_{i-1}})^m]`.
pub fn mc_fair_strike(contract: &SwapContract, p: &Validated<ForwardParams>, mode: Mode, cfg: &SimConfig) -> Result<McEstimate> {
    contract.validate()?;
    if (contract.maturity - p.maturity).abs() > 1e-12 * p.maturity.max(1.0) {
        return Err(Error::GridMismatch(format!(
            "contract maturity {} differs from the forward-measure maturity {}",
            contract.maturity, p.maturity
        )));
    }
    cfg.validate()?;
    let idx = sampling_indices(contract, cfg.steps_per_year)?;
    let model = SimModel::forward(p, mode);
    let m = contract.moment as i32;
    let notional = contract.notional;
    mc_expectation(&model, cfg, contract.maturity, |path| {
        let sum: f64 = idx.windows(2).map(|w| (path.x[w[1]] - path.x[w[0]]).powi(m)).sum();
        notional * sum
    })
}
