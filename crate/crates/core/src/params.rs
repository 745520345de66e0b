//! Model parameters under the physical (P), risk-neutral (Q) and T-forward
//! (Q^T) measures, their validation, and the measure-change maps.
//!
//! The three tiers are distinct types. Pricing code only accepts
//! [`Validated<ForwardParams>`], so physical-measure values cannot leak into
//! a forward-measure computation.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::levy::{Jumps, VgParams};

/// Determinant tolerance for the positive semi-definiteness test.
const PSD_TOLERANCE: f64 = 1e-12;

/// Correlation structure between the Brownian drivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Only the log-price and variance are correlated (`ρ`); the rate is independent.
    #[default]
    Partial,
    /// Pairwise correlations `ρ12` (price, variance), `ρ13` (price, rate), `ρ23` (variance, rate).
    Full,
}

/// Pairwise correlations. In [`Mode::Partial`] only `rho12` (the `ρ` of the
/// partial model) is used and `rho13 = rho23 = 0` is implied.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Correlations {
    pub rho12: f64,
    pub rho13: f64,
    pub rho23: f64,
}

impl Correlations {
    pub fn partial(rho: f64) -> Self {
        Correlations {
            rho12: rho,
            rho13: 0.0,
            rho23: 0.0,
        }
    }

    pub fn full(rho12: f64, rho13: f64, rho23: f64) -> Self {
        Correlations { rho12, rho13, rho23 }
    }

    /// The correlations actually in force under `mode`.
    pub fn effective(&self, mode: Mode) -> Correlations {
        match mode {
            Mode::Partial => Correlations::partial(self.rho12),
            Mode::Full => *self,
        }
    }

    pub fn determinant(&self) -> f64 {
        let Correlations { rho12, rho13, rho23 } = *self;
        1.0 + 2.0 * rho12 * rho13 * rho23 - rho12 * rho12 - rho13 * rho13 - rho23 * rho23
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("rho12", self.rho12), ("rho13", self.rho13), ("rho23", self.rho23)] {
            if !(-1.0..=1.0).contains(&value) {
                return Err(Error::CorrelationOutOfRange { name, value });
            }
        }
        let det = self.determinant();
        if det < -PSD_TOLERANCE {
            return Err(Error::CorrelationOutOfRange {
                name: "determinant",
                value: det,
            });
        }
        Ok(())
    }

    /// Lower-triangular Cholesky factor of the 3×3 correlation matrix
    /// ordered (price, variance, rate). Semi-definite directions get a zero pivot.
    pub fn cholesky(&self) -> [[f64; 3]; 3] {
        let Correlations { rho12, rho13, rho23 } = *self;
        let l11 = (1.0 - rho12 * rho12).max(0.0).sqrt();
        let l21 = if l11 > 0.0 { (rho23 - rho12 * rho13) / l11 } else { 0.0 };
        let l22 = (1.0 - rho13 * rho13 - l21 * l21).max(0.0).sqrt();
        [[1.0, 0.0, 0.0], [rho12, l11, 0.0], [rho13, l21, l22]]
    }
}

/// Initial state of the three factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub s0: f64,
    pub v0: f64,
    pub r0: f64,
}

impl InitialState {
    fn validate(&self) -> Result<()> {
        for (name, value) in [("S0", self.s0), ("V0", self.v0), ("r0", self.r0)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveInitialState { name, value });
            }
        }
        Ok(())
    }
}

/// Coefficients of the model under the physical measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Expected stock return.
    pub mu: f64,
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub correlations: Correlations,
    pub initial: InitialState,
}

/// Market prices of risk and preference parameters.
///
/// `i`, `k`, `m` are the constants of the HJB value function; they are
/// produced by [`crate::equilibrium::solve_hjb`] and default to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskPrices {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Relative risk aversion.
    pub vartheta: f64,
    /// Time discount rate.
    pub delta: f64,
    pub i: f64,
    pub k: f64,
    pub m: f64,
}

impl RiskPrices {
    pub fn new(lambda1: f64, lambda2: f64, vartheta: f64, delta: f64) -> Self {
        RiskPrices {
            lambda1,
            lambda2,
            vartheta,
            delta,
            i: 0.0,
            k: 0.0,
            m: 0.0,
        }
    }

    pub fn with_hjb(mut self, i: f64, k: f64, m: f64) -> Self {
        self.i = i;
        self.k = k;
        self.m = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.vartheta > 0.0) || self.vartheta == 1.0 {
            return Err(Error::DegenerateParameter(format!(
                "risk aversion must be positive and different from 1, got {}",
                self.vartheta
            )));
        }
        if !(self.delta > 0.0) {
            return Err(Error::DegenerateParameter(format!(
                "time discount must be positive, got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Coefficients under the risk-neutral measure. The jump kernel under Q is
/// supplied directly as a VG parameterisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskNeutralParams {
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub correlations: Correlations,
    pub initial: InitialState,
    pub jumps: Jumps,
}

impl RiskNeutralParams {
    /// The risk-neutral parameter set used throughout the numerical study:
    /// `S0 = 1, ρ = -0.4, V0 = θ = 0.2236², κ = 2, σ = 0.1, r0 = 0.05,
    /// α = 1.2, β = 0.05, η = 0.01`, VG drift and volatility 0.001 with
    /// gamma variance rate 0.01.
    pub fn table1() -> Self {
        let var = 0.2236 * 0.2236;
        RiskNeutralParams {
            kappa: 2.0,
            theta: var,
            sigma: 0.1,
            alpha: 1.2,
            beta: 0.05,
            eta: 0.01,
            correlations: Correlations::partial(-0.4),
            initial: InitialState {
                s0: 1.0,
                v0: var,
                r0: 0.05,
            },
            jumps: Jumps::VarianceGamma(VgParams {
                drift: 0.001,
                volatility: 0.001,
                variance_rate: 0.01,
            }),
        }
    }
}

/// Coefficients under the T-forward measure (starred parameters).
///
/// The time-dependent drift correction `-B(t,T) η² r` of the short rate is
/// not stored; it is applied by the rates and MGF code from `maturity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardParams {
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub correlations: Correlations,
    pub initial: InitialState,
    pub jumps: Jumps,
    pub maturity: f64,
}

impl ForwardParams {
    /// Lower admissibility bound `(σ - sqrt(σ² + 4κ²)) / (2σ)` for the MGF exponent.
    pub fn omega_lower_bound(&self) -> f64 {
        if self.sigma == 0.0 {
            return f64::NEG_INFINITY;
        }
        let s = self.sigma;
        (s - (s * s + 4.0 * self.kappa * self.kappa).sqrt()) / (2.0 * s)
    }

    /// The same coefficients read as risk-neutral ones (starred values equal Q values).
    pub fn risk_neutral(&self) -> RiskNeutralParams {
        RiskNeutralParams {
            kappa: self.kappa,
            theta: self.theta,
            sigma: self.sigma,
            alpha: self.alpha,
            beta: self.beta,
            eta: self.eta,
            correlations: self.correlations,
            initial: self.initial,
            jumps: self.jumps,
        }
    }
}

/// A parameter set that passed validation. Immutable thereafter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validated<T>(T);

impl<T> Validated<T> {
    pub fn into_inner(self) -> T {
        self.0
    }
}

impl<T> Deref for Validated<T> {
    type Target = T;
    fn deref(&self) -> &T {
        &self.0
    }
}

pub trait Validate: Sized {
    fn check(&self) -> Result<()>;

    fn validate(self) -> Result<Validated<Self>> {
        self.check()?;
        Ok(Validated(self))
    }
}

/// Validate any parameter tier.
pub fn validate<T: Validate>(params: T) -> Result<Validated<T>> {
    params.validate()
}

fn check_finite(values: &[(&str, f64)]) -> Result<()> {
    for (name, v) in values {
        if !v.is_finite() {
            return Err(Error::DegenerateParameter(format!("{name} is not finite")));
        }
    }
    Ok(())
}

fn check_square_root_factor(
    label: &str,
    speed: f64,
    level: f64,
    vol: f64,
) -> Result<()> {
    if !(speed > 0.0) || level < 0.0 || vol < 0.0 {
        return Err(Error::DegenerateParameter(format!(
            "{label}: speed must be positive and level, volatility non-negative (got {speed}, {level}, {vol})"
        )));
    }
    if 2.0 * speed * level < vol * vol {
        return Err(Error::FellerViolation(format!(
            "{label}: 2·{speed}·{level} = {} < {vol}² = {}",
            2.0 * speed * level,
            vol * vol
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn check_common(
    kappa: f64,
    theta: f64,
    sigma: f64,
    alpha: f64,
    beta: f64,
    eta: f64,
    correlations: &Correlations,
    initial: &InitialState,
) -> Result<()> {
    check_finite(&[
        ("kappa", kappa),
        ("theta", theta),
        ("sigma", sigma),
        ("alpha", alpha),
        ("beta", beta),
        ("eta", eta),
    ])?;
    check_square_root_factor("variance (2κθ ≥ σ²)", kappa, theta, sigma)?;
    check_square_root_factor("short rate (2αβ ≥ η²)", alpha, beta, eta)?;
    correlations.validate()?;
    initial.validate()
}

impl Validate for PhysicalParams {
    fn check(&self) -> Result<()> {
        check_finite(&[("mu", self.mu)])?;
        check_common(
            self.kappa,
            self.theta,
            self.sigma,
            self.alpha,
            self.beta,
            self.eta,
            &self.correlations,
            &self.initial,
        )
    }
}

impl Validate for RiskNeutralParams {
    fn check(&self) -> Result<()> {
        check_common(
            self.kappa,
            self.theta,
            self.sigma,
            self.alpha,
            self.beta,
            self.eta,
            &self.correlations,
            &self.initial,
        )?;
        self.jumps.validate()
    }
}

impl Validate for ForwardParams {
    fn check(&self) -> Result<()> {
        if !(self.maturity >= 0.0 && self.maturity.is_finite()) {
            return Err(Error::InvalidWindow {
                t: 0.0,
                maturity: self.maturity,
            });
        }
        check_common(
            self.kappa,
            self.theta,
            self.sigma,
            self.alpha,
            self.beta,
            self.eta,
            &self.correlations,
            &self.initial,
        )?;
        self.jumps.validate()
    }
}

impl Validate for RiskPrices {
    fn check(&self) -> Result<()> {
        RiskPrices::validate(self)
    }
}

/// Map physical parameters to the risk-neutral measure.
///
/// Partial mode: `κ^Q = κ + ρσ(ϑ - σρI) + λ1 sqrt(1-ρ²)`.
/// Full mode: `κ^Q = κ + λ1`. In both, `θ^Q = κθ/κ^Q`,
/// `α^Q = α + λ2`, `β^Q = αβ/(α + λ2)`. The Q jump kernel is supplied directly.
pub fn to_risk_neutral(
    p: &Validated<PhysicalParams>,
    rp: &RiskPrices,
    mode: Mode,
    jumps_q: Jumps,
) -> Result<RiskNeutralParams> {
    rp.validate()?;
    let rho = p.correlations.rho12;
    let kappa_q = match mode {
        Mode::Partial => {
            p.kappa + rho * p.sigma * (rp.vartheta - p.sigma * rho * rp.i) + rp.lambda1 * (1.0 - rho * rho).sqrt()
        }
        Mode::Full => p.kappa + rp.lambda1,
    };
    let alpha_q = p.alpha + rp.lambda2;
    if !(kappa_q > 0.0) {
        return Err(Error::DegenerateParameter(format!("risk-neutral κ = {kappa_q} ≤ 0")));
    }
    if !(alpha_q > 0.0) {
        return Err(Error::DegenerateParameter(format!("risk-neutral α = {alpha_q} ≤ 0")));
    }
    Ok(RiskNeutralParams {
        kappa: kappa_q,
        theta: p.kappa * p.theta / kappa_q,
        sigma: p.sigma,
        alpha: alpha_q,
        beta: p.alpha * p.beta / alpha_q,
        eta: p.eta,
        correlations: p.correlations,
        initial: p.initial,
        jumps: jumps_q,
    })
}

/// Anything that can be re-expressed under the T-forward measure.
pub trait ForwardSource {
    fn forward_params(&self, maturity: f64) -> ForwardParams;
}

impl ForwardSource for RiskNeutralParams {
    fn forward_params(&self, maturity: f64) -> ForwardParams {
        ForwardParams {
            kappa: self.kappa,
            theta: self.theta,
            sigma: self.sigma,
            alpha: self.alpha,
            beta: self.beta,
            eta: self.eta,
            correlations: self.correlations,
            initial: self.initial,
            jumps: self.jumps,
            maturity,
        }
    }
}

impl ForwardSource for ForwardParams {
    fn forward_params(&self, maturity: f64) -> ForwardParams {
        ForwardParams { maturity, ..*self }
    }
}

/// Starred parameters equal the Q parameters; only the maturity is attached.
pub fn to_forward<P: ForwardSource>(q: &Validated<P>, maturity: f64) -> Result<Validated<ForwardParams>> {
    if !(maturity >= 0.0 && maturity.is_finite()) {
        return Err(Error::InvalidWindow { t: 0.0, maturity });
    }
    // the starred coefficients are the already validated Q ones
    Ok(Validated(q.forward_params(maturity)))
}
