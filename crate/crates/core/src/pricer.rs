//! Fair strikes of discretely sampled variance and moment swaps.
//!
//! For sampling dates `0 = t_0 < … < t_N = T` the strike is
//!
//! ```text
//! K = NA Σ_i ∂^m/∂ω^m g_i(ω) |_{ω=0⁻},   g_i(ω) = E^T[ e^{ω (X_{t_i} - X_{t_{i-1}})} ]
//! ```
//!
//! Each `g_i` is the composition of two affine legs: an inner leg over
//! `[t_{i-1}, t_i]` started from `(ω, 0, 0, 0)` and an outer leg over
//! `[0, t_{i-1}]` with `ω = 0` started from the inner result.
//!
//! The derivative is a one-sided finite difference on `g_i - 1 = expm1(L_i)`
//! with `L_i = C V_0 + D r_0 + E`. All stencil nodes of a period are
//! integrated on the step grid chosen adaptively at the outermost node, so
//! the discrete solution map is smooth in `ω` and the difference quotient
//! sees no step-selection noise.

use rayon::prelude::*;

use crate::affine::{AffineCoefficients, CrossMomentFn, LegSettings, LegSystem};
use crate::error::{Error, Result};
use crate::moments::{BConvention, CirMomentSpec, CrossMoment};
use crate::ode::OdeOptions;
use crate::params::{ForwardParams, Mode, Validated};

/// Contract terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapContract {
    pub maturity: f64,
    /// Sampling dates `t_0 = 0 < t_1 < … < t_N = maturity`.
    pub grid: Vec<f64>,
    pub notional: f64,
    /// Power of the log return; 2 for a variance swap.
    pub moment: u32,
}

impl SwapContract {
    pub fn uniform(maturity: f64, periods: usize, notional: f64, moment: u32) -> Result<Self> {
        if periods == 0 {
            return Err(Error::InvalidContract("at least one sampling period is required".into()));
        }
        let dt = maturity / periods as f64;
        let mut grid: Vec<f64> = (0..=periods).map(|i| i as f64 * dt).collect();
        grid[periods] = maturity;
        SwapContract::with_grid(grid, notional, moment)
    }

    pub fn variance(maturity: f64, periods: usize, notional: f64) -> Result<Self> {
        SwapContract::uniform(maturity, periods, notional, 2)
    }

    pub fn with_grid(grid: Vec<f64>, notional: f64, moment: u32) -> Result<Self> {
        let c = SwapContract {
            maturity: grid.last().copied().unwrap_or(0.0),
            grid,
            notional,
            moment,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.len() < 2 {
            return Err(Error::InvalidContract("at least one sampling period is required".into()));
        }
        if self.grid[0] != 0.0 {
            return Err(Error::InvalidContract(format!("first sampling date must be 0, got {}", self.grid[0])));
        }
        if self.grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidContract("sampling dates must be strictly increasing".into()));
        }
        if *self.grid.last().unwrap() != self.maturity || !self.maturity.is_finite() {
            return Err(Error::InvalidContract("last sampling date must equal the maturity".into()));
        }
        if self.moment == 0 {
            return Err(Error::InvalidContract("moment order must be at least 1".into()));
        }
        if !self.notional.is_finite() {
            return Err(Error::InvalidContract("notional must be finite".into()));
        }
        Ok(())
    }

    pub fn periods(&self) -> usize {
        self.grid.len() - 1
    }
}

/// How the two legs of a period are placed in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Nesting {
    /// Inner leg over `[t_{i-1}, t_i]`, outer over `[0, t_{i-1}]`.
    #[default]
    Absolute,
    /// Both legs end at maturity: inner over `[T - Δt_i, T]`, outer over `[T - t_{i-1}, T]`.
    PaperLiteral,
}

#[derive(Debug, Clone, Copy)]
pub struct PricingSettings {
    pub leg: LegSettings,
    pub nesting: Nesting,
    /// Finite-difference step; `None` picks `1e-4` for `m ≤ 2` and `1e-2` above.
    pub fd_step: Option<f64>,
    pub b_convention: BConvention,
}

impl Default for PricingSettings {
    fn default() -> Self {
        PricingSettings {
            leg: LegSettings {
                ode: OdeOptions {
                    rtol: 1e-10,
                    atol: 1e-300,
                    ..OdeOptions::default()
                },
                ..LegSettings::default()
            },
            nesting: Nesting::Absolute,
            fd_step: None,
            b_convention: BConvention::StartMatched,
        }
    }
}

impl PricingSettings {
    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.leg.mode = mode;
        self
    }

    pub fn with_nesting(mut self, nesting: Nesting) -> Self {
        self.nesting = nesting;
        self
    }

    pub fn step_for(&self, moment: u32) -> f64 {
        self.fd_step.unwrap_or(if moment <= 2 { 1e-4 } else { 1e-2 })
    }
}

/// Fair strike and its breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct StrikeResult {
    pub strike: f64,
    /// Per-period derivatives before the notional, in sampling order.
    pub contributions: Vec<f64>,
    /// Finite-difference step.
    pub step: f64,
    /// Strike recomputed with half the step.
    pub halved_strike: f64,
    pub notional: f64,
}

impl StrikeResult {
    /// `|K(h) - K(h/2)|`, an estimate of the differentiation error.
    pub fn truncation_estimate(&self) -> f64 {
        (self.strike - self.halved_strike).abs()
    }
}

/// Weights of the `order`-th derivative at 0 for the given nodes (Fornberg's recursion).
pub fn fd_weights(nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0];
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i];
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// One-sided `m`-th derivative at `0⁻` on nodes `0, -h, …, -(m+2)h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneSidedDerivative {
    pub value: f64,
    /// The same stencil with step `h/2`.
    pub halved: f64,
    pub step: f64,
}

fn stencil(order: u32, h: f64) -> (Vec<f64>, Vec<f64>) {
    let nodes: Vec<f64> = (0..order + 3).map(|j| -(j as f64) * h).collect();
    let weights = fd_weights(&nodes, order as usize);
    (nodes, weights)
}

fn apply<G: Fn(f64) -> Result<f64>>(g: &G, order: u32, h: f64) -> Result<f64> {
    let (nodes, weights) = stencil(order, h);
    // the weights sum to zero, so differences from g(0) remove the constant part exactly
    let base = g(0.0)?;
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(&weights).skip(1) {
        acc += w * (g(*x)? - base);
    }
    Ok(acc)
}

/// Left derivative of order `m` at zero with a step-halving companion.
pub fn derivative_at_zero_minus<G: Fn(f64) -> Result<f64>>(g: G, order: u32, h: f64) -> Result<OneSidedDerivative> {
    if !(h > 0.0) || order == 0 {
        return Err(Error::DomainError(format!("need h > 0 and order ≥ 1 (h = {h}, order = {order})")));
    }
    Ok(OneSidedDerivative {
        value: apply(&g, order, h)?,
        halved: apply(&g, order, 0.5 * h)?,
        step: h,
    })
}

/// `E[sqrt(V) sqrt(r)]` approximation built from the starred parameters.
pub fn forward_cross_moment(p: &ForwardParams, convention: BConvention) -> Result<CrossMoment> {
    let variance = CirMomentSpec::new(p.kappa, p.theta, p.sigma, p.initial.v0);
    let rate = CirMomentSpec::new(p.alpha, p.beta, p.eta, p.initial.r0);
    CrossMoment::new(variance, rate, p.correlations.rho23, convention)
}

struct Windows {
    inner: (f64, f64),
    outer: (f64, f64),
}

fn windows(contract: &SwapContract, i: usize, nesting: Nesting) -> Windows {
    let (a, b) = (contract.grid[i - 1], contract.grid[i]);
    match nesting {
        Nesting::Absolute => Windows {
            inner: (a, b),
            outer: (0.0, a),
        },
        Nesting::PaperLiteral => {
            let t = contract.maturity;
            Windows {
                inner: (t - (b - a), t),
                outer: (t - a, t),
            }
        }
    }
}

/// Frozen-grid evaluator of `L_i(ω)` for one period.
struct Period<'a> {
    p: &'a ForwardParams,
    settings: &'a PricingSettings,
    cross: Option<CrossMomentFn<'a>>,
    w: Windows,
    inner_grid: Vec<f64>,
    outer: LegSystem<'a>,
    outer_grid: Vec<f64>,
}

impl<'a> Period<'a> {
    fn build(
        contract: &SwapContract,
        i: usize,
        probe: f64,
        p: &'a ForwardParams,
        settings: &'a PricingSettings,
        cross: Option<CrossMomentFn<'a>>,
    ) -> Result<Self> {
        let w = windows(contract, i, settings.nesting);
        let opts = &settings.leg.ode;
        let inner = LegSystem::new(probe, w.inner.1, p, &settings.leg, cross)?;
        let first = inner.adaptive(w.inner.1 - w.inner.0, [0.0; 3], opts)?;
        let outer = LegSystem::new(0.0, w.outer.1, p, &settings.leg, cross)?;
        let second = outer.adaptive(w.outer.1 - w.outer.0, first.y, opts)?;
        Ok(Period {
            p,
            settings,
            cross,
            w,
            inner_grid: first.grid,
            outer,
            outer_grid: second.grid,
        })
    }

    fn exponent(&self, omega: f64) -> Result<f64> {
        if omega == 0.0 {
            return Ok(0.0);
        }
        let inner = LegSystem::new(omega, self.w.inner.1, self.p, &self.settings.leg, self.cross)?;
        let mid = inner.replay(&self.inner_grid, [0.0; 3]);
        let [c, d, e] = self.outer.replay(&self.outer_grid, mid);
        Ok(c * self.p.initial.v0 + d * self.p.initial.r0 + e)
    }
}

fn check_stencil(p: &ForwardParams, order: u32, h: f64) -> Result<()> {
    let node = -((order + 2) as f64) * h;
    let bound = p.omega_lower_bound();
    if node <= bound {
        return Err(Error::StencilOutsideAdmissibleRegion { node, bound });
    }
    if let Some(vg) = p.jumps.vg() {
        if !vg.exponent_defined(node) {
            return Err(Error::StencilOutsideAdmissibleRegion {
                node,
                bound: f64::NAN,
            });
        }
    }
    Ok(())
}

fn check_contract(contract: &SwapContract, p: &ForwardParams) -> Result<()> {
    contract.validate()?;
    if (contract.maturity - p.maturity).abs() > 1e-12 * p.maturity.max(1.0) {
        return Err(Error::InvalidContract(format!(
            "contract maturity {} differs from the forward-measure maturity {}",
            contract.maturity, p.maturity
        )));
    }
    Ok(())
}

fn cross_for(p: &ForwardParams, settings: &PricingSettings) -> Result<Option<CrossMoment>> {
    match settings.leg.mode {
        Mode::Partial => Ok(None),
        Mode::Full => forward_cross_moment(p, settings.b_convention).map(Some),
    }
}

/// `g_i(ω) = E^T[e^{ω (X_{t_i} - X_{t_{i-1}})}]` for period `i ∈ 1..=N`.
pub fn period_mgf(
    i: usize,
    omega: f64,
    contract: &SwapContract,
    p: &Validated<ForwardParams>,
    settings: &PricingSettings,
) -> Result<f64> {
    check_contract(contract, p)?;
    if i == 0 || i > contract.periods() {
        return Err(Error::InvalidContract(format!("period {i} outside 1..={}", contract.periods())));
    }
    let cm = cross_for(p, settings)?;
    let eval = |t: f64| cm.as_ref().map_or(0.0, |c| c.eval(t));
    let cross: Option<CrossMomentFn<'_>> = cm.as_ref().map(|_| &eval as CrossMomentFn<'_>);
    let w = windows(contract, i, settings.nesting);
    let inner = crate::affine::solve_leg(
        w.inner.0,
        w.inner.1,
        AffineCoefficients::log_price(omega),
        p,
        &settings.leg,
        cross,
    )?;
    let c1 = inner.coefficients;
    let outer = LegSystem::new(0.0, w.outer.1, p, &settings.leg, cross)?;
    let run = outer.adaptive(w.outer.1 - w.outer.0, [c1.c, c1.d, c1.e], &settings.leg.ode)?;
    let [c, d, e] = run.y;
    Ok((c * p.initial.v0 + d * p.initial.r0 + e).exp())
}

/// Fair strike of the `m`-th moment swap, `m = contract.moment`.
pub fn fair_strike(contract: &SwapContract, p: &Validated<ForwardParams>, settings: &PricingSettings) -> Result<StrikeResult> {
    check_contract(contract, p)?;
    let order = contract.moment;
    let h = settings.step_for(order);
    check_stencil(p, order, h)?;
    let cm = cross_for(p, settings)?;
    let eval = |t: f64| cm.as_ref().map_or(0.0, |c| c.eval(t));
    let cross: Option<CrossMomentFn<'_>> = cm.as_ref().map(|_| &eval as CrossMomentFn<'_>);
    let probe = -((order + 2) as f64) * h;
    let fp: &ForwardParams = p;

    let per_period: Vec<OneSidedDerivative> = (1..=contract.periods())
        .into_par_iter()
        .map(|i| {
            let period = Period::build(contract, i, probe, fp, settings, cross)?;
            derivative_at_zero_minus(|w| Ok(period.exponent(w)?.exp_m1()), order, h)
        })
        .collect::<Result<_>>()?;

    let contributions: Vec<f64> = per_period.iter().map(|d| d.value).collect();
    let strike = contract.notional * contributions.iter().sum::<f64>();
    let halved_strike = contract.notional * per_period.iter().map(|d| d.halved).sum::<f64>();
    Ok(StrikeResult {
        strike,
        contributions,
        step: h,
        halved_strike,
        notional: contract.notional,
    })
}

/// Continuous-sampling limit `NA [θT + (V0 - θ)(1 - e^{-κT})/κ] + NA T ∫x² ν(dx)`.
pub fn continuous_limit_reference(contract: &SwapContract, p: &ForwardParams, with_jumps: bool) -> f64 {
    let t = contract.maturity;
    let k = p.kappa;
    let diffusive = p.theta * t + (p.initial.v0 - p.theta) * -(-k * t).exp_m1() / k;
    let jumps = if with_jumps { t * p.jumps.second_moment() } else { 0.0 };
    contract.notional * (diffusive + jumps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{Jumps, VgParams};
    use crate::params::{to_forward, validate, RiskNeutralParams};

    fn table1(maturity: f64) -> Validated<ForwardParams> {
        to_forward(&validate(RiskNeutralParams::table1()).unwrap(), maturity).unwrap()
    }

    #[test]
    fn fornberg_reproduces_known_weights() {
        let w = fd_weights(&[0.0, -1.0, -2.0], 1);
        let expected = [1.5, -2.0, 0.5];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        let w = fd_weights(&[0.0, -1.0, -2.0, -3.0], 2);
        let expected = [2.0, -5.0, 4.0, -1.0];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_of_analytic_function() {
        let (a, b) = (0.3, -0.1);
        let d = derivative_at_zero_minus(|w| Ok((a * w * w + b * w).exp()), 2, 1e-4).unwrap();
        assert!((d.value - 0.61).abs() < 1e-6);
        for m in 1..=4 {
            let d = derivative_at_zero_minus(|_| Ok(1.0), m, 1e-3).unwrap();
            assert_eq!(d.value, 0.0);
        }
    }

    #[test]
    fn contract_validation() {
        assert!(SwapContract::uniform(1.0, 0, 1.0, 2).is_err());
        assert!(SwapContract::with_grid(vec![0.0, 0.5, 0.5, 1.0], 1.0, 2).is_err());
        assert!(SwapContract::with_grid(vec![0.1, 1.0], 1.0, 2).is_err());
        assert!(SwapContract::uniform(1.0, 4, 1.0, 0).is_err());
        let c = SwapContract::uniform(1.0, 3, 1.0, 2).unwrap();
        assert_eq!(c.grid[3], 1.0);
        assert_eq!(c.periods(), 3);
    }

    #[test]
    fn period_mgf_trivial_cases() {
        let p = table1(1.0);
        let c = SwapContract::variance(1.0, 4, 1.0).unwrap();
        let s = PricingSettings::default();
        for i in 1..=4 {
            assert_eq!(period_mgf(i, 0.0, &c, &p, &s).unwrap(), 1.0);
        }
        let first = period_mgf(1, -0.2, &c, &p, &s).unwrap();
        let leg = crate::affine::solve_leg(0.0, 0.25, AffineCoefficients::log_price(-0.2), &p, &s.leg, None).unwrap();
        let direct = leg.coefficients.exponent(p.initial.v0, p.initial.r0).exp();
        assert!((first - direct).abs() < 1e-12);
        assert!(period_mgf(5, -0.1, &c, &p, &s).is_err());
    }

    fn quiet() -> Validated<ForwardParams> {
        let mut raw = RiskNeutralParams::table1();
        raw.sigma = 1e-12;
        raw.eta = 1e-12;
        raw.theta = 0.05;
        raw.beta = 0.05;
        raw.initial.v0 = 0.05;
        raw.initial.r0 = 0.05;
        raw.jumps = Jumps::VarianceGamma(VgParams::new(1e-12, 1e-12, 0.01).unwrap());
        to_forward(&validate(raw).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn deterministic_limit() {
        // V stays at V0, so each return is normal with mean (r0 - V0/2)Δt and variance V0 Δt
        let p = quiet();
        let c = SwapContract::variance(1.0, 4, 1.0).unwrap();
        let k = fair_strike(&c, &p, &PricingSettings::default()).unwrap();
        let expected = 4.0 * (0.025_f64 * 0.25).powi(2) + 0.05;
        assert!((k.strike - expected).abs() / expected < 1e-6, "{} vs {expected}", k.strike);
    }

    #[test]
    fn strike_structure() {
        let p = table1(1.0);
        let s = PricingSettings::default();
        let c = SwapContract::variance(1.0, 12, 1.0).unwrap();
        let k = fair_strike(&c, &p, &s).unwrap();
        assert_eq!(k.contributions.len(), 12);
        assert!(k.contributions.iter().all(|&v| v >= -1e-10));
        assert!(k.truncation_estimate() <= 1e-6 * k.strike);
        let scaled = fair_strike(&SwapContract::variance(1.0, 12, 3.0).unwrap(), &p, &s).unwrap();
        assert!((scaled.strike - 3.0 * k.strike).abs() <= 1e-15 * scaled.strike);
        let sum: f64 = k.contributions.iter().sum();
        assert_eq!(k.strike, sum);
    }

    #[test]
    fn single_period_is_inner_leg_derivative() {
        let p = table1(1.0);
        let s = PricingSettings::default();
        let c = SwapContract::variance(1.0, 1, 1.0).unwrap();
        let k = fair_strike(&c, &p, &s).unwrap();
        let direct = derivative_at_zero_minus(
            |w| {
                let leg = crate::affine::solve_leg(0.0, 1.0, AffineCoefficients::log_price(w), &p, &s.leg, None)?;
                Ok(leg.coefficients.exponent(p.initial.v0, p.initial.r0).exp_m1())
            },
            2,
            1e-3,
        )
        .unwrap();
        assert!((k.strike - direct.value).abs() < 1e-7 * k.strike);
    }

    #[test]
    fn nesting_modes_agree_closely() {
        let p = table1(1.0);
        let c = SwapContract::variance(1.0, 12, 1.0).unwrap();
        let a = fair_strike(&c, &p, &PricingSettings::default()).unwrap().strike;
        let b = fair_strike(&c, &p, &PricingSettings::default().with_nesting(Nesting::PaperLiteral)).unwrap().strike;
        assert!((a - b).abs() / a < 5e-3);
    }

    #[test]
    fn stencil_bound_enforced() {
        let p = table1(1.0);
        let c = SwapContract::variance(1.0, 4, 1.0).unwrap();
        let s = PricingSettings {
            fd_step: Some(10.0),
            ..PricingSettings::default()
        };
        assert!(matches!(fair_strike(&c, &p, &s), Err(Error::StencilOutsideAdmissibleRegion { .. })));
    }

    #[test]
    fn continuous_reference_examples() {
        let mut raw = RiskNeutralParams::table1();
        raw.jumps = Jumps::None;
        raw.initial.v0 = raw.theta;
        let p = to_forward(&validate(raw).unwrap(), 2.0).unwrap();
        let c = SwapContract::variance(2.0, 4, 1.5).unwrap();
        assert!((continuous_limit_reference(&c, &p, true) - 1.5 * raw.theta * 2.0).abs() < 1e-15);
    }

    #[test]
    fn maturity_mismatch_rejected() {
        let p = table1(2.0);
        let c = SwapContract::variance(1.0, 4, 1.0).unwrap();
        assert!(matches!(fair_strike(&c, &p, &PricingSettings::default()), Err(Error::InvalidContract(_))));
    }
}
