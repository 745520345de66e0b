//! Affine coefficients of the joint MGF under the T-forward measure,
//!
//! ```text
//! E^T[ exp(ω X_{t1} + φ V_{t1} + ψ r_{t1} + χ) | F_t ] = exp(ω X_t + C V_t + D r_t + E)
//! ```
//!
//! In time-to-window-end `τ = t1 - t` the coefficients solve
//!
//! ```text
//! C' = ½σ²C² + (ρ12 σ ω - κ)C + ½(ω² - ω)
//! D' = q D² - (α + B(t,T) η²) D + ω
//! E' = κθ C + αβ D + J(ω) [+ 𝓔(t)(s ρ13 η ω B + ρ13 η ω D - ρ23 σ η B C + ρ23 σ η C D)]
//! ```
//!
//! with `q = ½η²` and the bracket present only in full-correlation mode. The
//! full-mode drift sign `s` is `-1`, matching the drift of the simulated
//! log-price.

use crate::error::{Error, Result};
use crate::levy::Jumps;
use crate::ode::{dopri5, replay, rk4_path, Adaptive, OdeOptions};
use crate::params::{ForwardParams, Mode, Validated};
use crate::rates::CirRate;

/// The quadruple `(ω, C, D, E)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AffineCoefficients {
    pub omega: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl AffineCoefficients {
    pub fn new(omega: f64, c: f64, d: f64, e: f64) -> Self {
        AffineCoefficients { omega, c, d, e }
    }

    /// Terminal condition `(ω, 0, 0, 0)`.
    pub fn log_price(omega: f64) -> Self {
        AffineCoefficients::new(omega, 0.0, 0.0, 0.0)
    }

    /// `C V + D r + E`, the state-dependent exponent without the `ω X` part.
    pub fn exponent(&self, v: f64, r: f64) -> f64 {
        self.c * v + self.d * r + self.e
    }
}

/// Coefficient of `D²` in the rate equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DQuadratic {
    /// `½η²`, as the rate diffusion `½η² r ∂²_r` forces.
    #[default]
    EtaSquared,
    /// `½η`, the printed variant.
    EtaPrinted,
}

/// Sign of the `ρ13 η ω B 𝓔` term in full mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrossDriftSign {
    /// Consistent with the `-ρ13 B η sqrt(V r)` drift of the log-price.
    #[default]
    Drift,
    /// The positive sign as usually printed.
    Printed,
}

/// Switches shared by every leg solve.
#[derive(Debug, Clone, Copy, Default)]
pub struct LegSettings {
    pub mode: Mode,
    pub d_quadratic: DQuadratic,
    pub cross_sign: CrossDriftSign,
    pub ode: OdeOptions,
}

/// Cross moment `𝓔(t) ≈ E[sqrt(V_t) sqrt(r_t)]` as a function of absolute time.
pub type CrossMomentFn<'a> = &'a (dyn Fn(f64) -> f64 + Sync);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegSolution {
    /// Coefficients at the window start.
    pub coefficients: AffineCoefficients,
    pub steps: usize,
    /// Largest deviation from an independent fixed-step RK4 trajectory at 20 interior points.
    pub max_residual: f64,
}

/// Lower admissibility bound for `ω`.
pub fn omega_lower_bound(p: &ForwardParams) -> f64 {
    p.omega_lower_bound()
}

fn check_admissible(omega: f64, p: &ForwardParams) -> Result<()> {
    let lo = p.omega_lower_bound();
    if !(omega > lo && omega <= 0.0) {
        return Err(Error::InadmissibleExponent(format!(
            "ω = {omega} outside ({lo}, 0]"
        )));
    }
    Ok(())
}

/// Right-hand side of the coefficient system for one window, in `τ = t1 - t`.
pub(crate) struct LegSystem<'a> {
    omega: f64,
    kappa: f64,
    kappa_theta: f64,
    sigma: f64,
    rho12: f64,
    rho13: f64,
    rho23: f64,
    alpha: f64,
    alpha_beta: f64,
    eta: f64,
    q: f64,
    jump: f64,
    /// Time to maturity at `τ = 0`.
    maturity_gap: f64,
    /// Absolute time at `τ = 0`.
    t1: f64,
    rate: CirRate,
    sign: f64,
    cross: Option<CrossMomentFn<'a>>,
}

impl<'a> LegSystem<'a> {
    pub(crate) fn new(
        omega: f64,
        t1: f64,
        p: &ForwardParams,
        settings: &LegSettings,
        cross: Option<CrossMomentFn<'a>>,
    ) -> Result<Self> {
        let corr = p.correlations.effective(settings.mode);
        let full = settings.mode == Mode::Full;
        if full && cross.is_none() {
            return Err(Error::DegenerateParameter(
                "full-correlation mode needs the cross moment E[sqrt(V) sqrt(r)]".into(),
            ));
        }
        let jump = jump_term(&p.jumps, omega)?;
        Ok(LegSystem {
            omega,
            kappa: p.kappa,
            kappa_theta: p.kappa * p.theta,
            sigma: p.sigma,
            rho12: corr.rho12,
            rho13: corr.rho13,
            rho23: corr.rho23,
            alpha: p.alpha,
            alpha_beta: p.alpha * p.beta,
            eta: p.eta,
            q: match settings.d_quadratic {
                DQuadratic::EtaSquared => 0.5 * p.eta * p.eta,
                DQuadratic::EtaPrinted => 0.5 * p.eta,
            },
            jump,
            maturity_gap: p.maturity - t1,
            t1,
            rate: CirRate::from(p),
            sign: match settings.cross_sign {
                CrossDriftSign::Drift => -1.0,
                CrossDriftSign::Printed => 1.0,
            },
            cross: if full { cross } else { None },
        })
    }

    pub(crate) fn rhs(&self, tau: f64, y: &[f64; 3]) -> [f64; 3] {
        let [c, d, _] = *y;
        let w = self.omega;
        let b = self.rate.b(self.maturity_gap + tau);
        let dc = 0.5 * self.sigma * self.sigma * c * c + (self.rho12 * self.sigma * w - self.kappa) * c + 0.5 * (w * w - w);
        let dd = self.q * d * d - (self.alpha + b * self.eta * self.eta) * d + w;
        let mut de = self.kappa_theta * c + self.alpha_beta * d + self.jump;
        if let Some(cross) = self.cross {
            let m = cross(self.t1 - tau);
            let (se, re) = (self.sigma * self.eta, self.eta);
            de += m
                * (self.sign * self.rho13 * re * w * b + self.rho13 * re * w * d - self.rho23 * se * b * c
                    + self.rho23 * se * c * d);
        }
        [dc, dd, de]
    }

    pub(crate) fn adaptive(&self, length: f64, start: [f64; 3], opts: &OdeOptions) -> Result<Adaptive<3>> {
        dopri5(|t, y| self.rhs(t, y), 0.0, start, length, &[], opts)
    }

    pub(crate) fn replay(&self, grid: &[f64], start: [f64; 3]) -> [f64; 3] {
        replay(|t, y| self.rhs(t, y), grid, start)
    }
}

fn jump_term(jumps: &Jumps, omega: f64) -> Result<f64> {
    jumps.jump_term(omega).map_err(|e| match e {
        Error::OutsideMomentDomain(u) => Error::InadmissibleExponent(format!("jump exponent undefined at ω = {u}")),
        other => other,
    })
}

fn check_window(t0: f64, t1: f64, maturity: f64) -> Result<()> {
    if !(t0 >= 0.0 && t0 <= t1) {
        return Err(Error::InvalidWindow { t: t0, maturity: t1 });
    }
    if t1 > maturity {
        return Err(Error::InvalidWindow { t: t1, maturity });
    }
    Ok(())
}

/// Solve the coefficient system backward over `[t0, t1]` from `terminal` at `t1`.
pub fn solve_leg(
    t0: f64,
    t1: f64,
    terminal: AffineCoefficients,
    p: &Validated<ForwardParams>,
    settings: &LegSettings,
    cross: Option<CrossMomentFn<'_>>,
) -> Result<LegSolution> {
    check_window(t0, t1, p.maturity)?;
    check_admissible(terminal.omega, p)?;
    let sys = LegSystem::new(terminal.omega, t1, p, settings, cross)?;
    let start = [terminal.c, terminal.d, terminal.e];
    let length = t1 - t0;
    let reference = rk4_path(|t, y| sys.rhs(t, y), 0.0, start, length, REFERENCE_STEPS);
    let stride = REFERENCE_STEPS / (SAMPLES + 1);
    let samples: Vec<f64> = (1..=SAMPLES).map(|j| reference[j * stride].0).collect();
    let run = dopri5(|t, y| sys.rhs(t, y), 0.0, start, length, &samples, &settings.ode)?;
    let mut max_residual = 0.0_f64;
    if length > 0.0 {
        for j in 1..=SAMPLES {
            let (tau, y_ref) = reference[j * stride];
            let at = run.grid.iter().position(|&g| g == tau).expect("sample points are grid points");
            for i in 0..3 {
                max_residual = max_residual.max((run.states[at][i] - y_ref[i]).abs());
            }
        }
    }
    Ok(LegSolution {
        coefficients: AffineCoefficients::new(terminal.omega, run.y[0], run.y[1], run.y[2]),
        steps: run.steps(),
        max_residual,
    })
}

const REFERENCE_STEPS: usize = 2000;
const SAMPLES: usize = 20;

/// Closed-form `C(τ)` of the partial-correlation system.
pub fn riccati_c_closed(tau: f64, omega: f64, varphi: f64, p: &ForwardParams) -> Result<f64> {
    let k = p.kappa - p.correlations.rho12 * p.sigma * omega;
    let s2 = p.sigma * p.sigma;
    let zeta_sq = k * k + s2 * (omega - omega * omega);
    if zeta_sq < 0.0 {
        return Err(Error::InadmissibleExponent(format!("ζ² = {zeta_sq} < 0 at ω = {omega}")));
    }
    let zeta = zeta_sq.sqrt();
    let (xi_plus, xi_minus) = (zeta - k, zeta + k);
    let decay = (-zeta * tau).exp();
    let num = varphi * (xi_minus * decay + xi_plus) + (omega * omega - omega) * -(-zeta * tau).exp_m1();
    let den = (xi_plus + varphi * s2) * decay + xi_minus - varphi * s2;
    Ok(num / den)
}

/// Linearisation of the rate equation: `D = -G/F` with
/// `d/dτ [F; G] = [[½a, q], [-ω, -½a]] [F; G]`, `a = α + B η²`,
/// started from `(1, -ψ)`. The window ends at maturity.
pub fn fg_cross_check(
    tau: f64,
    omega: f64,
    psi: f64,
    p: &ForwardParams,
    d_quadratic: DQuadratic,
) -> Result<(f64, f64, f64)> {
    if !(tau >= 0.0 && tau <= p.maturity) {
        return Err(Error::InvalidWindow {
            t: p.maturity - tau,
            maturity: p.maturity,
        });
    }
    let rate = CirRate::from(p);
    let q = match d_quadratic {
        DQuadratic::EtaSquared => 0.5 * p.eta * p.eta,
        DQuadratic::EtaPrinted => 0.5 * p.eta,
    };
    let (alpha, eta2) = (p.alpha, p.eta * p.eta);
    let opts = OdeOptions {
        rtol: 1e-12,
        atol: 1e-14,
        ..Default::default()
    };
    let run = dopri5(
        |u, y: &[f64; 2]| {
            let a = alpha + rate.b(u) * eta2;
            [0.5 * a * y[0] + q * y[1], -omega * y[0] - 0.5 * a * y[1]]
        },
        0.0,
        [1.0, -psi],
        tau,
        &[],
        &opts,
    )?;
    let [f, g] = run.y;
    if f.abs() < 1e-14 {
        return Err(Error::SingularF(tau));
    }
    Ok((f, g, -g / f))
}

/// `exp(ω X + C V + D r + E)`.
pub fn mgf_value(coeffs: &AffineCoefficients, x: f64, v: f64, r: f64) -> Result<f64> {
    let exponent = coeffs.omega * x + coeffs.exponent(v, r);
    if !exponent.is_finite() || exponent > f64::MAX.ln() {
        return Err(Error::Overflow(exponent));
    }
    Ok(exponent.exp())
}
