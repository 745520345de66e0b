//! Variance-gamma jump kernel and the Lévy integrals the pricing and
//! equilibrium code need.
//!
//! The VG process is a Brownian motion with drift `drift` and volatility
//! `volatility` run on a gamma clock with variance rate `variance_rate`. Its
//! Lévy density is
//!
//! ```text
//! ν(x) = e^{-G₊ x} / (K x)        x > 0
//! ν(x) = e^{-G₋ |x|} / (K |x|)    x < 0
//! G± = 1 / ( sqrt(v²K²/4 + σ²K/2) ± vK/2 )
//! ```
//!
//! Every analytic integral is routed through the characteristic exponent
//! `ψ(u) = ∫ (e^{ux} - 1) ν(dx) = -ln(1 - u v K - u² σ² K / 2) / K`, which
//! avoids the `1/|x|` singularity. [`quadrature`] integrates against the
//! kernel directly and serves as an independent oracle.

pub mod quadrature;

use crate::error::{Error, Result};

/// Parameters of a variance-gamma process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VgParams {
    /// Drift of the subordinated Brownian motion.
    pub drift: f64,
    /// Volatility of the subordinated Brownian motion.
    pub volatility: f64,
    /// Variance rate of the gamma clock.
    pub variance_rate: f64,
}

/// Which variant of the middle integrand of the HJB constant `Γ` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GammaConvention {
    /// `e^{(1-ϑ)x} - e^{ϑx}`, as the closed-form premium system is usually quoted.
    #[default]
    Printed,
    /// `e^{(1-ϑ)x} - e^{-ϑx}`, the variant obtained when re-deriving the HJB reduction.
    Corrected,
}

impl VgParams {
    pub fn new(drift: f64, volatility: f64, variance_rate: f64) -> Result<Self> {
        let p = VgParams {
            drift,
            volatility,
            variance_rate,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.drift.is_finite() && self.volatility.is_finite() && self.variance_rate.is_finite()) {
            return Err(Error::DegenerateParameter("non-finite VG parameter".into()));
        }
        if self.volatility <= 0.0 {
            return Err(Error::DegenerateParameter(format!(
                "VG volatility must be positive, got {}",
                self.volatility
            )));
        }
        if self.variance_rate <= 0.0 {
            return Err(Error::DegenerateParameter(format!(
                "VG variance rate must be positive, got {}",
                self.variance_rate
            )));
        }
        if !self.exponent_defined(1.0) {
            return Err(Error::OutsideMomentDomain(1.0));
        }
        Ok(())
    }

    fn root_term(&self) -> f64 {
        let k = self.variance_rate;
        (0.25 * self.drift * self.drift * k * k + 0.5 * self.volatility * self.volatility * k).sqrt()
    }

    /// Decay rate of the positive-jump tail.
    pub fn g_plus(&self) -> f64 {
        1.0 / (self.root_term() + 0.5 * self.drift * self.variance_rate)
    }

    /// Decay rate of the negative-jump tail.
    pub fn g_minus(&self) -> f64 {
        1.0 / (self.root_term() - 0.5 * self.drift * self.variance_rate)
    }

    fn log_argument_offset(&self, u: f64) -> f64 {
        let k = self.variance_rate;
        -u * self.drift * k - 0.5 * u * u * self.volatility * self.volatility * k
    }

    /// True when `E[e^{u L_1}]` is finite, i.e. `1 - u v K - u² σ² K / 2 > 0`.
    pub fn exponent_defined(&self, u: f64) -> bool {
        u.is_finite() && 1.0 + self.log_argument_offset(u) > 0.0
    }

    /// Lévy density at jump size `x`.
    pub fn kernel_density(&self, x: f64) -> Result<f64> {
        if x == 0.0 || !x.is_finite() {
            return Err(Error::DomainError(format!("kernel density undefined at x = {x}")));
        }
        let rate = if x > 0.0 { self.g_plus() } else { self.g_minus() };
        Ok((-rate * x.abs()).exp() / (self.variance_rate * x.abs()))
    }

    /// `ψ(u) = ∫ (e^{ux} - 1) ν(dx)`.
    pub fn char_exponent(&self, u: f64) -> Result<f64> {
        if !self.exponent_defined(u) {
            return Err(Error::OutsideMomentDomain(u));
        }
        Ok(-self.log_argument_offset(u).ln_1p() / self.variance_rate)
    }

    /// `∫ x² ν(dx) = v² K + σ²`, the jump contribution to quadratic variation per unit time.
    pub fn second_moment(&self) -> f64 {
        self.drift * self.drift * self.variance_rate + self.volatility * self.volatility
    }
}

/// Jump component of the log-price: either absent or variance gamma.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Jumps {
    #[default]
    None,
    VarianceGamma(VgParams),
}

impl Jumps {
    pub fn vg(&self) -> Option<&VgParams> {
        match self {
            Jumps::None => None,
            Jumps::VarianceGamma(p) => Some(p),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Jumps::None => Ok(()),
            Jumps::VarianceGamma(p) => p.validate(),
        }
    }

    pub fn char_exponent(&self, u: f64) -> Result<f64> {
        match self {
            Jumps::None => Ok(0.0),
            Jumps::VarianceGamma(p) => p.char_exponent(u),
        }
    }

    /// Compensated jump term of the log-price MGF:
    /// `J(ω) = ∫ [(e^{ωx} - 1) - ω (e^x - 1)] ν(dx) = ψ(ω) - ω ψ(1)`.
    pub fn jump_term(&self, omega: f64) -> Result<f64> {
        Ok(self.char_exponent(omega)? - omega * self.char_exponent(1.0)?)
    }

    /// Jump part of the equilibrium equity premium,
    /// `∫ (e^x - 1)(1 - e^{-ϑx}) ν(dx) = ψ(1) - ψ(1-ϑ) + ψ(-ϑ)`.
    pub fn premium_jump_integral(&self, vartheta: f64) -> Result<f64> {
        Ok(self.char_exponent(1.0)? - self.char_exponent(1.0 - vartheta)? + self.char_exponent(-vartheta)?)
    }

    /// Constant `Γ` of the HJB constant system.
    ///
    /// `Γ = -δ - (1-ϑ) ∫ (e^{(1-ϑ)x} - e^{s ϑ x}) ν(dx) + ∫ (e^{(1-ϑ)x} - 1) ν(dx)`
    /// with `s = +1` for [`GammaConvention::Printed`] and `s = -1` for
    /// [`GammaConvention::Corrected`].
    pub fn hjb_gamma(&self, vartheta: f64, delta: f64, convention: GammaConvention) -> Result<f64> {
        let second = match convention {
            GammaConvention::Printed => self.char_exponent(vartheta)?,
            GammaConvention::Corrected => self.char_exponent(-vartheta)?,
        };
        let shifted = self.char_exponent(1.0 - vartheta)?;
        Ok(-delta - (1.0 - vartheta) * (shifted - second) + shifted)
    }

    pub fn second_moment(&self) -> f64 {
        self.vg().map_or(0.0, VgParams::second_moment)
    }
}
