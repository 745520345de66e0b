//! CIR zero-coupon bond functions `P(t,T) = A(t,T) e^{-B(t,T) r}`.
//!
//! With `γ = sqrt(α² + 2η²)` and `τ = T - t`:
//!
//! ```text
//! B(τ) = 2(e^{γτ} - 1) / ((γ + α)(e^{γτ} - 1) + 2γ)
//! A(τ) = [ 2γ e^{(α+γ)τ/2} / ((γ + α)(e^{γτ} - 1) + 2γ) ]^{2αβ/η²}
//! ```
//!
//! `ln A` is evaluated through `δ = γ - α = 2η²/(γ + α)`, which removes the
//! `0/0` at `η = 0` and keeps the large exponent `2αβ/η²` harmless.

use crate::error::{Error, Result};
use crate::params::ForwardParams;

/// Short-rate coefficients under the pricing measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirRate {
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondCoefficients {
    pub a: f64,
    pub b: f64,
}

fn ln1p_ratio(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x + x * x / 3.0
    } else {
        x.ln_1p() / x
    }
}

impl CirRate {
    pub fn new(alpha: f64, beta: f64, eta: f64) -> Self {
        CirRate { alpha, beta, eta }
    }

    pub fn gamma(&self) -> f64 {
        (self.alpha * self.alpha + 2.0 * self.eta * self.eta).sqrt()
    }

    /// `B` as a function of time to maturity.
    pub fn b(&self, tau: f64) -> f64 {
        let g = self.gamma();
        let grow = -(-g * tau).exp_m1();
        2.0 * grow / ((g + self.alpha) * grow + 2.0 * g * (1.0 - grow))
    }

    /// `ln A` as a function of time to maturity.
    pub fn ln_a(&self, tau: f64) -> f64 {
        let g = self.gamma();
        let s = g + self.alpha;
        // δ / η²
        let ratio = 2.0 / s;
        let delta = ratio * self.eta * self.eta;
        let decay = (-g * tau).exp();
        let x = delta / s;
        let y = x * decay;
        2.0 * self.alpha * self.beta * ratio * (ln1p_ratio(x) / s - 0.5 * tau - ln1p_ratio(y) * decay / s)
    }

    pub fn coefficients(&self, tau: f64) -> BondCoefficients {
        BondCoefficients {
            a: self.ln_a(tau).exp(),
            b: self.b(tau),
        }
    }

    pub fn price(&self, tau: f64, r: f64) -> f64 {
        (self.ln_a(tau) - self.b(tau) * r).exp()
    }
}

impl From<&ForwardParams> for CirRate {
    fn from(p: &ForwardParams) -> Self {
        CirRate::new(p.alpha, p.beta, p.eta)
    }
}

fn window(t: f64, maturity: f64) -> Result<f64> {
    if !(t >= 0.0 && t <= maturity) {
        return Err(Error::InvalidWindow { t, maturity });
    }
    Ok(maturity - t)
}

pub fn bond_b(t: f64, maturity: f64, p: &ForwardParams) -> Result<f64> {
    Ok(CirRate::from(p).b(window(t, maturity)?))
}

pub fn bond_a(t: f64, maturity: f64, p: &ForwardParams) -> Result<f64> {
    Ok(CirRate::from(p).ln_a(window(t, maturity)?).exp())
}

pub fn bond_price(t: f64, maturity: f64, r: f64, p: &ForwardParams) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::DomainError(format!("short rate must be non-negative, got {r}")));
    }
    Ok(CirRate::from(p).price(window(t, maturity)?, r))
}
