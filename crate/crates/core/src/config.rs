//! Job configuration: one TOML file with named sections and no unknown keys.
//!
//! Missing sections and keys fall back to the shipped default
//! (`configs/table1.toml`), so a file only needs the values it changes.

use std::path::Path as FsPath;

use serde::Deserialize;

use crate::affine::{CrossDriftSign, DQuadratic};
use crate::error::{Error, Result};
use crate::levy::{GammaConvention, Jumps, VgParams};
use crate::mc::{Scheme, SimConfig};
use crate::moments::BConvention;
use crate::params::{
    to_forward, validate, Correlations, ForwardParams, InitialState, Mode, PhysicalParams, RiskNeutralParams, RiskPrices,
    Validated,
};
use crate::pricer::{Nesting, PricingSettings, SwapContract};

/// The shipped default configuration.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/table1.toml");

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub model: ModelSection,
    pub jumps: JumpSection,
    pub contract: ContractSection,
    pub run: RunSection,
    pub mc: McSection,
    pub compare: CompareSection,
    pub premium: PremiumSection,
    pub bond: BondSection,
}

/// Factor coefficients. Read as risk-neutral by every command except
/// `premium`, which reads them as physical together with `mu`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub s0: f64,
    pub v0: f64,
    pub r0: f64,
    pub rho12: f64,
    pub rho13: f64,
    pub rho23: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSection {
    pub enabled: bool,
    pub drift: f64,
    pub volatility: f64,
    pub variance_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractSection {
    pub maturity: f64,
    pub periods: usize,
    pub notional: f64,
    pub moment: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKey {
    Partial,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NestingKey {
    Absolute,
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaKey {
    Printed,
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BConventionKey {
    StartMatched,
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DQuadraticKey {
    EtaSquared,
    EtaPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossSignKey {
    Drift,
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKey {
    EulerFullTruncation,
    Milstein,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub mode: ModeKey,
    pub nesting: NestingKey,
    pub gamma_convention: GammaKey,
    pub b_convention: BConventionKey,
    pub d_quadratic_coefficient: DQuadraticKey,
    pub cross_drift_sign: CrossSignKey,
    /// Divide strikes by the maturity.
    pub annualize: bool,
    /// Finite-difference step; absent means the per-moment default.
    pub fd_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub paths: usize,
    pub steps_per_year: usize,
    pub seed: u64,
    pub scheme: SchemeKey,
    pub antithetic: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    /// Path counts of the Monte Carlo ladder.
    pub ladder: Vec<usize>,
    /// Risk-neutral rate levels to sweep; empty means the model value only.
    pub betas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PremiumSection {
    pub varthetas: Vec<f64>,
    /// Subjective discount rate.
    pub delta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Last time of the expectation curve, in years.
    pub horizon: f64,
    /// Number of equally spaced curve points including 0 and `horizon`.
    pub points: usize,
    /// Paths of the simulated overlay; 0 disables it.
    pub mc_paths: usize,
    /// Time of the overlay comparison.
    pub mc_time: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BondSection {
    pub maturities: Vec<f64>,
    /// Paths of the simulated discount factor; 0 disables it.
    pub mc_paths: usize,
}

impl JobConfig {
    /// The shipped default.
    pub fn table1() -> Self {
        JobConfig::from_toml_str(DEFAULT_CONFIG).expect("shipped configuration parses")
    }

    /// Parse `text` layered over the shipped default.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut base: toml::Table = toml::from_str(DEFAULT_CONFIG).map_err(config_error)?;
        let overlay: toml::Table = toml::from_str(text).map_err(config_error)?;
        for (section, value) in overlay {
            match (base.get_mut(&section), value) {
                (Some(toml::Value::Table(into)), toml::Value::Table(from)) => into.extend(from),
                (Some(_), _) => return Err(Error::ConfigError(format!("[{section}] must be a table"))),
                (None, _) => return Err(Error::ConfigError(format!("unknown section [{section}]"))),
            }
        }
        let cfg: JobConfig = toml::Value::Table(base).try_into().map_err(config_error)?;
        cfg.check_finite()?;
        Ok(cfg)
    }

    pub fn load(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigError(format!("cannot read {}: {e}", path.display())))?;
        JobConfig::from_toml_str(&text)
    }

    fn check_finite(&self) -> Result<()> {
        let m = &self.model;
        let j = &self.jumps;
        let c = &self.contract;
        let p = &self.premium;
        let mut named = vec![
            ("model.kappa", m.kappa),
            ("model.theta", m.theta),
            ("model.sigma", m.sigma),
            ("model.alpha", m.alpha),
            ("model.beta", m.beta),
            ("model.eta", m.eta),
            ("model.s0", m.s0),
            ("model.v0", m.v0),
            ("model.r0", m.r0),
            ("model.rho12", m.rho12),
            ("model.rho13", m.rho13),
            ("model.rho23", m.rho23),
            ("model.mu", m.mu),
            ("jumps.drift", j.drift),
            ("jumps.volatility", j.volatility),
            ("jumps.variance_rate", j.variance_rate),
            ("contract.maturity", c.maturity),
            ("contract.notional", c.notional),
            ("premium.delta", p.delta),
            ("premium.lambda1", p.lambda1),
            ("premium.lambda2", p.lambda2),
            ("premium.horizon", p.horizon),
            ("premium.mc_time", p.mc_time),
        ];
        if let Some(h) = self.run.fd_step {
            named.push(("run.fd_step", h));
        }
        named.extend(p.varthetas.iter().map(|&v| ("premium.varthetas", v)));
        named.extend(self.compare.betas.iter().map(|&v| ("compare.betas", v)));
        named.extend(self.bond.maturities.iter().map(|&v| ("bond.maturities", v)));
        match named.iter().find(|(_, v)| !v.is_finite()) {
            Some((name, v)) => Err(Error::ConfigError(format!("{name} = {v} is not finite"))),
            None => Ok(()),
        }
    }

    pub fn mode(&self) -> Mode {
        match self.run.mode {
            ModeKey::Partial => Mode::Partial,
            ModeKey::Full => Mode::Full,
        }
    }

    pub fn jumps(&self) -> Result<Jumps> {
        if !self.jumps.enabled {
            return Ok(Jumps::None);
        }
        let j = &self.jumps;
        Ok(Jumps::VarianceGamma(VgParams::new(j.drift, j.volatility, j.variance_rate)?))
    }

    pub fn correlations(&self) -> Correlations {
        Correlations::full(self.model.rho12, self.model.rho13, self.model.rho23)
    }

    pub fn initial(&self) -> InitialState {
        InitialState {
            s0: self.model.s0,
            v0: self.model.v0,
            r0: self.model.r0,
        }
    }

    pub fn risk_neutral(&self) -> Result<RiskNeutralParams> {
        let m = &self.model;
        Ok(RiskNeutralParams {
            kappa: m.kappa,
            theta: m.theta,
            sigma: m.sigma,
            alpha: m.alpha,
            beta: m.beta,
            eta: m.eta,
            correlations: self.correlations(),
            initial: self.initial(),
            jumps: self.jumps()?,
        })
    }

    /// Validated forward-measure parameters for the contract maturity.
    pub fn forward(&self) -> Result<Validated<ForwardParams>> {
        to_forward(&validate(self.risk_neutral()?)?, self.contract.maturity)
    }

    pub fn physical(&self) -> PhysicalParams {
        let m = &self.model;
        PhysicalParams {
            mu: m.mu,
            kappa: m.kappa,
            theta: m.theta,
            sigma: m.sigma,
            alpha: m.alpha,
            beta: m.beta,
            eta: m.eta,
            correlations: self.correlations(),
            initial: self.initial(),
        }
    }

    pub fn risk_prices(&self, vartheta: f64) -> RiskPrices {
        let p = &self.premium;
        RiskPrices::new(p.lambda1, p.lambda2, vartheta, p.delta)
    }

    pub fn contract(&self) -> Result<SwapContract> {
        let c = &self.contract;
        SwapContract::uniform(c.maturity, c.periods, c.notional, c.moment)
    }

    pub fn gamma_convention(&self) -> GammaConvention {
        match self.run.gamma_convention {
            GammaKey::Printed => GammaConvention::Printed,
            GammaKey::Corrected => GammaConvention::Corrected,
        }
    }

    pub fn b_convention(&self) -> BConvention {
        match self.run.b_convention {
            BConventionKey::StartMatched => BConvention::StartMatched,
            BConventionKey::Printed => BConvention::Printed,
        }
    }

    pub fn pricing_settings(&self) -> PricingSettings {
        let mut s = PricingSettings::default().with_mode(self.mode()).with_nesting(match self.run.nesting {
            NestingKey::Absolute => Nesting::Absolute,
            NestingKey::PaperLiteral => Nesting::PaperLiteral,
        });
        s.leg.d_quadratic = match self.run.d_quadratic_coefficient {
            DQuadraticKey::EtaSquared => DQuadratic::EtaSquared,
            DQuadraticKey::EtaPrinted => DQuadratic::EtaPrinted,
        };
        s.leg.cross_sign = match self.run.cross_drift_sign {
            CrossSignKey::Drift => CrossDriftSign::Drift,
            CrossSignKey::Printed => CrossDriftSign::Printed,
        };
        s.fd_step = self.run.fd_step;
        s.b_convention = self.b_convention();
        s
    }

    pub fn sim_config(&self) -> SimConfig {
        let m = &self.mc;
        SimConfig::new(m.paths, m.steps_per_year, m.seed)
            .with_antithetic(m.antithetic)
            .with_scheme(match m.scheme {
                SchemeKey::EulerFullTruncation => Scheme::EulerFullTruncation,
                SchemeKey::Milstein => Scheme::Milstein,
            })
    }

    /// Strike scaling: `1/T` when annualising, 1 otherwise.
    pub fn strike_scale(&self) -> f64 {
        if self.run.annualize {
            1.0 / self.contract.maturity
        } else {
            1.0
        }
    }
}

fn config_error(e: impl std::fmt::Display) -> Error {
    Error::ConfigError(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_the_table1_set() {
        let cfg = JobConfig::table1();
        let q = cfg.risk_neutral().unwrap();
        let t = RiskNeutralParams::table1();
        assert!((q.theta - t.theta).abs() < 1e-15 && (q.initial.v0 - t.initial.v0).abs() < 1e-15);
        assert_eq!((q.kappa, q.sigma, q.alpha, q.beta, q.eta), (t.kappa, t.sigma, t.alpha, t.beta, t.eta));
        assert_eq!(q.correlations, t.correlations);
        assert_eq!(q.jumps, t.jumps);
        assert_eq!(cfg.contract().unwrap().periods(), 252);
        assert_eq!(cfg.mode(), Mode::Partial);
    }

    #[test]
    fn overlay_keeps_unset_keys() {
        let cfg = JobConfig::from_toml_str("[model]\nsigma = 0.2\n[run]\nmode = \"full\"").unwrap();
        assert_eq!(cfg.model.sigma, 0.2);
        assert_eq!(cfg.model.kappa, 2.0);
        assert_eq!(cfg.mode(), Mode::Full);
    }

    #[test]
    fn unknown_keys_and_sections_are_rejected() {
        for text in ["[model]\nkapa = 1.0", "[extra]\nx = 1", "[run]\nmode = \"sideways\"", "[contract]\nperiods = -3"] {
            assert!(matches!(JobConfig::from_toml_str(text), Err(Error::ConfigError(_))), "{text}");
        }
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let r = JobConfig::from_toml_str("[model]\nsigma = nan");
        assert!(matches!(r, Err(Error::ConfigError(m)) if m.contains("model.sigma")));
        let r = JobConfig::from_toml_str("[bond]\nmaturities = [1.0, inf]");
        assert!(matches!(r, Err(Error::ConfigError(_))));
    }

    #[test]
    fn premium_config_parses() {
        let cfg = JobConfig::from_toml_str(include_str!("../configs/premium.toml")).unwrap();
        assert_eq!(cfg.model.kappa, 0.3);
        assert_eq!(cfg.premium.mc_paths, 100_000);
    }
}
