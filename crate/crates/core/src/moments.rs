//! Moments of `sqrt(Y_t)` for a square-root process
//! `dY = k(l - Y)dt + s sqrt(Y) dW`, and the cross moment `E[sqrt(V) sqrt(r)]`
//! needed by the full-correlation coefficient system.
//!
//! `Y_t / c(t)` is non-central chi-square with `d = 4kl/s²` degrees of
//! freedom and non-centrality `λ(t)`, where
//! `c(t) = s²(1 - e^{-kt})/(4k)` and `λ(t) = 4k e^{-kt} Y_0 / (s²(1 - e^{-kt}))`.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const SERIES_CUTOFF: f64 = 1e-14;
const SERIES_CAP: usize = 10_000;

/// `ln Γ(x + ½) - ln Γ(x)`, by its asymptotic series for large `x`.
fn ln_half_ratio(x: f64) -> f64 {
    if x < 1e3 {
        return ln_gamma(x + 0.5) - ln_gamma(x);
    }
    let u = 1.0 / x;
    0.5 * x.ln() + (u * (-1.0 / 8.0 + u * (1.0 / 128.0 + u * (5.0 / 1024.0 - u * 21.0 / 32768.0)))).ln_1p()
}

/// Square-root diffusion parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirMomentSpec {
    pub speed: f64,
    pub level: f64,
    pub vol: f64,
    pub initial: f64,
}

/// How the amplitude of the exponential fit is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BConvention {
    /// `b = sqrt(Y_0) - a`, so that the fit starts at `sqrt(Y_0)`.
    #[default]
    StartMatched,
    /// `b = sqrt(Y_0 - a)`, the printed variant.
    Printed,
}

/// `Ω2(t) = a + b e^{-ct}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ExpFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.a + self.b * (-self.c * t).exp()
    }
}

impl CirMomentSpec {
    pub fn new(speed: f64, level: f64, vol: f64, initial: f64) -> Self {
        CirMomentSpec {
            speed,
            level,
            vol,
            initial,
        }
    }

    pub fn scale(&self, t: f64) -> f64 {
        -self.vol * self.vol * (-self.speed * t).exp_m1() / (4.0 * self.speed)
    }

    pub fn dof(&self) -> f64 {
        4.0 * self.speed * self.level / (self.vol * self.vol)
    }

    pub fn noncentrality(&self, t: f64) -> f64 {
        let k = self.speed;
        4.0 * k * (-k * t).exp() * self.initial / (self.vol * self.vol * -(-k * t).exp_m1())
    }

    fn check_time(t: f64) -> Result<()> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::DomainError(format!("moment time must be positive, got {t}")));
        }
        Ok(())
    }

    /// `E[Y_t] = l + (Y_0 - l) e^{-kt}`.
    pub fn mean(&self, t: f64) -> f64 {
        self.level + (self.initial - self.level) * (-self.speed * t).exp()
    }

    /// Exact `E[sqrt(Y_t)]` by the Poisson mixture series, summed outward from its mode.
    ///
    /// The mixture is evaluated as a weight-normalised average. When the
    /// Poisson weights are wider than the term budget allows only every
    /// `stride`-th term is visited; the summand is smooth on that scale so
    /// the aliasing error is negligible.
    pub fn sqrt_expectation_exact(&self, t: f64) -> Result<f64> {
        Self::check_time(t)?;
        let c = self.scale(t);
        let half_d = 0.5 * self.dof();
        let mu = 0.5 * self.noncentrality(t);
        if mu == 0.0 {
            return Ok((2.0 * c).sqrt() * ln_half_ratio(half_d).exp());
        }
        let mode = mu.floor();
        let ln_mode = mode * mu.ln() - ln_gamma(mode + 1.0);
        let weight = |k: f64| (k * mu.ln() - ln_gamma(k + 1.0) - ln_mode).exp();
        let stride = (mu.sqrt() / 200.0).ceil().max(1.0);
        let mut sum_w = weight(mode);
        let mut sum_wr = sum_w * ln_half_ratio(half_d + mode).exp();
        let mut used = 1;
        for dir in [1.0, -1.0] {
            let mut k = mode + dir * stride;
            while k >= 0.0 {
                let w = weight(k);
                sum_w += w;
                sum_wr += w * ln_half_ratio(half_d + k).exp();
                used += 1;
                if w < SERIES_CUTOFF * sum_w {
                    break;
                }
                if used > SERIES_CAP {
                    return Err(Error::SeriesNonConvergent(used));
                }
                k += dir * stride;
            }
        }
        Ok((2.0 * c).sqrt() * sum_wr / sum_w)
    }

    /// Exact `Var[sqrt(Y_t)] = E[Y_t] - E[sqrt(Y_t)]²`.
    pub fn sqrt_variance_exact(&self, t: f64) -> Result<f64> {
        let m = self.sqrt_expectation_exact(t)?;
        Ok(self.mean(t) - m * m)
    }

    /// `Ω1(t) = sqrt(c(λ - 1) + cd + cd/(2(d + λ)))`.
    pub fn sqrt_expectation_omega1(&self, t: f64) -> Result<f64> {
        Self::check_time(t)?;
        let (c, d, l) = (self.scale(t), self.dof(), self.noncentrality(t));
        let radicand = c * (l - 1.0) + c * d + c * d / (2.0 * (d + l));
        if radicand < 0.0 {
            return Err(Error::NegativeRadicand(radicand));
        }
        Ok(radicand.sqrt())
    }

    /// `Ψ(t) = c - cd/(2(d + λ))`, zero at `t = 0`.
    pub fn sqrt_variance_approx(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let (c, d, l) = (self.scale(t), self.dof(), self.noncentrality(t));
        c - c * d / (2.0 * (d + l))
    }

    /// Exponential fit `a + b e^{-ct}` to `Ω1`, anchored at `t = 0` and `t = 1`.
    pub fn fit_abc(&self, convention: BConvention) -> Result<ExpFit> {
        let floor = self.vol * self.vol / (8.0 * self.speed);
        if !(self.level > floor) {
            return Err(Error::FitDomainError(format!(
                "level {} must exceed s²/(8k) = {floor}",
                self.level
            )));
        }
        let a = (self.level - floor).sqrt();
        let b = match convention {
            BConvention::StartMatched => self.initial.sqrt() - a,
            BConvention::Printed => {
                let inner = self.initial - a;
                if inner < 0.0 {
                    return Err(Error::FitDomainError(format!("Y_0 - a = {inner} < 0")));
                }
                inner.sqrt()
            }
        };
        if b.abs() < 1e-12 {
            return Err(Error::FitDomainError(format!("amplitude b = {b:e} vanishes")));
        }
        let ratio = (self.sqrt_expectation_omega1(1.0)? - a) / b;
        if !(ratio > 0.0) {
            return Err(Error::FitDomainError(format!("(Ω1(1) - a)/b = {ratio} is not positive")));
        }
        Ok(ExpFit { a, b, c: -ratio.ln() })
    }
}

/// Cross moment `𝓔(t) ≈ ¼ s_V s_r ρ23 sqrt(Ψ_V Ψ_r) + Ω2_V Ω2_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossMoment {
    pub variance: CirMomentSpec,
    pub rate: CirMomentSpec,
    pub variance_fit: ExpFit,
    pub rate_fit: ExpFit,
    pub rho23: f64,
}

impl CrossMoment {
    pub fn new(variance: CirMomentSpec, rate: CirMomentSpec, rho23: f64, convention: BConvention) -> Result<Self> {
        Ok(CrossMoment {
            variance,
            rate,
            variance_fit: variance.fit_abc(convention)?,
            rate_fit: rate.fit_abc(convention)?,
            rho23,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let spread = (self.variance.sqrt_variance_approx(t) * self.rate.sqrt_variance_approx(t)).sqrt();
        0.25 * self.variance.vol * self.rate.vol * self.rho23 * spread
            + self.variance_fit.eval(t) * self.rate_fit.eval(t)
    }
}

/// Free-function form of [`CrossMoment::eval`] for already fitted specs.
pub fn cross_moment(
    t: f64,
    spec_v: &CirMomentSpec,
    fit_v: &ExpFit,
    spec_r: &CirMomentSpec,
    fit_r: &ExpFit,
    rho23: f64,
) -> f64 {
    CrossMoment {
        variance: *spec_v,
        rate: *spec_r,
        variance_fit: *fit_v,
        rate_fit: *fit_r,
        rho23,
    }
    .eval(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn variance() -> CirMomentSpec {
        let v = 0.2236 * 0.2236;
        CirMomentSpec::new(2.0, v, 0.1, v)
    }

    fn rate() -> CirMomentSpec {
        CirMomentSpec::new(1.2, 0.05, 0.01, 0.05)
    }

    #[test]
    fn deterministic_limit() {
        let s = CirMomentSpec::new(2.0, 0.05, 1e-6, 0.05);
        assert!((s.sqrt_expectation_exact(1.0).unwrap() - 0.05f64.sqrt()).abs() < 1e-4);
        assert!((s.sqrt_expectation_omega1(1.0).unwrap() - 0.05f64.sqrt()).abs() < 1e-4);
    }

    #[test]
    fn half_ratio_branches_agree() {
        for &x in &[1e3, 2.5e3] {
            let direct = ln_gamma(x + 0.5) - ln_gamma(x);
            assert!((ln_half_ratio(x) - direct).abs() < 1e-11);
        }
    }

    #[test]
    fn small_time_recovers_start() {
        let s = CirMomentSpec::new(2.0, 0.05, 0.1, 0.035);
        let m = s.sqrt_expectation_exact(1e-4).unwrap();
        assert!((m - 0.035f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn exact_series_against_direct_quadrature() {
        // E[sqrt(Y)] by integrating sqrt(y) against the non-central chi-square density
        let s = CirMomentSpec::new(1.5, 0.04, 0.3, 0.02);
        let t = 0.7;
        let (c, d, l) = (s.scale(t), s.dof(), s.noncentrality(t));
        let density = |x: f64| {
            // Poisson mixture of central chi-square densities
            let mut acc = 0.0;
            for j in 0..200 {
                let k = j as f64;
                let nu = d + 2.0 * k;
                let ln = -0.5 * l + k * (0.5 * l).ln() - ln_gamma(k + 1.0) + (0.5 * nu - 1.0) * x.ln()
                    - 0.5 * x
                    - 0.5 * nu * 2f64.ln()
                    - ln_gamma(0.5 * nu);
                acc += ln.exp();
            }
            acc
        };
        let n = 200_000;
        let upper = 200.0;
        let h = upper / n as f64;
        let mut integral = 0.0;
        for i in 0..n {
            let x = (i as f64 + 0.5) * h;
            integral += x.sqrt() * density(x) * h;
        }
        let direct = c.sqrt() * integral;
        let series = s.sqrt_expectation_exact(t).unwrap();
        assert!((direct - series).abs() / series < 1e-6, "{direct} vs {series}");
    }

    #[test]
    fn omega1_close_to_exact() {
        let s = variance();
        for i in 0..50 {
            let t = 0.1 + i as f64 * 0.1;
            let exact = s.sqrt_expectation_exact(t).unwrap();
            let approx = s.sqrt_expectation_omega1(t).unwrap();
            assert!((exact - approx).abs() / exact <= 0.01, "t={t}");
        }
    }

    #[test]
    fn omega1_stationary() {
        let s = variance();
        let a = s.sqrt_expectation_omega1(50.0).unwrap();
        let b = s.sqrt_expectation_omega1(100.0).unwrap();
        assert!((a - b).abs() <= 1e-6);
    }

    #[test]
    fn fit_matches_table_values() {
        let s = variance();
        let fit = s.fit_abc(BConvention::StartMatched).unwrap();
        assert!((fit.a - (s.level - 0.01 / 16.0).sqrt()).abs() < 1e-15);
        assert!((fit.eval(0.0) - s.initial.sqrt()).abs() < 1e-15);
        assert!(fit.c > 0.0);
        let mut worst = 0.0_f64;
        for i in 0..=195 {
            let t = 0.05 + i as f64 * 0.01;
            worst = worst.max((fit.eval(t) - s.sqrt_expectation_omega1(t).unwrap()).abs());
        }
        assert!(worst <= 0.01 * s.level.sqrt(), "{worst}");
        assert!(rate().fit_abc(BConvention::StartMatched).is_ok());
    }

    #[test]
    fn fit_domain_errors() {
        let s = CirMomentSpec::new(1.0, 0.001, 0.5, 0.05);
        assert!(matches!(s.fit_abc(BConvention::StartMatched), Err(Error::FitDomainError(_))));
        let at_level = CirMomentSpec::new(2.0, 0.05, 0.0001, 0.05 - 0.0001 * 0.0001 / 16.0);
        assert!(at_level.fit_abc(BConvention::StartMatched).is_err());
    }

    #[test]
    fn variance_approx_properties() {
        let s = variance();
        assert_eq!(s.sqrt_variance_approx(0.0), 0.0);
        assert!(s.sqrt_variance_approx(1e-9) < 1e-9);
        for i in 1..=100 {
            assert!(s.sqrt_variance_approx(i as f64 * 0.05) >= 0.0);
        }
        let exact = s.sqrt_variance_exact(1.0).unwrap();
        assert!(exact > 0.0);
    }

    #[test]
    fn cross_moment_symmetry_and_zero_correlation() {
        let (v, r) = (variance(), rate());
        let (fv, fr) = (v.fit_abc(BConvention::StartMatched).unwrap(), r.fit_abc(BConvention::StartMatched).unwrap());
        let t = 1.0;
        assert_eq!(cross_moment(t, &v, &fv, &r, &fr, 0.0), fv.eval(t) * fr.eval(t));
        let a = cross_moment(t, &v, &fv, &r, &fr, 0.3);
        let b = cross_moment(t, &r, &fr, &v, &fv, 0.3);
        assert!((a - b).abs() <= 1e-16);
        let cm = CrossMoment::new(v, r, 0.3, BConvention::StartMatched).unwrap();
        assert_eq!(cm.eval(t), a);
    }

    #[test]
    fn domain_checks() {
        assert!(matches!(variance().sqrt_expectation_exact(0.0), Err(Error::DomainError(_))));
        assert!(variance().sqrt_expectation_omega1(-1.0).is_err());
    }
}
