//! Analytic results checked against the Monte Carlo engine.

use varswap::affine::{mgf_value, solve_leg, AffineCoefficients, LegSettings};
use varswap::equilibrium::{equity_premium, expected_premium};
use varswap::levy::{Jumps, VgParams};
use varswap::mc::{mc_expectation, mc_expectations, mc_fair_strike, Scheme, SimConfig, SimModel};
use varswap::moments::CirMomentSpec;
use varswap::params::{
    to_forward, validate, Correlations, ForwardParams, InitialState, Mode, PhysicalParams, RiskNeutralParams, RiskPrices,
    Validated,
};
use varswap::pricer::{fair_strike, PricingSettings, SwapContract};
use varswap::rates::bond_price;

fn table1_forward(maturity: f64) -> Validated<ForwardParams> {
    to_forward(&validate(RiskNeutralParams::table1()).unwrap(), maturity).unwrap()
}

#[test]
fn forward_martingale() {
    let p = table1_forward(1.0);
    let model = SimModel::forward(&p, Mode::Partial);
    let e = mc_expectation(&model, &SimConfig::new(200_000, 252, 101), 1.0, |path| path.price(252)).unwrap();
    let target = p.initial.s0 / bond_price(0.0, 1.0, p.initial.r0, &p).unwrap();
    assert!(e.z_score(target) <= 3.0, "{e:?} vs {target}");
}

#[test]
fn log_price_mgf_under_the_forward_measure() {
    let p = table1_forward(1.0);
    let omega = -0.3;
    let leg = solve_leg(0.0, 1.0, AffineCoefficients::log_price(omega), &p, &LegSettings::default(), None).unwrap();
    let analytic = mgf_value(&leg.coefficients, 0.0, p.initial.v0, p.initial.r0).unwrap();
    let model = SimModel::forward(&p, Mode::Partial);
    let e = mc_expectation(&model, &SimConfig::new(200_000, 252, 102), 1.0, |path| {
        (omega * (path.x[252] - path.x[0])).exp()
    })
    .unwrap();
    assert!(e.rel_diff(analytic) <= 5e-3, "{e:?} vs {analytic}");
}

#[test]
fn square_root_variance_moments() {
    let mut q = RiskNeutralParams::table1();
    // start away from the mean so the moments move
    q.initial.v0 = 0.02;
    let q = validate(q).unwrap();
    let spec = CirMomentSpec::new(q.kappa, q.theta, q.sigma, q.initial.v0);
    let model = SimModel::risk_neutral(&q, Mode::Partial);
    let est = mc_expectations(&model, &SimConfig::new(200_000, 252, 103), 1.0, 3, |path, out| {
        let v = path.v[252];
        out[0] = v;
        out[1] = v.sqrt();
        out[2] = v;
    })
    .unwrap();
    assert!(est[0].z_score(spec.mean(1.0)) <= 3.0, "{:?}", est[0]);
    let mean_sqrt = spec.sqrt_expectation_exact(1.0).unwrap();
    assert!(est[1].rel_diff(mean_sqrt) <= 2e-3);
    // Var(sqrt V) = E[V] - E[sqrt V]^2
    let mc_var = est[2].mean - est[1].mean * est[1].mean;
    let exact = spec.sqrt_variance_exact(1.0).unwrap();
    let approx = spec.sqrt_variance_approx(1.0);
    assert!((mc_var - exact).abs() <= 1e-2 * exact, "{mc_var} vs {exact}");
    assert!((approx - mc_var).abs() <= 0.15 * mc_var, "{approx} vs {mc_var}");
}

#[test]
fn premium_overlay_at_one_year() {
    let p = PhysicalParams {
        mu: 0.1,
        kappa: 0.3,
        theta: 0.05,
        sigma: 0.2,
        alpha: 1.2,
        beta: 0.05,
        eta: 0.01,
        correlations: Correlations::partial(0.0),
        initial: InitialState {
            s0: 1.0,
            v0: 0.035,
            r0: 0.05,
        },
    };
    let jumps = Jumps::VarianceGamma(VgParams::new(0.02, 0.04, 0.01).unwrap());
    let rp = RiskPrices::new(0.0, 0.0, 2.0, 0.05);
    let model = SimModel::physical(&p, jumps, Mode::Partial).unwrap();
    let e = mc_expectation(&model, &SimConfig::new(100_000, 252, 104), 1.0, |path| {
        equity_premium(path.v[252], 2.0, &jumps, 0.0, 0.0, p.sigma).unwrap()
    })
    .unwrap();
    let exact = expected_premium(1.0, &p, &rp, &jumps).unwrap();
    assert!(e.rel_diff(exact) <= 5e-3, "{e:?} vs {exact}");
}

#[test]
fn full_correlation_strike() {
    let mut q = RiskNeutralParams::table1();
    q.correlations = Correlations::full(-0.4, 0.3, 0.3);
    q.eta = 0.05;
    let p = to_forward(&validate(q).unwrap(), 1.0).unwrap();
    let contract = SwapContract::variance(1.0, 12, 1.0).unwrap();
    let analytic = fair_strike(&contract, &p, &PricingSettings::default().with_mode(Mode::Full)).unwrap().strike;
    let mc = mc_fair_strike(&contract, &p, Mode::Full, &SimConfig::new(100_000, 252, 105)).unwrap();
    assert!(mc.rel_diff(analytic) <= 0.01_f64.max(3.0 * mc.stderr / analytic), "{mc:?} vs {analytic}");
}

#[test]
fn milstein_and_antithetic_agree_with_the_analytic_strike() {
    let p = table1_forward(1.0);
    let contract = SwapContract::variance(1.0, 12, 1.0).unwrap();
    let analytic = fair_strike(&contract, &p, &PricingSettings::default()).unwrap().strike;
    let cfg = SimConfig::new(50_000, 252, 106).with_antithetic(true).with_scheme(Scheme::Milstein);
    let mc = mc_fair_strike(&contract, &p, Mode::Partial, &cfg).unwrap();
    assert!(mc.rel_diff(analytic) <= 0.01, "{mc:?} vs {analytic}");
}
