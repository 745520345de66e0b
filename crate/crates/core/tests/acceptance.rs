//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is printed on every run.
//! The process fails if any criterion fails, except the literal form of the
//! degenerate-determinism check, whose target value leaves out the
//! log-price diffusion and cannot be met by a correct engine. That line is
//! reported as FAIL, and the corrected form is checked and enforced
//! instead.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varswap::affine::{fg_cross_check, riccati_c_closed, solve_leg, AffineCoefficients, DQuadratic, LegSettings};
use varswap::equilibrium::{expected_premium, hjb_residuals, solve_hjb};
use varswap::levy::quadrature::{levy_integral, QuadratureOptions};
use varswap::levy::{GammaConvention, Jumps, VgParams};
use varswap::mc::{mc_expectation, mc_fair_strike, SimConfig, SimModel};
use varswap::moments::{BConvention, CirMomentSpec, CrossMoment};
use varswap::ode::{dopri5, OdeOptions};
use varswap::params::{
    to_forward, validate, Correlations, ForwardParams, ForwardSource, InitialState, Mode, PhysicalParams, RiskNeutralParams,
    RiskPrices, Validated,
};
use varswap::pricer::{continuous_limit_reference, fair_strike, PricingSettings, SwapContract};
use varswap::rates::CirRate;

struct Report {
    enforced_failures: Vec<String>,
}

impl Report {
    fn line(&mut self, id: &str, pass: bool, text: String) {
        println!("{} [{id}] {text}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.enforced_failures.push(id.to_string());
        }
    }

    /// Reported only; see the module documentation.
    fn unenforced(&mut self, id: &str, pass: bool, text: String) {
        println!("{} [{id}] {text}", if pass { "PASS" } else { "FAIL" });
    }
}

fn table1_forward(maturity: f64) -> Validated<ForwardParams> {
    to_forward(&validate(RiskNeutralParams::table1()).unwrap(), maturity).unwrap()
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.9e}")).collect::<Vec<_>>().join(", ")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Physical variance block and jumps of the premium study, with the Table 1 rate block.
fn premium_physical() -> (PhysicalParams, Jumps) {
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
    (p, Jumps::VarianceGamma(VgParams::new(0.02, 0.04, 0.01).unwrap()))
}

fn analytic_vs_mc(report: &mut Report) {
    let p = table1_forward(1.0);
    let contract = SwapContract::variance(1.0, 252, 1.0).unwrap();
    let start = Instant::now();
    let analytic = fair_strike(&contract, &p, &PricingSettings::default()).unwrap().strike;
    let analytic_time = start.elapsed().as_secs_f64();
    let start = Instant::now();
    // four steps per sampling period
    let mc = mc_fair_strike(&contract, &p, Mode::Partial, &SimConfig::new(200_000, 1008, 2024)).unwrap();
    let mc_time = start.elapsed().as_secs_f64();
    let diff = rel(mc.mean, analytic);
    let bound = 0.01_f64.max(3.0 * mc.stderr / analytic);
    report.line(
        "1",
        diff <= bound && analytic_time < 5.0 && mc_time < 180.0,
        format!(
            "analytic vs MC strike: K = {analytic:.8e}, MC = {:.8e} ± {:.1e} (200k paths), rel diff {diff:.2e} ≤ {bound:.2e}; {analytic_time:.2} s analytic, {mc_time:.1} s MC",
            mc.mean, mc.stderr
        ),
    );
}

fn sampling_convergence(report: &mut Report) {
    let p = table1_forward(1.0);
    let settings = PricingSettings::default();
    let strikes: Vec<f64> = [4usize, 12, 52, 252, 1000]
        .iter()
        .map(|&n| fair_strike(&SwapContract::variance(1.0, n, 1.0).unwrap(), &p, &settings).unwrap().strike)
        .collect();
    let decreasing = strikes.windows(2).all(|w| w[1] < w[0]);
    let fine = SwapContract::variance(1.0, 2000, 1.0).unwrap();
    let k2000 = fair_strike(&fine, &p, &settings).unwrap().strike;
    let reference = continuous_limit_reference(&fine, &p, true);
    let gap = rel(k2000, reference);
    report.line(
        "2",
        decreasing && gap <= 0.01,
        format!("K_V over N = 4, 12, 52, 252, 1000: {} strictly decreasing = {decreasing}; N = 2000 vs continuous limit {reference:.7e}: rel diff {gap:.2e} ≤ 1e-2", list(&strikes)),
    );
}

fn beta_monotonicity(report: &mut Report) {
    let contract = SwapContract::variance(1.0, 252, 1.0).unwrap();
    let strikes: Vec<f64> = [0.03, 0.05, 0.07]
        .iter()
        .map(|&beta| {
            let mut q = RiskNeutralParams::table1();
            q.beta = beta;
            let p = to_forward(&validate(q).unwrap(), 1.0).unwrap();
            fair_strike(&contract, &p, &PricingSettings::default()).unwrap().strike
        })
        .collect();
    let increasing = strikes.windows(2).all(|w| w[1] > w[0]);
    report.line("3", increasing, format!("K_V at rate level 0.03, 0.05, 0.07: {} strictly increasing", list(&strikes)));
}

fn risk_aversion_monotonicity(report: &mut Report) {
    let (p, jumps) = premium_physical();
    let mut ok = true;
    let mut worst_gap = f64::INFINITY;
    for j in 0..=100 {
        let t = 0.05 * j as f64;
        let curve: Vec<f64> = [1.5, 2.0, 3.0]
            .iter()
            .map(|&vt| expected_premium(t, &p, &RiskPrices::new(0.0, 0.0, vt, 0.05), &jumps).unwrap())
            .collect();
        for w in curve.windows(2) {
            ok &= w[1] > w[0];
            worst_gap = worst_gap.min(w[1] - w[0]);
        }
    }
    report.line(
        "4",
        ok,
        format!("E[phi](t) increasing in risk aversion 1.5 < 2 < 3 at 101 points of [0, 5]; smallest gap {worst_gap:.3e}"),
    );
}

fn bond_oracles(report: &mut Report) {
    let q = validate(RiskNeutralParams::table1()).unwrap();
    let rate = CirRate::new(q.alpha, q.beta, q.eta);
    let analytic = rate.price(1.0, q.initial.r0);
    let model = SimModel::risk_neutral(&q, Mode::Partial);
    let mc = mc_expectation(&model, &SimConfig::new(100_000, 500, 17), 1.0, |path| path.discount(500)).unwrap();
    let mc_gap = rel(mc.mean, analytic);

    let (alpha, half_eta2) = (q.alpha, 0.5 * q.eta * q.eta);
    let stops: Vec<f64> = (1..300).map(|j| 0.1 * j as f64).collect();
    let opts = OdeOptions {
        rtol: 1e-13,
        atol: 1e-15,
        max_steps: 1_000_000,
    };
    let run = dopri5(|_, y: &[f64; 1]| [1.0 - alpha * y[0] - half_eta2 * y[0] * y[0]], 0.0, [0.0], 30.0, &stops, &opts).unwrap();
    let worst = run
        .grid
        .iter()
        .zip(&run.states)
        .map(|(&tau, y)| (rate.b(tau) - y[0]).abs())
        .fold(0.0, f64::max);
    report.line(
        "5",
        mc_gap <= 2e-3 && worst <= 1e-10,
        format!(
            "bond P(0,1) = {analytic:.10} vs MC {:.10} ± {:.1e} (100k paths, 500 steps): rel diff {mc_gap:.2e} ≤ 2e-3; closed-form vs integrated B over [0, 30]: max diff {worst:.2e} ≤ 1e-10",
            mc.mean, mc.stderr
        ),
    );
}

fn riccati_integrity(report: &mut Report) {
    let p = table1_forward(5.0);
    let opts = OdeOptions {
        rtol: 1e-13,
        atol: 1e-15,
        max_steps: 1_000_000,
    };
    let mut c_worst = 0.0_f64;
    for &(omega, varphi) in &[(-0.05, 0.0), (-0.5, 0.0), (-2.0, -0.3), (-5.0, 0.1)] {
        let (k, s, rs) = (p.kappa, p.sigma, p.correlations.rho12 * p.sigma);
        let stops: Vec<f64> = (1..50).map(|j| 0.1 * j as f64).collect();
        let run = dopri5(
            |_, y: &[f64; 1]| [0.5 * s * s * y[0] * y[0] + (rs * omega - k) * y[0] + 0.5 * (omega * omega - omega)],
            0.0,
            [varphi],
            5.0,
            &stops,
            &opts,
        )
        .unwrap();
        for (&tau, y) in run.grid.iter().zip(&run.states) {
            c_worst = c_worst.max((riccati_c_closed(tau, omega, varphi, &p).unwrap() - y[0]).abs());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut d_worst = 0.0_f64;
    let mut residual_worst = 0.0_f64;
    for _ in 0..10 {
        let mut q = RiskNeutralParams::table1();
        q.kappa = rng.random_range(0.5..3.0);
        q.sigma = rng.random_range(0.05..0.3);
        q.theta = q.sigma * q.sigma;
        q.alpha = rng.random_range(0.3..2.0);
        q.eta = rng.random_range(0.01..0.2);
        q.beta = q.eta * q.eta / q.alpha * rng.random_range(1.0..3.0);
        let p = validate(q.forward_params(2.0)).unwrap();
        let omega = rng.random_range(0.05..0.95) * p.omega_lower_bound().max(-3.0);
        let psi = rng.random_range(-0.5..0.0);
        let tau = rng.random_range(0.1..2.0);
        let (_, _, d) = fg_cross_check(tau, omega, psi, &p, DQuadratic::EtaSquared).unwrap();
        let leg = solve_leg(
            2.0 - tau,
            2.0,
            AffineCoefficients::new(omega, 0.0, psi, 0.0),
            &p,
            &LegSettings::default(),
            None,
        )
        .unwrap();
        d_worst = d_worst.max((d - leg.coefficients.d).abs());
        residual_worst = residual_worst.max(leg.max_residual);
    }
    let table1_leg = solve_leg(0.0, 1.0, AffineCoefficients::log_price(-0.5), &table1_forward(1.0), &LegSettings::default(), None)
        .unwrap();
    residual_worst = residual_worst.max(table1_leg.max_residual);
    report.line(
        "6",
        c_worst <= 1e-10 && d_worst <= 1e-8 && residual_worst <= 1e-8,
        format!(
            "closed-form vs integrated C: max diff {c_worst:.2e} ≤ 1e-10; linearised vs Riccati D on 10 random tuples: max diff {d_worst:.2e} ≤ 1e-8; leg residual vs RK4 {residual_worst:.2e} ≤ 1e-8"
        ),
    );
}

fn levy_integrals(report: &mut Report) {
    let vg = VgParams::new(0.02, 0.04, 0.01).unwrap();
    let jumps = Jumps::VarianceGamma(vg);
    // the smallest integral here is O(1e-3); tighter targets sink into the rounding
    // noise of the cancelling integrands
    let opts = QuadratureOptions {
        abs_tol: 1e-14,
        ..QuadratureOptions::default()
    };
    let quad = |f: &dyn Fn(f64) -> f64| levy_integral(f, &vg, &opts).unwrap();
    let mut worst = 0.0_f64;
    let mut check = |closed: f64, oracle: f64| worst = worst.max(rel(closed, oracle));
    for &u in &[1.0, -0.5, 2.0, -3.0] {
        check(jumps.char_exponent(u).unwrap(), quad(&|x: f64| (u * x).exp_m1()));
    }
    for &w in &[-0.3, -1.0, -2.5] {
        check(jumps.jump_term(w).unwrap(), quad(&|x: f64| (w * x).exp_m1() - w * x.exp_m1()));
    }
    for &vt in &[0.5, 1.5, 2.0, 3.0] {
        check(jumps.premium_jump_integral(vt).unwrap(), quad(&|x: f64| x.exp_m1() * -(-vt * x).exp_m1()));
    }
    let delta = 0.05;
    for &vt in &[0.5, 2.0, 3.0] {
        let shifted = |x: f64| ((1.0 - vt) * x).exp_m1();
        let oracle = -delta - (1.0 - vt) * quad(&|x: f64| shifted(x) - (vt * x).exp_m1()) + quad(&shifted);
        check(jumps.hjb_gamma(vt, delta, GammaConvention::Printed).unwrap(), oracle);
    }
    report.line(
        "7",
        worst <= 1e-8,
        format!("characteristic exponent, compensated jump term, premium integral and HJB constant vs quadrature: worst rel diff {worst:.2e} ≤ 1e-8"),
    );
}

fn moment_approximations(report: &mut Report) {
    let q = validate(RiskNeutralParams::table1()).unwrap();
    let spec = CirMomentSpec::new(q.kappa, q.theta, q.sigma, q.initial.v0);
    let exact = spec.sqrt_expectation_exact(1.0).unwrap();
    let model = SimModel::risk_neutral(&q, Mode::Partial);
    let mc = mc_expectation(&model, &SimConfig::new(200_000, 252, 31), 1.0, |path| path.v[252].sqrt()).unwrap();
    let series_gap = rel(mc.mean, exact);

    let mut omega1_worst = 0.0_f64;
    for j in 0..=49 {
        let t = 0.1 + 0.1 * j as f64;
        let approx = spec.sqrt_expectation_omega1(t).unwrap();
        omega1_worst = omega1_worst.max(rel(approx, spec.sqrt_expectation_exact(t).unwrap()));
    }

    let mut raw = RiskNeutralParams::table1();
    raw.correlations = Correlations::full(-0.4, 0.0, 0.3);
    let correlated = validate(raw).unwrap();
    let rate_spec = CirMomentSpec::new(q.alpha, q.beta, q.eta, q.initial.r0);
    let cross = CrossMoment::new(spec, rate_spec, 0.3, BConvention::StartMatched).unwrap().eval(1.0);
    let model = SimModel::risk_neutral(&correlated, Mode::Full);
    let mc_cross =
        mc_expectation(&model, &SimConfig::new(200_000, 252, 32), 1.0, |path| (path.v[252] * path.r[252]).sqrt()).unwrap();
    let cross_gap = rel(cross, mc_cross.mean);
    report.line(
        "8",
        series_gap <= 2e-3 && omega1_worst <= 1e-2 && cross_gap <= 2e-2,
        format!(
            "E[sqrt V_1] series {exact:.8} vs MC {:.8}: rel diff {series_gap:.2e} ≤ 2e-3; first-order approximation vs series on [0.1, 5]: {omega1_worst:.2e} ≤ 1e-2; cross moment {cross:.6e} vs MC {:.6e}: rel diff {cross_gap:.2e} ≤ 2e-2",
            mc.mean, mc_cross.mean
        ),
    );
}

fn degenerate_determinism(report: &mut Report) {
    let mut q = RiskNeutralParams::table1();
    q.sigma = 0.0;
    q.eta = 0.0;
    q.theta = q.initial.v0;
    q.beta = q.initial.r0;
    q.jumps = Jumps::None;
    let p = to_forward(&validate(q).unwrap(), 1.0).unwrap();
    let (n, notional) = (4usize, 1.0);
    let contract = SwapContract::variance(1.0, n, notional).unwrap();
    let dt = 1.0 / n as f64;
    let analytic = fair_strike(&contract, &p, &PricingSettings::default()).unwrap().strike;
    let mc = mc_fair_strike(&contract, &p, Mode::Partial, &SimConfig::new(100_000, 252, 9)).unwrap();
    let (v0, r0) = (p.initial.v0, p.initial.r0);

    let literal = n as f64 * ((r0 - 0.5 * v0) * dt).powi(2) * notional;
    let literal_ok = (analytic - literal).abs() <= 1e-6 && (mc.mean - literal).abs() <= 1e-6 && mc.stderr == 0.0;
    report.unenforced(
        "9",
        literal_ok,
        format!(
            "degenerate limit, literal target N((r0 - V0/2)dt)^2 NA = {literal:.6e}: analytic {analytic:.6e}, MC {:.6e} ± {:.1e}. Unattainable: with sigma = eta = 0 the log-price still carries sqrt(V0) dW, adding V0 T = {:.6e} and nonzero MC error (not enforced)",
            mc.mean,
            mc.stderr,
            v0
        ),
    );

    let corrected = literal + v0 * 1.0 * notional;
    let analytic_gap = (analytic - corrected).abs();
    let z = mc.z_score(corrected);
    // with the diffusion switched off as well the variance path is frozen exactly
    let model = SimModel::forward(&p, Mode::Partial);
    let frozen = mc_expectation(&model, &SimConfig::new(1_000, 252, 9), 1.0, |path| {
        let drift_v = path.v.iter().map(|x| (x - v0).abs()).fold(0.0, f64::max);
        let drift_r = path.r.iter().map(|x| (x - r0).abs()).fold(0.0, f64::max);
        drift_v + drift_r
    })
    .unwrap();
    report.line(
        "9*",
        analytic_gap <= 1e-6 && z <= 3.0 && frozen.mean == 0.0 && frozen.stderr == 0.0,
        format!(
            "degenerate limit, corrected target N((r0 - V0/2)dt)^2 + V0 T = {corrected:.8e}: analytic diff {analytic_gap:.2e} ≤ 1e-6, MC within {z:.2} ≤ 3 stderr; V and r frozen on every path with zero stderr"
        ),
    );
}

fn hjb_residuals_and_multistart(report: &mut Report) {
    let (p, jumps) = premium_physical();
    let mut worst_residual = 0.0_f64;
    let mut worst_spread = 0.0_f64;
    let mut agreeing = usize::MAX;
    for &vt in &[0.5, 2.0, 3.0] {
        let rp = RiskPrices::new(0.0, 0.0, vt, 0.05);
        let sol = solve_hjb(&p, &rp, &jumps, GammaConvention::Printed).unwrap();
        let root = [sol.i, sol.k, sol.m];
        let res = hjb_residuals(&p, &rp, &jumps, GammaConvention::Printed, root).unwrap();
        worst_residual = res.iter().fold(worst_residual, |a, r| a.max(r.abs()));
        // multistart runs that end near the returned root must agree with it
        let near: Vec<f64> = sol
            .multistart
            .iter()
            .map(|m| (0..3).map(|j| (m[j] - root[j]).abs()).fold(0.0, f64::max))
            .filter(|&d| d < 1e-3)
            .collect();
        agreeing = agreeing.min(near.len());
        worst_spread = near.iter().fold(worst_spread, |a, &d| a.max(d));
    }
    report.line(
        "10",
        worst_residual <= 1e-10 && worst_spread <= 1e-8 && agreeing >= 2,
        format!(
            "HJB constants at risk aversion 0.5, 2, 3: max residual {worst_residual:.2e} ≤ 1e-10; at least {agreeing} multistart runs reach each root, max spread {worst_spread:.2e} ≤ 1e-8"
        ),
    );
}

fn main() {
    let mut report = Report {
        enforced_failures: Vec::new(),
    };
    analytic_vs_mc(&mut report);
    sampling_convergence(&mut report);
    beta_monotonicity(&mut report);
    risk_aversion_monotonicity(&mut report);
    bond_oracles(&mut report);
    riccati_integrity(&mut report);
    levy_integrals(&mut report);
    moment_approximations(&mut report);
    degenerate_determinism(&mut report);
    hjb_residuals_and_multistart(&mut report);
    if report.enforced_failures.is_empty() {
        println!("acceptance: all enforced criteria pass");
    } else {
        println!("acceptance: failing criteria {:?}", report.enforced_failures);
        std::process::exit(1);
    }
}
