//! Expected equity premium over five years for three risk aversions, with one simulated point.

use varswap::equilibrium::{equity_premium, expected_premium};
use varswap::levy::{Jumps, VgParams};
use varswap::mc::{mc_expectation, SimConfig, SimModel};
use varswap::params::{Correlations, InitialState, Mode, PhysicalParams, RiskPrices};

fn main() -> varswap::Result<()> {
    // 2κθ < σ² here: fine for the expectation and for truncated simulation
    let p = PhysicalParams {
        mu: 0.1,
        kappa: 0.3,
        theta: 0.05,
        sigma: 0.2,
        alpha: 1.2,
        beta: 0.05,
        eta: 0.01,
        correlations: Correlations::partial(0.0),
        initial: InitialState { s0: 1.0, v0: 0.035, r0: 0.05 },
    };
    let jumps = Jumps::VarianceGamma(VgParams::new(0.02, 0.04, 0.01)?);
    let varthetas = [1.5, 2.0, 3.0];
    println!("   t   {:>10} {:>10} {:>10}", varthetas[0], varthetas[1], varthetas[2]);
    for j in 0..=10 {
        let t = 0.5 * j as f64;
        let row: Vec<String> = varthetas
            .iter()
            .map(|&vt| expected_premium(t, &p, &RiskPrices::new(0.0, 0.0, vt, 0.05), &jumps).map(|v| format!("{v:>10.6}")))
            .collect::<varswap::Result<_>>()?;
        println!("{t:>4}   {}", row.join(" "));
    }
    let model = SimModel::physical(&p, jumps, Mode::Partial)?;
    let mc = mc_expectation(&model, &SimConfig::new(20_000, 252, 4), 1.0, |path| {
        equity_premium(path.v[252], 2.0, &jumps, 0.0, 0.0, p.sigma).unwrap_or(f64::NAN)
    })?;
    println!("simulated at t = 1, risk aversion 2: {:.6} ± {:.1e}", mc.mean, mc.stderr);
    Ok(())
}
