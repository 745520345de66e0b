//! Constants of the representative agent's value function for several risk aversions.

use varswap::equilibrium::solve_hjb;
use varswap::levy::{GammaConvention, Jumps, VgParams};
use varswap::params::{Correlations, InitialState, PhysicalParams, RiskPrices};

fn main() -> varswap::Result<()> {
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
    for vartheta in [0.5, 2.0, 3.0] {
        let sol = solve_hjb(&p, &RiskPrices::new(0.0, 0.0, vartheta, 0.05), &jumps, GammaConvention::Printed)?;
        println!(
            "risk aversion {vartheta}: I = {:.8}, K = {:.8}, M = {:.8}  (residual {:.1e}, {} distinct roots)",
            sol.i,
            sol.k,
            sol.m,
            sol.residual,
            sol.roots.len()
        );
    }
    Ok(())
}
