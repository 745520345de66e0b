//! Higher moment swaps: the same machinery differentiated three and four times.

use varswap::params::{to_forward, validate, RiskNeutralParams};
use varswap::pricer::{fair_strike, PricingSettings, SwapContract};

fn main() -> varswap::Result<()> {
    let mut q = RiskNeutralParams::table1();
    q.correlations.rho12 = -0.7;
    let p = to_forward(&validate(q)?, 1.0)?;
    for moment in 2..=4 {
        let contract = SwapContract::uniform(1.0, 12, 1.0, moment)?;
        let k = fair_strike(&contract, &p, &PricingSettings::default())?;
        println!("m = {moment}: {:.6e}  (step {:e}, half-step change {:.1e})", k.strike, k.step, k.truncation_estimate());
    }
    Ok(())
}
