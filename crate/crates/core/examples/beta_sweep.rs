//! Sensitivity of the strike to the long-run short-rate level.

use varswap::params::{to_forward, validate, RiskNeutralParams};
use varswap::pricer::{fair_strike, PricingSettings, SwapContract};

fn main() -> varswap::Result<()> {
    let contract = SwapContract::variance(1.0, 252, 1.0)?;
    for beta in [0.01, 0.03, 0.05, 0.07, 0.09] {
        let mut q = RiskNeutralParams::table1();
        q.beta = beta;
        let p = to_forward(&validate(q)?, 1.0)?;
        let k = fair_strike(&contract, &p, &PricingSettings::default())?;
        println!("beta = {beta:.2}: {:.10e}", k.strike);
    }
    Ok(())
}
