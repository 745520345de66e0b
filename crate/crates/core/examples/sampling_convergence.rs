//! Strikes fall toward the continuously sampled value as the sampling frequency grows.

use varswap::params::{to_forward, validate, RiskNeutralParams};
use varswap::pricer::{continuous_limit_reference, fair_strike, PricingSettings, SwapContract};

fn main() -> varswap::Result<()> {
    let p = to_forward(&validate(RiskNeutralParams::table1())?, 1.0)?;
    let settings = PricingSettings::default();
    for n in [4, 12, 52, 252, 1000, 2000] {
        let contract = SwapContract::variance(1.0, n, 1.0)?;
        println!("N = {n:>4}: {:.9e}", fair_strike(&contract, &p, &settings)?.strike);
    }
    let contract = SwapContract::variance(1.0, 1, 1.0)?;
    println!("continuous: {:.9e}", continuous_limit_reference(&contract, &p, true));
    Ok(())
}
