//! Fair strike of a one-year daily-sampled variance swap at the Table 1 parameters.

use varswap::params::{to_forward, validate, RiskNeutralParams};
use varswap::pricer::{fair_strike, PricingSettings, SwapContract};

fn main() -> varswap::Result<()> {
    let q = validate(RiskNeutralParams::table1())?;
    let p = to_forward(&q, 1.0)?;
    let contract = SwapContract::variance(1.0, 252, 1.0)?;
    let k = fair_strike(&contract, &p, &PricingSettings::default())?;
    println!("fair strike         {:.10e}", k.strike);
    println!("volatility strike   {:.6}", k.strike.sqrt());
    println!("half-step change    {:.2e}", k.truncation_estimate());
    for (i, c) in k.contributions.iter().enumerate().step_by(63) {
        println!("period {:>3}: {c:.6e}", i + 1);
    }
    Ok(())
}
