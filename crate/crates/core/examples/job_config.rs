//! Price from a TOML job description layered over the built-in defaults.

use varswap::config::JobConfig;
use varswap::pricer::fair_strike;

fn main() -> varswap::Result<()> {
    let cfg = JobConfig::from_toml_str(
        r#"
        [contract]
        maturity = 0.5
        periods = 26

        [run]
        annualize = true
        "#,
    )?;
    let contract = cfg.contract()?;
    let k = fair_strike(&contract, &cfg.forward()?, &cfg.pricing_settings())?;
    println!("annualized strike over {} periods: {:.8e}", contract.periods(), k.strike * cfg.strike_scale());
    Ok(())
}
