//! Analytic strike against the Monte Carlo estimate over a small path ladder.

use varswap::mc::{mc_fair_strike, SimConfig};
use varswap::params::{to_forward, validate, Mode, RiskNeutralParams};
use varswap::pricer::{fair_strike, PricingSettings, SwapContract};

fn main() -> varswap::Result<()> {
    let p = to_forward(&validate(RiskNeutralParams::table1())?, 1.0)?;
    let contract = SwapContract::variance(1.0, 52, 1.0)?;
    let analytic = fair_strike(&contract, &p, &PricingSettings::default())?.strike;
    println!("analytic {analytic:.8e}");
    for paths in [5_000, 20_000, 80_000] {
        let mc = mc_fair_strike(&contract, &p, Mode::Partial, &SimConfig::new(paths, 260, 2024))?;
        println!(
            "{paths:>6} paths: {:.8e} ± {:.1e}  (rel diff {:.2e})",
            mc.mean,
            mc.stderr,
            mc.rel_diff(analytic)
        );
    }
    Ok(())
}
