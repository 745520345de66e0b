//! Zero-coupon curve of the CIR short rate with a simulated check at one year.

use varswap::mc::{mc_expectation, SimConfig, SimModel};
use varswap::params::{validate, Mode, RiskNeutralParams};
use varswap::rates::CirRate;

fn main() -> varswap::Result<()> {
    let q = validate(RiskNeutralParams::table1())?;
    let rate = CirRate::new(q.alpha, q.beta, q.eta);
    for t in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0] {
        let c = rate.coefficients(t);
        println!("T = {t:>4}: A = {:.8}, B = {:.8}, P = {:.8}", c.a, c.b, rate.price(t, q.initial.r0));
    }
    let model = SimModel::risk_neutral(&q, Mode::Partial);
    let mc = mc_expectation(&model, &SimConfig::new(20_000, 250, 1), 1.0, |path| path.discount(250))?;
    println!("simulated P(0, 1) = {:.8} ± {:.1e}", mc.mean, mc.stderr);
    Ok(())
}
