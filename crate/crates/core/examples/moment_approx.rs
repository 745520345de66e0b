//! Square-root moments of a CIR factor: exact series, first-order approximation and exponential fit.

use varswap::moments::{BConvention, CirMomentSpec, CrossMoment};
use varswap::params::RiskNeutralParams;

fn main() -> varswap::Result<()> {
    let q = RiskNeutralParams::table1();
    let variance = CirMomentSpec::new(q.kappa, q.theta, q.sigma, 0.02);
    let rate = CirMomentSpec::new(q.alpha, q.beta, q.eta, q.initial.r0);
    let fit = variance.fit_abc(BConvention::StartMatched)?;
    println!("fit: a = {:.6}, b = {:.6}, c = {:.6}", fit.a, fit.b, fit.c);
    println!("   t   exact        first-order  fit");
    for t in [0.1, 0.25, 0.5, 1.0, 2.0, 5.0] {
        println!(
            "{t:>4}   {:.8}   {:.8}   {:.8}",
            variance.sqrt_expectation_exact(t)?,
            variance.sqrt_expectation_omega1(t)?,
            fit.eval(t)
        );
    }
    let cross = CrossMoment::new(variance, rate, 0.3, BConvention::StartMatched)?;
    println!("E[sqrt(V r)] at t = 1 with correlation 0.3: {:.8}", cross.eval(1.0));
    Ok(())
}
