//! Closed-form variance-gamma integrals next to direct quadrature against the kernel.

use varswap::levy::quadrature::{levy_integral, QuadratureOptions};
use varswap::levy::{GammaConvention, Jumps, VgParams};

fn main() -> varswap::Result<()> {
    let vg = VgParams::new(0.02, 0.04, 0.01)?;
    let jumps = Jumps::VarianceGamma(vg);
    let opts = QuadratureOptions::default();
    println!("G+ = {:.4}, G- = {:.4}", vg.g_plus(), vg.g_minus());
    let psi = jumps.char_exponent(1.0)?;
    let quad = levy_integral(|x| x.exp_m1(), &vg, &opts)?;
    println!("psi(1)            {psi:.15e}  quadrature {quad:.15e}");
    let j = jumps.jump_term(-0.5)?;
    let quad = levy_integral(|x| (-0.5 * x).exp_m1() + 0.5 * x.exp_m1(), &vg, &opts)?;
    println!("J(-0.5)           {j:.15e}  quadrature {quad:.15e}");
    for vartheta in [1.5, 2.0, 3.0] {
        println!(
            "risk aversion {vartheta}: premium integral {:.6e}, HJB constant {:.6e}",
            jumps.premium_jump_integral(vartheta)?,
            jumps.hjb_gamma(vartheta, 0.05, GammaConvention::Printed)?
        );
    }
    Ok(())
}
