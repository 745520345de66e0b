//! Adaptive Gauss-Kronrod integration against the VG Lévy density.
//!
//! Each half-line is split at the origin and covered by geometrically
//! growing panels `[0, w], [w, 2w], [2w, 4w], ...` with `w` the first panel
//! width. Panels are added until the integrand has decayed below
//! `tail_ratio` of its peak. Each panel is integrated by adaptive G7-K15
//! bisection.

use super::VgParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub first_panel: f64,
    pub tail_ratio: f64,
    pub max_panels: usize,
    pub max_depth: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-14,
            first_panel: 1e-8,
            tail_ratio: 1e-16,
            max_panels: 200,
            max_depth: 40,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7-K15 pass: (Kronrod estimate, |Kronrod - Gauss|, max |f| sampled, Kronrod estimate of ∫|f|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut peak = fc.abs();
    let mut mass = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        peak = peak.max(f1.abs()).max(f2.abs());
        kronrod += WGK[j] * (f1 + f2);
        mass += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs(), peak, mass * h.abs())
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, opts: &QuadratureOptions) -> Result<(f64, f64)> {
    let mut stack = vec![(a, b, 0usize)];
    let mut total = 0.0;
    let mut peak = 0.0_f64;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (est, err, pk, mass) = gk15(f, lo, hi);
        peak = peak.max(pk);
        // below the rounding floor of the panel further bisection cannot help
        let local_tol = (tol * (hi - lo) / (b - a))
            .max(opts.rel_tol * est.abs())
            .max(50.0 * f64::EPSILON * mass);
        if err <= local_tol || err == 0.0 {
            total += est;
        } else if depth >= opts.max_depth {
            return Err(Error::NonConvergent(format!(
                "panel [{lo:e}, {hi:e}] error {err:e} after {depth} bisections"
            )));
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    Ok((total, peak))
}

fn half_line<F: Fn(f64) -> f64>(g: &F, opts: &QuadratureOptions, decay: f64) -> Result<f64> {
    let panel_tol = opts.abs_tol / 128.0;
    let mut total = 0.0;
    let mut peak = 0.0_f64;
    let mut lo = 0.0;
    let mut hi = opts.first_panel;
    for _ in 0..opts.max_panels {
        let (val, pk) = adaptive(g, lo, hi, panel_tol, opts)?;
        total += val;
        peak = peak.max(pk);
        let edge = g(hi).abs();
        // past the exponential decay scale and negligible both pointwise and in mass
        if hi * decay > 1.0 && edge <= opts.tail_ratio * peak && val.abs() <= opts.tail_ratio * total.abs().max(peak) {
            return Ok(total);
        }
        lo = hi;
        hi *= 2.0;
    }
    Err(Error::NonConvergent(format!(
        "tail not reached after {} panels",
        opts.max_panels
    )))
}

/// `∫ f(x) ν(dx)` over the whole real line for the VG density of `p`.
///
/// `f(x) ν(x)` must be integrable at the origin (for example `f(x) = O(x)`).
pub fn levy_integral<F: Fn(f64) -> f64>(f: F, p: &VgParams, opts: &QuadratureOptions) -> Result<f64> {
    let k = p.variance_rate;
    let (gp, gm) = (p.g_plus(), p.g_minus());
    let positive = |y: f64| f(y) * (-gp * y).exp() / (k * y);
    let negative = |y: f64| f(-y) * (-gm * y).exp() / (k * y);
    Ok(half_line(&positive, opts, gp)? + half_line(&negative, opts, gm)?)
}
