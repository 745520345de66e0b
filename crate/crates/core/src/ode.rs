//! Explicit Runge-Kutta integrators for small autonomous-size systems.
//!
//! [`dopri5`] is the adaptive Dormand-Prince 5(4) pair. It lands exactly on
//! requested stop points and reports the accepted step grid so that the same
//! discretisation can be replayed with [`replay`]. Replaying a frozen grid
//! makes the numerical solution a smooth function of its inputs, which the
//! finite-difference derivatives in the pricer rely on.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 100_000,
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone)]
pub struct Adaptive<const N: usize> {
    pub y: [f64; N],
    /// Accepted step boundaries, starting at the initial time and ending at the final time.
    pub grid: Vec<f64>,
    /// State at every grid point.
    pub states: Vec<[f64; N]>,
    pub rejected: usize,
}

impl<const N: usize> Adaptive<N> {
    pub fn steps(&self) -> usize {
        self.grid.len().saturating_sub(1)
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order weights minus the embedded fourth-order ones
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        *o += h * s;
    }
    out
}

/// One Dormand-Prince step: (fifth-order solution, error estimate, derivative at the new point).
fn dp_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> ([f64; N], [f64; N], [f64; N])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(t + C5 * h, &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(t + h, &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y_new = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(t + h, &y_new);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y_new, err, k7)
}

/// Adaptive integration of `y' = f(t, y)` from `t0` to `t1 ≥ t0`.
///
/// Every point of `stops` inside `(t0, t1)` becomes a grid point.
pub fn dopri5<const N: usize, F>(f: F, t0: f64, y0: [f64; N], t1: f64, stops: &[f64], opts: &OdeOptions) -> Result<Adaptive<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut grid = vec![t0];
    let mut states = vec![y0];
    if t1 <= t0 {
        return Ok(Adaptive { y: y0, grid, states, rejected: 0 });
    }
    let mut targets: Vec<f64> = stops.iter().copied().filter(|&s| s > t0 && s < t1).collect();
    targets.sort_by(f64::total_cmp);
    targets.push(t1);

    let span = t1 - t0;
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(&k1, &y, span, opts);
    let mut rejected = 0;
    let mut next = 0;
    let min_step = 16.0 * f64::EPSILON * t1.abs().max(span);

    while next < targets.len() {
        if grid.len() + rejected > opts.max_steps {
            return Err(Error::OdeNonConvergence(format!("step budget {} exhausted at t = {t}", opts.max_steps)));
        }
        let target = targets[next];
        let mut step = h.min(target - t);
        // avoid leaving a sliver before a stop
        if target - t - step < 0.01 * step {
            step = target - t;
        }
        let landed = step == target - t;
        let t_new = if landed { target } else { t + step };
        // the step a replay over the recorded grid will take
        let step = t_new - t;
        let (y_new, err, k_new) = dp_step(&f, t, &y, &k1, step);
        let mut norm = 0.0_f64;
        for i in 0..N {
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            norm = norm.max((err[i] / scale).abs());
        }
        if !norm.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            rejected += 1;
            h = 0.2 * step;
            if h < min_step {
                return Err(Error::OdeNonConvergence(format!("non-finite state near t = {t}")));
            }
            continue;
        }
        if norm <= 1.0 {
            t = t_new;
            y = y_new;
            k1 = k_new;
            grid.push(t);
            states.push(y);
            if landed {
                next += 1;
            }
            let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
            h = step * factor;
        } else {
            rejected += 1;
            h = step * (0.9 * norm.powf(-0.2)).max(0.2);
            if h < min_step {
                return Err(Error::OdeNonConvergence(format!(
                    "step size underflow at t = {t} (error norm {norm:e})"
                )));
            }
        }
    }
    Ok(Adaptive { y, grid, states, rejected })
}

fn initial_step<const N: usize>(k1: &[f64; N], y: &[f64; N], span: f64, opts: &OdeOptions) -> f64 {
    let mut d0 = 0.0_f64;
    let mut d1 = 0.0_f64;
    for i in 0..N {
        let scale = opts.atol + opts.rtol * y[i].abs();
        d0 = d0.max((y[i] / scale).abs());
        d1 = d1.max((k1[i] / scale).abs());
    }
    let guess = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span.max(1e-6) } else { 0.01 * d0 / d1 };
    guess.clamp(1e-12 * span, 0.1 * span)
}

/// Integrate with the fifth-order Dormand-Prince formula over a fixed grid.
pub fn replay<const N: usize, F>(f: F, grid: &[f64], y0: [f64; N]) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut y = y0;
    for w in grid.windows(2) {
        let k1 = f(w[0], &y);
        y = dp_step(&f, w[0], &y, &k1, w[1] - w[0]).0;
    }
    y
}

/// Classical fixed-step RK4 with `n` equal steps, returning the state at every step.
pub fn rk4_path<const N: usize, F>(f: F, t0: f64, y0: [f64; N], t1: f64, n: usize) -> Vec<(f64, [f64; N])>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let h = (t1 - t0) / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    let mut y = y0;
    out.push((t0, y));
    for j in 0..n {
        let t = t0 + j as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * h, &axpy(&y, h, &[(0.5, &k1)]));
        let k3 = f(t + 0.5 * h, &axpy(&y, h, &[(0.5, &k2)]));
        let k4 = f(t + h, &axpy(&y, h, &[(1.0, &k3)]));
        y = axpy(&y, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)]);
        out.push((t0 + (j + 1) as f64 * h, y));
    }
    out
}
