//! Equilibrium equity premium and the constants of the HJB value function.
//!
//! With `y = exp(-(M + Iθ + Kβ)/ϑ)` the constant system reads
//!
//! ```text
//! Γ + κθI + αβK + y(ϑ + θI + βK) = 0
//! ½ϑ(1-ϑ) - κI + ½σ²I² - I y     = 0
//! (1-ϑ) - αK + ½η²K² - K y       = 0
//! ```
//!
//! It is solved by damped Newton in `(I, K, M, y)` with the definition of
//! `y` as the fourth equation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::levy::{GammaConvention, Jumps};
use crate::params::{PhysicalParams, RiskPrices};

const TOL: f64 = 1e-10;
const MAX_ITER: usize = 100;
const HOMOTOPY_STEPS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct HjbSolution {
    pub i: f64,
    pub k: f64,
    pub m: f64,
    /// Max-norm residual of the three constant equations.
    pub residual: f64,
    pub iterations: usize,
    /// Every distinct root found by the multistart search, as `(I, K, M)`.
    pub roots: Vec<[f64; 3]>,
    /// The converged end point of every multistart run, in start order.
    pub multistart: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Copy)]
struct System {
    gamma: f64,
    kappa: f64,
    theta: f64,
    sigma: f64,
    alpha: f64,
    beta: f64,
    eta: f64,
    vartheta: f64,
}

impl System {
    fn aux(&self, z: &[f64; 3]) -> f64 {
        (-(z[2] + z[0] * self.theta + z[1] * self.beta) / self.vartheta).exp()
    }

    /// Residuals of the three constant equations with `y` eliminated.
    fn residual(&self, z: &[f64; 3]) -> f64 {
        let y = self.aux(z);
        let f = self.equations(&[z[0], z[1], z[2], y]);
        f[0].abs().max(f[1].abs()).max(f[2].abs())
    }

    fn equations(&self, x: &[f64; 4]) -> [f64; 4] {
        let [i, k, m, y] = *x;
        let s = self;
        [
            s.gamma + s.kappa * s.theta * i + s.alpha * s.beta * k + y * (s.vartheta + s.theta * i + s.beta * k),
            0.5 * s.vartheta * (1.0 - s.vartheta) - s.kappa * i + 0.5 * s.sigma * s.sigma * i * i - i * y,
            (1.0 - s.vartheta) - s.alpha * k + 0.5 * s.eta * s.eta * k * k - k * y,
            y.ln() + (m + i * s.theta + k * s.beta) / s.vartheta,
        ]
    }

    fn jacobian(&self, x: &[f64; 4]) -> [[f64; 4]; 4] {
        let [i, k, _, y] = *x;
        let s = self;
        [
            [
                s.kappa * s.theta + y * s.theta,
                s.alpha * s.beta + y * s.beta,
                0.0,
                s.vartheta + s.theta * i + s.beta * k,
            ],
            [-s.kappa + s.sigma * s.sigma * i - y, 0.0, 0.0, -i],
            [0.0, -s.alpha + s.eta * s.eta * k - y, 0.0, -k],
            [s.theta / s.vartheta, s.beta / s.vartheta, 1.0 / s.vartheta, 1.0 / y],
        ]
    }

    /// Damped Newton from `(I, K, M)`; returns the root and the iteration count.
    fn newton(&self, start: [f64; 3]) -> Option<([f64; 3], usize)> {
        let mut x = [start[0], start[1], start[2], self.aux(&start)];
        if !(x[3] > 0.0 && x[3].is_finite()) {
            return None;
        }
        let norm = |f: &[f64; 4]| f.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let mut f = self.equations(&x);
        for iter in 0..MAX_ITER {
            let z = [x[0], x[1], x[2]];
            if self.residual(&z) <= 0.1 * TOL {
                return Some((z, iter));
            }
            let step = solve4(self.jacobian(&x), f.map(|v| -v))?;
            let mut lambda = 1.0;
            loop {
                let trial: [f64; 4] = std::array::from_fn(|j| x[j] + lambda * step[j]);
                if trial[3] > 0.0 {
                    let ft = self.equations(&trial);
                    if ft.iter().all(|v| v.is_finite()) && norm(&ft) < (1.0 - 1e-4 * lambda) * norm(&f) {
                        x = trial;
                        f = ft;
                        break;
                    }
                }
                lambda *= 0.5;
                if lambda < 1e-10 {
                    let z = [x[0], x[1], x[2]];
                    return (self.residual(&z) <= TOL).then_some((z, iter));
                }
            }
        }
        let z = [x[0], x[1], x[2]];
        (self.residual(&z) <= TOL).then_some((z, MAX_ITER))
    }
}

/// Gaussian elimination with partial pivoting.
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for j in col..4 {
                a[row][j] -= f * a[col][j];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let mut s = b[row];
        for j in row + 1..4 {
            s -= a[row][j] * x[j];
        }
        x[row] = s / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn distinct(roots: Vec<([f64; 3], usize)>) -> Vec<[f64; 3]> {
    let mut out: Vec<[f64; 3]> = Vec::new();
    for (r, _) in roots {
        if !out.iter().any(|o| (0..3).all(|j| (o[j] - r[j]).abs() <= 1e-8 * (1.0 + r[j].abs()))) {
            out.push(r);
        }
    }
    out
}

fn multistart(sys: &System) -> Vec<([f64; 3], usize)> {
    const GRID: [f64; 3] = [-1.0, 0.0, 1.0];
    let starts: Vec<[f64; 3]> = (0..27).map(|n| [GRID[n / 9], GRID[(n / 3) % 3], GRID[n % 3]]).collect();
    starts.par_iter().filter_map(|s| sys.newton(*s)).collect()
}

/// Solve the HJB constant system.
///
/// All multistart roots are reported. The returned root is the one reached
/// by continuation in the jump intensity from the no-jump root of smallest
/// `|I| + |K|`; if continuation breaks down, the multistart root closest to
/// the last continued point is returned.
pub fn solve_hjb(p: &PhysicalParams, rp: &RiskPrices, jumps: &Jumps, convention: GammaConvention) -> Result<HjbSolution> {
    rp.validate()?;
    let gamma = jumps.hjb_gamma(rp.vartheta, rp.delta, convention)?;
    let sys = |gamma: f64| System {
        gamma,
        kappa: p.kappa,
        theta: p.theta,
        sigma: p.sigma,
        alpha: p.alpha,
        beta: p.beta,
        eta: p.eta,
        vartheta: rp.vartheta,
    };
    let full = sys(gamma);
    let found = multistart(&full);
    let roots = distinct(found.clone());
    let best_residual = || {
        found
            .iter()
            .map(|(r, _)| full.residual(r))
            .fold(f64::INFINITY, f64::min)
    };

    let base = sys(-rp.delta);
    let anchor = distinct(multistart(&base))
        .into_iter()
        .min_by(|a, b| (a[0].abs() + a[1].abs()).total_cmp(&(b[0].abs() + b[1].abs())));
    let mut chosen = None;
    let mut iterations = 0;
    if let Some(mut z) = anchor {
        let mut ok = true;
        for step in 1..=HOMOTOPY_STEPS {
            let s = step as f64 / HOMOTOPY_STEPS as f64;
            match sys(-rp.delta + s * (gamma + rp.delta)).newton(z) {
                Some((next, it)) => {
                    z = next;
                    iterations += it;
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        chosen = if ok {
            Some(z)
        } else {
            roots.iter().copied().min_by(|a, b| dist(a, &z).total_cmp(&dist(b, &z)))
        };
    }
    let z = match chosen.or_else(|| {
        found
            .iter()
            .min_by(|a, b| full.residual(&a.0).total_cmp(&full.residual(&b.0)))
            .map(|r| r.0)
    }) {
        Some(z) => z,
        None => {
            return Err(Error::NoRootFound {
                best_residual: best_residual(),
            })
        }
    };
    let residual = full.residual(&z);
    if !(residual <= TOL) {
        return Err(Error::NoRootFound { best_residual: residual });
    }
    Ok(HjbSolution {
        i: z[0],
        k: z[1],
        m: z[2],
        residual,
        iterations,
        roots,
        multistart: found.iter().map(|r| r.0).collect(),
    })
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|j| (a[j] - b[j]).abs()).fold(0.0, f64::max)
}

/// Residuals of the three constant equations at `(I, K, M)`.
pub fn hjb_residuals(
    p: &PhysicalParams,
    rp: &RiskPrices,
    jumps: &Jumps,
    convention: GammaConvention,
    root: [f64; 3],
) -> Result<[f64; 3]> {
    let sys = System {
        gamma: jumps.hjb_gamma(rp.vartheta, rp.delta, convention)?,
        kappa: p.kappa,
        theta: p.theta,
        sigma: p.sigma,
        alpha: p.alpha,
        beta: p.beta,
        eta: p.eta,
        vartheta: rp.vartheta,
    };
    let y = sys.aux(&root);
    let f = sys.equations(&[root[0], root[1], root[2], y]);
    Ok([f[0], f[1], f[2]])
}

/// `φ = (ϑ - σρI) V + ∫(e^x - 1)(1 - e^{-ϑx}) ν(dx)`.
pub fn equity_premium(v: f64, vartheta: f64, jumps: &Jumps, i: f64, rho: f64, sigma: f64) -> Result<f64> {
    Ok((vartheta - sigma * rho * i) * v + jumps.premium_jump_integral(vartheta)?)
}

/// `E[φ](t)`; `φ` is affine in `V`, so this is `(ϑ - σρI) E[V_t]` plus the jump part.
/// At `ρ = 0` it is `ϑ[e^{-κt}V0 + θ(1 - e^{-κt})] + ∫(e^x - 1)(1 - e^{-ϑx}) ν(dx)`.
pub fn expected_premium(t: f64, p: &PhysicalParams, rp: &RiskPrices, jumps: &Jumps) -> Result<f64> {
    let decay = (-p.kappa * t).exp();
    let mean_v = decay * p.initial.v0 + p.theta * -(-p.kappa * t).exp_m1();
    equity_premium(mean_v, rp.vartheta, jumps, rp.i, p.correlations.rho12, p.sigma)
}
