//! `dp/dt = sum_a [ -G (1 - f_a(t)) p + G f_a(t) (1 - p) ]` with
//! `f_a(t) = fermi(eps(t), T_a, mu_a)`.

use crate::error::{invalid, Result};
use crate::model::DriveProtocol;
use crate::spectral::fermi;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliSample {
    pub t: f64,
    pub population: f64,
    pub entropy: f64,
}

fn entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// RK4 integration of the rate equation for a level at
/// `energy + A_0 h(w t)`. `baths` holds `(T, mu)` pairs; samples are
/// returned every `stride` steps and at `t_final`.
#[allow(clippy::too_many_arguments)]
pub fn pauli_evolve(
    rate: f64,
    baths: &[(f64, f64)],
    energy: f64,
    drive: &DriveProtocol,
    p0: f64,
    t_final: f64,
    dt: f64,
    stride: usize,
) -> Result<Vec<PauliSample>> {
    if !(0.0..=1.0).contains(&p0) {
        return Err(invalid("p0", "must lie in [0, 1]"));
    }
    if !(dt > 0.0 && t_final > 0.0 && stride > 0) {
        return Err(invalid("dt", "dt, t_final and stride must be positive"));
    }
    let amp = drive.amplitudes.first().copied().unwrap_or(0.0);
    let rhs = |t: f64, p: f64| -> f64 {
        let e = energy + amp * drive.factor(t);
        baths
            .iter()
            .map(|&(temp, mu)| {
                let f = fermi(e, temp, mu);
                rate * (f - p)
            })
            .sum()
    };
    let n = (t_final / dt - 1e-9).ceil() as usize;
    let mut p = p0;
    let mut out = Vec::with_capacity(n / stride + 2);
    for k in 0..=n {
        let t = k as f64 * dt;
        if k % stride == 0 || k == n {
            out.push(PauliSample {
                t,
                population: p,
                entropy: entropy(p),
            });
        }
        if k == n {
            break;
        }
        let k1 = rhs(t, p);
        let k2 = rhs(t + 0.5 * dt, p + 0.5 * dt * k1);
        let k3 = rhs(t + 0.5 * dt, p + 0.5 * dt * k2);
        let k4 = rhs(t + dt, p + dt * k3);
        p += dt / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
    }
    Ok(out)
}
