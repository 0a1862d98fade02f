//! Steady-state currents through a static level from the transmission
//! integral
//!
//! ```text
//! I^P = int dw/2pi T(w) (f_L - f_R),   I^E = int dw/2pi w T(w) (f_L - f_R)
//! T(w) = J_L J_R / ((w - eps - L_L(w) - L_R(w))^2 + ((J_L + J_R)/2)^2)
//! ```
//!
//! where `L_a` is the Lamb shift (principal-value Hilbert transform of the
//! spectral function). For a flat band of half-width `W`,
//! `L(w) = (G / 2pi) ln|(w + W) / (w - W)|`.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::spectral::{fermi, BathSpec, SpectralKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandauerCurrents {
    /// Particle current out of the left bath.
    pub particle: f64,
    /// Energy current out of the left bath.
    pub energy: f64,
}

fn lamb_shift(bath: &BathSpec, w: f64) -> f64 {
    match bath.spectral.kind {
        SpectralKind::FlatHardCutoff => {
            let (g, cut) = (bath.spectral.coupling, bath.spectral.cutoff);
            g / (2.0 * PI) * ((w + cut) / (w - cut)).abs().ln()
        }
    }
}

/// Transmission at energy `w`, including the Lamb shifts.
pub fn transmission(energy: f64, left: &BathSpec, right: &BathSpec, w: f64) -> f64 {
    let (jl, jr) = (left.spectral.evaluate(w), right.spectral.evaluate(w));
    if jl == 0.0 || jr == 0.0 {
        return 0.0;
    }
    let shift = w - energy - lamb_shift(left, w) - lamb_shift(right, w);
    if !shift.is_finite() {
        return 0.0;
    }
    let half = 0.5 * (jl + jr);
    jl * jr / (shift * shift + half * half)
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Landauer particle and energy currents for a level at `energy`.
pub fn landauer_currents(energy: f64, left: &BathSpec, right: &BathSpec) -> Result<LandauerCurrents> {
    let (l0, l1) = left.spectral.support();
    let (r0, r1) = right.spectral.support();
    let (lo, hi) = (l0.max(r0), l1.min(r1));
    if !(hi > lo) {
        return Err(invalid("spectral", "the two bands do not overlap"));
    }
    // split at the Fermi edges and the level so every piece is smooth
    let mut cuts = vec![lo, hi];
    for x in [left.chemical_potential, right.chemical_potential, energy] {
        if x > lo && x < hi {
            cuts.push(x);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let window = |w: f64| {
        transmission(energy, left, right, w)
            * (fermi(w, left.temperature, left.chemical_potential)
                - fermi(w, right.temperature, right.chemical_potential))
            / (2.0 * PI)
    };
    let mut particle = 0.0;
    let mut energy_current = 0.0;
    for pair in cuts.windows(2) {
        particle += integrate(window, pair[0], pair[1], 1e-13);
        energy_current += integrate(|w| w * window(w), pair[0], pair[1], 1e-13);
    }
    Ok(LandauerCurrents {
        particle,
        energy: energy_current,
    })
}
