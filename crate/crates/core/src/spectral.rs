//! Bath spectral functions and their discretisation into damped lead modes.
//!
//! A bath with spectral function `J(w)` is replaced by `L` modes at energies
//! `eps_k` with spacing `e_k = eps_{k+1} - eps_k`, coupling
//! `kappa_k = sqrt(J(eps_k) e_k / 2pi)` and damping `gamma_k = e_k`. The sum of
//! the resulting Lorentzians, [`effective_spectral`], approximates `J`.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralKind {
    /// `J(w) = Gamma` for `|w| <= W`, zero outside.
    FlatHardCutoff,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralFunction {
    pub kind: SpectralKind,
    pub coupling: f64,
    pub cutoff: f64,
}

impl SpectralFunction {
    pub fn flat(coupling: f64, cutoff: f64) -> Result<Self> {
        if !(coupling > 0.0 && coupling.is_finite()) {
            return Err(invalid("coupling", format!("must be positive, got {coupling}")));
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(invalid("cutoff", format!("must be positive, got {cutoff}")));
        }
        Ok(Self {
            kind: SpectralKind::FlatHardCutoff,
            coupling,
            cutoff,
        })
    }

    pub fn evaluate(&self, w: f64) -> f64 {
        match self.kind {
            SpectralKind::FlatHardCutoff => {
                if w.abs() <= self.cutoff {
                    self.coupling
                } else {
                    0.0
                }
            }
        }
    }

    /// Interval outside of which `J` vanishes.
    pub fn support(&self) -> (f64, f64) {
        match self.kind {
            SpectralKind::FlatHardCutoff => (-self.cutoff, self.cutoff),
        }
    }
}

/// Lin-log discretisation: `n_linear` points uniformly covering
/// `[-W*, W*]` and `n_log` points per tail, logarithmically spaced in the
/// offset from `W*` up to the cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationScheme {
    pub inner_window: f64,
    pub n_linear: usize,
    pub n_log: usize,
}

impl DiscretizationScheme {
    pub fn new(inner_window: f64, n_linear: usize, n_log: usize) -> Result<Self> {
        if !(inner_window > 0.0 && inner_window.is_finite()) {
            return Err(invalid("inner_window", "must be positive"));
        }
        if n_linear < 1 {
            return Err(invalid("n_linear", "at least one linear mode is required"));
        }
        Ok(Self {
            inner_window,
            n_linear,
            n_log,
        })
    }

    /// Splits `total` modes so that `n_log / n_linear ~= log_ratio`:
    /// `n_log = round(ratio * total / (1 + 2 ratio))`.
    pub fn from_total(inner_window: f64, total: usize, log_ratio: f64) -> Result<Self> {
        if !(log_ratio >= 0.0 && log_ratio.is_finite()) {
            return Err(invalid("log_ratio", "must be non-negative"));
        }
        let n_log = (log_ratio * total as f64 / (1.0 + 2.0 * log_ratio)).round() as usize;
        if 2 * n_log >= total {
            return Err(invalid("modes", format!("{total} modes leave no linear section")));
        }
        Self::new(inner_window, total - 2 * n_log, n_log)
    }

    pub fn total_modes(&self) -> usize {
        self.n_linear + 2 * self.n_log
    }
}

/// Grid energies with their spacings `e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadGrid {
    pub energies: Vec<f64>,
    pub spacings: Vec<f64>,
}

pub fn build_grid(scheme: &DiscretizationScheme, spectral: &SpectralFunction) -> Result<LeadGrid> {
    let w = spectral.cutoff;
    let ws = scheme.inner_window;
    if ws > w || (ws == w && scheme.n_log > 0) {
        return Err(invalid(
            "inner_window",
            format!("W* = {ws} must lie below the cutoff W = {w}"),
        ));
    }
    if scheme.n_linear < 2 {
        return Err(invalid("n_linear", "spacing undefined for fewer than two linear modes"));
    }

    let d = 2.0 * ws / (scheme.n_linear - 1) as f64;
    let mut energies: Vec<f64> = (0..scheme.n_linear).map(|k| -ws + d * k as f64).collect();
    // pin the window edges exactly
    energies[scheme.n_linear - 1] = ws;

    if scheme.n_log > 0 {
        let span = w - ws;
        if d >= span {
            return Err(invalid(
                "n_log",
                format!("linear spacing {d} already exceeds the tail width {span}"),
            ));
        }
        let offsets: Vec<f64> = if scheme.n_log == 1 {
            vec![span]
        } else {
            let ratio = (span / d).ln() / (scheme.n_log - 1) as f64;
            (0..scheme.n_log)
                .map(|j| d * (ratio * j as f64).exp())
                .collect()
        };
        for x in offsets {
            energies.push(ws + x);
            energies.push(-ws - x);
        }
        let last = energies.len();
        // exact cutoff points
        for e in &mut energies[last - 2..] {
            *e = e.signum() * w;
        }
    }
    energies.sort_by(f64::total_cmp);

    for pair in energies.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::DegenerateGrid(pair[0], pair[1]));
        }
    }
    let mut spacings: Vec<f64> = energies.windows(2).map(|p| p[1] - p[0]).collect();
    spacings.push(*spacings.last().expect("at least two energies"));
    Ok(LeadGrid { energies, spacings })
}

/// One damped lead mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadMode {
    pub energy: f64,
    pub coupling: f64,
    pub damping: f64,
    pub spacing: f64,
    pub occupation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub temperature: f64,
    pub chemical_potential: f64,
    pub spectral: SpectralFunction,
    pub scheme: DiscretizationScheme,
}

impl BathSpec {
    pub fn new(
        temperature: f64,
        chemical_potential: f64,
        spectral: SpectralFunction,
        scheme: DiscretizationScheme,
    ) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(invalid("temperature", format!("must be positive, got {temperature}")));
        }
        if !chemical_potential.is_finite() {
            return Err(invalid("chemical_potential", "must be finite"));
        }
        Ok(Self {
            temperature,
            chemical_potential,
            spectral,
            scheme,
        })
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }

    pub fn occupation(&self, energy: f64) -> f64 {
        fermi(energy, self.temperature, self.chemical_potential)
    }
}

/// Fermi-Dirac occupation `1 / (exp((e - mu) / T) + 1)`.
pub fn fermi(energy: f64, temperature: f64, chemical_potential: f64) -> f64 {
    let x = (energy - chemical_potential) / temperature;
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

pub fn build_lead(bath: &BathSpec) -> Result<Vec<LeadMode>> {
    let grid = build_grid(&bath.scheme, &bath.spectral)?;
    Ok(grid
        .energies
        .iter()
        .zip(&grid.spacings)
        .filter_map(|(&energy, &spacing)| {
            let j = bath.spectral.evaluate(energy);
            (j > 0.0).then(|| LeadMode {
                energy,
                coupling: (j * spacing / (2.0 * PI)).sqrt(),
                damping: spacing,
                spacing,
                occupation: bath.occupation(energy),
            })
        })
        .collect())
}

/// Lorentzian-sum approximation of the spectral function represented by a lead.
pub fn effective_spectral(lead: &[LeadMode], w: f64) -> f64 {
    lead.iter()
        .map(|m| {
            let hw = 0.5 * m.damping;
            m.coupling * m.coupling * m.damping / ((w - m.energy).powi(2) + hw * hw)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn flat() -> SpectralFunction {
        SpectralFunction::flat(1.0, 8.0).unwrap()
    }

    fn bath(t: f64, mu: f64, scheme: DiscretizationScheme) -> BathSpec {
        BathSpec::new(t, mu, flat(), scheme).unwrap()
    }

    #[test]
    fn pure_linear_grid() {
        let s = DiscretizationScheme::new(8.0, 4, 0).unwrap();
        let g = build_grid(&s, &flat()).unwrap();
        assert_eq!(g.energies.len(), 4);
        assert_eq!(g.energies[0], -8.0);
        assert_eq!(g.energies[3], 8.0);
        for e in &g.spacings {
            assert_relative_eq!(*e, 16.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn lin_log_grid_counts_and_order() {
        let s = DiscretizationScheme::new(4.0, 84, 8).unwrap();
        let g = build_grid(&s, &flat()).unwrap();
        assert_eq!(g.energies.len(), 100);
        assert!(g.energies.windows(2).all(|p| p[1] > p[0]));
        assert_eq!(g.energies[0], -8.0);
        assert_eq!(g.energies[99], 8.0);
        // window edges belong to the linear section, tails exclude them
        assert_eq!(g.energies.iter().filter(|&&e| e.abs() == 4.0).count(), 2);
        assert_eq!(g.energies.iter().filter(|&&e| e.abs() > 4.0).count(), 16);
    }

    #[test]
    fn from_total_split() {
        let s = DiscretizationScheme::from_total(4.0, 100, 0.1).unwrap();
        assert_eq!((s.n_linear, s.n_log), (84, 8));
        let s = DiscretizationScheme::from_total(4.0, 400, 0.1).unwrap();
        assert_eq!((s.n_linear, s.n_log), (334, 33));
        assert_eq!(s.total_modes(), 400);
    }

    #[test]
    fn rejects_window_beyond_cutoff() {
        let s = DiscretizationScheme::new(9.0, 10, 2).unwrap();
        assert!(build_grid(&s, &flat()).is_err());
        let s = DiscretizationScheme::new(9.0, 10, 0).unwrap();
        assert!(build_grid(&s, &flat()).is_err());
        // W* = W is only meaningful without log tails
        let s = DiscretizationScheme::new(8.0, 10, 2).unwrap();
        assert!(build_grid(&s, &flat()).is_err());
    }

    #[test]
    fn rejects_single_linear_mode_with_tails() {
        let s = DiscretizationScheme::new(4.0, 1, 3).unwrap();
        assert!(matches!(
            build_grid(&s, &flat()),
            Err(Error::InvalidParameter { name: "n_linear", .. })
        ));
    }

    #[test]
    fn rejects_bad_physical_parameters() {
        assert!(SpectralFunction::flat(0.0, 8.0).is_err());
        assert!(SpectralFunction::flat(1.0, -1.0).is_err());
        let s = DiscretizationScheme::new(4.0, 84, 8).unwrap();
        assert!(BathSpec::new(0.0, 0.0, flat(), s).is_err());
        assert!(BathSpec::new(-1.0, 0.0, flat(), s).is_err());
    }

    #[test]
    fn lead_parameters_pure_linear_sixteen() {
        let lead = build_lead(&bath(1.0, 0.0, DiscretizationScheme::new(8.0, 16, 0).unwrap())).unwrap();
        assert_eq!(lead.len(), 16);
        for m in &lead[..15] {
            assert_relative_eq!(m.spacing, 16.0 / 15.0, epsilon = 1e-12);
            assert_relative_eq!(m.damping, 1.066_666_666_666_667, epsilon = 1e-12);
            assert_relative_eq!(m.coupling, 0.412_025_815_491_402, epsilon = 1e-12);
        }
    }

    #[test]
    fn infinite_temperature_occupations() {
        let lead = build_lead(&bath(1e6, 0.3, DiscretizationScheme::new(4.0, 84, 8).unwrap())).unwrap();
        assert!(lead.iter().all(|m| (m.occupation - 0.5).abs() < 1e-5));
    }

    #[test]
    fn fermi_symmetry_point() {
        assert_eq!(fermi(0.7, 0.3, 0.7), 0.5);
        assert_eq!(fermi(-3.0, 2.0, -3.0), 0.5);
        // no overflow deep in the tails
        assert_eq!(fermi(1e4, 1e-3, 0.0), 0.0);
        assert_eq!(fermi(-1e4, 1e-3, 0.0), 1.0);
    }

    #[test]
    fn single_lorentzian_peak() {
        let m = LeadMode {
            energy: 0.0,
            coupling: 1.0,
            damping: 2.0,
            spacing: 2.0,
            occupation: 0.5,
        };
        assert_relative_eq!(effective_spectral(&[m], 0.0), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn effective_spectral_tail_outside_cutoff() {
        let lead = build_lead(&bath(1.0, 0.0, DiscretizationScheme::new(8.0, 400, 0).unwrap())).unwrap();
        assert!(effective_spectral(&lead, 100.0) < 1e-2);
    }

    /// With `gamma_k = e_k` the Lorentzian comb is a periodic function of
    /// `w / e` whose extrema follow from Poisson summation:
    /// `sum_n (1/2pi) / ((x - n)^2 + 1/4) = sinh(pi) / (cosh(pi) - cos(2 pi x))`.
    #[test]
    fn effective_spectral_ripple_matches_poisson_sum() {
        let lead = build_lead(&bath(1.0, 0.0, DiscretizationScheme::new(8.0, 401, 0).unwrap())).unwrap();
        let e = lead[0].spacing;
        let on_mode = PI.sinh() / (PI.cosh() - 1.0);
        let between = PI.sinh() / (PI.cosh() + 1.0);
        // edge tails contribute O(e / W) at the centre
        assert!((effective_spectral(&lead, 0.0) - on_mode).abs() < 5e-3);
        assert!((effective_spectral(&lead, 0.5 * e) - between).abs() < 5e-3);
    }

    /// Gaussian-smoothed `J_eff` converges to `J`; the error (band-edge
    /// Lorentzian tails, O(e)) halves each time the linear density doubles.
    #[test]
    fn effective_spectral_local_average_converges() {
        let avg_error = |n_linear: usize| {
            let lead =
                build_lead(&bath(1.0, 0.0, DiscretizationScheme::new(8.0, n_linear, 0).unwrap()))
                    .unwrap();
            let (centre, width, n) = (1.5, 0.5, 8000);
            let h = 10.0 * width / n as f64;
            let (mut num, mut den) = (0.0, 0.0);
            for i in 0..n {
                let w = centre - 5.0 * width + (i as f64 + 0.5) * h;
                let g = (-0.5 * ((w - centre) / width).powi(2)).exp();
                num += g * effective_spectral(&lead, w);
                den += g;
            }
            (num / den - 1.0).abs()
        };
        let errs: Vec<f64> = [51, 101, 201, 401].into_iter().map(avg_error).collect();
        for p in errs.windows(2) {
            let ratio = p[0] / p[1];
            assert!((2.0 / 1.5..=2.0 * 1.5).contains(&ratio), "{errs:?}");
        }
    }
}
