//! System Hamiltonian, drive protocol and the extended (system + leads)
//! generator of the Lyapunov flow.
//!
//! The extended single-particle Hamiltonian has block form
//!
//! ```text
//! H_ext(t) = [ H_S(t)     H_SL_1  H_SL_2 ... ]
//!            [ H_SL_1^dag H_L_1   0          ]
//!            [ H_SL_2^dag 0       H_L_2      ]
//! ```
//!
//! where `H_SL_a` couples the attachment site of bath `a` to every mode `k` of
//! its lead with strength `kappa_k` and `H_L_a = diag(eps_k)`. Leads never
//! couple directly to each other.

use std::ops::Range;

use ndarray::{s, Array2, ArrayView2};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, SparseHermitian, C64, I};
use crate::spectral::{build_lead, BathSpec, LeadMode};

/// Tolerance on the Hermiticity of user-supplied matrices.
const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on occupation eigenvalues of a supplied initial state.
const OCCUPATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Harmonic {
    Sin,
    Cos,
}

impl Harmonic {
    pub fn value(self, phase: f64) -> f64 {
        match self {
            Harmonic::Sin => phase.sin(),
            Harmonic::Cos => phase.cos(),
        }
    }

    /// Derivative with respect to the phase.
    pub fn slope(self, phase: f64) -> f64 {
        match self {
            Harmonic::Sin => phase.cos(),
            Harmonic::Cos => -phase.sin(),
        }
    }

    /// Weights `(w+, w-)` such that `h(x) = w+ e^{ix} + w- e^{-ix}`.
    pub fn fourier_weights(self) -> (C64, C64) {
        match self {
            Harmonic::Cos => (C64::new(0.5, 0.0), C64::new(0.5, 0.0)),
            // sin x = (e^{ix} - e^{-ix}) / 2i
            Harmonic::Sin => (C64::new(0.0, -0.5), C64::new(0.0, 0.5)),
        }
    }
}

/// Single-harmonic modulation of on-site energies:
/// `H_S(t) = H_S^0 + diag(A_i) h(w t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveProtocol {
    pub amplitudes: Vec<f64>,
    pub frequency: f64,
    pub harmonic: Harmonic,
}

impl DriveProtocol {
    pub fn none(n_sites: usize) -> Self {
        Self {
            amplitudes: vec![0.0; n_sites],
            frequency: 0.0,
            harmonic: Harmonic::Sin,
        }
    }

    pub fn single_site(
        n_sites: usize,
        site: usize,
        amplitude: f64,
        frequency: f64,
        harmonic: Harmonic,
    ) -> Self {
        let mut amplitudes = vec![0.0; n_sites];
        amplitudes[site] = amplitude;
        Self {
            amplitudes,
            frequency,
            harmonic,
        }
    }

    pub fn factor(&self, t: f64) -> f64 {
        self.harmonic.value(self.frequency * t)
    }

    /// `d/dt h(w t)`.
    pub fn factor_rate(&self, t: f64) -> f64 {
        self.frequency * self.harmonic.slope(self.frequency * t)
    }

    pub fn is_static(&self) -> bool {
        self.frequency == 0.0 || self.amplitudes.iter().all(|&a| a == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub site: usize,
    pub bath: BathSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub hamiltonian: Array2<C64>,
    pub drive: DriveProtocol,
    pub couplings: Vec<Coupling>,
}

impl SystemModel {
    pub fn new(
        hamiltonian: Array2<C64>,
        drive: DriveProtocol,
        couplings: Vec<Coupling>,
    ) -> Result<Self> {
        let n = hamiltonian.nrows();
        if n == 0 || hamiltonian.ncols() != n {
            return Err(invalid("hamiltonian", "must be a non-empty square matrix"));
        }
        let herr = linalg::hermiticity_error(&hamiltonian);
        if herr > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herr));
        }
        if drive.amplitudes.len() != n {
            return Err(invalid(
                "amplitudes",
                format!("expected {n} drive amplitudes, got {}", drive.amplitudes.len()),
            ));
        }
        if !(drive.frequency >= 0.0 && drive.frequency.is_finite()) {
            return Err(invalid("frequency", "must be finite and non-negative"));
        }
        if drive.frequency == 0.0 && drive.amplitudes.iter().any(|&a| a != 0.0) {
            return Err(invalid("frequency", "a nonzero drive amplitude needs a positive frequency"));
        }
        if let Some(c) = couplings.iter().find(|c| c.site >= n) {
            return Err(invalid(
                "site",
                format!("coupling site {} outside system of {n} sites", c.site),
            ));
        }
        Ok(Self {
            hamiltonian,
            drive,
            couplings,
        })
    }

    /// Single dot at `energy`, both baths attached to it, driven as
    /// `energy + A h(w t)`.
    pub fn resonant_level(
        energy: f64,
        amplitude: f64,
        frequency: f64,
        harmonic: Harmonic,
        left: BathSpec,
        right: BathSpec,
    ) -> Result<Self> {
        Self::new(
            Array2::from_elem((1, 1), C64::new(energy, 0.0)),
            DriveProtocol::single_site(1, 0, amplitude, frequency, harmonic),
            vec![
                Coupling { site: 0, bath: left },
                Coupling {
                    site: 0,
                    bath: right,
                },
            ],
        )
    }

    /// Two tunnel-coupled dots (hopping `lambda`); only dot 1 is driven. The
    /// left bath attaches to dot 1, the right bath to dot 2.
    #[allow(clippy::too_many_arguments)]
    pub fn two_dot(
        lambda: f64,
        energy1: f64,
        energy2: f64,
        amplitude: f64,
        frequency: f64,
        harmonic: Harmonic,
        left: BathSpec,
        right: BathSpec,
    ) -> Result<Self> {
        let mut h = Array2::zeros((2, 2));
        h[[0, 0]] = C64::new(energy1, 0.0);
        h[[1, 1]] = C64::new(energy2, 0.0);
        h[[0, 1]] = C64::new(lambda, 0.0);
        h[[1, 0]] = C64::new(lambda, 0.0);
        Self::new(
            h,
            DriveProtocol::single_site(2, 0, amplitude, frequency, harmonic),
            vec![
                Coupling { site: 0, bath: left },
                Coupling {
                    site: 1,
                    bath: right,
                },
            ],
        )
    }

    pub fn n_sites(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian_at(&self, t: f64) -> Array2<C64> {
        let mut h = self.hamiltonian.clone();
        let f = self.drive.factor(t);
        for (i, a) in self.drive.amplitudes.iter().enumerate() {
            h[[i, i]] += a * f;
        }
        h
    }

    pub fn assemble(&self) -> Result<ExtendedGenerator> {
        assemble_generator(self)
    }
}

/// Index ranges of the system block and of each lead block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    pub system: usize,
    pub leads: Vec<Range<usize>>,
}

impl BlockLayout {
    pub fn dim(&self) -> usize {
        self.leads.last().map_or(self.system, |r| r.end)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeadBlock {
    pub site: usize,
    pub bath: BathSpec,
    pub modes: Vec<LeadMode>,
    pub range: Range<usize>,
}

/// `W(t) = i H_ext(t) + Upsilon / 2 = W0 + W1 h(w t)` together with the
/// injection matrix `F`. The Hamiltonian is kept sparse; dense `W0`, `W1`
/// are materialised on request.
#[derive(Debug, Clone)]
pub struct ExtendedGenerator {
    layout: BlockLayout,
    leads: Vec<LeadBlock>,
    hamiltonian: SparseHermitian,
    system_hamiltonian: Array2<C64>,
    drive: Vec<(usize, f64)>,
    frequency: f64,
    harmonic: Harmonic,
    damping: Vec<f64>,
    injection: Vec<f64>,
}

pub fn assemble_generator(model: &SystemModel) -> Result<ExtendedGenerator> {
    let mut leads = Vec::with_capacity(model.couplings.len());
    for c in &model.couplings {
        let modes = build_lead(&c.bath)?;
        if modes.is_empty() {
            return Err(invalid("modes", format!("lead at site {} has no modes", c.site)));
        }
        leads.push((c.site, c.bath, modes));
    }
    ExtendedGenerator::from_modes(model, leads)
}

impl ExtendedGenerator {
    /// Builds the generator from explicit lead modes, one entry
    /// `(site, bath, modes)` per bath. The couplings of `model` are ignored.
    pub fn from_modes(
        model: &SystemModel,
        leads: Vec<(usize, BathSpec, Vec<LeadMode>)>,
    ) -> Result<Self> {
        let ns = model.n_sites();
        let mut blocks = Vec::with_capacity(leads.len());
        let mut offset = ns;
        for (site, bath, modes) in leads {
            if site >= ns {
                return Err(invalid(
                    "site",
                    format!("coupling site {site} outside system of {ns} sites"),
                ));
            }
            if modes.is_empty() {
                return Err(invalid("modes", format!("lead at site {site} has no modes")));
            }
            if let Some(m) = modes.iter().find(|m| {
                !(m.damping > 0.0 && (0.0..=1.0).contains(&m.occupation) && m.energy.is_finite())
            }) {
                return Err(invalid(
                    "modes",
                    format!("lead mode at energy {} has invalid damping or occupation", m.energy),
                ));
            }
            let range = offset..offset + modes.len();
            offset = range.end;
            blocks.push(LeadBlock {
                site,
                bath,
                modes,
                range,
            });
        }
        let dim = offset;

        let mut hamiltonian = SparseHermitian::zeros(dim);
        for i in 0..ns {
            for j in i..ns {
                let v = model.hamiltonian[[i, j]];
                if v != C64::default() {
                    hamiltonian.add_hermitian(i, j, v);
                }
            }
        }
        let mut damping = vec![0.0; dim];
        let mut injection = vec![0.0; dim];
        for lead in &blocks {
            for (k, m) in lead.range.clone().zip(&lead.modes) {
                hamiltonian.add_hermitian(k, k, C64::new(m.energy, 0.0));
                if m.coupling != 0.0 {
                    hamiltonian.add_hermitian(lead.site, k, C64::new(m.coupling, 0.0));
                }
                damping[k] = m.damping;
                injection[k] = m.damping * m.occupation;
            }
        }

        let drive = model
            .drive
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0.0)
            .map(|(i, &a)| (i, a))
            .collect();

        Ok(Self {
            layout: BlockLayout {
                system: ns,
                leads: blocks.iter().map(|l| l.range.clone()).collect(),
            },
            leads: blocks,
            hamiltonian,
            system_hamiltonian: model.hamiltonian.clone(),
            drive,
            frequency: model.drive.frequency,
            harmonic: model.drive.harmonic,
            damping,
            injection,
        })
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    pub fn leads(&self) -> &[LeadBlock] {
        &self.leads
    }

    /// Static part of `H_ext`.
    pub fn hamiltonian(&self) -> &SparseHermitian {
        &self.hamiltonian
    }

    /// Driven system sites and their amplitudes.
    pub fn drive(&self) -> &[(usize, f64)] {
        &self.drive
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn harmonic(&self) -> Harmonic {
        self.harmonic
    }

    /// Diagonal of `Upsilon`.
    pub fn damping(&self) -> &[f64] {
        &self.damping
    }

    /// Diagonal of `F`.
    pub fn injection(&self) -> &[f64] {
        &self.injection
    }

    pub fn is_static(&self) -> bool {
        self.drive.is_empty() || self.frequency == 0.0
    }

    pub fn drive_factor(&self, t: f64) -> f64 {
        self.harmonic.value(self.frequency * t)
    }

    pub fn drive_factor_rate(&self, t: f64) -> f64 {
        self.frequency * self.harmonic.slope(self.frequency * t)
    }

    pub fn w0(&self) -> Array2<C64> {
        let mut w = self.hamiltonian.to_dense().mapv(|h| I * h);
        for (i, g) in self.damping.iter().enumerate() {
            w[[i, i]] += 0.5 * g;
        }
        w
    }

    pub fn w1(&self) -> Array2<C64> {
        let n = self.dim();
        let mut w = Array2::zeros((n, n));
        for &(i, a) in &self.drive {
            w[[i, i]] = I * a;
        }
        w
    }

    pub fn generator_at(&self, t: f64) -> Array2<C64> {
        let mut w = self.w0();
        let f = self.drive_factor(t);
        for &(i, a) in &self.drive {
            w[[i, i]] += I * a * f;
        }
        w
    }

    /// Dense `H_ext(t)`.
    pub fn hamiltonian_at(&self, t: f64) -> Array2<C64> {
        let mut h = self.hamiltonian.to_dense();
        let f = self.drive_factor(t);
        for &(i, a) in &self.drive {
            h[[i, i]] += a * f;
        }
        h
    }

    pub fn upsilon(&self) -> Array2<C64> {
        Array2::from_diag(&ndarray::Array1::from_iter(
            self.damping.iter().map(|&g| C64::new(g, 0.0)),
        ))
    }

    pub fn f_matrix(&self) -> Array2<C64> {
        Array2::from_diag(&ndarray::Array1::from_iter(
            self.injection.iter().map(|&g| C64::new(g, 0.0)),
        ))
    }

    /// System block `H_S(t)`.
    pub fn system_hamiltonian_at(&self, t: f64) -> Array2<C64> {
        let mut h = self.system_hamiltonian.clone();
        let f = self.drive_factor(t);
        for &(i, a) in &self.drive {
            h[[i, i]] += a * f;
        }
        h
    }

    /// `dH_S/dt`.
    pub fn system_hamiltonian_rate(&self, t: f64) -> Array2<C64> {
        let ns = self.layout.system;
        let mut h = Array2::zeros((ns, ns));
        let r = self.drive_factor_rate(t);
        for &(i, a) in &self.drive {
            h[[i, i]] = C64::new(a * r, 0.0);
        }
        h
    }

    /// A copy of this generator with the drive amplitude scaled to zero.
    pub fn without_drive(&self) -> Self {
        Self {
            drive: Vec::new(),
            ..self.clone()
        }
    }

    /// Block-diagonal initial state: `C_S = system_init`, `C_L = diag(f_k)`.
    pub fn initial_state(&self, system_init: &Array2<C64>) -> Result<CorrelationMatrix> {
        let ns = self.layout.system;
        if system_init.dim() != (ns, ns) {
            return Err(invalid(
                "system_init",
                format!("expected a {ns}x{ns} matrix, got {:?}", system_init.dim()),
            ));
        }
        let herr = linalg::hermiticity_error(system_init);
        if herr > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herr));
        }
        let ev = linalg::eigvalsh(system_init)?;
        if let Some(&v) = ev
            .iter()
            .find(|&&v| !(-OCCUPATION_TOL..=1.0 + OCCUPATION_TOL).contains(&v))
        {
            return Err(Error::OccupationOutOfRange { value: v });
        }
        let n = self.dim();
        let mut c = Array2::zeros((n, n));
        c.slice_mut(s![..ns, ..ns]).assign(system_init);
        for lead in &self.leads {
            for (k, m) in lead.range.clone().zip(&lead.modes) {
                c[[k, k]] = C64::new(m.occupation, 0.0);
            }
        }
        Ok(CorrelationMatrix::new(c, self.layout.clone()))
    }
}

/// Convenience: diagonal system occupations.
pub fn diagonal_occupations(p: &[f64]) -> Array2<C64> {
    Array2::from_diag(&ndarray::Array1::from_iter(
        p.iter().map(|&x| C64::new(x, 0.0)),
    ))
}

/// Single-particle density matrix `C_pq = <d_q^dag d_p>` over system + leads.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub matrix: Array2<C64>,
    pub layout: BlockLayout,
}

impl CorrelationMatrix {
    pub fn new(matrix: Array2<C64>, layout: BlockLayout) -> Self {
        assert_eq!(matrix.dim(), (layout.dim(), layout.dim()), "layout mismatch");
        Self { matrix, layout }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn system(&self) -> ArrayView2<'_, C64> {
        let ns = self.layout.system;
        self.matrix.slice(s![..ns, ..ns])
    }

    pub fn system_lead(&self, lead: usize) -> ArrayView2<'_, C64> {
        let ns = self.layout.system;
        let r = self.layout.leads[lead].clone();
        self.matrix.slice(s![..ns, r])
    }

    pub fn lead(&self, lead: usize) -> ArrayView2<'_, C64> {
        let r = self.layout.leads[lead].clone();
        self.matrix.slice(s![r.clone(), r])
    }

    pub fn lead_lead(&self, a: usize, b: usize) -> ArrayView2<'_, C64> {
        let ra = self.layout.leads[a].clone();
        let rb = self.layout.leads[b].clone();
        self.matrix.slice(s![ra, rb])
    }

    pub fn hermiticity_error(&self) -> f64 {
        linalg::hermiticity_error(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Result<ndarray::Array1<f64>> {
        linalg::eigvalsh(&self.matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{DiscretizationScheme, SpectralFunction};
    use approx::assert_relative_eq;

    fn bath(t: f64, mu: f64, modes: usize) -> BathSpec {
        BathSpec::new(
            t,
            mu,
            SpectralFunction::flat(1.0, 8.0).unwrap(),
            DiscretizationScheme::new(8.0, modes, 0).unwrap(),
        )
        .unwrap()
    }

    fn resonant(modes: usize, amplitude: f64, harmonic: Harmonic) -> ExtendedGenerator {
        SystemModel::resonant_level(
            0.0,
            amplitude,
            0.25,
            harmonic,
            bath(1.0, 0.5, modes),
            bath(1.0, -0.5, modes),
        )
        .unwrap()
        .assemble()
        .unwrap()
    }

    #[test]
    fn resonant_level_structure() {
        let g = resonant(3, 1.0, Harmonic::Sin);
        assert_eq!(g.dim(), 7);
        let ups = g.damping();
        assert_eq!(ups.iter().filter(|&&x| x != 0.0).count(), 6);
        assert_eq!(ups[0], 0.0);
        assert_eq!(g.injection()[0], 0.0);
        for lead in g.leads() {
            for (k, m) in lead.range.clone().zip(&lead.modes) {
                assert_eq!(g.damping()[k], m.damping);
                assert_relative_eq!(g.injection()[k], m.damping * m.occupation);
                assert_eq!(g.hamiltonian().get(0, k), C64::new(m.coupling, 0.0));
                assert_eq!(g.hamiltonian().get(k, k), C64::new(m.energy, 0.0));
            }
        }
    }

    #[test]
    fn leads_do_not_couple_directly() {
        let g = resonant(4, 1.0, Harmonic::Sin);
        let h = g.hamiltonian_at(0.3);
        let (a, b) = (g.layout().leads[0].clone(), g.layout().leads[1].clone());
        for i in a.clone() {
            for j in b.clone() {
                assert_eq!(h[[i, j]], C64::default());
            }
            for j in a.clone() {
                if i != j {
                    assert_eq!(h[[i, j]], C64::default());
                }
            }
        }
    }

    #[test]
    fn closed_system_has_no_dissipation() {
        let m = SystemModel::new(
            diagonal_occupations(&[0.3, -0.2]),
            DriveProtocol::none(2),
            vec![],
        )
        .unwrap();
        let g = m.assemble().unwrap();
        assert_eq!(g.dim(), 2);
        assert!(g.damping().iter().all(|&x| x == 0.0));
        assert!(g.injection().iter().all(|&x| x == 0.0));
        let w = g.generator_at(1.0);
        // W + W^dag = 0: purely anti-Hermitian, unitary flow
        assert!(linalg::max_abs(&(&w + &linalg::adjoint(&w))) < 1e-15);
    }

    #[test]
    fn two_dot_blocks() {
        let m = SystemModel::two_dot(
            3.0,
            0.0,
            0.0,
            1.0,
            6.0,
            Harmonic::Sin,
            bath(2.0, 0.0, 5),
            bath(1.0, 0.0, 5),
        )
        .unwrap();
        let g = m.assemble().unwrap();
        let w0 = g.w0();
        assert_eq!(w0[[0, 1]], I * 3.0);
        assert_eq!(w0[[1, 0]], I * 3.0);
        let w1 = g.w1();
        let nz: Vec<_> = w1.indexed_iter().filter(|(_, v)| **v != C64::default()).collect();
        assert_eq!(nz.len(), 1);
        assert_eq!(nz[0].0, (0, 0));
        assert_eq!(*nz[0].1, I);
        // left lead attaches to dot 1, right lead to dot 2
        let l = g.layout().leads[0].start;
        let r = g.layout().leads[1].start;
        assert_ne!(g.hamiltonian().get(0, l), C64::default());
        assert_eq!(g.hamiltonian().get(1, l), C64::default());
        assert_ne!(g.hamiltonian().get(1, r), C64::default());
    }

    #[test]
    fn rejects_invalid_models() {
        let mut h = Array2::zeros((2, 2));
        h[[0, 1]] = C64::new(1.0, 0.0);
        assert!(matches!(
            SystemModel::new(h, DriveProtocol::none(2), vec![]),
            Err(Error::NotHermitian(_))
        ));
        let h = Array2::zeros((1, 1));
        let c = Coupling {
            site: 1,
            bath: bath(1.0, 0.0, 4),
        };
        assert!(SystemModel::new(h, DriveProtocol::none(1), vec![c]).is_err());
    }

    #[test]
    fn generator_time_dependence() {
        let g = resonant(3, 1.0, Harmonic::Sin);
        let w = 0.25;
        assert_eq!(g.generator_at(0.0), g.w0());
        let quarter = std::f64::consts::PI / (2.0 * w);
        assert!(linalg::max_abs_diff(&g.generator_at(quarter), &(g.w0() + g.w1())) < 1e-15);
        let g = resonant(3, 1.0, Harmonic::Cos);
        assert_eq!(g.generator_at(0.0), g.w0() + g.w1());
    }

    #[test]
    fn generator_dissipative_part_is_upsilon() {
        let g = resonant(6, 1.3, Harmonic::Sin);
        let ups = g.upsilon();
        for t in [0.0, 0.37, 2.9, 11.1] {
            let w = g.generator_at(t);
            let sum = &w + &linalg::adjoint(&w);
            assert!(linalg::max_abs_diff(&sum, &ups) < 1e-14);
        }
    }

    #[test]
    fn static_generator_is_time_independent() {
        let g = resonant(3, 0.0, Harmonic::Sin);
        assert!(g.is_static());
        assert_eq!(g.generator_at(0.0), g.generator_at(1.7));
    }

    #[test]
    fn initial_state_blocks() {
        let g = resonant(3, 1.0, Harmonic::Sin);
        let c = g.initial_state(&diagonal_occupations(&[0.5])).unwrap();
        assert_eq!(c.system()[[0, 0]], C64::new(0.5, 0.0));
        assert!(c.system_lead(0).iter().all(|x| *x == C64::default()));
        assert!(c.lead_lead(0, 1).iter().all(|x| *x == C64::default()));
        for (a, lead) in g.leads().iter().enumerate() {
            for (k, m) in lead.modes.iter().enumerate() {
                assert_eq!(c.lead(a)[[k, k]].re, m.occupation);
            }
        }
        let empty = g.initial_state(&diagonal_occupations(&[0.0])).unwrap();
        assert_eq!(empty.system()[[0, 0]], C64::default());
    }

    #[test]
    fn initial_state_infinite_temperature_leads() {
        let g = SystemModel::resonant_level(
            0.0,
            0.0,
            0.0,
            Harmonic::Sin,
            bath(1e9, 0.5, 5),
            bath(1e9, -0.5, 5),
        )
        .unwrap()
        .assemble()
        .unwrap();
        let c = g.initial_state(&diagonal_occupations(&[0.2])).unwrap();
        for k in 1..g.dim() {
            assert_relative_eq!(c.matrix[[k, k]].re, 0.5, epsilon = 1e-8);
        }
    }

    #[test]
    fn initial_state_rejects_bad_occupations() {
        let g = resonant(3, 1.0, Harmonic::Sin);
        assert!(matches!(
            g.initial_state(&diagonal_occupations(&[1.2])),
            Err(Error::OccupationOutOfRange { .. })
        ));
        assert!(g.initial_state(&diagonal_occupations(&[-0.1])).is_err());
    }
}
