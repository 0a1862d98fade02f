//! Currents, energies, entropy and cumulative thermodynamic bookkeeping
//! evaluated on correlation matrices.
//!
//! Conventions: `J` currents are positive when flowing out of a bath into
//! the system; `Q_a = -int J^Q_a dt` is the heat delivered to bath `a`.
//! For lead `a` attached at site `s` with modes `k`,
//!
//! ```text
//! J^P = -2 sum_k kappa_k Im C_sk
//! J^E = -2 sum_k kappa_k eps_k Im C_sk - sum_k kappa_k gamma_k Re C_sk
//! ```
//!
//! The second energy term comes from the lead dissipator acting on the
//! coupling Hamiltonian.

use ndarray::{s, Array2};

use crate::error::{Error, Result};
use crate::floquet::FloquetSolution;
use crate::linalg::{self, C64};
use crate::lyapunov::{self, EvolveOptions};
use crate::model::{CorrelationMatrix, ExtendedGenerator, LeadBlock};

/// Eigenvalue clipping used by the entropy functions.
pub const ENTROPY_CLIP: f64 = 1e-12;

fn lead(gen: &ExtendedGenerator, a: usize) -> &LeadBlock {
    &gen.leads()[a]
}

pub fn particle_current(gen: &ExtendedGenerator, c: &Array2<C64>, a: usize) -> f64 {
    let l = lead(gen, a);
    let row = c.row(l.site);
    -2.0 * l
        .range
        .clone()
        .zip(&l.modes)
        .map(|(k, m)| m.coupling * row[k].im)
        .sum::<f64>()
}

pub fn energy_current(gen: &ExtendedGenerator, c: &Array2<C64>, a: usize) -> f64 {
    let l = lead(gen, a);
    let row = c.row(l.site);
    l.range
        .clone()
        .zip(&l.modes)
        .map(|(k, m)| {
            -2.0 * m.coupling * m.energy * row[k].im - m.coupling * m.damping * row[k].re
        })
        .sum()
}

/// Dissipator contribution `Tr(H_SL L_a[rho])` to the energy current.
/// It vanishes only as the lead damping goes to zero, so in a static
/// steady state `I^E_a = J^E_a - D_a` rather than `J^E_a`.
pub fn coupling_dissipation(gen: &ExtendedGenerator, c: &Array2<C64>, a: usize) -> f64 {
    let l = lead(gen, a);
    let row = c.row(l.site);
    -l.range
        .clone()
        .zip(&l.modes)
        .map(|(k, m)| m.coupling * m.damping * row[k].re)
        .sum::<f64>()
}

pub fn heat_current(gen: &ExtendedGenerator, c: &Array2<C64>, a: usize) -> f64 {
    energy_current(gen, c, a) - lead(gen, a).bath.chemical_potential * particle_current(gen, c, a)
}

/// `<H_SL>` for lead `a`.
pub fn coupling_energy(gen: &ExtendedGenerator, c: &Array2<C64>, a: usize) -> f64 {
    let l = lead(gen, a);
    let row = c.row(l.site);
    2.0 * l
        .range
        .clone()
        .zip(&l.modes)
        .map(|(k, m)| m.coupling * row[k].re)
        .sum::<f64>()
}

/// Energy current from the rate of change of the coupling energy plus the
/// commutator of the coupling with the system Hamiltonian:
/// `d<H_SL>/dt + i Tr([h_SL, h_S(t)] C)`.
///
/// Couplings of other baths attached to the same site do not commute with
/// `h_SL`, so their commutator is included as well; it vanishes when every
/// site has at most one bath.
pub fn energy_current_from_coupling(
    gen: &ExtendedGenerator,
    c: &Array2<C64>,
    dc: &Array2<C64>,
    t: f64,
    a: usize,
) -> f64 {
    let l = lead(gen, a);
    let ns = gen.layout().system;
    let hs = gen.system_hamiltonian_at(t);
    let rate = coupling_energy(gen, dc, a);
    // i Tr([h_SL, h_S] C) = -2 Im sum_k kappa_k (h_S C)_sk
    let mut z = C64::default();
    for (k, m) in l.range.clone().zip(&l.modes) {
        let hc: C64 = (0..ns).map(|j| hs[[l.site, j]] * c[[j, k]]).sum();
        z += m.coupling * hc;
    }
    for (b, other) in gen.leads().iter().enumerate() {
        if b == a || other.site != l.site {
            continue;
        }
        for (k, m) in l.range.clone().zip(&l.modes) {
            let hc: C64 = other.range.clone().zip(&other.modes).map(|(q, n)| n.coupling * c[[q, k]]).sum();
            z += m.coupling * hc;
        }
    }
    rate - 2.0 * z.im
}

/// `(I^P, I^E)`: currents from the residual bath into the lead modes.
pub fn external_currents(gen: &ExtendedGenerator, c: &Array2<C64>, a: usize) -> (f64, f64) {
    let l = lead(gen, a);
    l.range
        .clone()
        .zip(&l.modes)
        .fold((0.0, 0.0), |(p, e), (k, m)| {
            let d = m.damping * (m.occupation - c[[k, k]].re);
            (p + d, e + m.energy * d)
        })
}

/// `Tr(h_S(t) C_S)`.
pub fn system_energy(gen: &ExtendedGenerator, c: &Array2<C64>, t: f64) -> f64 {
    let ns = gen.layout().system;
    let hs = gen.system_hamiltonian_at(t);
    let mut e = 0.0;
    for i in 0..ns {
        for j in 0..ns {
            e += (hs[[i, j]] * c[[j, i]]).re;
        }
    }
    e
}

/// Power injected by the drive, `Tr(dh_S/dt C_S)`.
pub fn drive_power(gen: &ExtendedGenerator, c: &Array2<C64>, t: f64) -> f64 {
    let r = gen.drive_factor_rate(t);
    gen.drive().iter().map(|&(i, a)| a * r * c[[i, i]].re).sum()
}

/// Number of particles in the system block.
pub fn system_number(gen: &ExtendedGenerator, c: &Array2<C64>) -> f64 {
    (0..gen.layout().system).map(|i| c[[i, i]].re).sum()
}

fn binary_entropy(v: f64) -> f64 {
    let v = v.clamp(ENTROPY_CLIP, 1.0 - ENTROPY_CLIP);
    -(v * v.ln() + (1.0 - v) * (1.0 - v).ln())
}

/// Von Neumann entropy of the Gaussian state with correlation matrix `c_s`.
pub fn system_entropy(c_s: &Array2<C64>) -> Result<f64> {
    if c_s.nrows() == 1 {
        return Ok(binary_entropy(c_s[[0, 0]].re));
    }
    Ok(linalg::eigvalsh(c_s)?.iter().map(|&v| binary_entropy(v)).sum())
}

/// `dS/dt = Tr(ln((1 - C_S) / C_S) dC_S/dt)`.
pub fn entropy_rate(c_s: &Array2<C64>, dc_s: &Array2<C64>) -> Result<f64> {
    let logit = |v: f64| {
        let v = v.clamp(ENTROPY_CLIP, 1.0 - ENTROPY_CLIP);
        ((1.0 - v) / v).ln()
    };
    if c_s.nrows() == 1 {
        return Ok(logit(c_s[[0, 0]].re) * dc_s[[0, 0]].re);
    }
    let (vals, vecs) = linalg::eigh(c_s.view())?;
    // Tr(V g V^dag D) = sum_n g_n (V^dag D V)_nn
    let rotated = linalg::adjoint(&vecs).dot(dc_s).dot(&vecs);
    Ok(vals
        .iter()
        .enumerate()
        .map(|(n, &v)| logit(v) * rotated[[n, n]].re)
        .sum())
}

/// Instantaneous observables at one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct InstantThermo {
    pub t: f64,
    pub particle: Vec<f64>,
    pub energy: Vec<f64>,
    pub heat: Vec<f64>,
    pub external_particle: Vec<f64>,
    pub external_energy: Vec<f64>,
    pub coupling_energy: Vec<f64>,
    pub system_energy: f64,
    pub system_number: f64,
    pub entropy: f64,
    pub entropy_rate: f64,
    pub drive_power: f64,
    /// `dS/dt - sum_a beta_a J^Q_a`.
    pub entropy_production_rate: f64,
}

impl InstantThermo {
    pub fn evaluate(
        gen: &ExtendedGenerator,
        t: f64,
        c: &Array2<C64>,
        dc: &Array2<C64>,
    ) -> Result<Self> {
        let nb = gen.leads().len();
        let ns = gen.layout().system;
        let cs = c.slice(s![..ns, ..ns]).to_owned();
        let dcs = dc.slice(s![..ns, ..ns]).to_owned();
        let particle: Vec<f64> = (0..nb).map(|a| particle_current(gen, c, a)).collect();
        let energy: Vec<f64> = (0..nb).map(|a| energy_current(gen, c, a)).collect();
        let heat: Vec<f64> = (0..nb)
            .map(|a| energy[a] - gen.leads()[a].bath.chemical_potential * particle[a])
            .collect();
        let (external_particle, external_energy) =
            (0..nb).map(|a| external_currents(gen, c, a)).unzip();
        let entropy = system_entropy(&cs)?;
        let entropy_rate = entropy_rate(&cs, &dcs)?;
        let flux: f64 = (0..nb).map(|a| gen.leads()[a].bath.beta() * heat[a]).sum();
        Ok(Self {
            t,
            coupling_energy: (0..nb).map(|a| coupling_energy(gen, c, a)).collect(),
            system_energy: system_energy(gen, c, t),
            system_number: system_number(gen, c),
            entropy,
            entropy_rate,
            drive_power: drive_power(gen, c, t),
            entropy_production_rate: entropy_rate - flux,
            particle,
            energy,
            heat,
            external_particle,
            external_energy,
        })
    }

    /// `<H_S(t)> + sum_a <H_SL_a>`.
    pub fn internal_energy(&self) -> f64 {
        self.system_energy + self.coupling_energy.iter().sum::<f64>()
    }
}

/// Instantaneous observables plus cumulative quantities since the first
/// sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoRecord {
    pub instant: InstantThermo,
    /// Heat delivered to each bath, `-int J^Q dt`.
    pub heat: Vec<f64>,
    pub chemical_work: f64,
    /// `dU - sum_a int J^E_a dt`.
    pub external_work: f64,
    /// `int Tr(dh_S/dt C_S) dt`, an independent route to the drive work.
    pub drive_work: f64,
    pub delta_u: f64,
    pub delta_s: f64,
    /// `dS + sum_a beta_a Q_a`.
    pub entropy_production: f64,
}

impl ThermoRecord {
    pub fn t(&self) -> f64 {
        self.instant.t
    }

    pub fn total_work(&self) -> f64 {
        self.chemical_work + self.external_work
    }

    /// `dU - W + sum_a Q_a`.
    pub fn first_law_residual(&self) -> f64 {
        self.delta_u - self.total_work() + self.heat.iter().sum::<f64>()
    }
}

/// Streaming trapezoid integration of the currents over a sampled
/// trajectory. Samples must be fed in increasing time order.
#[derive(Debug, Clone)]
pub struct ThermoAccumulator {
    betas: Vec<f64>,
    mus: Vec<f64>,
    first: Option<InstantThermo>,
    last: Option<InstantThermo>,
    int_particle: Vec<f64>,
    int_energy: Vec<f64>,
    int_heat: Vec<f64>,
    int_power: f64,
}

impl ThermoAccumulator {
    pub fn new(gen: &ExtendedGenerator) -> Self {
        let nb = gen.leads().len();
        Self {
            betas: gen.leads().iter().map(|l| l.bath.beta()).collect(),
            mus: gen.leads().iter().map(|l| l.bath.chemical_potential).collect(),
            first: None,
            last: None,
            int_particle: vec![0.0; nb],
            int_energy: vec![0.0; nb],
            int_heat: vec![0.0; nb],
            int_power: 0.0,
        }
    }

    pub fn push(
        &mut self,
        gen: &ExtendedGenerator,
        t: f64,
        c: &Array2<C64>,
        dc: &Array2<C64>,
    ) -> Result<ThermoRecord> {
        let now = InstantThermo::evaluate(gen, t, c, dc)?;
        Ok(self.push_instant(now))
    }

    pub fn push_instant(&mut self, now: InstantThermo) -> ThermoRecord {
        if let Some(prev) = &self.last {
            let h = 0.5 * (now.t - prev.t);
            for a in 0..self.betas.len() {
                self.int_particle[a] += h * (prev.particle[a] + now.particle[a]);
                self.int_energy[a] += h * (prev.energy[a] + now.energy[a]);
                self.int_heat[a] += h * (prev.heat[a] + now.heat[a]);
            }
            self.int_power += h * (prev.drive_power + now.drive_power);
        }
        let first = self.first.get_or_insert_with(|| now.clone());
        let delta_u = now.internal_energy() - first.internal_energy();
        let delta_s = now.entropy - first.entropy;
        let heat: Vec<f64> = self.int_heat.iter().map(|q| -q).collect();
        let chemical_work = self
            .mus
            .iter()
            .zip(&self.int_particle)
            .map(|(m, n)| m * n)
            .sum();
        let external_work = delta_u - self.int_energy.iter().sum::<f64>();
        let entropy_production = delta_s
            + self
                .betas
                .iter()
                .zip(&heat)
                .map(|(b, q)| b * q)
                .sum::<f64>();
        let rec = ThermoRecord {
            heat,
            chemical_work,
            external_work,
            drive_work: self.int_power,
            delta_u,
            delta_s,
            entropy_production,
            instant: now.clone(),
        };
        self.last = Some(now);
        rec
    }
}

/// Evaluates the thermodynamic records of a sampled trajectory of
/// `(t, C, dC/dt)`.
pub fn accumulate<'a, I>(gen: &ExtendedGenerator, samples: I) -> Result<Vec<ThermoRecord>>
where
    I: IntoIterator<Item = (f64, &'a Array2<C64>, &'a Array2<C64>)>,
{
    let mut acc = ThermoAccumulator::new(gen);
    samples
        .into_iter()
        .map(|(t, c, dc)| acc.push(gen, t, c, dc))
        .collect()
}

/// Integrates the Lyapunov equation and returns the thermodynamic records
/// at every observer sample, without storing the trajectory.
pub fn evolve_thermo(
    gen: &ExtendedGenerator,
    c0: &CorrelationMatrix,
    opts: &EvolveOptions,
) -> Result<Vec<ThermoRecord>> {
    let mut acc = ThermoAccumulator::new(gen);
    let mut out = Vec::new();
    let mut failure = None;
    lyapunov::evolve(gen, c0, opts, |t, c, dc| {
        if failure.is_none() {
            match acc.push(gen, t, &c.matrix, dc) {
                Ok(r) => out.push(r),
                Err(e) => failure = Some(e),
            }
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Cycle averages of linear observables equal their value on `C_0`.
pub fn mean_currents(gen: &ExtendedGenerator, sol: &FloquetSolution) -> InstantThermo {
    let c0 = &sol.harmonics[0];
    let zero = Array2::zeros(c0.raw_dim());
    let mut m = InstantThermo::evaluate(gen, 0.0, c0, &zero).expect("C_0 is Hermitian");
    // only the linear observables are meaningful here
    m.entropy = f64::NAN;
    m.entropy_rate = 0.0;
    m.system_energy = f64::NAN;
    m.drive_power = f64::NAN;
    let flux: f64 = gen
        .leads()
        .iter()
        .zip(&m.heat)
        .map(|(l, q)| l.bath.beta() * q)
        .sum();
    m.entropy_production_rate = -flux;
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct RectificationResult {
    /// Cycle-averaged energy current out of the left bath, forward setup.
    pub forward_current: f64,
    /// The same in the temperature-swapped setup.
    pub backward_current: f64,
    pub coefficient: f64,
    pub forward_particle: f64,
    pub backward_particle: f64,
    /// Rectification coefficient built from the particle currents; `NaN`
    /// when both vanish.
    pub particle_coefficient: f64,
    /// `-sum_a beta_a <J^Q_a>` in each setup.
    pub forward_entropy_production: f64,
    pub backward_entropy_production: f64,
}

/// Minimum `|J - J~|` for which the coefficient is defined.
pub const RECTIFICATION_DENOMINATOR_TOL: f64 = 1e-12;

fn ratio(a: f64, b: f64) -> Option<f64> {
    let d = (a - b).abs();
    (d >= RECTIFICATION_DENOMINATOR_TOL).then(|| (a + b).abs() / d)
}

/// `R = |J + J~| / |J - J~|` for the left-bath (lead 0) energy current.
pub fn rectification(
    forward: &FloquetSolution,
    backward: &FloquetSolution,
    gen_forward: &ExtendedGenerator,
    gen_backward: &ExtendedGenerator,
) -> Result<RectificationResult> {
    let f = mean_currents(gen_forward, forward);
    let b = mean_currents(gen_backward, backward);
    let (jf, jb) = (f.energy[0], b.energy[0]);
    let coefficient = ratio(jf, jb).ok_or(Error::DegenerateRectification((jf - jb).abs()))?;
    let (pf, pb) = (f.particle[0], b.particle[0]);
    Ok(RectificationResult {
        forward_current: jf,
        backward_current: jb,
        coefficient,
        forward_particle: pf,
        backward_particle: pb,
        particle_coefficient: ratio(pf, pb).unwrap_or(f64::NAN),
        forward_entropy_production: f.entropy_production_rate,
        backward_entropy_production: b.entropy_production_rate,
    })
}
