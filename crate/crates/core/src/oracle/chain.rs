//! Chain mapping of each bath and brute-force unitary evolution of
//! system + chains.
//!
//! A bath with spectral function `J` is first sampled on a fine midpoint
//! star grid (`w_j`, `v_j = sqrt(J(w_j) dw / 2pi)`), then tridiagonalised
//! by Lanczos with full reorthogonalisation, starting from `v / |v|`. The
//! result is a chain with on-site energies `eps_p` and hoppings `g_p`,
//! where `g_0 = |v|` couples the system site to the first chain site.
//! Truncating the chain at `L_B` sites is exact until excitations reach the
//! far end, roughly at `t ~ L_B / g_B`.

use ndarray::{s, Array1, Array2, Axis};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, C64};
use crate::model::SystemModel;
use crate::spectral::{fermi, SpectralFunction};
use crate::thermo::{entropy_rate, system_entropy};

/// Tolerance on `max |Q Q^T - 1|` after tridiagonalisation.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;
/// Occupation change at the far end of a chain that flags reflections.
pub const BOUNDARY_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct ChainBath {
    pub energies: Vec<f64>,
    /// `g_0` (system to site 0) followed by the intra-chain hoppings.
    pub hoppings: Vec<f64>,
    pub tail_energy: f64,
    pub tail_hopping: f64,
    /// Largest deviation of the last quarter of hoppings from `tail_hopping`.
    pub tail_deviation: f64,
    pub orthogonality_error: f64,
    star_energies: Array1<f64>,
    /// Rows are the chain orbitals in the star basis.
    transform: Array2<f64>,
}

impl ChainBath {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Thermal chain correlation matrix `Q diag(f(w_j)) Q^T`.
    pub fn thermal_state(&self, temperature: f64, chemical_potential: f64) -> Array2<f64> {
        let f = self
            .star_energies
            .mapv(|w| fermi(w, temperature, chemical_potential));
        let weighted = &self.transform * &f.view().insert_axis(Axis(0));
        weighted.dot(&self.transform.t())
    }

    /// Gibbs state `f(h_chain)` of the truncated chain. Unlike
    /// [`ChainBath::thermal_state`] it is stationary under the truncated
    /// chain Hamiltonian, so occupations at the far end only move once a
    /// disturbance from the system arrives. Near the first site the two agree
    /// to high accuracy.
    pub fn gibbs_state(&self, temperature: f64, chemical_potential: f64) -> Result<Array2<f64>> {
        let h = self.hamiltonian().mapv(|x| C64::new(x, 0.0));
        let (vals, vecs) = linalg::eigh(h.view())?;
        let f = vals.mapv(|e| C64::new(fermi(e, temperature, chemical_potential), 0.0));
        let weighted = &vecs * &f.view().insert_axis(Axis(0));
        Ok(weighted.dot(&linalg::adjoint(&vecs)).mapv(|z| z.re))
    }

    /// Tridiagonal chain Hamiltonian (without the system coupling).
    pub fn hamiltonian(&self) -> Array2<f64> {
        let n = self.len();
        let mut h = Array2::zeros((n, n));
        for p in 0..n {
            h[[p, p]] = self.energies[p];
            if p + 1 < n {
                h[[p, p + 1]] = self.hoppings[p + 1];
                h[[p + 1, p]] = self.hoppings[p + 1];
            }
        }
        h
    }
}

/// Lanczos tridiagonalisation of `spectral` sampled on `star_modes`
/// midpoints, truncated to `length` chain sites.
pub fn chain_map(spectral: &SpectralFunction, length: usize, star_modes: usize) -> Result<ChainBath> {
    if length < 2 {
        return Err(invalid("length", "a chain needs at least two sites"));
    }
    if star_modes < 4 * length {
        return Err(invalid("star_modes", "star grid must be much finer than the chain"));
    }
    let (lo, hi) = spectral.support();
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(invalid("spectral", "chain mapping needs finite band edges"));
    }
    let dw = (hi - lo) / star_modes as f64;
    let star = Array1::from_shape_fn(star_modes, |j| lo + (j as f64 + 0.5) * dw);
    let v = star.mapv(|w| (spectral.evaluate(w) * dw / (2.0 * std::f64::consts::PI)).sqrt());
    let g0 = v.dot(&v).sqrt();
    if g0 == 0.0 {
        return Err(invalid("spectral", "vanishing spectral weight"));
    }

    let mut q = Array2::<f64>::zeros((length, star_modes));
    q.row_mut(0).assign(&(&v / g0));
    let mut energies = Vec::with_capacity(length);
    let mut hoppings = vec![g0];
    for p in 0..length {
        let qp = q.row(p).to_owned();
        let aq = &qp * &star;
        let a = qp.dot(&aq);
        energies.push(a);
        if p + 1 == length {
            break;
        }
        let mut r = aq - &qp * a;
        if p > 0 {
            r.scaled_add(-hoppings[p], &q.row(p - 1));
        }
        // two passes of classical Gram-Schmidt against all previous orbitals
        for _ in 0..2 {
            let prev = q.slice(s![..=p, ..]);
            let overlaps = prev.dot(&r);
            r -= &prev.t().dot(&overlaps);
        }
        let b = r.dot(&r).sqrt();
        if b < 1e-14 {
            return Err(Error::LostOrthogonality(b));
        }
        hoppings.push(b);
        q.row_mut(p + 1).assign(&(r / b));
    }

    let gram = q.dot(&q.t());
    let mut orth: f64 = 0.0;
    for ((i, j), x) in gram.indexed_iter() {
        orth = orth.max((x - if i == j { 1.0 } else { 0.0 }).abs());
    }
    if orth > ORTHOGONALITY_TOL {
        return Err(Error::LostOrthogonality(orth));
    }

    let tail = (length * 3 / 4).max(1);
    let tail_h = &hoppings[tail..];
    let tail_hopping = tail_h.iter().sum::<f64>() / tail_h.len() as f64;
    let tail_deviation = tail_h.iter().fold(0.0f64, |m, g| m.max((g - tail_hopping).abs()));
    let tail_e = &energies[tail..];
    let tail_energy = tail_e.iter().sum::<f64>() / tail_e.len() as f64;

    Ok(ChainBath {
        energies,
        hoppings,
        tail_energy,
        tail_hopping,
        tail_deviation,
        orthogonality_error: orth,
        star_energies: star,
        transform: q,
    })
}

/// Conservative light-cone horizon `L_B / (4 g_B)`.
pub fn validity_horizon(chain: &ChainBath) -> f64 {
    chain.len() as f64 / (4.0 * chain.tail_hopping)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainOptions {
    pub t_final: f64,
    pub dt: f64,
    /// Integrator steps between records.
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainRecord {
    pub t: f64,
    /// Per bath, positive out of the bath into the system.
    pub particle: Vec<f64>,
    pub energy: Vec<f64>,
    pub heat: Vec<f64>,
    pub coupling_energy: Vec<f64>,
    pub system_energy: f64,
    pub system_number: f64,
    pub total_number: f64,
    pub entropy: f64,
    pub entropy_rate: f64,
    pub entropy_production_rate: f64,
}

#[derive(Debug, Clone)]
pub struct ChainRun {
    pub records: Vec<ChainRecord>,
    /// Smallest light-cone horizon over the chains.
    pub horizon: f64,
    /// First time the far-end occupations moved by more than
    /// [`BOUNDARY_TOL`].
    pub boundary_flag: Option<f64>,
    /// `min(horizon, boundary_flag)`.
    pub valid_until: f64,
    /// Set when `t_final` exceeds the horizon.
    pub beyond_horizon: bool,
}

/// Single-particle Hamiltonian rows, `(column, value)` pairs.
struct Rows {
    rows: Vec<Vec<(usize, f64)>>,
}

impl Rows {
    fn add(&mut self, i: usize, j: usize, v: f64) {
        if v == 0.0 {
            return;
        }
        self.rows[i].push((j, v));
        if i != j {
            self.rows[j].push((i, v));
        }
    }
}

struct Junction {
    site: usize,
    first: usize,
    len: usize,
    g0: f64,
    eps1: f64,
    g1: f64,
    mu: f64,
    beta: f64,
}

/// Unitary evolution `dC/dt = -i [h(t), C]` of the system coupled to one
/// chain per entry of `model.couplings` (same order). Each chain starts in
/// its Gibbs state at the bath's temperature and chemical potential; the
/// system starts in `system_init`.
pub fn chain_evolve(
    model: &SystemModel,
    chains: &[ChainBath],
    system_init: &Array2<C64>,
    opts: &ChainOptions,
) -> Result<ChainRun> {
    if chains.len() != model.couplings.len() {
        return Err(invalid("chains", "need exactly one chain per bath"));
    }
    if !(opts.dt > 0.0 && opts.t_final > 0.0 && opts.stride > 0) {
        return Err(invalid("dt", "dt, t_final and stride must be positive"));
    }
    let ns = model.n_sites();
    if system_init.dim() != (ns, ns) {
        return Err(invalid("system_init", "shape does not match the system"));
    }
    let dim = ns + chains.iter().map(ChainBath::len).sum::<usize>();
    let mut rows = Rows {
        rows: vec![Vec::new(); dim],
    };
    let mut h_s = vec![Vec::new(); ns];
    for i in 0..ns {
        for j in 0..ns {
            let v = model.hamiltonian[[i, j]];
            if v != C64::default() {
                h_s[i].push((j, v));
            }
        }
    }
    let mut c = Array2::<C64>::zeros((dim, dim));
    c.slice_mut(s![..ns, ..ns]).assign(system_init);
    let mut junctions = Vec::new();
    let mut offset = ns;
    for (coupling, chain) in model.couplings.iter().zip(chains) {
        let n = chain.len();
        rows.add(coupling.site, offset, chain.hoppings[0]);
        for p in 0..n {
            rows.add(offset + p, offset + p, chain.energies[p]);
            if p + 1 < n {
                rows.add(offset + p, offset + p + 1, chain.hoppings[p + 1]);
            }
        }
        let thermal = chain.gibbs_state(coupling.bath.temperature, coupling.bath.chemical_potential)?;
        c.slice_mut(s![offset..offset + n, offset..offset + n])
            .assign(&thermal.mapv(|x| C64::new(x, 0.0)));
        junctions.push(Junction {
            site: coupling.site,
            first: offset,
            len: n,
            g0: chain.hoppings[0],
            eps1: chain.energies[0],
            g1: chain.hoppings[1],
            mu: coupling.bath.chemical_potential,
            beta: coupling.bath.beta(),
        });
        offset += n;
    }
    let drive: Vec<(usize, f64)> = model
        .drive
        .amplitudes
        .iter()
        .enumerate()
        .filter(|(_, &a)| a != 0.0)
        .map(|(i, &a)| (i, a))
        .collect();

    let horizon = chains.iter().map(validity_horizon).fold(f64::INFINITY, f64::min);
    let edges: Vec<(usize, Vec<f64>)> = junctions
        .iter()
        .map(|j| {
            let m = ((0.05 * j.len as f64).ceil() as usize).max(1);
            let start = j.first + j.len - m;
            (start, (start..start + m).map(|i| c[[i, i]].re).collect())
        })
        .collect();

    let mut integ = Unitary {
        rows,
        drive,
        x: Array2::zeros((dim, dim)),
        stage: Array2::zeros((dim, dim)),
        k: std::array::from_fn(|_| Array2::zeros((dim, dim))),
    };
    let n_steps = (opts.t_final / opts.dt - 1e-9).ceil() as usize;
    let mut records = Vec::with_capacity(n_steps / opts.stride + 2);
    let mut boundary_flag = None;
    for step in 0..=n_steps {
        let t = step as f64 * opts.dt;
        let factor = model.drive.factor(t);
        integ.rhs_into(&c, factor, 0);
        if step % opts.stride == 0 || step == n_steps {
            if boundary_flag.is_none() {
                let moved = edges.iter().any(|(start, init)| {
                    init.iter()
                        .enumerate()
                        .any(|(k, v0)| (c[[start + k, start + k]].re - v0).abs() > BOUNDARY_TOL)
                });
                if moved {
                    boundary_flag = Some(t);
                }
            }
            records.push(observe(model, &junctions, &c, &integ.k[0], t)?);
        }
        if step == n_steps {
            break;
        }
        integ.advance(&mut c, model, t, opts.dt);
    }
    let valid_until = boundary_flag.map_or(horizon, |b| b.min(horizon));
    Ok(ChainRun {
        records,
        horizon,
        boundary_flag,
        valid_until,
        beyond_horizon: opts.t_final > horizon,
    })
}

struct Unitary {
    rows: Rows,
    drive: Vec<(usize, f64)>,
    x: Array2<C64>,
    stage: Array2<C64>,
    k: [Array2<C64>; 4],
}

impl Unitary {
    /// `k[slot] = -i [h, c]` with the drive scaled by `factor`.
    fn rhs_into(&mut self, c: &Array2<C64>, factor: f64, slot: usize) {
        rhs(&self.rows, &self.drive, factor, c, &mut self.x, &mut self.k[slot]);
    }

    fn advance(&mut self, c: &mut Array2<C64>, model: &SystemModel, t: f64, dt: f64) {
        let half = model.drive.factor(t + 0.5 * dt);
        let end = model.drive.factor(t + dt);
        let h = C64::new(0.5 * dt, 0.0);
        self.stage.assign(c);
        self.stage.scaled_add(h, &self.k[0]);
        let stage = std::mem::take(&mut self.stage);
        self.rhs_into(&stage, half, 1);
        self.stage = stage;
        self.stage.assign(c);
        self.stage.scaled_add(h, &self.k[1]);
        let stage = std::mem::take(&mut self.stage);
        self.rhs_into(&stage, half, 2);
        self.stage = stage;
        self.stage.assign(c);
        self.stage.scaled_add(C64::new(dt, 0.0), &self.k[2]);
        let stage = std::mem::take(&mut self.stage);
        self.rhs_into(&stage, end, 3);
        self.stage = stage;
        let w = dt / 6.0;
        let [k1, k2, k3, k4] = &self.k;
        ndarray::Zip::from(&mut *c)
            .and(k1)
            .and(k2)
            .and(k3)
            .and(k4)
            .for_each(|c, a, b, d, e| *c += w * (a + 2.0 * (b + d) + e));
    }
}

fn rhs(
    rows: &Rows,
    drive: &[(usize, f64)],
    factor: f64,
    c: &Array2<C64>,
    x: &mut Array2<C64>,
    out: &mut Array2<C64>,
) {
    let n = c.nrows();
    let cs = c.as_slice().expect("standard layout");
    {
        let xs = x.as_slice_mut().expect("standard layout");
        xs.fill(C64::default());
        for (i, row) in rows.rows.iter().enumerate() {
            let xr = &mut xs[i * n..(i + 1) * n];
            for &(j, h) in row {
                for (o, v) in xr.iter_mut().zip(&cs[j * n..(j + 1) * n]) {
                    *o += h * v;
                }
            }
        }
        for &(i, a) in drive {
            let s = a * factor;
            for (o, v) in xs[i * n..(i + 1) * n].iter_mut().zip(&cs[i * n..(i + 1) * n]) {
                *o += s * v;
            }
        }
    }
    // -i (h C - C h) with C h = (h C)^dag
    let xs = x.as_slice().expect("standard layout");
    let os = out.as_slice_mut().expect("standard layout");
    for i in 0..n {
        for j in 0..n {
            let d = xs[i * n + j] - xs[j * n + i].conj();
            os[i * n + j] = C64::new(d.im, -d.re);
        }
    }
}

fn observe(
    model: &SystemModel,
    junctions: &[Junction],
    c: &Array2<C64>,
    dc: &Array2<C64>,
    t: f64,
) -> Result<ChainRecord> {
    let ns = model.n_sites();
    let mut particle = Vec::new();
    let mut energy = Vec::new();
    let mut heat = Vec::new();
    let mut coupling_energy = Vec::new();
    let mut flux = 0.0;
    for j in junctions {
        let c1 = c[[j.site, j.first]];
        let c2 = c[[j.site, j.first + 1]];
        let p = -2.0 * j.g0 * c1.im;
        let e = -2.0 * j.g0 * (j.eps1 * c1.im + j.g1 * c2.im);
        let q = e - j.mu * p;
        particle.push(p);
        energy.push(e);
        heat.push(q);
        coupling_energy.push(2.0 * j.g0 * c1.re);
        flux += j.beta * q;
    }
    let cs = c.slice(s![..ns, ..ns]).to_owned();
    let dcs = dc.slice(s![..ns, ..ns]).to_owned();
    let hs = model.hamiltonian_at(t);
    let mut system_energy = 0.0;
    for i in 0..ns {
        for k in 0..ns {
            system_energy += (hs[[i, k]] * cs[[k, i]]).re;
        }
    }
    let entropy = system_entropy(&cs)?;
    let rate = entropy_rate(&cs, &dcs)?;
    Ok(ChainRecord {
        t,
        particle,
        energy,
        heat,
        coupling_energy,
        system_energy,
        system_number: (0..ns).map(|i| cs[[i, i]].re).sum(),
        total_number: c.diag().iter().map(|z| z.re).sum(),
        entropy,
        entropy_rate: rate,
        entropy_production_rate: rate - flux,
    })
}
