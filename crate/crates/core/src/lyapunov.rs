//! Time integration of `dC/dt = -(W C + C W^dag) + F` and the static
//! steady state `W0 C + C W0^dag = F`.
//!
//! The right-hand side is evaluated without forming `W` densely. With
//! `X = H(t) C` (sparse times dense) and `C` Hermitian,
//!
//! ```text
//! dC_ij = -i (X_ij - conj(X_ji)) - (u_i + u_j) C_ij / 2 + F_i delta_ij
//! ```
//!
//! so one evaluation costs `O(nnz(H) N + N^2)`.

use ndarray::Array2;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, EigenBasis, C64};
use crate::model::{CorrelationMatrix, ExtendedGenerator};

/// Default bound tolerance on the eigenvalues of `C`.
pub const BOUND_TOL: f64 = 1e-6;
/// Residual demanded of the static solve.
pub const STEADY_RESIDUAL: f64 = 1e-10;

/// Scratch buffers for repeated right-hand side evaluations.
#[derive(Debug, Clone)]
pub struct Stepper<'g> {
    gen: &'g ExtendedGenerator,
    x: Array2<C64>,
    stage: Array2<C64>,
    k: [Array2<C64>; 4],
}

impl<'g> Stepper<'g> {
    pub fn new(gen: &'g ExtendedGenerator) -> Self {
        let n = gen.dim();
        let z = || Array2::zeros((n, n));
        Self {
            gen,
            x: z(),
            stage: z(),
            k: [z(), z(), z(), z()],
        }
    }

    pub fn generator(&self) -> &'g ExtendedGenerator {
        self.gen
    }

    /// Writes `dC/dt` at `(t, c)` into `out`; `c` must be Hermitian.
    pub fn rhs_into(&mut self, c: &Array2<C64>, t: f64, out: &mut Array2<C64>) {
        rhs_with(self.gen, c, t, &mut self.x, out);
    }

    /// `dC/dt` at `(t, c)`.
    pub fn rhs(&mut self, c: &Array2<C64>, t: f64) -> Array2<C64> {
        let mut out = Array2::zeros(c.raw_dim());
        self.rhs_into(c, t, &mut out);
        out
    }

    /// Derivative at the start of the last step taken.
    pub fn last_derivative(&self) -> &Array2<C64> {
        &self.k[0]
    }

    /// One RK4 step in place. The derivative at `(t, c)` is left in
    /// [`Stepper::last_derivative`].
    pub fn step(&mut self, c: &mut Array2<C64>, t: f64, dt: f64) {
        rhs_with(self.gen, c, t, &mut self.x, &mut self.k[0]);
        self.advance(c, t, dt);
    }

    /// RK4 step reusing an already evaluated `k1 = dC/dt(t, c)`.
    fn advance(&mut self, c: &mut Array2<C64>, t: f64, dt: f64) {
        let gen = self.gen;
        let h = 0.5 * dt;
        let [k1, k2, k3, k4] = &mut self.k;
        axpy_into(&mut self.stage, c, h, k1);
        rhs_with(gen, &self.stage, t + h, &mut self.x, k2);
        axpy_into(&mut self.stage, c, h, k2);
        rhs_with(gen, &self.stage, t + h, &mut self.x, k3);
        axpy_into(&mut self.stage, c, dt, k3);
        rhs_with(gen, &self.stage, t + dt, &mut self.x, k4);
        let w = dt / 6.0;
        ndarray::Zip::from(&mut *c)
            .and(&*k1)
            .and(&*k2)
            .and(&*k3)
            .and(&*k4)
            .for_each(|c, a, b, d, e| *c += w * (a + 2.0 * (b + d) + e));
        linalg::hermitize(c);
    }
}

/// `out = c + h k`.
fn axpy_into(out: &mut Array2<C64>, c: &Array2<C64>, h: f64, k: &Array2<C64>) {
    ndarray::Zip::from(out)
        .and(c)
        .and(k)
        .for_each(|o, c, k| *o = c + h * k);
}

fn rhs_with(
    gen: &ExtendedGenerator,
    c: &Array2<C64>,
    t: f64,
    x: &mut Array2<C64>,
    out: &mut Array2<C64>,
) {
    let n = c.nrows();
    gen.hamiltonian().mul_dense_into(c, x);
    if !gen.drive().is_empty() {
        let f = gen.drive_factor(t);
        for &(i, a) in gen.drive() {
            let s = a * f;
            let cs = c.row(i);
            let mut xr = x.row_mut(i);
            xr.zip_mut_with(&cs, |x, c| *x += s * c);
        }
    }
    let u = gen.damping();
    let fin = gen.injection();
    let xs = x.as_slice().expect("standard layout");
    let cs = c.as_slice().expect("standard layout");
    let os = out.as_slice_mut().expect("standard layout");
    for i in 0..n {
        let xii = xs[i * n + i];
        os[i * n + i] = C64::new(2.0 * xii.im - u[i] * cs[i * n + i].re + fin[i], 0.0);
        for j in (i + 1)..n {
            let d = xs[i * n + j] - xs[j * n + i].conj();
            let v = C64::new(d.im, -d.re) - 0.5 * (u[i] + u[j]) * cs[i * n + j];
            os[i * n + j] = v;
            os[j * n + i] = v.conj();
        }
    }
}

/// `dC/dt` at `(t, C)`.
pub fn derivative(gen: &ExtendedGenerator, c: &CorrelationMatrix, t: f64) -> Array2<C64> {
    Stepper::new(gen).rhs(&c.matrix, t)
}

/// A single RK4 step.
pub fn step(gen: &ExtendedGenerator, c: &CorrelationMatrix, t: f64, dt: f64) -> CorrelationMatrix {
    let mut m = c.matrix.clone();
    linalg::hermitize(&mut m);
    Stepper::new(gen).step(&mut m, t, dt);
    CorrelationMatrix::new(m, c.layout.clone())
}

/// `min(0.01 / Gamma, 0.02 * 2 pi / omega)`, with `Gamma` the largest bath
/// coupling strength.
pub fn default_dt(gen: &ExtendedGenerator) -> f64 {
    let gamma = gen
        .leads()
        .iter()
        .map(|l| l.bath.spectral.coupling)
        .fold(0.0, f64::max);
    let mut dt: f64 = if gamma > 0.0 { 0.01 / gamma } else { 0.01 };
    if !gen.is_static() {
        dt = dt.min(0.02 * std::f64::consts::TAU / gen.frequency());
    }
    dt
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    pub t0: f64,
    pub t_final: f64,
    pub dt: f64,
    /// Integrator steps between observer calls.
    pub stride: usize,
    pub bound_tol: f64,
    /// Observer samples between full eigenvalue checks of `C`. The diagonal
    /// is checked at every sample.
    pub eigen_check_every: usize,
}

impl EvolveOptions {
    pub fn new(t_final: f64, dt: f64) -> Self {
        Self {
            t0: 0.0,
            t_final,
            dt,
            stride: 10,
            bound_tol: BOUND_TOL,
            eigen_check_every: 50,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn with_start(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn steps(&self) -> usize {
        ((self.t_final - self.t0) / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", "must be positive"));
        }
        if !(self.t_final > self.t0) {
            return Err(invalid("t_final", "must exceed the start time"));
        }
        if self.stride == 0 {
            return Err(invalid("stride", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub t: f64,
    pub c: CorrelationMatrix,
}

fn check_diagonal(c: &Array2<C64>, t: f64, tol: f64) -> Result<()> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..c.nrows() {
        lo = lo.min(c[[i, i]].re);
        hi = hi.max(c[[i, i]].re);
    }
    if !(lo >= -tol && hi <= 1.0 + tol) {
        return Err(Error::BoundsViolated { t, min: lo, max: hi });
    }
    Ok(())
}

fn check_spectrum(c: &Array2<C64>, t: f64, tol: f64) -> Result<()> {
    let ev = linalg::eigvalsh(c)?;
    let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lo >= -tol && hi <= 1.0 + tol) {
        return Err(Error::BoundsViolated { t, min: lo, max: hi });
    }
    Ok(())
}

/// Integrates from `c0` at `opts.t0` to `opts.t_final`, calling
/// `observer(t, C, dC/dt)` every `opts.stride` steps and at the final time.
/// Returns the final state.
pub fn evolve<F>(
    gen: &ExtendedGenerator,
    c0: &CorrelationMatrix,
    opts: &EvolveOptions,
    mut observer: F,
) -> Result<CorrelationMatrix>
where
    F: FnMut(f64, &CorrelationMatrix, &Array2<C64>),
{
    opts.validate()?;
    let n_steps = opts.steps();
    let mut st = Stepper::new(gen);
    let mut state = c0.clone();
    linalg::hermitize(&mut state.matrix);
    let mut samples = 0usize;
    let mut k1 = Array2::zeros(state.matrix.raw_dim());
    for step in 0..=n_steps {
        let t = opts.t0 + step as f64 * opts.dt;
        st.rhs_into(&state.matrix, t, &mut k1);
        if step % opts.stride == 0 || step == n_steps {
            check_diagonal(&state.matrix, t, opts.bound_tol)?;
            if opts.eigen_check_every > 0 && samples % opts.eigen_check_every == 0 {
                check_spectrum(&state.matrix, t, opts.bound_tol)?;
            }
            samples += 1;
            observer(t, &state, &k1);
        }
        if step == n_steps {
            break;
        }
        st.k[0].assign(&k1);
        st.advance(&mut state.matrix, t, opts.dt);
    }
    let t_end = opts.t0 + n_steps as f64 * opts.dt;
    check_spectrum(&state.matrix, t_end, opts.bound_tol)?;
    Ok(state)
}

/// Collects the observer samples of [`evolve`] as snapshots.
pub fn trajectory(
    gen: &ExtendedGenerator,
    c0: &CorrelationMatrix,
    opts: &EvolveOptions,
) -> Result<Vec<Sample>> {
    let mut out = Vec::new();
    evolve(gen, c0, opts, |t, c, _| out.push(Sample { t, c: c.clone() }))?;
    Ok(out)
}

/// Smallest `|lambda_i + conj(lambda_j)|` accepted before a mode is treated
/// as undamped.
pub const UNDAMPED_TOL: f64 = 1e-12;

/// Solves `(shift + W) X + X W^dag = R` in the eigenbasis of `W`.
pub(crate) fn solve_shifted(basis: &EigenBasis, rhs: &Array2<C64>, shift: C64) -> Array2<C64> {
    let mut x = basis.to_eigen(rhs);
    basis.divide_in_place(&mut x, shift);
    basis.from_eigen(&x)
}

/// Steady state of a static generator, refined until
/// `max |W0 C + C W0^dag - F| < 1e-10`.
pub fn steady_state(gen: &ExtendedGenerator) -> Result<CorrelationMatrix> {
    if !gen.is_static() {
        return Err(Error::NotStatic);
    }
    let basis = EigenBasis::new(&gen.w0())?;
    steady_state_with(gen, &basis)
}

pub(crate) fn steady_state_with(
    gen: &ExtendedGenerator,
    basis: &EigenBasis,
) -> Result<CorrelationMatrix> {
    let md = basis.min_denominator(C64::default());
    if md < UNDAMPED_TOL {
        return Err(Error::UndampedMode(md));
    }
    let f = gen.f_matrix();
    let mut c = solve_shifted(basis, &f, C64::default());
    linalg::hermitize(&mut c);
    let static_gen = gen.without_drive();
    let mut st = Stepper::new(&static_gen);
    let mut r = st.rhs(&c, 0.0);
    let mut res = linalg::max_abs(&r);
    for _ in 0..4 {
        if res < STEADY_RESIDUAL {
            break;
        }
        // W0 dC + dC W0^dag = dC/dt(C) drives the residual to zero
        let mut d = solve_shifted(basis, &r, C64::default());
        linalg::hermitize(&mut d);
        c += &d;
        r = st.rhs(&c, 0.0);
        res = linalg::max_abs(&r);
    }
    if res >= STEADY_RESIDUAL {
        return Err(Error::Residual(res));
    }
    Ok(CorrelationMatrix::new(c, gen.layout().clone()))
}
