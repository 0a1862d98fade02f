//! Periodic limit cycle `C(t) = sum_n C_n e^{i n w t}` of a driven generator.
//!
//! Inserting the expansion into the Lyapunov equation with
//! `W(t) = W0 + W1 h(w t)` and `h(x) = w+ e^{ix} + w- e^{-ix}` gives
//!
//! ```text
//! i n w C_n + W0 C_n + C_n W0^dag = delta_n0 F - W1 B_n - B_n W1^dag,
//! B_n = w+ C_{n-1} + w- C_{n+1}
//! ```
//!
//! In the eigenbasis of `W0` the left side is diagonal, so each harmonic is
//! updated element-wise. The harmonics are swept Gauss-Seidel style,
//! `n = 0, 1, 2, ...`, with `C_{-n} = C_n^dag` implied. `W1` is diagonal on
//! the driven sites, so its transform is a sum of rank-one terms.

use ndarray::{Array1, Array2, Zip};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, EigenBasis, C64, I};
use crate::lyapunov::{self, UNDAMPED_TOL};
use crate::model::{BlockLayout, CorrelationMatrix, ExtendedGenerator};

#[derive(Debug, Clone, PartialEq)]
pub struct FloquetOptions {
    pub tol: f64,
    pub max_sweeps: usize,
    /// Initial truncation; doubled while the tail harmonic exceeds `tol`.
    pub n_max: usize,
    pub n_max_limit: usize,
}

impl Default for FloquetOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_sweeps: 10_000,
            n_max: 8,
            n_max_limit: 256,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FloquetSolution {
    /// `C_n` for `n = 0..=n_max`; negative harmonics are adjoints.
    pub harmonics: Vec<Array2<C64>>,
    pub frequency: f64,
    pub n_max: usize,
    /// Largest harmonic-balance residual in the original basis.
    pub residual: f64,
    pub sweeps: usize,
    pub layout: BlockLayout,
}

/// Rank-one pieces `i a_j u_j v_j^T` of the transformed drive, with `u_j`
/// column `j` of `S^-1` and `v_j^T` row `j` of `S`.
struct LowRankDrive {
    terms: Vec<(C64, Array1<C64>, Array1<C64>)>,
}

impl LowRankDrive {
    fn new(gen: &ExtendedGenerator, basis: &EigenBasis) -> Self {
        let terms = gen
            .drive()
            .iter()
            .map(|&(j, a)| {
                (
                    I * a,
                    basis.inverse.column(j).to_owned(),
                    basis.vectors.row(j).to_owned(),
                )
            })
            .collect();
        Self { terms }
    }

    /// `out -= W1~ B + B W1~^dag`.
    fn subtract_commutator(&self, b: &Array2<C64>, out: &mut Array2<C64>) {
        for (c, u, v) in &self.terms {
            // W1~ B = c u (v^T B)
            let r = v.dot(b);
            // B W1~^dag = conj(c) (B conj(v)) u^dag
            let q = b.dot(&v.mapv(|x| x.conj()));
            let cc = c.conj();
            Zip::indexed(&mut *out).for_each(|(i, j), o| {
                *o -= c * u[i] * r[j] + cc * q[i] * u[j].conj();
            });
        }
    }
}

/// `W0 X + X W0^dag` for a general (non-Hermitian) `X`.
fn apply_lyapunov(gen: &ExtendedGenerator, x: &Array2<C64>) -> Array2<C64> {
    let n = x.nrows();
    let h = gen.hamiltonian();
    let mut hx = Array2::zeros((n, n));
    h.mul_dense_into(&x.as_standard_layout().to_owned(), &mut hx);
    let xd = linalg::adjoint(x).as_standard_layout().to_owned();
    let mut hxd = Array2::zeros((n, n));
    h.mul_dense_into(&xd, &mut hxd);
    // X H = (H X^dag)^dag
    let u = gen.damping();
    Array2::from_shape_fn((n, n), |(i, j)| {
        I * (hx[[i, j]] - hxd[[j, i]].conj()) + 0.5 * (u[i] + u[j]) * x[[i, j]]
    })
}

/// `W1 X + X W1^dag`.
fn apply_drive(gen: &ExtendedGenerator, x: &Array2<C64>) -> Array2<C64> {
    let mut out = Array2::zeros(x.raw_dim());
    for &(j, a) in gen.drive() {
        let mut row = out.row_mut(j);
        row.zip_mut_with(&x.row(j), |o, v| *o += I * a * v);
        let mut col = out.column_mut(j);
        col.zip_mut_with(&x.column(j), |o, v| *o -= I * a * v);
    }
    out
}

pub fn solve_limit_cycle(gen: &ExtendedGenerator, opts: &FloquetOptions) -> Result<FloquetSolution> {
    if !(opts.tol > 0.0) || opts.n_max == 0 || opts.max_sweeps == 0 {
        return Err(invalid("floquet", "tol, n_max and max_sweeps must be positive"));
    }
    let basis = EigenBasis::new(&gen.w0())?;
    if gen.is_static() {
        let c = lyapunov::steady_state_with(gen, &basis)?;
        let residual = linalg::max_abs(&lyapunov::derivative(gen, &c, 0.0));
        return Ok(FloquetSolution {
            harmonics: vec![c.matrix],
            frequency: gen.frequency(),
            n_max: 0,
            residual,
            sweeps: 0,
            layout: gen.layout().clone(),
        });
    }
    let md = basis.min_denominator(C64::default());
    if md < UNDAMPED_TOL {
        return Err(Error::UndampedMode(md));
    }

    let omega = gen.frequency();
    let (wp, wm) = gen.harmonic().fourier_weights();
    let drive = LowRankDrive::new(gen, &basis);
    let f_tilde = basis.to_eigen(&gen.f_matrix());
    let dim = gen.dim();

    let mut n_max = opts.n_max;
    let mut tilde: Vec<Array2<C64>> = vec![Array2::zeros((dim, dim)); n_max + 2];
    let mut sweep_tol = opts.tol;
    let mut sweeps = 0usize;
    let mut active = 0usize;
    let mut last_change = f64::INFINITY;
    let mut b = Array2::<C64>::zeros((dim, dim));

    loop {
        // Gauss-Seidel sweeps on the current window
        let mut converged = false;
        while sweeps < opts.max_sweeps {
            sweeps += 1;
            let mut change: f64 = 0.0;
            for n in 0..=active {
                let prev = if n == 0 {
                    linalg::adjoint(&tilde[1])
                } else {
                    tilde[n - 1].clone()
                };
                Zip::from(&mut b)
                    .and(&prev)
                    .and(&tilde[n + 1])
                    .for_each(|b, p, q| *b = wp * p + wm * q);
                let mut rhs = if n == 0 {
                    f_tilde.clone()
                } else {
                    Array2::zeros((dim, dim))
                };
                drive.subtract_commutator(&b, &mut rhs);
                basis.divide_in_place(&mut rhs, I * (n as f64 * omega));
                if n == 0 {
                    linalg::hermitize(&mut rhs);
                }
                change = change.max(linalg::max_abs_diff(&rhs, &tilde[n]));
                tilde[n] = rhs;
            }
            last_change = change;
            if active < n_max {
                active += 1;
            } else if change < sweep_tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NotConverged {
                sweeps,
                residual: last_change,
                n_max,
            });
        }

        let harmonics: Vec<Array2<C64>> = tilde[..=n_max]
            .iter()
            .map(|x| basis.from_eigen(x))
            .collect();
        let tail = linalg::max_abs(&harmonics[n_max]);
        if tail >= opts.tol {
            if 2 * n_max > opts.n_max_limit {
                return Err(Error::NotConverged {
                    sweeps,
                    residual: tail,
                    n_max,
                });
            }
            n_max *= 2;
            tilde.resize(n_max + 2, Array2::zeros((dim, dim)));
            continue;
        }

        let mut sol = FloquetSolution {
            harmonics,
            frequency: omega,
            n_max,
            residual: 0.0,
            sweeps,
            layout: gen.layout().clone(),
        };
        linalg::hermitize(&mut sol.harmonics[0]);
        sol.residual = harmonic_residual(gen, &sol);
        if sol.residual < 10.0 * opts.tol {
            return Ok(sol);
        }
        // the eigenbasis amplifies errors; tighten the sweep criterion
        if sweep_tol < opts.tol * 1e-4 {
            return Err(Error::NotConverged {
                sweeps,
                residual: sol.residual,
                n_max,
            });
        }
        sweep_tol *= 0.1;
    }
}

/// Largest harmonic-balance residual over `n = 0..=n_max`, evaluated in the
/// original basis with `C_{n_max+1} = 0`.
pub fn harmonic_residual(gen: &ExtendedGenerator, sol: &FloquetSolution) -> f64 {
    let (wp, wm) = gen.harmonic().fourier_weights();
    let dim = gen.dim();
    let zero = Array2::<C64>::zeros((dim, dim));
    let mut worst: f64 = 0.0;
    for n in 0..=sol.n_max {
        let prev = sol.harmonic(n as i64 - 1);
        let next = if n < sol.n_max {
            sol.harmonics[n + 1].clone()
        } else {
            zero.clone()
        };
        let b = &prev * wp + &next * wm;
        let cn = &sol.harmonics[n];
        let mut r = apply_lyapunov(gen, cn) + apply_drive(gen, &b);
        r.zip_mut_with(cn, |r, c| *r += I * (n as f64 * sol.frequency) * c);
        if n == 0 {
            for (i, f) in gen.injection().iter().enumerate() {
                r[[i, i]] -= f;
            }
        }
        worst = worst.max(linalg::max_abs(&r));
    }
    worst
}

impl FloquetSolution {
    pub fn period(&self) -> f64 {
        if self.frequency > 0.0 {
            std::f64::consts::TAU / self.frequency
        } else {
            f64::INFINITY
        }
    }

    /// `C_n`, with `C_{-n} = C_n^dag` and zero beyond the truncation.
    pub fn harmonic(&self, n: i64) -> Array2<C64> {
        let k = n.unsigned_abs() as usize;
        if k > self.n_max {
            let d = self.harmonics[0].nrows();
            return Array2::zeros((d, d));
        }
        if n >= 0 {
            self.harmonics[k].clone()
        } else {
            linalg::adjoint(&self.harmonics[k])
        }
    }

    /// `max |C_n|` for `n = 0..=n_max`.
    pub fn harmonic_norms(&self) -> Vec<(usize, f64)> {
        self.harmonics
            .iter()
            .enumerate()
            .map(|(n, c)| (n, linalg::max_abs(c)))
            .collect()
    }

    fn series(&self, t: f64, weight: impl Fn(usize) -> C64) -> Array2<C64> {
        let mut out = self.harmonics[0].mapv(|x| x * weight(0));
        for n in 1..=self.n_max {
            let ph = C64::from_polar(1.0, n as f64 * self.frequency * t) * weight(n);
            let cn = &self.harmonics[n];
            Zip::indexed(&mut out).for_each(|(i, j), o| {
                *o += ph * cn[[i, j]] + (ph * cn[[j, i]]).conj();
            });
        }
        out
    }

    /// `C(t)`.
    pub fn reconstruct(&self, t: f64) -> CorrelationMatrix {
        let mut c = self.series(t, |_| C64::new(1.0, 0.0));
        linalg::hermitize(&mut c);
        CorrelationMatrix::new(c, self.layout.clone())
    }

    /// `dC/dt = sum_n i n w C_n e^{i n w t}`.
    pub fn derivative(&self, t: f64) -> Array2<C64> {
        let w = self.frequency;
        let mut d = self.series(t, |n| I * (n as f64 * w));
        linalg::hermitize(&mut d);
        d
    }

    /// Number of uniform samples used by [`FloquetSolution::cycle_average`].
    pub fn default_samples(&self) -> usize {
        (64 * self.n_max).max(64)
    }

    /// Uniform sample times over one period.
    pub fn sample_times(&self, samples: usize) -> Vec<f64> {
        let p = self.period();
        (0..samples).map(|k| p * k as f64 / samples as f64).collect()
    }

    /// Period average of `observable(t, C, dC/dt)` with the periodic
    /// trapezoid rule on `max(samples, 64 n_max)` points. Static solutions
    /// are evaluated once.
    pub fn cycle_average<F>(&self, samples: usize, mut observable: F) -> f64
    where
        F: FnMut(f64, &CorrelationMatrix, &Array2<C64>) -> f64,
    {
        if self.n_max == 0 || self.frequency == 0.0 {
            let c = self.reconstruct(0.0);
            let d = Array2::zeros(c.matrix.raw_dim());
            return observable(0.0, &c, &d);
        }
        let m = samples.max(self.default_samples());
        let total: f64 = self
            .sample_times(m)
            .into_iter()
            .map(|t| observable(t, &self.reconstruct(t), &self.derivative(t)))
            .sum();
        total / m as f64
    }

    /// The period mean `C_0`.
    pub fn mean(&self) -> CorrelationMatrix {
        CorrelationMatrix::new(self.harmonics[0].clone(), self.layout.clone())
    }
}
