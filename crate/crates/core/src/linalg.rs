//! Small dense/sparse helpers shared by the solvers.

use ndarray::{Array1, Array2, ArrayView2, ShapeBuilder, Zip};
use ndarray_linalg::{Eig, EigValsh, Eigh, Inverse, UPLO};
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Largest condition estimate accepted for an eigenvector basis.
pub const MAX_BASIS_CONDITION: f64 = 1e12;

/// Row-compressed Hermitian matrix, stored in full (both triangles).
#[derive(Debug, Clone)]
pub struct SparseHermitian {
    rows: Vec<Vec<(usize, C64)>>,
}

impl SparseHermitian {
    pub fn zeros(dim: usize) -> Self {
        Self {
            rows: vec![Vec::new(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn add_entry(&mut self, i: usize, j: usize, v: C64) {
        let row = &mut self.rows[i];
        match row.iter_mut().find(|(c, _)| *c == j) {
            Some((_, x)) => *x += v,
            None => {
                row.push((j, v));
                row.sort_by_key(|(c, _)| *c);
            }
        }
    }

    /// Adds `v` at `(i, j)` and `conj(v)` at `(j, i)`. Diagonal entries keep
    /// only the real part.
    pub fn add_hermitian(&mut self, i: usize, j: usize, v: C64) {
        if i == j {
            self.add_entry(i, i, C64::new(v.re, 0.0));
        } else {
            self.add_entry(i, j, v);
            self.add_entry(j, i, v.conj());
        }
    }

    pub fn row(&self, i: usize) -> &[(usize, C64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.rows[i]
            .iter()
            .find(|(c, _)| *c == j)
            .map(|(_, v)| *v)
            .unwrap_or_default()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `out = self * c` for a row-major dense `c`.
    pub fn mul_dense_into(&self, c: &Array2<C64>, out: &mut Array2<C64>) {
        let n = c.ncols();
        let cs = c.as_slice().expect("standard layout");
        let os = out.as_slice_mut().expect("standard layout");
        os.fill(C64::default());
        for (i, row) in self.rows.iter().enumerate() {
            let orow = &mut os[i * n..(i + 1) * n];
            for &(j, h) in row {
                let crow = &cs[j * n..(j + 1) * n];
                for (o, x) in orow.iter_mut().zip(crow) {
                    *o += h * x;
                }
            }
        }
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let n = self.dim();
        let mut m = Array2::zeros((n, n));
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[[i, j]] = v;
            }
        }
        m
    }
}

pub fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|x| x.conj())
}

/// Replaces `a` with `(a + a^dag) / 2`.
pub fn hermitize(a: &mut Array2<C64>) {
    let n = a.nrows();
    for i in 0..n {
        a[[i, i]].im = 0.0;
        for j in (i + 1)..n {
            let m = 0.5 * (a[[i, j]] + a[[j, i]].conj());
            a[[i, j]] = m;
            a[[j, i]] = m.conj();
        }
    }
}

pub fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.norm()))
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    Zip::from(a)
        .and(b)
        .fold(0.0, |m: f64, x, y| m.max((x - y).norm()))
}

/// `max |a - a^dag|`.
pub fn hermiticity_error(a: &Array2<C64>) -> f64 {
    let n = a.nrows();
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            err = err.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    err
}

pub fn eigvalsh(a: &Array2<C64>) -> Result<Array1<f64>> {
    Ok(a.eigvalsh(UPLO::Upper)?)
}

/// Eigenpairs of a Hermitian matrix, `a = V diag(w) V^dag`.
pub fn eigh(a: ArrayView2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    // LAPACK sees a row-major buffer as the transpose, i.e. conj(a) for a
    // Hermitian input; hand it a column-major copy instead
    let mut f = Array2::zeros(a.raw_dim().f());
    f.assign(&a);
    Ok(f.eigh(UPLO::Upper)?)
}

fn norm_inf(a: &Array2<C64>) -> f64 {
    a.rows()
        .into_iter()
        .map(|r| r.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Eigendecomposition `W = S diag(lambda) S^-1` of a (generally non-normal)
/// matrix, used to solve `(shift + W) X + X W^dag = R` element-wise.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub values: Array1<C64>,
    pub vectors: Array2<C64>,
    pub inverse: Array2<C64>,
    pub condition: f64,
}

impl EigenBasis {
    pub fn new(w: &Array2<C64>) -> Result<Self> {
        let (values, vectors) = w.eig()?;
        let inverse = vectors
            .inv()
            .map_err(|_| Error::NotDiagonalizable(f64::INFINITY))?;
        let condition = norm_inf(&vectors) * norm_inf(&inverse);
        if !condition.is_finite() || condition > MAX_BASIS_CONDITION {
            return Err(Error::NotDiagonalizable(condition));
        }
        Ok(Self {
            values,
            vectors,
            inverse,
            condition,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `S^-1 x S^-dag`.
    pub fn to_eigen(&self, x: &Array2<C64>) -> Array2<C64> {
        self.inverse.dot(x).dot(&adjoint(&self.inverse))
    }

    /// `S x S^dag`.
    pub fn from_eigen(&self, x: &Array2<C64>) -> Array2<C64> {
        self.vectors.dot(x).dot(&adjoint(&self.vectors))
    }

    /// Smallest `|shift + lambda_i + conj(lambda_j)|` over all pairs.
    pub fn min_denominator(&self, shift: C64) -> f64 {
        let mut m = f64::INFINITY;
        for li in self.values.iter() {
            for lj in self.values.iter() {
                m = m.min((shift + li + lj.conj()).norm());
            }
        }
        m
    }

    /// Element-wise `x_ij /= shift + lambda_i + conj(lambda_j)`.
    pub fn divide_in_place(&self, x: &mut Array2<C64>, shift: C64) {
        let n = self.dim();
        let vals = self.values.as_slice().expect("contiguous");
        let xs = x.as_slice_mut().expect("standard layout");
        for i in 0..n {
            let a = shift + vals[i];
            for j in 0..n {
                xs[i * n + j] /= a + vals[j].conj();
            }
        }
    }
}
