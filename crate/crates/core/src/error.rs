use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate grid: energies {0} and {1} coincide")]
    DegenerateGrid(f64, f64),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("occupation matrix has eigenvalue {value:.6e} outside [0, 1]")]
    OccupationOutOfRange { value: f64 },

    #[error("generator is not diagonalizable within tolerance (condition estimate {0:.3e})")]
    NotDiagonalizable(f64),

    #[error("undamped mode: |lambda_i + conj(lambda_j)| = {0:.3e}")]
    UndampedMode(f64),

    #[error("steady state requires a static generator")]
    NotStatic,

    #[error("steady-state residual {0:.3e} above tolerance")]
    Residual(f64),

    #[error(
        "correlation matrix left the fermionic bounds at t = {t}: \
         eigenvalues span [{min:.3e}, {max:.3e}]"
    )]
    BoundsViolated { t: f64, min: f64, max: f64 },

    #[error("limit-cycle iteration did not converge after {sweeps} sweeps (last change {residual:.3e}, n_max {n_max})")]
    NotConverged {
        sweeps: usize,
        residual: f64,
        n_max: usize,
    },

    #[error("rectification coefficient undefined: |J - J~| = {0:.3e}")]
    DegenerateRectification(f64),

    #[error("chain tridiagonalization lost orthogonality ({0:.3e}); use a finer star grid")]
    LostOrthogonality(f64),

    #[error("linear algebra failure: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
