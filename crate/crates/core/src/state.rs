//! Two-qubit polarization states and the entanglement figures of merit used
//! to score a link.
//!
//! Basis ordering is `|HH>, |HV>, |VH>, |VV>` throughout; the first tensor
//! factor belongs to the first user of a link.

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use thiserror::Error;

/// Tolerance on hermiticity, trace and unit norm.
pub const STRUCTURE_TOL: f64 = 1e-12;
/// Eigenvalues above `-PSD_TOL` count as non-negative.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("matrix is not hermitian (max |M - M^dag| = {0:e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("matrix has negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("state vector has squared norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("matrix is not unitary (max |U U^dag - I| = {0:e})")]
    NotUnitary(f64),
    #[error("visibility {0} outside [0, 1]")]
    VisibilityOutOfRange(f64),
    #[error("channel flux {0} is negative or not finite")]
    BadFlux(f64),
    #[error("no channel carries flux")]
    NoFlux,
}

fn max_abs_entry(m: &Matrix4<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn hermitian_eigenvalues(m: &Matrix4<Complex64>) -> Vector4<f64> {
    SymmetricEigen::new(*m).eigenvalues
}

/// Unit-norm two-qubit state vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState4(Vector4<Complex64>);

impl PureState4 {
    pub fn new(amplitudes: [Complex64; 4]) -> Result<Self, StateError> {
        let v = Vector4::from(amplitudes);
        let norm_sq = v.norm_squared();
        if (norm_sq - 1.0).abs() > STRUCTURE_TOL {
            return Err(StateError::NotNormalized(norm_sq));
        }
        Ok(Self(v))
    }

    /// Builds a state from real amplitudes, normalizing them first.
    pub fn from_real_normalized(amplitudes: [f64; 4]) -> Result<Self, StateError> {
        let v = Vector4::from(amplitudes.map(|a| Complex64::new(a, 0.0)));
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(StateError::NotNormalized(n * n));
        }
        Ok(Self(v / Complex64::new(n, 0.0)))
    }

    pub fn amplitudes(&self) -> &Vector4<Complex64> {
        &self.0
    }

    /// `|psi><psi|`
    pub fn projector(&self) -> DensityMatrix4 {
        DensityMatrix4(self.0 * self.0.adjoint())
    }
}

/// The singlet `(|HV> - |VH>)/sqrt(2)`.
pub fn bell_psi_minus() -> PureState4 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    PureState4(Vector4::new(
        Complex64::new(0.0, 0.0),
        Complex64::new(h, 0.0),
        Complex64::new(-h, 0.0),
        Complex64::new(0.0, 0.0),
    ))
}

/// 4x4 unitary describing propagation of one channel pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary4(Matrix4<Complex64>);

impl Unitary4 {
    pub fn new(m: Matrix4<Complex64>) -> Result<Self, StateError> {
        let dev = max_abs_entry(&(m * m.adjoint() - Matrix4::identity()));
        if dev > STRUCTURE_TOL {
            return Err(StateError::NotUnitary(dev));
        }
        Ok(Self(m))
    }

    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }
}

impl Default for Unitary4 {
    fn default() -> Self {
        Self::identity()
    }
}

/// Biphoton state, propagation unitary and flux of a single channel pair.
#[derive(Debug, Clone, Copy)]
pub struct ChannelState {
    pub state: PureState4,
    pub unitary: Unitary4,
    /// Biphotons per second at the source.
    pub flux: f64,
}

impl ChannelState {
    pub fn new(state: PureState4, unitary: Unitary4, flux: f64) -> Result<Self, StateError> {
        if !flux.is_finite() || flux < 0.0 {
            return Err(StateError::BadFlux(flux));
        }
        Ok(Self {
            state,
            unitary,
            flux,
        })
    }
}

/// Two-qubit density matrix: hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix4(Matrix4<Complex64>);

impl DensityMatrix4 {
    /// Validates `m` against the density-matrix invariants.
    pub fn new(m: Matrix4<Complex64>) -> Result<Self, StateError> {
        let herm = max_abs_entry(&(m - m.adjoint()));
        if herm > STRUCTURE_TOL {
            return Err(StateError::NotHermitian(herm));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STRUCTURE_TOL || tr.im.abs() > STRUCTURE_TOL {
            return Err(StateError::BadTrace(tr.re));
        }
        let min_eig = hermitian_eigenvalues(&m).min();
        if min_eig < -PSD_TOL {
            return Err(StateError::NotPositive(min_eig));
        }
        Ok(Self(m))
    }

    pub fn maximally_mixed() -> Self {
        Self(Matrix4::identity() * Complex64::new(0.25, 0.0))
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    /// Convex combination `a * self + (1 - a) * other`.
    pub fn mix(&self, other: &Self, a: f64) -> Self {
        Self(self.0 * Complex64::new(a, 0.0) + other.0 * Complex64::new(1.0 - a, 0.0))
    }

    pub fn eigenvalues(&self) -> Vector4<f64> {
        hermitian_eigenvalues(&self.0)
    }
}

/// `lambda |psi><psi| + (1 - lambda) I/4`
pub fn werner_state(lambda: f64, target: &PureState4) -> Result<DensityMatrix4, StateError> {
    check_visibility(lambda)?;
    Ok(target
        .projector()
        .mix(&DensityMatrix4::maximally_mixed(), lambda))
}

fn check_visibility(lambda: f64) -> Result<(), StateError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(StateError::VisibilityOutOfRange(lambda));
    }
    Ok(())
}

/// Link state assembled from the flux-weighted channel states, each rotated by
/// its channel unitary, mixed with white background at visibility `lambda`.
pub fn link_state_general(
    channels: &[ChannelState],
    lambda: f64,
) -> Result<DensityMatrix4, StateError> {
    check_visibility(lambda)?;
    let total: f64 = channels.iter().map(|c| c.flux).sum();
    if channels.is_empty() || total <= 0.0 {
        return Err(StateError::NoFlux);
    }
    let mut signal = Matrix4::<Complex64>::zeros();
    for ch in channels {
        let u = ch.unitary.matrix();
        let rho = ch.state.projector();
        signal += (u * rho.matrix() * u.adjoint()) * Complex64::new(ch.flux / total, 0.0);
    }
    Ok(DensityMatrix4(signal).mix(&DensityMatrix4::maximally_mixed(), lambda))
}

/// `<psi|sigma|psi>`, clamped to `[0, 1]`.
pub fn fidelity(state: &DensityMatrix4, target: &PureState4) -> f64 {
    let psi = target.amplitudes();
    let overlap = (psi.adjoint() * state.matrix() * psi)[(0, 0)];
    overlap.re.clamp(0.0, 1.0)
}

/// Transpose over the first qubit: `(i1 i2, j1 j2) -> (j1 i2, i1 j2)`.
pub fn partial_transpose(state: &DensityMatrix4) -> Matrix4<Complex64> {
    partial_transpose_matrix(state.matrix())
}

pub(crate) fn partial_transpose_matrix(m: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    Matrix4::from_fn(|r, c| {
        let (a1, a2) = (r / 2, r % 2);
        let (b1, b2) = (c / 2, c % 2);
        m[(2 * b1 + a2, 2 * a1 + b2)]
    })
}

/// `log2 ||sigma^{T_A}||_1`, floored at zero.
///
/// With unit trace the trace norm is `1 + 2N`, `N` the magnitude of the
/// negative eigenvalues, so a positive partial transpose gives exactly 0.
pub fn log_negativity(state: &DensityMatrix4) -> f64 {
    let negativity: f64 = hermitian_eigenvalues(&partial_transpose(state))
        .iter()
        .filter(|&&e| e <= -PSD_TOL)
        .map(|e| -e)
        .sum();
    (1.0 + 2.0 * negativity).log2()
}
