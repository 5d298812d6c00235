//! Density matrices, reduced states, entropies, the operator Schmidt
//! (realignment) spectrum and the discrete Wigner transform.
//!
//! All entropies are natural-log. Separability entropies follow the
//! halved reporting convention of the runner: `wse_pure` returns the
//! entanglement entropy (half the Wigner separability entropy), and
//! `wse_from_wigner` halves the phase-space value to match.
//!
//! The discrete Wigner convention is the chord sum on the half-step
//! `2N x 2N` lattice,
//!
//! `W(a,b) = 1/(2N) sum_{j+k = a mod 2N} rho[j,k] exp(-i pi b (j-k)/N)`,
//!
//! without wrap-around chord corrections. Up to a constant it is an
//! isometry from Hilbert-Schmidt space onto the grid, so the
//! phase-space separability entropy coincides exactly with the
//! operator-space one in this discretization.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView2};
use ndarray_linalg::{EigValsh, JobSvd, SVDDCInto, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::quantum::{QuantumState, DENSE_TWO_MODE_LIMIT};

const HERMITICITY_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues below this magnitude are treated as exact zeros when
/// evaluating entropies; more negative values up to `-1e-8` are
/// attributed to round-off and clamped, anything worse is rejected.
const EIGENVALUE_CLAMP: f64 = 1e-10;
const EIGENVALUE_REJECT: f64 = -1e-8;

/// Hermitian unit-trace operator on one or two torus modes.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    mat: Array2<C64>,
    mode_dim: usize,
    modes: usize,
}

impl DensityMatrix {
    /// Validate Hermiticity and unit trace.
    pub fn new(mat: Array2<C64>, mode_dim: usize, modes: usize) -> Result<Self> {
        let size = mode_dim.pow(modes as u32);
        if mat.nrows() != size || mat.ncols() != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                found: mat.nrows().max(mat.ncols()),
            });
        }
        let mut herm = 0.0f64;
        for a in 0..size {
            for b in a..size {
                herm = herm.max((mat[[a, b]] - mat[[b, a]].conj()).norm());
            }
        }
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "Hermiticity defect {herm:.3e}"
            )));
        }
        let trace = mat.diag().sum();
        if (trace - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace = {trace}, expected 1"
            )));
        }
        Ok(Self {
            mat,
            mode_dim,
            modes,
        })
    }

    /// Projector `|psi><psi|` onto a pure state.
    pub fn from_pure(state: &QuantumState) -> Self {
        let amps = state.amplitudes();
        let n = amps.len();
        let mat = Array2::from_shape_fn((n, n), |(a, b)| amps[a] * amps[b].conj());
        Self {
            mat,
            mode_dim: state.dim(),
            modes: state.modes(),
        }
    }

    pub(crate) fn from_parts(mat: Array2<C64>, mode_dim: usize, modes: usize) -> Self {
        Self {
            mat,
            mode_dim,
            modes,
        }
    }

    pub fn matrix(&self) -> ArrayView2<'_, C64> {
        self.mat.view()
    }

    pub fn mode_dim(&self) -> usize {
        self.mode_dim
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn trace(&self) -> C64 {
        self.mat.diag().sum()
    }

    /// `Tr(rho^2)`, evaluated as the squared Hilbert-Schmidt norm.
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Array1<f64>> {
        Ok(self.mat.eigvalsh(UPLO::Lower)?)
    }
}

/// Partial trace of a pure two-mode state over the other subsystem.
pub fn reduced_density(state: &QuantumState, keep: usize) -> Result<DensityMatrix> {
    if state.modes() != 2 {
        return Err(Error::ModeMismatch {
            expected: 2,
            found: state.modes(),
        });
    }
    let psi = state.as_mode_matrix()?;
    let conj = psi.mapv(|z| z.conj());
    let mat = match keep {
        1 => psi.dot(&conj.t()),
        2 => psi.t().dot(&conj),
        other => {
            return Err(Error::ModeMismatch {
                expected: 1,
                found: other,
            })
        }
    };
    Ok(DensityMatrix::from_parts(mat, state.dim(), 1))
}

/// Von Neumann entropy `-sum lambda ln lambda` in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let trace = rho.trace();
    if (trace - C64::new(1.0, 0.0)).norm() > 1e-8 {
        return Err(Error::InvalidDensityMatrix(format!(
            "trace = {trace}, expected 1"
        )));
    }
    let eigenvalues = rho.eigenvalues()?;
    let mut entropy = 0.0;
    for &lambda in eigenvalues.iter() {
        if lambda < EIGENVALUE_REJECT {
            return Err(Error::InvalidDensityMatrix(format!(
                "eigenvalue {lambda:.3e} below -1e-8"
            )));
        }
        if lambda > EIGENVALUE_CLAMP {
            entropy -= lambda * lambda.ln();
        }
    }
    Ok(entropy)
}

/// Non-increasing singular values together with the Hilbert-Schmidt
/// norm they sum to.
#[derive(Clone, Debug)]
pub struct SchmidtSpectrum {
    sigmas: Vec<f64>,
    norm: f64,
}

impl SchmidtSpectrum {
    pub fn new(mut sigmas: Vec<f64>) -> Self {
        sigmas.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
        let norm = sigmas.iter().map(|s| s * s).sum::<f64>().sqrt();
        Self { sigmas, norm }
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }
}

/// Realign a two-mode operator: entry `rho[(j1 j2), (k1 k2)]` moves to
/// row `(j1, k1)`, column `(j2, k2)`.
pub(crate) fn realign(rho: &DensityMatrix) -> Result<Array2<C64>> {
    if rho.modes() != 2 {
        return Err(Error::ModeMismatch {
            expected: 2,
            found: rho.modes(),
        });
    }
    let n = rho.mode_dim();
    let mat = rho.matrix();
    let mut out = Array2::zeros((n * n, n * n));
    for j1 in 0..n {
        for k1 in 0..n {
            let row = j1 * n + k1;
            for j2 in 0..n {
                for k2 in 0..n {
                    out[[row, j2 * n + k2]] = mat[[j1 * n + j2, k1 * n + k2]];
                }
            }
        }
    }
    Ok(out)
}

/// Operator Schmidt spectrum of a two-mode density matrix: singular
/// values of the realigned matrix.
pub fn operator_schmidt_spectrum(rho: &DensityMatrix) -> Result<SchmidtSpectrum> {
    let realigned = realign(rho)?;
    let (_, sv, _) = realigned.svddc_into(JobSvd::None)?;
    Ok(SchmidtSpectrum::new(sv.to_vec()))
}

/// Shannon entropy of the normalized squared Schmidt coefficients,
/// `h = -sum s~_n^2 ln s~_n^2` with `s~_n = s_n / sqrt(sum s_m^2)`.
/// Invariant under uniform rescaling of the spectrum.
pub fn separability_entropy(spectrum: &SchmidtSpectrum) -> Result<f64> {
    let total: f64 = spectrum.sigmas().iter().map(|s| s * s).sum();
    if total <= 0.0 {
        return Err(Error::EmptySpectrum);
    }
    let mut entropy = 0.0;
    for s in spectrum.sigmas() {
        let w = (s * s) / total;
        if w > 0.0 {
            entropy -= w * w.ln();
        }
    }
    Ok(entropy)
}

/// Wigner separability entropy of a pure two-mode state, reported in
/// the halved convention: this equals the entanglement entropy
/// `S(Tr_2 |psi><psi|)`.
pub fn wse_pure(state: &QuantumState) -> Result<f64> {
    if state.modes() != 2 {
        return Err(Error::ModeMismatch {
            expected: 2,
            found: state.modes(),
        });
    }
    let norm = state.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized((norm - 1.0).abs()));
    }
    von_neumann_entropy(&reduced_density(state, 1)?)
}

/// Real-valued discrete Wigner function on the `2N x 2N` half-step
/// lattice; rows index position `q = a/(2N)`, columns momentum
/// `p = b/(2N)`.
#[derive(Clone, Debug)]
pub struct WignerGrid {
    values: Array2<f64>,
    mode_dim: usize,
}

impl WignerGrid {
    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn mode_dim(&self) -> usize {
        self.mode_dim
    }

    pub fn total(&self) -> f64 {
        self.values.sum()
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.values.iter().map(|w| w * w).sum()
    }

    /// Grid cell holding the largest value.
    pub fn max_cell(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut max = f64::NEG_INFINITY;
        for ((a, b), &w) in self.values.indexed_iter() {
            if w > max {
                max = w;
                best = (a, b);
            }
        }
        best
    }

    /// Marginal over momentum, one value per position row.
    pub fn position_marginal(&self) -> Array1<f64> {
        self.values.sum_axis(ndarray::Axis(1))
    }
}

/// Discrete Wigner transform of a single-mode density matrix.
///
/// Satisfies `sum W = Tr rho` and `2N sum W^2 = Tr rho^2`; the
/// imaginary residue is checked against 1e-12 before being discarded.
pub fn wigner_1dof(rho: &DensityMatrix) -> Result<WignerGrid> {
    if rho.modes() != 1 {
        return Err(Error::ModeMismatch {
            expected: 1,
            found: rho.modes(),
        });
    }
    let n = rho.mode_dim();
    let two_n = 2 * n;
    let mat = rho.matrix();
    let mut values = Array2::zeros((two_n, two_n));
    let mut residue = 0.0f64;
    for a in 0..two_n {
        // j + k = a with j, k in [0, N): the top anti-diagonal is empty.
        let j_lo = a.saturating_sub(n - 1);
        let j_hi = a.min(n - 1);
        if j_lo > j_hi {
            continue;
        }
        for b in 0..two_n {
            let mut z = C64::new(0.0, 0.0);
            for j in j_lo..=j_hi {
                let k = a - j;
                let chord = (2 * j) as f64 - a as f64; // j - k
                let phase = -PI * b as f64 * chord / n as f64;
                z += mat[[j, k]] * C64::from_polar(1.0, phase);
            }
            z /= two_n as f64;
            residue = residue.max(z.im.abs());
            values[[a, b]] = z.re;
        }
    }
    if residue >= 1e-12 {
        return Err(Error::WignerResidue(residue));
    }
    Ok(WignerGrid {
        values,
        mode_dim: n,
    })
}

/// Wigner separability entropy computed the long way, from the actual
/// two-mode phase-space array: the single-mode transform is applied to
/// each subsystem index pair of the realigned density matrix and the
/// singular values of the resulting `(2N)^2 x (2N)^2` grid are fed to
/// the separability entropy (halved convention). Restricted to
/// `N <= 8`; the production path is `wse_pure`.
pub fn wse_from_wigner(state: &QuantumState) -> Result<f64> {
    if state.modes() != 2 {
        return Err(Error::ModeMismatch {
            expected: 2,
            found: state.modes(),
        });
    }
    let n = state.dim();
    if n > DENSE_TWO_MODE_LIMIT {
        return Err(Error::DenseTooLarge {
            dim: n,
            limit: DENSE_TWO_MODE_LIMIT,
        });
    }
    let rho = DensityMatrix::from_pure(state);
    let realigned = realign(&rho)?;
    let transform = wigner_matrix(n);
    let w = transform.dot(&realigned).dot(&transform.t());

    let mut residue = 0.0f64;
    for z in w.iter() {
        residue = residue.max(z.im.abs());
    }
    if residue >= 1e-12 {
        return Err(Error::WignerResidue(residue));
    }
    let w_real = w.mapv(|z| z.re);
    let (_, sv, _) = w_real.svddc_into(JobSvd::None)?;
    let spectrum = SchmidtSpectrum::new(sv.to_vec());
    Ok(separability_entropy(&spectrum)? / 2.0)
}

/// Matrix of the single-mode Wigner transform, mapping vectorized
/// `N x N` operators (row `(j, k)`) to vectorized `2N x 2N` grids
/// (row `(a, b)`).
fn wigner_matrix(n: usize) -> Array2<C64> {
    let two_n = 2 * n;
    let mut t = Array2::zeros((two_n * two_n, n * n));
    for a in 0..two_n {
        for b in 0..two_n {
            let row = a * two_n + b;
            for j in 0..n {
                for k in 0..n {
                    if j + k != a {
                        continue;
                    }
                    let chord = j as f64 - k as f64;
                    let phase = -PI * b as f64 * chord / n as f64;
                    t[[row, j * n + k]] =
                        C64::from_polar(1.0 / two_n as f64, phase);
                }
            }
        }
    }
    t
}
