//! Seeded random states and operators, used by the self-test harness
//! and the test suites.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::phase_space::DensityMatrix;
use crate::quantum::QuantumState;
use crate::torus::TorusHilbert;

/// Haar-like random pure state: i.i.d. complex Gaussian amplitudes,
/// normalized.
pub fn random_pure_state<R: Rng>(space: &TorusHilbert, modes: usize, rng: &mut R) -> QuantumState {
    let len = space.dim().pow(modes as u32);
    let amps = Array1::from_shape_fn(len, |_| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    QuantumState::from_unnormalized(amps, space, modes)
        .expect("Gaussian amplitudes are almost surely nonzero")
}

/// Random full-rank mixed state `A A^dag / Tr(A A^dag)`.
pub fn random_density<R: Rng>(space: &TorusHilbert, modes: usize, rng: &mut R) -> DensityMatrix {
    let n = space.dim().pow(modes as u32);
    let a = Array2::from_shape_fn((n, n), |_| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let mut mat = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut z = C64::new(0.0, 0.0);
            for k in 0..n {
                z += a[[i, k]] * a[[j, k]].conj();
            }
            mat[[i, j]] = z;
        }
    }
    let trace: C64 = mat.diag().sum();
    let mat = mat.mapv(|z| z / trace.re);
    DensityMatrix::new(mat, space.dim(), modes).expect("Gram construction is a density matrix")
}
