//! Quantum states on the torus lattice and the kicked cat-map
//! propagators, in one- and two-mode form.
//!
//! Two-mode objects use the flat index `j = j1 * N + j2`: the first
//! mode is the slow index. The two-mode propagator is kept factored as
//! `diag(C) (U1 (x) U2)` and applied through reshaped matrix products,
//! so one step costs `O(N^3)` instead of `O(N^4)`.

use std::f64::consts::{PI, TAU};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::torus::{wrap, SymplecticMap, TorusHilbert};

/// Largest single-mode dimension for which the two-mode propagator may
/// be materialized densely (test oracle only).
pub const DENSE_TWO_MODE_LIMIT: usize = 8;

const NORM_TOL: f64 = 1e-12;

/// Normalized state vector on the torus lattice, one or two modes.
#[derive(Clone, Debug)]
pub struct QuantumState {
    amps: Array1<C64>,
    dim: usize,
    modes: usize,
}

impl QuantumState {
    /// Wrap an already normalized amplitude vector.
    pub fn new(amps: Array1<C64>, space: &TorusHilbert, modes: usize) -> Result<Self> {
        let expected = space.dim().pow(modes as u32);
        if amps.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: amps.len(),
            });
        }
        let norm = vec_norm(&amps);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized((norm - 1.0).abs()));
        }
        Ok(Self {
            amps,
            dim: space.dim(),
            modes,
        })
    }

    /// Normalize an arbitrary amplitude vector.
    pub fn from_unnormalized(amps: Array1<C64>, space: &TorusHilbert, modes: usize) -> Result<Self> {
        let expected = space.dim().pow(modes as u32);
        if amps.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: amps.len(),
            });
        }
        let norm = vec_norm(&amps);
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        let scale = C64::new(1.0 / norm, 0.0);
        Ok(Self {
            amps: amps * scale,
            dim: space.dim(),
            modes,
        })
    }

    /// Single-mode position eigenstate `|j>`.
    pub fn position_state(space: &TorusHilbert, j: usize) -> Result<Self> {
        if j >= space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: j,
            });
        }
        let mut amps = Array1::zeros(space.dim());
        amps[j] = C64::new(1.0, 0.0);
        Ok(Self {
            amps,
            dim: space.dim(),
            modes: 1,
        })
    }

    /// Two-mode product state `a (x) b`.
    pub fn product(a: &QuantumState, b: &QuantumState) -> Result<Self> {
        if a.modes != 1 || b.modes != 1 {
            return Err(Error::ModeMismatch {
                expected: 1,
                found: a.modes.max(b.modes),
            });
        }
        if a.dim != b.dim {
            return Err(Error::DimensionMismatch {
                expected: a.dim,
                found: b.dim,
            });
        }
        let n = a.dim;
        let amps = Array1::from_shape_fn(n * n, |i| a.amps[i / n] * b.amps[i % n]);
        Ok(Self {
            amps,
            dim: n,
            modes: 2,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn amplitudes(&self) -> ArrayView1<'_, C64> {
        self.amps.view()
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.amps)
    }

    pub fn overlap(&self, other: &QuantumState) -> Result<C64> {
        if self.amps.len() != other.amps.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amps.len(),
                found: other.amps.len(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Two-mode amplitudes reshaped to an `N x N` matrix, first mode on
    /// the rows.
    pub fn as_mode_matrix(&self) -> Result<ArrayView2<'_, C64>> {
        if self.modes != 2 {
            return Err(Error::ModeMismatch {
                expected: 2,
                found: self.modes,
            });
        }
        Ok(self
            .amps
            .view()
            .into_shape_with_order((self.dim, self.dim))
            .expect("two-mode amplitudes are contiguous"))
    }

    /// Position probability distribution.
    pub fn position_distribution(&self) -> Array1<f64> {
        self.amps.mapv(|a| a.norm_sqr())
    }

    pub(crate) fn from_parts(amps: Array1<C64>, dim: usize, modes: usize) -> Self {
        Self { amps, dim, modes }
    }
}

fn vec_norm(v: &Array1<C64>) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Coherent state centered at `(q0, p0)`: a periodized Gaussian over
/// winding numbers `|w| <= 2` (the neglected tail is below
/// `exp(-4 pi N)`), normalized afterwards.
pub fn coherent_state(q0: f64, p0: f64, space: &TorusHilbert) -> QuantumState {
    let n = space.dim();
    let nf = n as f64;
    let q0 = wrap(q0);
    let p0 = wrap(p0);
    let mut amps = Array1::zeros(n);
    for j in 0..n {
        let mut z = C64::new(0.0, 0.0);
        for w in -2i32..=2 {
            let x = j as f64 / nf - q0 - w as f64;
            let mag = (-PI * nf * x * x).exp();
            let phase = TAU * nf * p0 * x;
            z += C64::from_polar(mag, phase);
        }
        amps[j] = z;
    }
    QuantumState::from_unnormalized(amps, space, 1)
        .expect("periodized Gaussian has positive norm")
}

/// One- or two-mode unitary propagator. The two-mode form stays
/// factored; a dense two-mode matrix exists only as a small-N oracle.
#[derive(Clone, Debug)]
pub enum UnitaryPropagator {
    Dense {
        matrix: Array2<C64>,
        dim: usize,
    },
    Factored {
        u1: Array2<C64>,
        u2: Array2<C64>,
        coupling: Array1<C64>,
        dim: usize,
    },
}

impl UnitaryPropagator {
    /// Position-representation propagator of a kicked cat map,
    ///
    /// `U[j,k] = A exp[i pi (m11 j^2 - 2 j k + m22 k^2) / (N m12)] exp[F(j)]`
    ///
    /// with `A = [1/(i N m12)]^(1/2)` (principal branch) and
    /// `F(j) = i K N/(2 pi) cos(2 pi j / N)`. The quadratic form is
    /// reduced modulo `2 N m12` in exact integer arithmetic before the
    /// angle is evaluated.
    pub fn cat_map(map: &SymplecticMap, space: &TorusHilbert) -> Result<Self> {
        if map.determinant() != 1 {
            return Err(Error::NotAreaPreserving(map.determinant()));
        }
        if map.m12 == 0 {
            return Err(Error::SingularPropagator);
        }
        let n = space.dim();
        let ni = n as i64;
        let denom = ni * map.m12;
        let amplitude = C64::new(0.0, -1.0 / denom as f64).sqrt();
        let period = 2 * denom.abs();
        let kick_scale = map.kick * n as f64 / TAU;

        let mut matrix = Array2::zeros((n, n));
        for j in 0..n {
            let ji = j as i64;
            let fj = kick_scale * (TAU * j as f64 / n as f64).cos();
            for k in 0..n {
                let ki = k as i64;
                let quad = (map.m11 * ji * ji - 2 * ji * ki + map.m22 * ki * ki)
                    .rem_euclid(period);
                let angle = PI * quad as f64 / denom as f64 + fj;
                matrix[[j, k]] = amplitude * C64::from_polar(1.0, angle);
            }
        }
        Ok(Self::Dense { matrix, dim: n })
    }

    /// Combine two single-mode propagators and a coupling diagonal into
    /// the factored two-mode propagator `diag(C) (U1 (x) U2)`.
    pub fn coupled(
        u1: UnitaryPropagator,
        u2: UnitaryPropagator,
        coupling: Array1<C64>,
    ) -> Result<Self> {
        let (m1, d1) = u1.into_dense_parts()?;
        let (m2, d2) = u2.into_dense_parts()?;
        if d1 != d2 {
            return Err(Error::DimensionMismatch {
                expected: d1,
                found: d2,
            });
        }
        if coupling.len() != d1 * d1 {
            return Err(Error::DimensionMismatch {
                expected: d1 * d1,
                found: coupling.len(),
            });
        }
        Ok(Self::Factored {
            u1: m1,
            u2: m2,
            coupling,
            dim: d1,
        })
    }

    fn into_dense_parts(self) -> Result<(Array2<C64>, usize)> {
        match self {
            Self::Dense { matrix, dim } => Ok((matrix, dim)),
            Self::Factored { .. } => Err(Error::ModeMismatch {
                expected: 1,
                found: 2,
            }),
        }
    }

    /// Single-mode dimension `N`.
    pub fn dim(&self) -> usize {
        match self {
            Self::Dense { dim, .. } | Self::Factored { dim, .. } => *dim,
        }
    }

    pub fn modes(&self) -> usize {
        match self {
            Self::Dense { .. } => 1,
            Self::Factored { .. } => 2,
        }
    }

    /// Apply one step.
    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        if state.dim() != self.dim() || state.modes() != self.modes() {
            return Err(Error::DimensionMismatch {
                expected: self.dim().pow(self.modes() as u32),
                found: state.amplitudes().len(),
            });
        }
        match self {
            Self::Dense { matrix, dim } => {
                let amps = matrix.dot(&state.amplitudes());
                Ok(QuantumState::from_parts(amps, *dim, 1))
            }
            Self::Factored {
                u1,
                u2,
                coupling,
                dim,
            } => {
                let psi = state.as_mode_matrix()?;
                // (U1 (x) U2) psi = U1 . Psi . U2^T on the reshaped state.
                let rotated = u1.dot(&psi).dot(&u2.t());
                let mut amps = Array1::from_iter(rotated.into_iter());
                amps.zip_mut_with(coupling, |a, c| *a *= c);
                Ok(QuantumState::from_parts(amps, *dim, 2))
            }
        }
    }

    /// Apply `steps` iterations of the map.
    pub fn evolve(&self, state: &QuantumState, steps: usize) -> Result<QuantumState> {
        let mut current = state.clone();
        for _ in 0..steps {
            current = self.apply(&current)?;
        }
        Ok(current)
    }

    /// Materialize the full matrix. For the factored form this is the
    /// `N^2 x N^2` matrix `diag(C) (U1 (x) U2)` and is restricted to
    /// `N <= DENSE_TWO_MODE_LIMIT`.
    pub fn to_dense(&self) -> Result<Array2<C64>> {
        match self {
            Self::Dense { matrix, .. } => Ok(matrix.clone()),
            Self::Factored {
                u1,
                u2,
                coupling,
                dim,
            } => {
                let n = *dim;
                if n > DENSE_TWO_MODE_LIMIT {
                    return Err(Error::DenseTooLarge {
                        dim: n,
                        limit: DENSE_TWO_MODE_LIMIT,
                    });
                }
                let mut out = Array2::zeros((n * n, n * n));
                for j1 in 0..n {
                    for j2 in 0..n {
                        let c = coupling[j1 * n + j2];
                        for k1 in 0..n {
                            for k2 in 0..n {
                                out[[j1 * n + j2, k1 * n + k2]] =
                                    c * u1[[j1, k1]] * u2[[j2, k2]];
                            }
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// Max-norm unitarity defect `max |U^dag U - I|`. The factored form
    /// reports the worst defect among its factors (the coupling entries
    /// are checked for unit modulus).
    pub fn unitarity_defect(&self) -> f64 {
        match self {
            Self::Dense { matrix, .. } => dense_unitarity_defect(matrix),
            Self::Factored {
                u1, u2, coupling, ..
            } => {
                let d1 = dense_unitarity_defect(u1);
                let d2 = dense_unitarity_defect(u2);
                let dc = coupling
                    .iter()
                    .map(|c| (c.norm() - 1.0).abs())
                    .fold(0.0f64, f64::max);
                d1.max(d2).max(dc)
            }
        }
    }
}

fn dense_unitarity_defect(u: &Array2<C64>) -> f64 {
    let n = u.nrows();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            let mut entry = C64::new(0.0, 0.0);
            for k in 0..n {
                entry += u[[k, a]].conj() * u[[k, b]];
            }
            if a == b {
                entry -= 1.0;
            }
            worst = worst.max(entry.norm());
        }
    }
    worst
}

/// Diagonal of the position-position coupling,
/// `C[j1 * N + j2] = exp{ i N Kc/(2 pi) cos[2 pi (j1 + j2) / N] }`.
pub fn coupling_diagonal(kc: f64, space: &TorusHilbert) -> Array1<C64> {
    let n = space.dim();
    let scale = n as f64 * kc / TAU;
    // Reducing the index sum mod N keeps the cosine argument small and
    // makes equal-sum entries bitwise identical.
    Array1::from_shape_fn(n * n, |i| {
        let sum = ((i / n + i % n) % n) as f64;
        C64::from_polar(1.0, scale * (TAU * sum / n as f64).cos())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn space(n: usize) -> TorusHilbert {
        TorusHilbert::new(n).unwrap()
    }

    #[test]
    fn elliptic_unkicked_propagator_is_a_fourier_matrix() {
        // m11 = m22 = 0, m12 = 1 and K = 0 reduce the propagator to
        // (1/sqrt(i N)) exp(-2 pi i j k / N).
        let n = 8;
        let u = UnitaryPropagator::cat_map(&SymplecticMap::elliptic(0.0), &space(n)).unwrap();
        let amplitude = C64::new(0.0, -1.0 / n as f64).sqrt();
        let UnitaryPropagator::Dense { matrix, .. } = &u else {
            panic!("single-mode propagator should be dense");
        };
        for j in 0..n {
            for k in 0..n {
                let expected =
                    amplitude * C64::from_polar(1.0, -TAU * (j * k) as f64 / n as f64);
                assert!(
                    (matrix[[j, k]] - expected).norm() < 1e-12,
                    "entry ({j},{k})"
                );
            }
        }
    }

    #[test]
    fn hyperbolic_kicked_propagator_is_unitary_at_production_size() {
        let u =
            UnitaryPropagator::cat_map(&SymplecticMap::hyperbolic(0.25), &space(64)).unwrap();
        assert!(u.unitarity_defect() < 1e-10);
    }

    #[test]
    fn smallest_space_has_flat_entry_moduli() {
        let u = UnitaryPropagator::cat_map(&SymplecticMap::hyperbolic(0.0), &space(2)).unwrap();
        let UnitaryPropagator::Dense { matrix, .. } = &u else {
            panic!()
        };
        for entry in matrix.iter() {
            assert_abs_diff_eq!(entry.norm(), 1.0 / 2f64.sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn propagator_rejects_singular_maps() {
        let bad = SymplecticMap {
            m11: 1,
            m12: 0,
            m21: 3,
            m22: 1,
            kick: 0.0,
        };
        assert!(matches!(
            UnitaryPropagator::cat_map(&bad, &space(8)),
            Err(Error::SingularPropagator)
        ));
    }

    #[test]
    fn coherent_state_is_normalized_and_centered() {
        let sp = space(64);
        let psi = coherent_state(0.5, 0.5, &sp);
        assert!((psi.norm() - 1.0).abs() < 1e-12);

        // Circular mean of the position distribution.
        let n = sp.dim() as f64;
        let mean: C64 = psi
            .position_distribution()
            .iter()
            .enumerate()
            .map(|(j, p)| C64::from_polar(*p, TAU * j as f64 / n))
            .sum();
        let center = wrap(mean.arg() / TAU);
        assert!((center - 0.5).abs() < 1e-6, "center = {center}");
    }

    #[test]
    fn distant_coherent_states_are_orthogonal() {
        let sp = space(64);
        let a = coherent_state(0.25, 0.75, &sp);
        let b = coherent_state(0.75, 0.25, &sp);
        assert!(a.overlap(&b).unwrap().norm() < 1e-8);
    }

    #[test]
    fn coupling_diagonal_trivial_and_explicit_values() {
        let sp = space(64);
        let flat = coupling_diagonal(0.0, &sp);
        assert!(flat.iter().all(|c| (c - C64::new(1.0, 0.0)).norm() < 1e-15));

        let c = coupling_diagonal(0.5, &sp);
        // Entry (0,0): cos(0) = 1, so the phase is N Kc / (2 pi).
        let expected = C64::from_polar(1.0, 64.0 * 0.5 / TAU);
        assert!((c[0] - expected).norm() < 1e-12);
        assert_abs_diff_eq!(c[0].arg(), 5.092_958_178_940_651 - TAU, epsilon = 1e-9);
    }

    #[test]
    fn coupling_depends_on_index_sum_only() {
        let n = 64;
        let c = coupling_diagonal(0.5, &space(n));
        for (j1, j2, k1, k2) in [(0usize, 5usize, 5usize, 0usize), (10, 60, 62, 8), (63, 63, 62, 0)] {
            assert_eq!((j1 + j2) % n, (k1 + k2) % n, "test pairs must share a sum");
            assert_eq!(c[j1 * n + j2], c[k1 * n + k2]);
        }
    }

    #[test]
    fn identity_coupling_factorizes_product_states() {
        let sp = space(8);
        let m = SymplecticMap::hyperbolic(0.25);
        let u1 = UnitaryPropagator::cat_map(&m, &sp).unwrap();
        let u2 = UnitaryPropagator::cat_map(&SymplecticMap::elliptic(0.25), &sp).unwrap();
        let a = coherent_state(0.3, 0.1, &sp);
        let b = coherent_state(0.7, 0.9, &sp);

        let ua = u1.apply(&a).unwrap();
        let ub = u2.apply(&b).unwrap();
        let expected = QuantumState::product(&ua, &ub).unwrap();

        let trivial = Array1::from_elem(64, C64::new(1.0, 0.0));
        let u = UnitaryPropagator::coupled(u1, u2, trivial).unwrap();
        let got = u.apply(&QuantumState::product(&a, &b).unwrap()).unwrap();

        for (x, y) in got.amplitudes().iter().zip(expected.amplitudes().iter()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn factored_two_mode_propagator_matches_dense_oracle() {
        let sp = space(4);
        let m = SymplecticMap::hyperbolic(0.25);
        let u1 = UnitaryPropagator::cat_map(&m, &sp).unwrap();
        let u2 = UnitaryPropagator::cat_map(&m, &sp).unwrap();
        let c = coupling_diagonal(0.5, &sp);
        let u = UnitaryPropagator::coupled(u1, u2, c.clone()).unwrap();

        let dense = u.to_dense().unwrap();
        assert!(dense_unitarity_defect(&dense) < 1e-10);

        // Entrywise definition cross-check.
        let UnitaryPropagator::Factored {
            u1: f1, u2: f2, ..
        } = &u
        else {
            panic!()
        };
        for j1 in 0..4 {
            for j2 in 0..4 {
                for k1 in 0..4 {
                    for k2 in 0..4 {
                        let expected = f1[[j1, k1]] * f2[[j2, k2]] * c[j1 * 4 + j2];
                        assert!((dense[[j1 * 4 + j2, k1 * 4 + k2]] - expected).norm() < 1e-14);
                    }
                }
            }
        }

        // Factored application equals the dense matrix-vector product.
        let psi = QuantumState::product(
            &coherent_state(0.2, 0.6, &sp),
            &coherent_state(0.8, 0.4, &sp),
        )
        .unwrap();
        let fast = u.apply(&psi).unwrap();
        let slow = dense.dot(&psi.amplitudes());
        for (x, y) in fast.amplitudes().iter().zip(slow.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn evolution_preserves_norm_over_many_steps() {
        let sp = space(16);
        let u1 = UnitaryPropagator::cat_map(&SymplecticMap::hyperbolic(0.25), &sp).unwrap();
        let u2 = UnitaryPropagator::cat_map(&SymplecticMap::elliptic(0.25), &sp).unwrap();
        let u = UnitaryPropagator::coupled(u1, u2, coupling_diagonal(0.5, &sp)).unwrap();
        let psi = QuantumState::product(
            &coherent_state(0.5, 0.5, &sp),
            &coherent_state(0.5, 0.5, &sp),
        )
        .unwrap();

        let zero = u.evolve(&psi, 0).unwrap();
        for (x, y) in zero.amplitudes().iter().zip(psi.amplitudes().iter()) {
            assert_eq!(x, y);
        }

        let evolved = u.evolve(&psi, 300).unwrap();
        assert!((evolved.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn apply_rejects_mode_mismatch() {
        let sp = space(4);
        let u = UnitaryPropagator::cat_map(&SymplecticMap::hyperbolic(0.25), &sp).unwrap();
        let psi = QuantumState::product(
            &coherent_state(0.5, 0.5, &sp),
            &coherent_state(0.5, 0.5, &sp),
        )
        .unwrap();
        assert!(u.apply(&psi).is_err());
    }
}
