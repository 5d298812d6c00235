//! The torus phase space and its quantization parameters, plus the
//! integer symplectic matrices that generate the dynamics.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Wrap a coordinate onto the unit torus, returning a value in `[0, 1)`.
pub fn wrap(x: f64) -> f64 {
    let w = x - x.floor();
    // x - floor(x) can round up to exactly 1.0 for tiny negative x.
    if w >= 1.0 {
        w - 1.0
    } else {
        w
    }
}

/// Finite Hilbert space on the unit torus.
///
/// The dimension fixes the effective Planck constant through
/// `2 * pi * N * hbar = 1`, and the position/momentum lattices have
/// spacing `1/N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TorusHilbert {
    dim: usize,
}

impl TorusHilbert {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Effective Planck constant, `1 / (2 pi N)`.
    pub fn hbar(&self) -> f64 {
        1.0 / (TAU * self.dim as f64)
    }

    /// Spacing of the position (and momentum) lattice.
    pub fn lattice_spacing(&self) -> f64 {
        1.0 / self.dim as f64
    }
}

/// Integer unit-determinant torus automorphism with a sinusoidal
/// momentum kick of strength `kick`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymplecticMap {
    pub m11: i64,
    pub m12: i64,
    pub m21: i64,
    pub m22: i64,
    pub kick: f64,
}

impl SymplecticMap {
    pub fn new(m11: i64, m12: i64, m21: i64, m22: i64, kick: f64) -> Result<Self> {
        let det = m11 * m22 - m12 * m21;
        if det != 1 {
            return Err(Error::NotAreaPreserving(det));
        }
        if m12 == 0 {
            return Err(Error::SingularPropagator);
        }
        Ok(Self {
            m11,
            m12,
            m21,
            m22,
            kick,
        })
    }

    /// The chaotic representative: eigenvalues `2 +/- sqrt(3)`.
    pub fn hyperbolic(kick: f64) -> Self {
        Self {
            m11: 2,
            m12: 1,
            m21: 3,
            m22: 2,
            kick,
        }
    }

    /// The regular representative: a quarter-turn rotation.
    pub fn elliptic(kick: f64) -> Self {
        Self {
            m11: 0,
            m12: 1,
            m21: -1,
            m22: 0,
            kick,
        }
    }

    /// Momentum kick `epsilon(q) = -K/(2 pi) * sin(2 pi q)`.
    pub fn momentum_kick(&self, q: f64) -> f64 {
        -(self.kick / TAU) * (TAU * q).sin()
    }

    /// Lyapunov exponent of the unperturbed linear map: `ln` of the
    /// spectral radius, zero for elliptic matrices.
    pub fn lyapunov_exponent(&self) -> f64 {
        let half_trace = (self.m11 + self.m22) as f64 / 2.0;
        if half_trace.abs() <= 1.0 {
            0.0
        } else {
            (half_trace.abs() + (half_trace * half_trace - 1.0).sqrt()).ln()
        }
    }

    pub fn determinant(&self) -> i64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }
}

/// Two kicked maps coupled through a position-position interaction of
/// strength `kc`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoupledMap {
    pub map1: SymplecticMap,
    pub map2: SymplecticMap,
    pub kc: f64,
}

impl CoupledMap {
    pub fn new(map1: SymplecticMap, map2: SymplecticMap, kc: f64) -> Self {
        Self { map1, map2, kc }
    }

    /// Coupling kick `kappa(q1, q2) = -Kc/(2 pi) * sin(2 pi (q1 + q2))`,
    /// applied identically to both momenta.
    pub fn coupling_kick(&self, q1: f64, q2: f64) -> f64 {
        -(self.kc / TAU) * (TAU * (q1 + q2)).sin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hbar_inverts_dimension_exactly() {
        for n in [2usize, 8, 64, 128] {
            let space = TorusHilbert::new(n).unwrap();
            assert_eq!(space.hbar() * TAU * n as f64, 1.0);
        }
    }

    #[test]
    fn rejects_tiny_spaces() {
        assert!(TorusHilbert::new(0).is_err());
        assert!(TorusHilbert::new(1).is_err());
        assert!(TorusHilbert::new(2).is_ok());
    }

    #[test]
    fn determinant_is_checked() {
        assert!(SymplecticMap::new(2, 1, 3, 2, 0.0).is_ok());
        assert!(matches!(
            SymplecticMap::new(2, 1, 1, 2, 0.0),
            Err(Error::NotAreaPreserving(3))
        ));
        assert!(matches!(
            SymplecticMap::new(1, 0, 3, 1, 0.0),
            Err(Error::SingularPropagator)
        ));
    }

    #[test]
    fn standard_maps_have_unit_determinant() {
        assert_eq!(SymplecticMap::hyperbolic(0.25).determinant(), 1);
        assert_eq!(SymplecticMap::elliptic(0.25).determinant(), 1);
    }

    #[test]
    fn lyapunov_exponents() {
        let lam = SymplecticMap::hyperbolic(0.0).lyapunov_exponent();
        assert!((lam - (2.0 + 3f64.sqrt()).ln()).abs() < 1e-14);
        assert_eq!(SymplecticMap::elliptic(0.0).lyapunov_exponent(), 0.0);
    }

    #[test]
    fn wrap_stays_in_unit_interval() {
        for &x in &[-3.25, -1e-18, 0.0, 0.999999, 17.5, -0.5] {
            let w = wrap(x);
            assert!((0.0..1.0).contains(&w), "wrap({x}) = {w}");
        }
    }
}
