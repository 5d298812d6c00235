//! Exact classical coupled kicked cat maps, the discretized Liouville
//! density, its backward-iteration evolution and the classical
//! separability entropy.
//!
//! The density lives on an `Nc^4` grid over `(q1, p1, q2, p2)` with
//! cell centers at `(i + 1/2) / Nc`. One evolution step pulls the
//! density back through the exact inverse map: every target cell
//! averages the previous density over the preimages of an `s^4`
//! sub-grid of sample points, read by nearest-cell lookup, and the
//! total mass is renormalized to one afterwards.

use std::f64::consts::TAU;

use ndarray::{Array2, ArrayView2};
use ndarray_linalg::{JobSvd, SVDDCInto};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::phase_space::{separability_entropy, SchmidtSpectrum};
use crate::torus::{wrap, CoupledMap, SymplecticMap, TorusHilbert};

/// Point on the unit 2-torus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint2D {
    pub q: f64,
    pub p: f64,
}

impl PhasePoint2D {
    pub fn new(q: f64, p: f64) -> Self {
        Self {
            q: wrap(q),
            p: wrap(p),
        }
    }
}

/// Point on the 4-torus of the coupled system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint4D {
    pub q1: f64,
    pub p1: f64,
    pub q2: f64,
    pub p2: f64,
}

impl PhasePoint4D {
    pub fn new(q1: f64, p1: f64, q2: f64, p2: f64) -> Self {
        Self {
            q1: wrap(q1),
            p1: wrap(p1),
            q2: wrap(q2),
            p2: wrap(p2),
        }
    }
}

/// One step of the kicked map: `(q', p') = M (q, p + eps(q)) mod 1`.
pub fn forward_1dof(x: PhasePoint2D, map: &SymplecticMap) -> PhasePoint2D {
    let kicked = x.p + map.momentum_kick(x.q);
    PhasePoint2D {
        q: wrap(map.m11 as f64 * x.q + map.m12 as f64 * kicked),
        p: wrap(map.m21 as f64 * x.q + map.m22 as f64 * kicked),
    }
}

/// Exact inverse of `forward_1dof`; the inverse matrix is integer
/// because the determinant is one.
pub fn inverse_1dof(x: PhasePoint2D, map: &SymplecticMap) -> PhasePoint2D {
    let u = wrap(map.m22 as f64 * x.q - map.m12 as f64 * x.p);
    let v = wrap(-map.m21 as f64 * x.q + map.m11 as f64 * x.p);
    PhasePoint2D {
        q: u,
        p: wrap(v - map.momentum_kick(u)),
    }
}

/// One step of the coupled map: both momenta receive their own kick
/// plus the shared coupling kick, then each map acts on its own pair.
pub fn forward_2dof(x: PhasePoint4D, cm: &CoupledMap) -> PhasePoint4D {
    let kappa = cm.coupling_kick(x.q1, x.q2);
    let k1 = x.p1 + cm.map1.momentum_kick(x.q1) + kappa;
    let k2 = x.p2 + cm.map2.momentum_kick(x.q2) + kappa;
    PhasePoint4D {
        q1: wrap(cm.map1.m11 as f64 * x.q1 + cm.map1.m12 as f64 * k1),
        p1: wrap(cm.map1.m21 as f64 * x.q1 + cm.map1.m22 as f64 * k1),
        q2: wrap(cm.map2.m11 as f64 * x.q2 + cm.map2.m12 as f64 * k2),
        p2: wrap(cm.map2.m21 as f64 * x.q2 + cm.map2.m22 as f64 * k2),
    }
}

/// Exact inverse of `forward_2dof`.
pub fn inverse_2dof(x: PhasePoint4D, cm: &CoupledMap) -> PhasePoint4D {
    let u1 = wrap(cm.map1.m22 as f64 * x.q1 - cm.map1.m12 as f64 * x.p1);
    let v1 = wrap(-cm.map1.m21 as f64 * x.q1 + cm.map1.m11 as f64 * x.p1);
    let u2 = wrap(cm.map2.m22 as f64 * x.q2 - cm.map2.m12 as f64 * x.p2);
    let v2 = wrap(-cm.map2.m21 as f64 * x.q2 + cm.map2.m11 as f64 * x.p2);
    let kappa = cm.coupling_kick(u1, u2);
    PhasePoint4D {
        q1: u1,
        p1: wrap(v1 - cm.map1.momentum_kick(u1) - kappa),
        q2: u2,
        p2: wrap(v2 - cm.map2.momentum_kick(u2) - kappa),
    }
}

/// Non-negative cell masses over `(q1, p1, q2, p2)`, total mass one.
/// Flat layout `((iq1 * Nc + ip1) * Nc + iq2) * Nc + ip2`, which is the
/// row-major `(Nc^2) x (Nc^2)` matrix used by the separability entropy.
#[derive(Clone, Debug)]
pub struct LiouvilleGrid {
    cells: Vec<f64>,
    nc: usize,
}

impl LiouvilleGrid {
    /// Validate non-negativity and normalize the total mass to one.
    pub fn from_cells(mut cells: Vec<f64>, nc: usize) -> Result<Self> {
        if nc < 2 {
            return Err(Error::GridTooCoarse(nc));
        }
        if cells.len() != nc * nc * nc * nc {
            return Err(Error::DimensionMismatch {
                expected: nc * nc * nc * nc,
                found: cells.len(),
            });
        }
        if cells.iter().any(|&c| c < 0.0 || !c.is_finite()) {
            return Err(Error::EmptyGrid);
        }
        let mass: f64 = cells.iter().sum();
        if mass <= 0.0 {
            return Err(Error::EmptyGrid);
        }
        let inv = 1.0 / mass;
        cells.iter_mut().for_each(|c| *c *= inv);
        Ok(Self { cells, nc })
    }

    /// Product of periodized Gaussians with dispersion `sqrt(hbar)` in
    /// every coordinate, evaluated at cell centers over winding images
    /// `|w| <= 2` and normalized.
    pub fn gaussian(center: PhasePoint4D, space: &TorusHilbert, nc: usize) -> Result<Self> {
        if nc < 2 {
            return Err(Error::GridTooCoarse(nc));
        }
        let two_hbar = 2.0 * space.hbar();
        let profile = |c: f64| -> Vec<f64> {
            let c = wrap(c);
            (0..nc)
                .map(|i| {
                    let x = (i as f64 + 0.5) / nc as f64;
                    (-2i32..=2)
                        .map(|w| {
                            let d = x - c - w as f64;
                            (-d * d / two_hbar).exp()
                        })
                        .sum()
                })
                .collect()
        };
        let gq1 = profile(center.q1);
        let gp1 = profile(center.p1);
        let gq2 = profile(center.q2);
        let gp2 = profile(center.p2);

        let mut cells = vec![0.0; nc * nc * nc * nc];
        let mut idx = 0;
        for a in &gq1 {
            for b in &gp1 {
                let ab = a * b;
                for c in &gq2 {
                    let abc = ab * c;
                    for d in &gp2 {
                        cells[idx] = abc * d;
                        idx += 1;
                    }
                }
            }
        }
        Self::from_cells(cells, nc)
    }

    /// Uniform distribution.
    pub fn uniform(nc: usize) -> Result<Self> {
        if nc < 2 {
            return Err(Error::GridTooCoarse(nc));
        }
        let total = nc * nc * nc * nc;
        Ok(Self {
            cells: vec![1.0 / total as f64; total],
            nc,
        })
    }

    /// All mass in the cell containing `point`.
    pub fn delta(point: PhasePoint4D, nc: usize) -> Result<Self> {
        if nc < 2 {
            return Err(Error::GridTooCoarse(nc));
        }
        let mut cells = vec![0.0; nc * nc * nc * nc];
        cells[flat_index(cell_of(point.q1, nc), cell_of(point.p1, nc), cell_of(point.q2, nc), cell_of(point.p2, nc), nc)] = 1.0;
        Ok(Self { cells, nc })
    }

    pub fn nc(&self) -> usize {
        self.nc
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn total_mass(&self) -> f64 {
        self.cells.iter().sum()
    }

    pub fn cell(&self, iq1: usize, ip1: usize, iq2: usize, ip2: usize) -> f64 {
        self.cells[flat_index(iq1, ip1, iq2, ip2, self.nc)]
    }

    /// View as the `(Nc^2) x (Nc^2)` matrix with rows `(iq1, ip1)` and
    /// columns `(iq2, ip2)`.
    pub fn as_bipartite_matrix(&self) -> ArrayView2<'_, f64> {
        let plane = self.nc * self.nc;
        ArrayView2::from_shape((plane, plane), &self.cells)
            .expect("cell storage is contiguous")
    }

    /// Marginal distribution over `(q1, p1)`.
    pub fn marginal_dof1(&self) -> Array2<f64> {
        let nc = self.nc;
        let plane = nc * nc;
        let mut out = Array2::zeros((nc, nc));
        for iq1 in 0..nc {
            for ip1 in 0..nc {
                let base = (iq1 * nc + ip1) * plane;
                out[[iq1, ip1]] = self.cells[base..base + plane].iter().sum();
            }
        }
        out
    }
}

fn cell_of(x: f64, nc: usize) -> usize {
    ((wrap(x) * nc as f64) as usize).min(nc - 1)
}

#[inline]
fn flat_index(iq1: usize, ip1: usize, iq2: usize, ip2: usize, nc: usize) -> usize {
    ((iq1 * nc + ip1) * nc + iq2) * nc + ip2
}

/// Per-mode lookup table for the backward iteration. For every 2-D
/// sample point `(q', p')` it stores the preimage position cell, the
/// pre-coupling momentum value `v - eps(u)` and `sin/cos(2 pi u)`, so
/// the inner loop reconstructs the coupling kick without trigonometry.
struct ModeTable {
    iq: Vec<u32>,
    momentum: Vec<f64>,
    sin_u: Vec<f64>,
    cos_u: Vec<f64>,
}

fn build_mode_table(map: &SymplecticMap, nc: usize, s: usize) -> ModeTable {
    let count = nc * nc * s * s;
    let mut table = ModeTable {
        iq: Vec::with_capacity(count),
        momentum: Vec::with_capacity(count),
        sin_u: Vec::with_capacity(count),
        cos_u: Vec::with_capacity(count),
    };
    let ncf = nc as f64;
    let sf = s as f64;
    for cq in 0..nc {
        for cp in 0..nc {
            for sq in 0..s {
                for sp in 0..s {
                    let q = (cq as f64 + (sq as f64 + 0.5) / sf) / ncf;
                    let p = (cp as f64 + (sp as f64 + 0.5) / sf) / ncf;
                    let u = wrap(map.m22 as f64 * q - map.m12 as f64 * p);
                    let v = wrap(-map.m21 as f64 * q + map.m11 as f64 * p);
                    table.iq.push(((u * ncf) as u32).min(nc as u32 - 1));
                    table.momentum.push(v - map.momentum_kick(u));
                    let (sin_u, cos_u) = (TAU * u).sin_cos();
                    table.sin_u.push(sin_u);
                    table.cos_u.push(cos_u);
                }
            }
        }
    }
    table
}

/// Backward-iteration evolution of a Liouville grid under a coupled
/// map, with `s x s` sub-cell sampling per mode plane and per-step
/// renormalization. Preimage geometry is precomputed per mode; only
/// the coupling kick mixes the two modes.
pub struct LiouvilleEvolver {
    cm: CoupledMap,
    nc: usize,
    s: usize,
    table1: ModeTable,
    table2: ModeTable,
    parallel: bool,
}

impl LiouvilleEvolver {
    pub fn new(cm: CoupledMap, nc: usize, subsample: usize) -> Result<Self> {
        if nc < 2 {
            return Err(Error::GridTooCoarse(nc));
        }
        if subsample == 0 {
            return Err(Error::ZeroSubsample);
        }
        Ok(Self {
            table1: build_mode_table(&cm.map1, nc, subsample),
            table2: build_mode_table(&cm.map2, nc, subsample),
            cm,
            nc,
            s: subsample,
            parallel: true,
        })
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    /// One backward step. Returns the evolved grid and the
    /// pre-renormalization total mass (a sampling-quality diagnostic;
    /// it stays close to one when the grid resolves the dynamics).
    pub fn step(&self, grid: &LiouvilleGrid) -> Result<(LiouvilleGrid, f64)> {
        if grid.nc != self.nc {
            return Err(Error::DimensionMismatch {
                expected: self.nc,
                found: grid.nc,
            });
        }
        let nc = self.nc;
        let plane = nc * nc;
        let samples = self.s * self.s;
        let mut next = vec![0.0; plane * plane];

        if self.parallel {
            next.par_chunks_mut(plane)
                .enumerate()
                .for_each(|(c1, out)| self.fill_target_plane(c1, grid.cells(), out));
        } else {
            next.chunks_mut(plane)
                .enumerate()
                .for_each(|(c1, out)| self.fill_target_plane(c1, grid.cells(), out));
        }

        let sample_norm = 1.0 / (samples * samples) as f64;
        let mass: f64 = next.iter().sum::<f64>() * sample_norm;
        let scale = sample_norm / mass;
        next.iter_mut().for_each(|c| *c *= scale);
        Ok((LiouvilleGrid { cells: next, nc }, mass))
    }

    /// Fill the target `(iq2, ip2)` plane of one `(iq1, ip1)` cell with
    /// unnormalized sums over preimage samples.
    fn fill_target_plane(&self, c1: usize, prev: &[f64], out_plane: &mut [f64]) {
        let nc = self.nc;
        let ncf = nc as f64;
        let plane = nc * nc;
        let samples = self.s * self.s;
        let kick_amp = -self.cm.kc / TAU;

        for s1 in 0..samples {
            let a = c1 * samples + s1;
            let iq1 = self.table1.iq[a] as usize;
            let w1 = self.table1.momentum[a];
            let sin1 = self.table1.sin_u[a];
            let cos1 = self.table1.cos_u[a];
            let row_base = iq1 * nc;

            for (c2, out) in out_plane.iter_mut().enumerate() {
                let mut acc = 0.0;
                for s2 in 0..samples {
                    let b = c2 * samples + s2;
                    let iq2 = self.table2.iq[b] as usize;
                    let w2 = self.table2.momentum[b];
                    // sin(2 pi (u1 + u2)) from the per-mode tables.
                    let kappa =
                        kick_amp * (sin1 * self.table2.cos_u[b] + cos1 * self.table2.sin_u[b]);
                    let p1 = wrap(w1 - kappa);
                    let p2 = wrap(w2 - kappa);
                    let ip1 = ((p1 * ncf) as usize).min(nc - 1);
                    let ip2 = ((p2 * ncf) as usize).min(nc - 1);
                    acc += prev[(row_base + ip1) * plane + iq2 * nc + ip2];
                }
                *out += acc;
            }
        }
    }
}

/// Evolve a grid for `steps` backward iterations.
pub fn evolve_liouville(
    grid: &LiouvilleGrid,
    cm: &CoupledMap,
    steps: usize,
    subsample: usize,
) -> Result<LiouvilleGrid> {
    let evolver = LiouvilleEvolver::new(*cm, grid.nc(), subsample)?;
    let mut current = grid.clone();
    for _ in 0..steps {
        current = evolver.step(&current)?.0;
    }
    Ok(current)
}

/// Classical separability entropy (halved reporting convention):
/// singular values of the `(Nc^2) x (Nc^2)` bipartite matrix of the
/// grid, fed through the separability entropy and divided by two.
pub fn cse(grid: &LiouvilleGrid) -> Result<f64> {
    if grid.total_mass() <= 0.0 {
        return Err(Error::EmptyGrid);
    }
    let mat = grid.as_bipartite_matrix().to_owned();
    let (_, sv, _) = mat.svddc_into(JobSvd::None)?;
    let spectrum = SchmidtSpectrum::new(sv.to_vec());
    Ok(separability_entropy(&spectrum)? / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn hyper() -> SymplecticMap {
        SymplecticMap::hyperbolic(0.25)
    }

    fn ellip() -> SymplecticMap {
        SymplecticMap::elliptic(0.25)
    }

    #[test]
    fn shared_fixed_point_of_both_maps() {
        let x = PhasePoint2D::new(0.5, 0.5);
        for map in [hyper(), ellip()] {
            let y = forward_1dof(x, &map);
            assert!((y.q - 0.5).abs() < 1e-14 && (y.p - 0.5).abs() < 1e-14);
            let z = inverse_1dof(x, &map);
            assert!((z.q - 0.5).abs() < 1e-14 && (z.p - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn unkicked_elliptic_map_is_a_quarter_turn() {
        let map = SymplecticMap::elliptic(0.0);
        let y = forward_1dof(PhasePoint2D::new(0.25, 0.0), &map);
        assert!((y.q - 0.0).abs() < 1e-14 && (y.p - 0.75).abs() < 1e-14);
        let x = inverse_1dof(PhasePoint2D::new(0.0, 0.75), &map);
        assert!((x.q - 0.25).abs() < 1e-14 && (x.p - 0.0).abs() < 1e-14);
    }

    #[test]
    fn forward_inverse_roundtrip_1dof() {
        let mut rng = StdRng::seed_from_u64(42);
        for map in [hyper(), ellip()] {
            for _ in 0..10_000 {
                let x = PhasePoint2D::new(rng.random(), rng.random());
                let y = inverse_1dof(forward_1dof(x, &map), &map);
                assert!(torus_dist(x.q, y.q) < 1e-12 && torus_dist(x.p, y.p) < 1e-12);
            }
        }
    }

    #[test]
    fn uncoupled_2dof_map_factorizes() {
        let cm = CoupledMap::new(hyper(), ellip(), 0.0);
        let x = PhasePoint4D::new(0.12, 0.34, 0.56, 0.78);
        let y = forward_2dof(x, &cm);
        let y1 = forward_1dof(PhasePoint2D::new(x.q1, x.p1), &cm.map1);
        let y2 = forward_1dof(PhasePoint2D::new(x.q2, x.p2), &cm.map2);
        assert!((y.q1 - y1.q).abs() < 1e-14 && (y.p1 - y1.p).abs() < 1e-14);
        assert!((y.q2 - y2.q).abs() < 1e-14 && (y.p2 - y2.p).abs() < 1e-14);
    }

    #[test]
    fn coupled_fixed_point_survives() {
        // kappa(1/2, 1/2) = -(Kc/2pi) sin(2 pi) = 0.
        for (m1, m2) in [(hyper(), hyper()), (hyper(), ellip()), (ellip(), ellip())] {
            let cm = CoupledMap::new(m1, m2, 0.5);
            let x = PhasePoint4D::new(0.5, 0.5, 0.5, 0.5);
            let y = forward_2dof(x, &cm);
            for (a, b) in [(y.q1, 0.5), (y.p1, 0.5), (y.q2, 0.5), (y.p2, 0.5)] {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn forward_inverse_roundtrip_2dof_all_pairings() {
        let mut rng = StdRng::seed_from_u64(4242);
        for (m1, m2) in [
            (hyper(), hyper()),
            (ellip(), ellip()),
            (hyper(), ellip()),
            (ellip(), hyper()),
        ] {
            let cm = CoupledMap::new(m1, m2, 0.5);
            for _ in 0..10_000 {
                let x = PhasePoint4D::new(rng.random(), rng.random(), rng.random(), rng.random());
                let y = inverse_2dof(forward_2dof(x, &cm), &cm);
                for (a, b) in [(x.q1, y.q1), (x.p1, y.p1), (x.q2, y.q2), (x.p2, y.p2)] {
                    assert!(torus_dist(a, b) < 1e-12, "{a} vs {b}");
                }
            }
        }
    }

    fn torus_dist(a: f64, b: f64) -> f64 {
        let d = (a - b).abs();
        d.min(1.0 - d)
    }

    #[test]
    fn gaussian_grid_mass_and_spread() {
        let space = TorusHilbert::new(64).unwrap();
        let grid =
            LiouvilleGrid::gaussian(PhasePoint4D::new(0.5, 0.5, 0.5, 0.5), &space, 64).unwrap();
        assert!((grid.total_mass() - 1.0).abs() < 1e-12);

        // Sample standard deviation of each coordinate vs sqrt(hbar).
        let sigma_expected = space.hbar().sqrt();
        let nc = 64usize;
        let mut var_q1 = 0.0;
        for iq1 in 0..nc {
            let x = (iq1 as f64 + 0.5) / nc as f64 - 0.5;
            let mut mass = 0.0;
            for ip1 in 0..nc {
                let base = (iq1 * nc + ip1) * nc * nc;
                mass += grid.cells()[base..base + nc * nc].iter().sum::<f64>();
            }
            var_q1 += mass * x * x;
        }
        let sigma = var_q1.sqrt();
        assert!(
            (sigma - sigma_expected).abs() / sigma_expected < 0.05,
            "sigma = {sigma}, expected about {sigma_expected}"
        );
    }

    #[test]
    fn gaussian_grid_reflection_symmetry() {
        // Center on a cell center so each axis reflects onto itself.
        let space = TorusHilbert::new(16).unwrap();
        let nc = 16usize;
        let center = (8.0 + 0.5) / nc as f64;
        let grid = LiouvilleGrid::gaussian(
            PhasePoint4D::new(center, center, center, center),
            &space,
            nc,
        )
        .unwrap();
        let reflect = |i: usize| (2 * 8 + nc - i) % nc; // mirror about cell 8
        for iq1 in 0..nc {
            for ip1 in 0..nc {
                let a = grid.cell(iq1, ip1, 3, 5);
                let b = grid.cell(reflect(iq1), ip1, 3, 5);
                assert!((a - b).abs() < 1e-12 * (a.abs() + 1.0));
            }
        }
    }

    #[test]
    fn delta_under_unkicked_rotation_returns_after_four_steps() {
        let nc = 8;
        let cm = CoupledMap::new(
            SymplecticMap::elliptic(0.0),
            SymplecticMap::elliptic(0.0),
            0.0,
        );
        let start = LiouvilleGrid::delta(PhasePoint4D::new(0.3, 0.6, 0.8, 0.1), nc).unwrap();
        let evolver = LiouvilleEvolver::new(cm, nc, 1).unwrap();
        let mut grid = start.clone();
        for _ in 0..4 {
            grid = evolver.step(&grid).unwrap().0;
        }
        for (a, b) in grid.cells().iter().zip(start.cells().iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_grid_is_invariant() {
        let nc = 8;
        let cm = CoupledMap::new(hyper(), ellip(), 0.5);
        let uniform = LiouvilleGrid::uniform(nc).unwrap();
        let evolved = evolve_liouville(&uniform, &cm, 3, 2).unwrap();
        for (a, b) in evolved.cells().iter().zip(uniform.cells().iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn fixed_point_delta_stays_put() {
        // Odd grid: 0.5 is then the exact center of the middle cell, so
        // the single sample point sits on the shared fixed point.
        let nc = 9;
        let cm = CoupledMap::new(hyper(), hyper(), 0.5);
        let start = LiouvilleGrid::delta(PhasePoint4D::new(0.5, 0.5, 0.5, 0.5), nc).unwrap();
        let evolver = LiouvilleEvolver::new(cm, nc, 1).unwrap();
        let mut grid = start.clone();
        for _ in 0..5 {
            grid = evolver.step(&grid).unwrap().0;
        }
        let idx = 4usize; // cell containing 0.5 at nc = 9
        assert!((grid.cell(idx, idx, idx, idx) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evolution_preserves_mass_and_positivity() {
        let space = TorusHilbert::new(16).unwrap();
        let cm = CoupledMap::new(hyper(), ellip(), 0.5);
        let mut grid =
            LiouvilleGrid::gaussian(PhasePoint4D::new(0.5, 0.5, 0.5, 0.5), &space, 16).unwrap();
        let evolver = LiouvilleEvolver::new(cm, 16, 2).unwrap();
        for _ in 0..5 {
            let (next, mass) = evolver.step(&grid).unwrap();
            assert!(mass > 0.5 && mass < 1.5, "renormalization factor {mass}");
            assert!(next.cells().iter().all(|&c| c >= 0.0));
            assert!((next.total_mass() - 1.0).abs() < 1e-12);
            grid = next;
        }
    }

    #[test]
    fn serial_and_parallel_steps_agree_exactly() {
        let space = TorusHilbert::new(16).unwrap();
        let cm = CoupledMap::new(hyper(), ellip(), 0.5);
        let grid =
            LiouvilleGrid::gaussian(PhasePoint4D::new(0.3, 0.7, 0.6, 0.2), &space, 16).unwrap();
        let par = LiouvilleEvolver::new(cm, 16, 2).unwrap();
        let ser = LiouvilleEvolver::new(cm, 16, 2).unwrap().with_parallel(false);
        let a = par.step(&grid).unwrap().0;
        let b = ser.step(&grid).unwrap().0;
        for (x, y) in a.cells().iter().zip(b.cells().iter()) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn cse_of_product_grids_vanishes() {
        let mut rng = StdRng::seed_from_u64(7);
        let nc = 8;
        let f: Vec<f64> = (0..nc * nc).map(|_| rng.random::<f64>()).collect();
        let g: Vec<f64> = (0..nc * nc).map(|_| rng.random::<f64>()).collect();
        let mut cells = vec![0.0; nc * nc * nc * nc];
        for (i, fi) in f.iter().enumerate() {
            for (j, gj) in g.iter().enumerate() {
                cells[i * nc * nc + j] = fi * gj;
            }
        }
        let grid = LiouvilleGrid::from_cells(cells, nc).unwrap();
        assert!(cse(&grid).unwrap() < 1e-10);

        let uniform = LiouvilleGrid::uniform(nc).unwrap();
        assert!(cse(&uniform).unwrap() < 1e-10);
    }

    #[test]
    fn cse_of_two_disjoint_products_is_half_ln_two() {
        // (f (x) g + f' (x) g') / 2 with disjoint supports and equal mass.
        let nc = 4;
        let plane = nc * nc;
        let mut cells = vec![0.0; plane * plane];
        // f lives on row cell 0, f' on row cell 1; g on column 2, g' on column 3.
        cells[0 * plane + 2] = 0.5;
        cells[1 * plane + 3] = 0.5;
        let grid = LiouvilleGrid::from_cells(cells, nc).unwrap();
        assert_abs_diff_eq!(cse(&grid).unwrap(), 2f64.ln() / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn cse_is_scale_and_swap_invariant() {
        let space = TorusHilbert::new(8).unwrap();
        let cm = CoupledMap::new(hyper(), ellip(), 0.5);
        let grid = evolve_liouville(
            &LiouvilleGrid::gaussian(PhasePoint4D::new(0.5, 0.5, 0.5, 0.5), &space, 8).unwrap(),
            &cm,
            3,
            2,
        )
        .unwrap();
        let h = cse(&grid).unwrap();

        let scaled =
            LiouvilleGrid::from_cells(grid.cells().iter().map(|c| c * 1e6).collect(), 8).unwrap();
        assert_abs_diff_eq!(cse(&scaled).unwrap(), h, epsilon = 1e-10);

        // Swap the two mode index pairs: transpose of the bipartite matrix.
        let plane = 64;
        let mut swapped = vec![0.0; plane * plane];
        for r in 0..plane {
            for c in 0..plane {
                swapped[c * plane + r] = grid.cells()[r * plane + c];
            }
        }
        let swapped = LiouvilleGrid::from_cells(swapped, 8).unwrap();
        assert_abs_diff_eq!(cse(&swapped).unwrap(), h, epsilon = 1e-10);
    }

    #[test]
    fn cse_of_initial_gaussian_is_negligible() {
        let space = TorusHilbert::new(16).unwrap();
        let grid =
            LiouvilleGrid::gaussian(PhasePoint4D::new(0.4, 0.6, 0.2, 0.9), &space, 16).unwrap();
        assert!(cse(&grid).unwrap() < 1e-8);
    }

    #[test]
    fn zero_grid_is_rejected() {
        let err = LiouvilleGrid::from_cells(vec![0.0; 16], 2).unwrap_err();
        assert!(err.to_string().contains("mass"));
    }
}
