//! Built-in verification harness behind the `check` command.
//!
//! The fast level exercises every structural invariant at small
//! dimensions; the full level adds the production-scale doubly
//! hyperbolic and mixed runs and their headline criteria.

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::classical::{
    cse, forward_1dof, forward_2dof, inverse_1dof, inverse_2dof, LiouvilleGrid,
    PhasePoint2D, PhasePoint4D,
};
use crate::error::Result;
use crate::phase_space::{
    operator_schmidt_spectrum, separability_entropy, wigner_1dof, wse_from_wigner, wse_pure,
    DensityMatrix, SchmidtSpectrum,
};
use crate::quantum::{coherent_state, coupling_diagonal, QuantumState, UnitaryPropagator};
use crate::random::{random_density, random_pure_state};
use crate::scenario::{run_scenario, MapCase, ScenarioConfig};
use crate::torus::{wrap, CoupledMap, SymplecticMap, TorusHilbert};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckLevel {
    Fast,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    AtMost,
    AtLeast,
}

/// One verified property: `measured` compared against `bound`.
#[derive(Clone, Debug)]
pub struct CheckItem {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub kind: BoundKind,
    pub passed: bool,
}

#[derive(Clone, Debug, Default)]
pub struct CheckReport {
    pub items: Vec<CheckItem>,
    pub elapsed_seconds: f64,
}

impl CheckReport {
    fn at_most(&mut self, name: impl Into<String>, measured: f64, bound: f64) {
        self.items.push(CheckItem {
            name: name.into(),
            measured,
            bound,
            kind: BoundKind::AtMost,
            passed: measured <= bound,
        });
    }

    fn at_least(&mut self, name: impl Into<String>, measured: f64, bound: f64) {
        self.items.push(CheckItem {
            name: name.into(),
            measured,
            bound,
            kind: BoundKind::AtLeast,
            passed: measured >= bound,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|item| item.passed)
    }
}

/// Run the harness at the requested level.
pub fn run_checks(level: CheckLevel) -> Result<CheckReport> {
    let started = Instant::now();
    let mut report = CheckReport::default();
    fast_checks(&mut report)?;
    if level == CheckLevel::Full {
        full_checks(&mut report)?;
    }
    report.elapsed_seconds = started.elapsed().as_secs_f64();
    Ok(report)
}

fn fast_checks(report: &mut CheckReport) -> Result<()> {
    let mut rng = StdRng::seed_from_u64(0x5eed);

    // Propagator unitarity across maps, kicks and sizes.
    for n in [4usize, 8, 64] {
        let space = TorusHilbert::new(n)?;
        for (label, map) in [
            ("hyperbolic", SymplecticMap::hyperbolic(0.25)),
            ("elliptic", SymplecticMap::elliptic(0.25)),
        ] {
            let u = UnitaryPropagator::cat_map(&map, &space)?;
            report.at_most(
                format!("propagator unitarity ({label}, N={n})"),
                u.unitarity_defect(),
                1e-10,
            );
        }
    }

    // Entropy identity: eigenvalue, realignment and Wigner routes agree.
    for n in [4usize, 8] {
        let space = TorusHilbert::new(n)?;
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let psi = random_pure_state(&space, 2, &mut rng);
            let direct = wse_pure(&psi)?;
            let rho = DensityMatrix::from_pure(&psi);
            let realigned = separability_entropy(&operator_schmidt_spectrum(&rho)?)? / 2.0;
            let wigner = wse_from_wigner(&psi)?;
            worst = worst
                .max((direct - realigned).abs())
                .max((direct - wigner).abs())
                .max((realigned - wigner).abs());
        }
        report.at_most(format!("entropy route agreement (N={n})"), worst, 1e-8);
    }

    // Exact inverses.
    let mut worst_1d = 0.0f64;
    let mut worst_2d = 0.0f64;
    let maps = [SymplecticMap::hyperbolic(0.25), SymplecticMap::elliptic(0.25)];
    for map in &maps {
        for _ in 0..2000 {
            let x = PhasePoint2D::new(rng.random(), rng.random());
            let y = inverse_1dof(forward_1dof(x, map), map);
            worst_1d = worst_1d.max(torus_dist(x.q, y.q)).max(torus_dist(x.p, y.p));
        }
    }
    for m1 in &maps {
        for m2 in &maps {
            let cm = CoupledMap::new(*m1, *m2, 0.5);
            for _ in 0..2000 {
                let x =
                    PhasePoint4D::new(rng.random(), rng.random(), rng.random(), rng.random());
                let y = inverse_2dof(forward_2dof(x, &cm), &cm);
                worst_2d = worst_2d
                    .max(torus_dist(x.q1, y.q1))
                    .max(torus_dist(x.p1, y.p1))
                    .max(torus_dist(x.q2, y.q2))
                    .max(torus_dist(x.p2, y.p2));
            }
        }
    }
    report.at_most("map inverse identity (1 mode)", worst_1d, 1e-12);
    report.at_most("map inverse identity (2 modes)", worst_2d, 1e-12);

    // Realignment preserves the Frobenius norm.
    let mut worst = 0.0f64;
    for n in [2usize, 3, 4] {
        let space = TorusHilbert::new(n)?;
        let rho = random_density(&space, 2, &mut rng);
        let spectrum = operator_schmidt_spectrum(&rho)?;
        let sum_sq: f64 = spectrum.sigmas().iter().map(|s| s * s).sum();
        worst = worst.max((sum_sq - rho.purity()).abs());
    }
    report.at_most("realignment norm preservation", worst, 1e-10);

    // Wigner normalization and purity identities on random mixed states.
    let mut worst_norm = 0.0f64;
    let mut worst_purity = 0.0f64;
    for n in [4usize, 8] {
        let space = TorusHilbert::new(n)?;
        let rho = random_density(&space, 1, &mut rng);
        let w = wigner_1dof(&rho)?;
        worst_norm = worst_norm.max((w.total() - 1.0).abs());
        worst_purity =
            worst_purity.max((2.0 * n as f64 * w.sum_of_squares() - rho.purity()).abs());
    }
    report.at_most("Wigner normalization", worst_norm, 1e-10);
    report.at_most("Wigner purity identity", worst_purity, 1e-10);

    // Coherent state geometry.
    let space = TorusHilbert::new(64)?;
    let psi = coherent_state(0.5, 0.5, &space);
    report.at_most(
        "coherent state normalization",
        (psi.norm() - 1.0).abs(),
        1e-12,
    );
    let overlap = coherent_state(0.25, 0.75, &space)
        .overlap(&coherent_state(0.75, 0.25, &space))?
        .norm();
    report.at_most("distant coherent overlap", overlap, 1e-8);

    // Separability entropy scale invariance.
    let reference = separability_entropy(&SchmidtSpectrum::new(vec![2.0, 1.0]))?;
    let mut worst = 0.0f64;
    for c in [1e-6f64, 1.0, 1e6] {
        let scaled = separability_entropy(&SchmidtSpectrum::new(vec![2.0 * c, c]))?;
        worst = worst.max((scaled - reference).abs());
    }
    report.at_most("separability entropy scale invariance", worst, 1e-12);

    // Classical entropy of product distributions.
    let nc = 8;
    let f: Vec<f64> = (0..nc * nc).map(|_| rng.random::<f64>()).collect();
    let g: Vec<f64> = (0..nc * nc).map(|_| rng.random::<f64>()).collect();
    let mut cells = vec![0.0; nc * nc * nc * nc];
    for (i, fi) in f.iter().enumerate() {
        for (j, gj) in g.iter().enumerate() {
            cells[i * nc * nc + j] = fi * gj;
        }
    }
    let product = LiouvilleGrid::from_cells(cells, nc)?;
    report.at_most("classical entropy of a product grid", cse(&product)?, 1e-8);

    // Uniform grid invariance under evolution.
    let cm = CoupledMap::new(
        SymplecticMap::hyperbolic(0.25),
        SymplecticMap::elliptic(0.25),
        0.5,
    );
    let uniform = LiouvilleGrid::uniform(nc)?;
    let evolved = crate::classical::evolve_liouville(&uniform, &cm, 2, 2)?;
    let worst = evolved
        .cells()
        .iter()
        .zip(uniform.cells().iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    report.at_most("uniform grid invariance", worst, 1e-13);

    // Norm preservation over a long quantum evolution.
    let space = TorusHilbert::new(8)?;
    let u1 = UnitaryPropagator::cat_map(&SymplecticMap::hyperbolic(0.25), &space)?;
    let u2 = UnitaryPropagator::cat_map(&SymplecticMap::elliptic(0.25), &space)?;
    let u = UnitaryPropagator::coupled(u1, u2, coupling_diagonal(0.5, &space))?;
    let psi = QuantumState::product(
        &coherent_state(0.5, 0.5, &space),
        &coherent_state(0.5, 0.5, &space),
    )?;
    let evolved = u.evolve(&psi, 300)?;
    report.at_most(
        "norm preservation over 300 steps",
        (evolved.norm() - 1.0).abs(),
        1e-10,
    );

    Ok(())
}

fn full_checks(report: &mut CheckReport) -> Result<()> {
    let plateau_target = (0.6 * 64.0f64).ln();

    // Doubly hyperbolic quantum run.
    let mut hh = ScenarioConfig::new(MapCase::HyperbolicHyperbolic, 50);
    hh.cse_enabled = false;
    let hh_result = run_scenario(&hh)?;
    let hh_series = &hh_result.series;
    report.at_most(
        "hh initial entropy",
        hh_series.wse_at(0).unwrap_or(f64::NAN),
        1e-8,
    );
    let plateau = hh_series.wse_mean(20, 50);
    report.at_most(
        "hh plateau vs ln(0.6 N)",
        (plateau - plateau_target).abs() / plateau_target,
        0.15,
    );
    let t90 = hh_series
        .first_time_reaching(0.9 * plateau)
        .map_or(f64::INFINITY, |t| t as f64);
    report.at_most("hh time to 90% of plateau", t90, 10.0);

    let lyapunov = SymplecticMap::hyperbolic(0.25).lyapunov_exponent();
    let slope = (hh_series.wse_at(3).unwrap() - hh_series.wse_at(1).unwrap()) / 2.0;
    report.at_most(
        "hh early growth rate vs Lyapunov",
        (slope - lyapunov).abs() / lyapunov,
        0.30,
    );

    // Mixed run: same plateau, slower approach.
    let mut he = ScenarioConfig::new(MapCase::HyperbolicElliptic, 300);
    he.cse_enabled = false;
    let he_series = run_scenario(&he)?.series;
    let he_plateau = he_series.wse_mean(270, 300);
    report.at_most(
        "he final plateau vs hh plateau",
        (he_plateau - plateau).abs() / plateau,
        0.10,
    );
    let he_t90 = he_series
        .first_time_reaching(0.9 * he_plateau)
        .map_or(f64::INFINITY, |t| t as f64);
    report.at_least("he slowdown factor vs hh", he_t90 / t90.max(1.0), 3.0);

    // Classical tracking of the quantum growth over the first steps.
    let mut tracking = ScenarioConfig::new(MapCase::HyperbolicHyperbolic, 3);
    tracking.cse_stride = 1;
    let tracking_series = run_scenario(&tracking)?.series;
    let mut worst = 0.0f64;
    for t in 1..=3 {
        let wse = tracking_series.wse_at(t).unwrap();
        let cse = tracking_series.cse_at(t).unwrap();
        worst = worst.max((cse - wse).abs());
    }
    report.at_most("hh classical-quantum tracking, t <= 3", worst, 0.35);

    Ok(())
}

fn torus_dist(a: f64, b: f64) -> f64 {
    let d = wrap(a - b);
    d.min(1.0 - d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_level_passes() {
        let report = run_checks(CheckLevel::Fast).unwrap();
        for item in &report.items {
            assert!(
                item.passed,
                "{}: measured {:.3e} vs bound {:.3e}",
                item.name, item.measured, item.bound
            );
        }
    }
}
