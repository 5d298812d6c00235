//! Scenario configuration and the paired quantum/classical run.
//!
//! A scenario evolves a product coherent state under the factored
//! two-mode propagator, recording the entanglement entropy (half the
//! Wigner separability entropy) every step, and evolves the matching
//! Gaussian Liouville density under the exact coupled map, recording
//! the halved classical separability entropy at a configurable stride.
//! Snapshots capture the mode-1 reduced Wigner grid and the `(q1, p1)`
//! Liouville marginal.
//!
//! The classical entropy needs a singular value decomposition of an
//! `(N^2) x (N^2)` matrix per evaluated step; those jobs run on a small
//! worker pool while the evolution continues. Everything is
//! deterministic for a fixed configuration; `serial` additionally
//! forces single-threaded execution.

use std::collections::BTreeMap;
use std::sync::mpsc;
use std::thread;

use ndarray::Array2;

use crate::backend;
use crate::classical::{cse, LiouvilleEvolver, LiouvilleGrid, PhasePoint4D};
use crate::error::{Error, Result};
use crate::phase_space::{reduced_density, wigner_1dof, wse_pure};
use crate::quantum::{coherent_state, coupling_diagonal, QuantumState, UnitaryPropagator};
use crate::torus::{CoupledMap, SymplecticMap, TorusHilbert};

/// Largest production dimension; the classical grid is `dim^4` cells.
pub const MAX_DIM: usize = 128;

/// Which map drives each degree of freedom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapCase {
    HyperbolicHyperbolic,
    EllipticElliptic,
    HyperbolicElliptic,
    EllipticHyperbolic,
}

impl MapCase {
    pub fn maps(&self, kick: f64) -> (SymplecticMap, SymplecticMap) {
        let h = SymplecticMap::hyperbolic(kick);
        let e = SymplecticMap::elliptic(kick);
        match self {
            Self::HyperbolicHyperbolic => (h, h),
            Self::EllipticElliptic => (e, e),
            Self::HyperbolicElliptic => (h, e),
            Self::EllipticHyperbolic => (e, h),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::HyperbolicHyperbolic => "hh",
            Self::EllipticElliptic => "ee",
            Self::HyperbolicElliptic => "he",
            Self::EllipticHyperbolic => "eh",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "hh" => Some(Self::HyperbolicHyperbolic),
            "ee" => Some(Self::EllipticElliptic),
            "he" => Some(Self::HyperbolicElliptic),
            "eh" => Some(Self::EllipticHyperbolic),
            _ => None,
        }
    }
}

/// Full description of one run.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub case: MapCase,
    pub dim: usize,
    pub k: f64,
    pub kc: f64,
    pub center1: (f64, f64),
    pub center2: (f64, f64),
    pub steps: usize,
    /// Classical entropy is evaluated at times `t % cse_stride == 0`.
    pub cse_stride: usize,
    /// Disable the classical entropy entirely (the classical evolution
    /// is then skipped unless snapshots need it).
    pub cse_enabled: bool,
    pub subsample: usize,
    pub snapshot_times: Vec<usize>,
    pub serial: bool,
}

impl ScenarioConfig {
    pub fn new(case: MapCase, steps: usize) -> Self {
        Self {
            case,
            dim: 64,
            k: 0.25,
            kc: 0.5,
            center1: (0.5, 0.5),
            center2: (0.5, 0.5),
            steps,
            cse_stride: 1,
            cse_enabled: true,
            subsample: 2,
            snapshot_times: Vec::new(),
            serial: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::DimensionTooSmall(self.dim));
        }
        if self.dim > MAX_DIM {
            return Err(Error::DimensionTooLarge(self.dim));
        }
        if self.cse_stride == 0 {
            return Err(Error::ZeroStride);
        }
        if self.subsample == 0 {
            return Err(Error::ZeroSubsample);
        }
        Ok(())
    }

    /// Latest time the classical grid must be advanced to.
    fn classical_horizon(&self) -> Option<usize> {
        let mut horizon = None;
        if self.cse_enabled {
            let last = (self.steps / self.cse_stride) * self.cse_stride;
            horizon = Some(last);
        }
        if let Some(&latest_snap) = self.snapshot_times.iter().max() {
            let snap = latest_snap.min(self.steps);
            horizon = Some(horizon.map_or(snap, |h: usize| h.max(snap)));
        }
        horizon
    }
}

/// One recorded time step.
#[derive(Clone, Copy, Debug)]
pub struct EntropyRecord {
    pub t: usize,
    pub wse_half: f64,
    pub cse_half: Option<f64>,
}

/// Entropy time series of a run, `t = 0..=steps`.
#[derive(Clone, Debug, Default)]
pub struct EntropySeries {
    pub rows: Vec<EntropyRecord>,
}

impl EntropySeries {
    pub fn wse(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.wse_half).collect()
    }

    pub fn wse_at(&self, t: usize) -> Option<f64> {
        self.rows.get(t).map(|r| r.wse_half)
    }

    pub fn cse_at(&self, t: usize) -> Option<f64> {
        self.rows.get(t).and_then(|r| r.cse_half)
    }

    /// Mean of `wse_half` over an inclusive time window.
    pub fn wse_mean(&self, from: usize, to: usize) -> f64 {
        let vals: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.t >= from && r.t <= to)
            .map(|r| r.wse_half)
            .collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    }

    /// First time at which `wse_half` reaches `level`.
    pub fn first_time_reaching(&self, level: f64) -> Option<usize> {
        self.rows.iter().find(|r| r.wse_half >= level).map(|r| r.t)
    }
}

/// Phase-space snapshots taken at one time step.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: usize,
    /// Discrete Wigner function of the mode-1 reduced density matrix,
    /// `2N x 2N`.
    pub wigner_dof1: Array2<f64>,
    /// `(q1, p1)` marginal of the Liouville grid, `Nc x Nc`.
    pub liouville_q1p1: Array2<f64>,
}

/// Everything a run produces.
#[derive(Clone, Debug, Default)]
pub struct ScenarioResult {
    pub series: EntropySeries,
    pub snapshots: Vec<Snapshot>,
    /// Pre-renormalization mass after each classical step taken.
    pub renorm_masses: Vec<f64>,
}

/// Run one scenario to completion.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioResult> {
    config.validate()?;
    let space = TorusHilbert::new(config.dim)?;
    let (map1, map2) = config.case.maps(config.k);

    // Quantum side.
    let u1 = UnitaryPropagator::cat_map(&map1, &space)?;
    let u2 = UnitaryPropagator::cat_map(&map2, &space)?;
    let coupling = coupling_diagonal(config.kc, &space);
    let propagator = UnitaryPropagator::coupled(u1, u2, coupling)?;
    let mut psi = QuantumState::product(
        &coherent_state(config.center1.0, config.center1.1, &space),
        &coherent_state(config.center2.0, config.center2.1, &space),
    )?;

    // Classical side, advanced only as far as anything consumes it.
    let horizon = config.classical_horizon();
    let cm = CoupledMap::new(map1, map2, config.kc);
    let mut grid = if horizon.is_some() {
        Some(LiouvilleGrid::gaussian(
            PhasePoint4D::new(
                config.center1.0,
                config.center1.1,
                config.center2.0,
                config.center2.1,
            ),
            &space,
            config.dim,
        )?)
    } else {
        None
    };
    let evolver = if horizon.is_some() {
        Some(LiouvilleEvolver::new(cm, config.dim, config.subsample)?.with_parallel(!config.serial))
    } else {
        None
    };

    // Large-matrix LAPACK calls run single-threaded; concurrency comes
    // from the job queue instead, which keeps the schedule reproducible.
    let _blas_guard = backend::BlasThreadGuard::single();

    let mut queue = if config.serial {
        CseQueue::inline()
    } else {
        CseQueue::workers(2)
    };

    let mut wse = Vec::with_capacity(config.steps + 1);
    let mut snapshots = Vec::new();
    let mut renorm_masses = Vec::new();

    for t in 0..=config.steps {
        wse.push(wse_pure(&psi)?);

        if config.cse_enabled && t % config.cse_stride == 0 {
            let g = grid.as_ref().expect("classical grid exists while needed");
            queue.submit(t, g.clone())?;
        }

        if config.snapshot_times.contains(&t) {
            let rho1 = reduced_density(&psi, 1)?;
            let wigner = wigner_1dof(&rho1)?;
            let marginal = grid
                .as_ref()
                .map(|g| g.marginal_dof1())
                .unwrap_or_else(|| Array2::zeros((0, 0)));
            snapshots.push(Snapshot {
                t,
                wigner_dof1: wigner.values().to_owned(),
                liouville_q1p1: marginal,
            });
        }

        if t < config.steps {
            psi = propagator.apply(&psi)?;
            let classical_alive = horizon.is_some_and(|h| t < h);
            if classical_alive {
                let (next, mass) = evolver
                    .as_ref()
                    .expect("evolver exists while needed")
                    .step(grid.as_ref().expect("grid exists while needed"))?;
                grid = Some(next);
                renorm_masses.push(mass);
            } else {
                grid = None;
            }
        }
    }

    let cse_values = queue.finish()?;
    let rows = wse
        .into_iter()
        .enumerate()
        .map(|(t, wse_half)| EntropyRecord {
            t,
            wse_half,
            cse_half: cse_values.get(&t).copied(),
        })
        .collect();

    Ok(ScenarioResult {
        series: EntropySeries { rows },
        snapshots,
        renorm_masses,
    })
}

/// Work queue for the classical-entropy singular value decompositions.
/// Inline in serial mode; otherwise a bounded channel feeding worker
/// threads, so at most a few grids are in flight at once.
enum CseQueue {
    Inline {
        results: BTreeMap<usize, f64>,
    },
    Pool {
        sender: Option<mpsc::SyncSender<(usize, LiouvilleGrid)>>,
        receiver: mpsc::Receiver<Result<(usize, f64)>>,
        handles: Vec<thread::JoinHandle<()>>,
        pending: usize,
    },
}

impl CseQueue {
    fn inline() -> Self {
        Self::Inline {
            results: BTreeMap::new(),
        }
    }

    fn workers(count: usize) -> Self {
        let (job_tx, job_rx) = mpsc::sync_channel::<(usize, LiouvilleGrid)>(1);
        let (res_tx, res_rx) = mpsc::channel();
        let job_rx = std::sync::Arc::new(std::sync::Mutex::new(job_rx));
        let handles = (0..count)
            .map(|_| {
                let jobs = std::sync::Arc::clone(&job_rx);
                let results = res_tx.clone();
                thread::spawn(move || loop {
                    let job = {
                        let guard = jobs.lock().expect("queue lock");
                        guard.recv()
                    };
                    match job {
                        Ok((t, grid)) => {
                            let outcome = cse(&grid).map(|h| (t, h));
                            if results.send(outcome).is_err() {
                                return;
                            }
                        }
                        Err(_) => return,
                    }
                })
            })
            .collect();
        Self::Pool {
            sender: Some(job_tx),
            receiver: res_rx,
            handles,
            pending: 0,
        }
    }

    fn submit(&mut self, t: usize, grid: LiouvilleGrid) -> Result<()> {
        match self {
            Self::Inline { results } => {
                results.insert(t, cse(&grid)?);
                Ok(())
            }
            Self::Pool {
                sender, pending, ..
            } => {
                sender
                    .as_ref()
                    .expect("queue accepts jobs until finished")
                    .send((t, grid))
                    .expect("workers outlive submissions");
                *pending += 1;
                Ok(())
            }
        }
    }

    fn finish(self) -> Result<BTreeMap<usize, f64>> {
        match self {
            Self::Inline { results } => Ok(results),
            Self::Pool {
                sender,
                receiver,
                handles,
                pending,
            } => {
                drop(sender);
                let mut results = BTreeMap::new();
                let mut first_error = None;
                for _ in 0..pending {
                    match receiver.recv().expect("workers report every job") {
                        Ok((t, h)) => {
                            results.insert(t, h);
                        }
                        Err(e) => first_error = first_error.or(Some(e)),
                    }
                }
                for handle in handles {
                    handle.join().expect("cse worker panicked");
                }
                match first_error {
                    Some(e) => Err(e),
                    None => Ok(results),
                }
            }
        }
    }
}
