//! Variational driver: energy and orthogonality-penalized objectives, the
//! two-stage (derivative-free, then quasi-Newton) optimization schedule, and
//! multi-restart orchestration for ground and excited levels.

use std::cell::RefCell;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_ansatz, AnsatzConfig, ParameterizedCircuit};
use crate::error::{Error, Result};
use crate::exactdiag::sector_extremes;
use crate::hamiltonian::{build_hubbard, qubit_hamiltonian, PauliOperator, SectorBasis};
use crate::lattice::LatticeGeometry;
use crate::optim::cobyla::{self, CobylaOptions};
use crate::optim::lbfgs::{self, LbfgsOptions};
use crate::optim::{Minimum, Status};
use crate::seed::derive_seed;
use crate::simulator::Statevector;

/// Sector dimension up to which the exact block is diagonalized to size the
/// deflation penalty.
const PENALTY_ORACLE_DIM: usize = 5000;
const FALLBACK_PENALTY: f64 = 10.0;

/// Energy of a parameterized circuit plus `weight * Σ |⟨prior|ψ⟩|²`.
pub struct ObjectiveSpec<'a> {
    pub circuit: &'a ParameterizedCircuit,
    pub hamiltonian: &'a PauliOperator,
    pub priors: &'a [Statevector],
    pub penalty_weight: f64,
}

impl ObjectiveSpec<'_> {
    /// Returns `(objective, energy, overlaps²)` for `params`, reusing `work`.
    pub fn evaluate(&self, params: &[f64], work: &mut Statevector) -> Result<(f64, f64, Vec<f64>)> {
        self.circuit.run_into(params, work)?;
        let energy = work.expectation(self.hamiltonian)?;
        let overlaps = self
            .priors
            .iter()
            .map(|p| p.overlap(work).map(|o: Complex64| o.norm_sqr()))
            .collect::<Result<Vec<_>>>()?;
        let penalty: f64 = overlaps.iter().sum();
        Ok((energy + self.penalty_weight * penalty, energy, overlaps))
    }

    pub fn value(&self, params: &[f64]) -> Result<f64> {
        let mut work = self.circuit.reference_state();
        Ok(self.evaluate(params, &mut work)?.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSchedule {
    /// Objective evaluations for the derivative-free stage.
    pub stage1_iters: usize,
    /// Quasi-Newton iterations for the refinement stage.
    pub stage2_iters: usize,
    pub restarts: usize,
    pub seed: u64,
    pub rho_begin: f64,
    pub rho_end: f64,
    /// Initial angles are drawn uniformly from `[-init_scale, init_scale]`.
    pub init_scale: f64,
    /// Start excited levels from the previous level's optimum instead of a fresh draw.
    pub warm_start: bool,
    /// Overrides the oracle-based deflation weight.
    pub penalty_weight: Option<f64>,
}

impl Default for OptimizerSchedule {
    fn default() -> Self {
        Self {
            stage1_iters: 500,
            stage2_iters: 50,
            restarts: 5,
            seed: 0,
            rho_begin: 0.5,
            rho_end: 1e-4,
            init_scale: 0.1,
            warm_start: false,
            penalty_weight: None,
        }
    }
}

impl OptimizerSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.stage1_iters == 0 || self.stage2_iters == 0 || self.restarts == 0 {
            return Err(Error::Config("stage iterations and restarts must be at least 1".into()));
        }
        Ok(())
    }
}

/// Optimizer stage label used in traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    DerivativeFree,
    QuasiNewton,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracePoint {
    pub restart: usize,
    pub stage: Stage,
    pub iter: usize,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VqeResult {
    pub level: usize,
    /// Plain energy of the best restart.
    pub energy: f64,
    /// Penalized objective of the best restart (equals `energy` at level 0).
    pub objective: f64,
    pub params: Vec<f64>,
    /// Plain energy per restart.
    pub runs: Vec<f64>,
    /// Penalized objective per restart.
    pub objectives: Vec<f64>,
    pub mean: f64,
    pub std_dev: f64,
    pub penalty_weight: f64,
    /// `|⟨prior|ψ⟩|²` for each lower level, best restart.
    pub overlaps_with_priors: Vec<f64>,
    pub evaluations: usize,
    pub line_search_failures: usize,
    #[serde(skip)]
    pub trace: Vec<TracePoint>,
    #[serde(skip)]
    pub state: Option<Statevector>,
}

/// Derivative-free stage.
pub fn stage1_minimize<F>(f: F, x0: &[f64], max_iters: usize, rho_begin: f64, rho_end: f64) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    cobyla::minimize(f, x0, &CobylaOptions { max_evals: max_iters, rho_begin, rho_end })
}

/// Quasi-Newton refinement stage.
pub fn stage2_minimize<F>(f: F, x0: &[f64], max_iters: usize) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    lbfgs::minimize(f, x0, &LbfgsOptions { max_iters, ..Default::default() })
}

/// Sector, Hamiltonian and circuit for one problem, plus the converged states
/// of every level solved so far.
pub struct VqeSession {
    geometry: LatticeGeometry,
    u_over_t: f64,
    n_up: usize,
    n_down: usize,
    schedule: OptimizerSchedule,
    circuit: ParameterizedCircuit,
    hamiltonian: PauliOperator,
    sector_dim: usize,
    penalty_weight: f64,
    record_trace: bool,
    solved: Vec<VqeResult>,
}

impl VqeSession {
    pub fn new(
        geometry: &LatticeGeometry,
        u_over_t: f64,
        n_up: usize,
        n_down: usize,
        config: &AnsatzConfig,
        schedule: &OptimizerSchedule,
    ) -> Result<Self> {
        schedule.validate()?;
        let terms = build_hubbard(geometry, u_over_t)?;
        let hamiltonian = PauliOperator::compile(&qubit_hamiltonian(&terms, geometry.n_qubits())?);
        let circuit = build_ansatz(geometry, n_up, n_down, config)?;
        let sector_dim = SectorBasis::new(geometry, n_up, n_down)?.dim();
        let penalty_weight = match schedule.penalty_weight {
            Some(w) if w > 0.0 => w,
            Some(w) => return Err(Error::Config(format!("penalty weight must be positive, got {w}"))),
            None if sector_dim <= PENALTY_ORACLE_DIM => {
                let (lo, hi) = sector_extremes(geometry, u_over_t, n_up, n_down)?;
                let range = hi - lo;
                if range > 1e-12 { 3.0 * range } else { FALLBACK_PENALTY }
            }
            None => FALLBACK_PENALTY,
        };
        Ok(Self {
            geometry: geometry.clone(),
            u_over_t,
            n_up,
            n_down,
            schedule: *schedule,
            circuit,
            hamiltonian,
            sector_dim,
            penalty_weight,
            record_trace: false,
            solved: Vec::new(),
        })
    }

    pub fn with_trace(mut self, on: bool) -> Self {
        self.record_trace = on;
        self
    }

    pub fn circuit(&self) -> &ParameterizedCircuit {
        &self.circuit
    }

    pub fn hamiltonian(&self) -> &PauliOperator {
        &self.hamiltonian
    }

    pub fn sector_dim(&self) -> usize {
        self.sector_dim
    }

    pub fn penalty_weight(&self) -> f64 {
        self.penalty_weight
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn u_over_t(&self) -> f64 {
        self.u_over_t
    }

    pub fn sector(&self) -> (usize, usize) {
        (self.n_up, self.n_down)
    }

    pub fn results(&self) -> &[VqeResult] {
        &self.solved
    }

    /// Solves `level`, which must be exactly one past the last solved level.
    pub fn solve_level(&mut self, level: usize) -> Result<&VqeResult> {
        if level != self.solved.len() {
            return Err(Error::LevelOrder(format!(
                "level {level} requested but levels 0..{} are solved",
                self.solved.len()
            )));
        }
        if level >= self.sector_dim {
            return Err(Error::InvalidSector(format!(
                "level {level} does not exist in a sector of dimension {}",
                self.sector_dim
            )));
        }
        let priors: Vec<Statevector> = self.solved.iter().filter_map(|r| r.state.clone()).collect();
        let spec = ObjectiveSpec {
            circuit: &self.circuit,
            hamiltonian: &self.hamiltonian,
            priors: &priors,
            penalty_weight: self.penalty_weight,
        };
        let warm = if self.schedule.warm_start { self.solved.last().map(|r| r.params.clone()) } else { None };

        let mut runs = Vec::with_capacity(self.schedule.restarts);
        for restart in 0..self.schedule.restarts {
            let seed = derive_seed(self.schedule.seed, &[level as u64, restart as u64]);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let scale = self.schedule.init_scale;
            let x0: Vec<f64> = match &warm {
                Some(p) => p.iter().map(|v| v + rng.random_range(-scale..=scale)).collect(),
                None => (0..self.circuit.n_params).map(|_| rng.random_range(-scale..=scale)).collect(),
            };
            runs.push(run_once(&spec, &x0, &self.schedule, restart, self.record_trace)?);
        }

        let best = runs
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.objective.total_cmp(&b.1.objective))
            .map(|(i, _)| i)
            .expect("at least one restart");
        let energies: Vec<f64> = runs.iter().map(|r| r.energy).collect();
        let objectives: Vec<f64> = runs.iter().map(|r| r.objective).collect();
        let (mean, std_dev) = mean_std(&energies);
        let evaluations = runs.iter().map(|r| r.evaluations).sum();
        let line_search_failures = runs.iter().filter(|r| r.line_search_failed).count();
        let trace = runs.iter_mut().flat_map(|r| std::mem::take(&mut r.trace)).collect();
        let winner = runs.swap_remove(best);
        let state = self.circuit.run(&winner.params)?;
        self.solved.push(VqeResult {
            level,
            energy: winner.energy,
            objective: winner.objective,
            params: winner.params,
            runs: energies,
            objectives,
            mean,
            std_dev,
            penalty_weight: self.penalty_weight,
            overlaps_with_priors: winner.overlaps,
            evaluations,
            line_search_failures,
            trace,
            state: Some(state),
        });
        Ok(self.solved.last().expect("just pushed"))
    }

    /// Solves levels `0..=max_level` in order.
    pub fn solve_through(&mut self, max_level: usize) -> Result<&[VqeResult]> {
        for level in self.solved.len()..=max_level {
            self.solve_level(level)?;
        }
        Ok(&self.solved)
    }
}

struct Run {
    params: Vec<f64>,
    objective: f64,
    energy: f64,
    overlaps: Vec<f64>,
    evaluations: usize,
    line_search_failed: bool,
    trace: Vec<TracePoint>,
}

fn run_once(spec: &ObjectiveSpec<'_>, x0: &[f64], schedule: &OptimizerSchedule, restart: usize, record: bool) -> Result<Run> {
    let work = RefCell::new(spec.circuit.reference_state());
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let objective = |x: &[f64]| match spec.evaluate(x, &mut work.borrow_mut()) {
        Ok((v, _, _)) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let first = stage1_minimize(&objective, x0, schedule.stage1_iters, schedule.rho_begin, schedule.rho_end);
    let first = match (first, failure.borrow_mut().take()) {
        (_, Some(e)) | (Err(e), None) => return Err(e),
        (Ok(m), None) => m,
    };
    let second = stage2_minimize(&objective, &first.x, schedule.stage2_iters);
    let second = match (second, failure.borrow_mut().take()) {
        (_, Some(e)) | (Err(e), None) => return Err(e),
        (Ok(m), None) => m,
    };
    // stage 2 starts from stage 1's best point, so its result is never worse
    let mut trace = Vec::new();
    if record {
        trace.extend(first.history.iter().enumerate().map(|(i, &v)| TracePoint {
            restart,
            stage: Stage::DerivativeFree,
            iter: i,
            objective: v,
        }));
        trace.extend(second.history.iter().enumerate().map(|(i, &v)| TracePoint {
            restart,
            stage: Stage::QuasiNewton,
            iter: i,
            objective: v,
        }));
    }
    let mut work = spec.circuit.reference_state();
    let (objective, energy, overlaps) = spec.evaluate(&second.x, &mut work)?;
    Ok(Run {
        params: second.x,
        objective,
        energy,
        overlaps,
        evaluations: first.evaluations + second.evaluations,
        line_search_failed: second.status == Status::LineSearchFailed,
        trace,
    })
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Convenience wrapper: solves levels `0..=level` and returns the last one.
pub fn solve_level(
    geometry: &LatticeGeometry,
    u_over_t: f64,
    n_up: usize,
    n_down: usize,
    level: usize,
    config: &AnsatzConfig,
    schedule: &OptimizerSchedule,
) -> Result<VqeResult> {
    let mut session = VqeSession::new(geometry, u_over_t, n_up, n_down, config, schedule)?;
    session.solve_through(level)?;
    Ok(session.solved.pop().expect("solved at least one level"))
}
