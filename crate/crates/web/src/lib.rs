//! Browser bindings. Every export returns a JSON string; failures come back
//! as `{"error": "..."}` so the page never has to catch.

use hubbard_vqe::ansatz::AnsatzConfig;
use hubbard_vqe::exactdiag::exact_spectrum;
use hubbard_vqe::lattice::LatticeGeometry;
use hubbard_vqe::observables::{build_diagram, ExactEnergies, Quantity};
use hubbard_vqe::vqe::{OptimizerSchedule, VqeSession};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest register the page will simulate.
const MAX_QUBITS: usize = 12;

fn geometry(text: &str) -> Result<LatticeGeometry, String> {
    let g: LatticeGeometry = text.parse().map_err(|e| format!("{e}"))?;
    if g.n_qubits() > MAX_QUBITS {
        return Err(format!("{text} needs {} qubits; the demo stops at {MAX_QUBITS}", g.n_qubits()));
    }
    Ok(g)
}

fn respond<T: Serialize>(r: Result<T, String>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e),
    }
}

fn error_json(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

#[derive(Serialize)]
struct Levels {
    u: Vec<f64>,
    /// `levels[j][i]` is level `j` at `u[i]`.
    levels: Vec<Vec<f64>>,
}

fn exact_levels_impl(geometry_text: &str, n_up: usize, n_down: usize, u_max: f64, steps: usize, k: usize) -> Result<Levels, String> {
    let g = geometry(geometry_text)?;
    if !(u_max.is_finite() && u_max >= 0.0) || steps < 2 || k == 0 {
        return Err("need u_max >= 0, at least 2 steps and k >= 1".into());
    }
    let u: Vec<f64> = (0..steps).map(|i| u_max * i as f64 / (steps - 1) as f64).collect();
    let mut levels: Vec<Vec<f64>> = Vec::new();
    for &ui in &u {
        let s = exact_spectrum(&g, ui, n_up, n_down, k).map_err(|e| e.to_string())?;
        levels.resize(s.energies.len(), Vec::new());
        for (row, e) in levels.iter_mut().zip(s.energies) {
            row.push(e);
        }
    }
    Ok(Levels { u, levels })
}

/// Lowest `k` levels of one sector on `steps` evenly spaced U values in `[0, u_max]`.
#[wasm_bindgen]
pub fn exact_levels(geometry: &str, n_up: usize, n_down: usize, u_max: f64, steps: usize, k: usize) -> String {
    respond(exact_levels_impl(geometry, n_up, n_down, u_max, steps, k))
}

#[derive(Serialize)]
struct Diagram {
    diagram: hubbard_vqe::observables::GapDiagram,
    svg: String,
}

fn gap_diagram_impl(geometry_text: &str, u_grid: &str, quantity: &str) -> Result<Diagram, String> {
    let g = geometry(geometry_text)?;
    let u: Vec<f64> = u_grid
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad U value {s:?}")))
        .collect::<Result<_, _>>()?;
    let quantity = Quantity::ALL
        .into_iter()
        .find(|q| q.name() == quantity)
        .ok_or_else(|| format!("unknown quantity {quantity:?}"))?;
    let diagram = build_diagram(&ExactEnergies, &g, &u, 0, 0).map_err(|e| e.to_string())?;
    let svg = diagram.to_svg(quantity);
    Ok(Diagram { diagram, svg })
}

/// Exact ground-state diagram over N and a comma-separated U grid, with an
/// SVG heat map of `energy`, `charge_gap` or `spin_gap`.
#[wasm_bindgen]
pub fn gap_diagram(geometry: &str, u_grid: &str, quantity: &str) -> String {
    respond(gap_diagram_impl(geometry, u_grid, quantity))
}

#[derive(Serialize)]
struct VqeRun {
    n_params: usize,
    energy: f64,
    exact: f64,
    deviation: f64,
    runs: Vec<f64>,
    evaluations: usize,
}

fn run_vqe_impl(
    geometry_text: &str,
    u: f64,
    n_up: usize,
    n_down: usize,
    layers: usize,
    restarts: usize,
    seed: u64,
) -> Result<VqeRun, String> {
    let g = geometry(geometry_text)?;
    let config = AnsatzConfig { layers, ..AnsatzConfig::default() };
    let schedule = OptimizerSchedule { restarts, seed, ..OptimizerSchedule::default() };
    let mut session = VqeSession::new(&g, u, n_up, n_down, &config, &schedule).map_err(|e| e.to_string())?;
    let n_params = session.circuit().n_params;
    let r = session.solve_level(0).map_err(|e| e.to_string())?.clone();
    let exact = exact_spectrum(&g, u, n_up, n_down, 1).map_err(|e| e.to_string())?.energies[0];
    Ok(VqeRun {
        n_params,
        energy: r.energy,
        exact,
        deviation: r.energy - exact,
        runs: r.runs,
        evaluations: r.evaluations,
    })
}

/// Ground-state VQE for one sector with the default two-stage optimizer.
#[wasm_bindgen]
pub fn run_vqe(geometry: &str, u: f64, n_up: usize, n_down: usize, layers: usize, restarts: usize, seed: u64) -> String {
    respond(run_vqe_impl(geometry, u, n_up, n_down, layers, restarts, seed))
}
