//! Charge and spin gaps over `(N, U/t)` grids, from exact or variational
//! sector energies.
//!
//! For a fixed electron number `N` the ground energy is the minimum over all
//! splits `N = n_up + n_down`. The charge gap is the second difference
//! `E(N+1) + E(N-1) - 2E(N)`; the spin gap is the distance from the lowest
//! sector energy to the next one that is not degenerate with it.

use std::collections::BTreeMap;
use std::fmt::Write as _;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzConfig;
use crate::error::{Error, Result};
use crate::exactdiag::exact_spectrum;
use crate::lattice::LatticeGeometry;
use crate::seed::derive_seed;
use crate::vqe::{OptimizerSchedule, VqeSession};

pub const DEFAULT_U_GRID: [f64; 9] = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergySource {
    Exact,
    Vqe,
}

/// Supplies the `level`-th energy of one `(n_up, n_down)` block, or `None`
/// when the block has too few states.
pub trait SectorEnergies: Sync {
    fn source(&self) -> EnergySource;

    fn energy(&self, geometry: &LatticeGeometry, u: f64, n_up: usize, n_down: usize, level: usize) -> Result<Option<f64>>;

    /// Energies closer than this count as degenerate in the spin gap.
    fn degeneracy_tol(&self) -> f64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExactEnergies;

impl SectorEnergies for ExactEnergies {
    fn source(&self) -> EnergySource {
        EnergySource::Exact
    }

    fn energy(&self, geometry: &LatticeGeometry, u: f64, n_up: usize, n_down: usize, level: usize) -> Result<Option<f64>> {
        let s = exact_spectrum(geometry, u, n_up, n_down, level + 1)?;
        Ok(s.energies.get(level).copied())
    }

    fn degeneracy_tol(&self) -> f64 {
        1e-8
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VqeEnergies {
    pub config: AnsatzConfig,
    pub schedule: OptimizerSchedule,
}

impl SectorEnergies for VqeEnergies {
    fn source(&self) -> EnergySource {
        EnergySource::Vqe
    }

    fn energy(&self, geometry: &LatticeGeometry, u: f64, n_up: usize, n_down: usize, level: usize) -> Result<Option<f64>> {
        let mut schedule = self.schedule;
        schedule.seed = derive_seed(self.schedule.seed, &[u.to_bits(), n_up as u64, n_down as u64]);
        let mut session = VqeSession::new(geometry, u, n_up, n_down, &self.config, &schedule)?;
        if level >= session.sector_dim() {
            return Ok(None);
        }
        let results = session.solve_through(level)?;
        Ok(Some(results[level].energy))
    }

    fn degeneracy_tol(&self) -> f64 {
        1e-3
    }
}

/// Sector energies at one `U`, keyed by `(n_up, n_down)`.
pub type SectorTable = BTreeMap<(usize, usize), Option<f64>>;

fn splits(geometry: &LatticeGeometry, n: usize) -> impl Iterator<Item = (usize, usize)> {
    let sites = geometry.n_sites();
    (0..=sites.min(n)).rev().filter_map(move |up| (n - up <= sites).then_some((up, n - up)))
}

fn check_n(geometry: &LatticeGeometry, n: usize) -> Result<()> {
    if n == 0 || n > geometry.n_qubits() {
        return Err(Error::InvalidSector(format!("N = {n} outside 1..={}", geometry.n_qubits())));
    }
    Ok(())
}

/// Lowest energy over all spin splits of `n`, ties broken toward the smallest
/// `|n_up - n_down|`, then the larger `n_up`.
pub fn ground_from_table(table: &SectorTable, geometry: &LatticeGeometry, n: usize, tol: f64) -> Option<(f64, (usize, usize))> {
    let mut best: Option<(f64, (usize, usize))> = None;
    for (up, down) in splits(geometry, n) {
        let Some(Some(e)) = table.get(&(up, down)) else { continue };
        best = match best {
            None => Some((*e, (up, down))),
            Some((be, (bu, bd))) => {
                let better = if (e - be).abs() <= tol {
                    let (imb, best_imb) = (up.abs_diff(down), bu.abs_diff(bd));
                    imb < best_imb || (imb == best_imb && up > bu)
                } else {
                    *e < be
                };
                if better { Some((*e, (up, down))) } else { best }
            }
        };
    }
    best
}

/// Gap from the lowest split of `n` to the next non-degenerate one; each
/// spin-flip pair counts once.
pub fn spin_gap_from_table(table: &SectorTable, geometry: &LatticeGeometry, n: usize, tol: f64) -> Option<f64> {
    let mut energies: Vec<f64> = splits(geometry, n)
        .filter(|(up, down)| up >= down)
        .filter_map(|key| table.get(&key).copied().flatten())
        .collect();
    energies.sort_by(f64::total_cmp);
    let lowest = *energies.first()?;
    energies.iter().find(|&&e| e > lowest + tol).map(|e| e - lowest)
}

pub fn charge_gap_from_table(table: &SectorTable, geometry: &LatticeGeometry, n: usize, tol: f64) -> Option<f64> {
    if n < 2 || n + 1 > geometry.n_qubits() {
        return None;
    }
    let e = |k| ground_from_table(table, geometry, k, tol).map(|(e, _)| e);
    Some(e(n + 1)? + e(n - 1)? - 2.0 * e(n)?)
}

/// Sector energies needed for electron numbers `ns` at one `u`.
pub fn sector_table(
    source: &dyn SectorEnergies,
    geometry: &LatticeGeometry,
    u: f64,
    ns: &[usize],
    level: usize,
) -> Result<SectorTable> {
    let mut table = SectorTable::new();
    for &n in ns {
        for (up, down) in splits(geometry, n) {
            if table.contains_key(&(up, down)) {
                continue;
            }
            let e = source.energy(geometry, u, up, down, level)?;
            table.insert((up, down), e);
        }
    }
    Ok(table)
}

pub fn sector_ground(
    source: &dyn SectorEnergies,
    geometry: &LatticeGeometry,
    u: f64,
    n: usize,
) -> Result<Option<(f64, (usize, usize))>> {
    check_n(geometry, n)?;
    let table = sector_table(source, geometry, u, &[n], 0)?;
    Ok(ground_from_table(&table, geometry, n, source.degeneracy_tol()))
}

/// `None` marks an undefined cell (boundary `N`).
pub fn charge_gap(source: &dyn SectorEnergies, geometry: &LatticeGeometry, u: f64, n: usize) -> Result<Option<f64>> {
    check_n(geometry, n)?;
    if n < 2 || n + 1 > geometry.n_qubits() {
        return Ok(None);
    }
    let table = sector_table(source, geometry, u, &[n - 1, n, n + 1], 0)?;
    Ok(charge_gap_from_table(&table, geometry, n, source.degeneracy_tol()))
}

pub fn spin_gap(source: &dyn SectorEnergies, geometry: &LatticeGeometry, u: f64, n: usize) -> Result<Option<f64>> {
    check_n(geometry, n)?;
    let table = sector_table(source, geometry, u, &[n], 0)?;
    Ok(spin_gap_from_table(&table, geometry, n, source.degeneracy_tol()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub n: usize,
    pub u: f64,
    pub sector: Option<(usize, usize)>,
    pub energy: Option<f64>,
    pub charge_gap: Option<f64>,
    pub spin_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorEntry {
    pub u: f64,
    pub n_up: usize,
    pub n_down: usize,
    pub energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapDiagram {
    pub geometry: String,
    pub source: EnergySource,
    pub level: usize,
    pub u_values: Vec<f64>,
    pub cells: Vec<Cell>,
    /// Every sector energy the grid was built from (spin-flip partners included).
    pub sectors: Vec<SectorEntry>,
    /// Per-sector failures; the affected cells are left undefined.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Energy,
    ChargeGap,
    SpinGap,
}

impl Quantity {
    pub const ALL: [Quantity; 3] = [Quantity::Energy, Quantity::ChargeGap, Quantity::SpinGap];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Energy => "energy",
            Quantity::ChargeGap => "charge_gap",
            Quantity::SpinGap => "spin_gap",
        }
    }

    fn of(self, cell: &Cell) -> Option<f64> {
        match self {
            Quantity::Energy => cell.energy,
            Quantity::ChargeGap => cell.charge_gap,
            Quantity::SpinGap => cell.spin_gap,
        }
    }
}

/// Fills the full `N x U` grid. Sector energies are computed once per
/// spin-flip pair (the Hamiltonian is symmetric under it) and fanned out over
/// `workers` threads; results are merged by cell coordinate, so output does
/// not depend on the worker count.
pub fn build_diagram(
    source: &dyn SectorEnergies,
    geometry: &LatticeGeometry,
    u_values: &[f64],
    level: usize,
    workers: usize,
) -> Result<GapDiagram> {
    if u_values.is_empty() {
        return Err(Error::Config("U grid is empty".into()));
    }
    if let Some(bad) = u_values.iter().find(|u| !u.is_finite() || **u < 0.0) {
        return Err(Error::UnsupportedParameter(format!("U/t = {bad}")));
    }
    let sites = geometry.n_sites();
    let tasks: Vec<(usize, usize, usize)> = (0..u_values.len())
        .flat_map(|ui| {
            (0..=sites).flat_map(move |up| (0..=up).map(move |down| (ui, up, down)))
        })
        .filter(|&(_, up, down)| up + down > 0)
        .collect();

    let energy = |&(ui, up, down): &(usize, usize, usize)| source.energy(geometry, u_values[ui], up, down, level);
    #[cfg(feature = "parallel")]
    let energies: Vec<Result<Option<f64>>> = {
        let run = || tasks.par_iter().map(energy).collect();
        if workers > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::Config(format!("worker pool: {e}")))?
                .install(run)
        } else {
            run()
        }
    };
    #[cfg(not(feature = "parallel"))]
    let energies: Vec<Result<Option<f64>>> = {
        let _ = workers;
        tasks.iter().map(energy).collect()
    };

    let mut tables = vec![SectorTable::new(); u_values.len()];
    let mut failures = Vec::new();
    for (&(ui, up, down), e) in tasks.iter().zip(energies) {
        let e = match e {
            Ok(v) => v,
            Err(err) => {
                failures.push(format!("U={} sector ({up},{down}): {err}", u_values[ui]));
                None
            }
        };
        tables[ui].insert((up, down), e);
        tables[ui].insert((down, up), e);
    }

    let tol = source.degeneracy_tol();
    let mut cells = Vec::new();
    let mut sectors = Vec::new();
    for (ui, &u) in u_values.iter().enumerate() {
        let table = &tables[ui];
        for (&(n_up, n_down), &energy) in table {
            sectors.push(SectorEntry { u, n_up, n_down, energy });
        }
        for n in 1..=geometry.n_qubits() {
            let ground = ground_from_table(table, geometry, n, tol);
            cells.push(Cell {
                n,
                u,
                sector: ground.map(|(_, s)| s),
                energy: ground.map(|(e, _)| e),
                charge_gap: charge_gap_from_table(table, geometry, n, tol),
                spin_gap: spin_gap_from_table(table, geometry, n, tol),
            });
        }
    }
    Ok(GapDiagram {
        geometry: geometry.tag(),
        source: source.source(),
        level,
        u_values: u_values.to_vec(),
        cells,
        sectors,
        failures,
    })
}

impl GapDiagram {
    pub fn cell(&self, n: usize, u: f64) -> Option<&Cell> {
        self.cells.iter().find(|c| c.n == n && c.u == u)
    }

    pub const CSV_HEADER: &'static str = "N,U,sector_up,sector_down,energy,charge_gap,spin_gap,defined_flags";

    /// One row per cell. `defined_flags` lists which of energy, charge gap and
    /// spin gap are defined as three `0`/`1` characters; undefined values are
    /// left empty.
    pub fn to_csv(&self) -> String {
        fn opt(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            let (su, sd) = c.sector.map(|(a, b)| (a.to_string(), b.to_string())).unwrap_or_default();
            let flags: String = [c.energy, c.charge_gap, c.spin_gap]
                .iter()
                .map(|v| if v.is_some() { '1' } else { '0' })
                .collect();
            let _ = writeln!(
                out,
                "{},{},{su},{sd},{},{},{},{flags}",
                c.n,
                c.u,
                opt(c.energy),
                opt(c.charge_gap),
                opt(c.spin_gap)
            );
        }
        out
    }

    /// Heatmap of one quantity: `N` along x, `U` along y (growing upward),
    /// linear grey-to-red scale, undefined cells hatched grey.
    pub fn to_svg(&self, quantity: Quantity) -> String {
        let n_max = self.cells.iter().map(|c| c.n).max().unwrap_or(0);
        let (cw, ch, left, top) = (48.0, 32.0, 56.0, 40.0);
        let width = left + cw * n_max as f64 + 20.0;
        let height = top + ch * self.u_values.len() as f64 + 60.0;
        let values: Vec<f64> = self.cells.iter().filter_map(|c| quantity.of(c)).collect();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(
            svg,
            r#"<text x="{left}" y="16">{} {} level {} ({:?})</text>"#,
            self.geometry,
            quantity.name(),
            self.level,
            self.source
        );
        for (ui, &u) in self.u_values.iter().enumerate() {
            let row = self.u_values.len() - 1 - ui;
            let y = top + ch * row as f64;
            let _ = writeln!(svg, r#"<text x="4" y="{}">U={u}</text>"#, y + ch * 0.6);
            for n in 1..=n_max {
                let x = left + cw * (n - 1) as f64;
                let value = self.cell(n, u).and_then(|c| quantity.of(c));
                let (fill, label) = match value {
                    Some(v) => (color(v, lo, hi), format!("{v:.2}")),
                    None => ("#dddddd".to_string(), "-".to_string()),
                };
                let _ = writeln!(
                    svg,
                    r#"<rect x="{x}" y="{y}" width="{cw}" height="{ch}" fill="{fill}" stroke="white"/><text x="{}" y="{}" text-anchor="middle">{label}</text>"#,
                    x + cw / 2.0,
                    y + ch * 0.6
                );
            }
        }
        let base = top + ch * self.u_values.len() as f64;
        for n in 1..=n_max {
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" text-anchor="middle">N={n}</text>"#,
                left + cw * (n as f64 - 0.5),
                base + 14.0
            );
        }
        if values.is_empty() {
            let _ = writeln!(svg, r#"<text x="{left}" y="{}">no defined cells</text>"#, base + 36.0);
        } else {
            let _ = writeln!(svg, r#"<text x="{left}" y="{}">min {lo:.4}  max {hi:.4}</text>"#, base + 36.0);
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn color(v: f64, lo: f64, hi: f64) -> String {
    let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
    let r = (230.0 - 10.0 * t) as u8;
    let g = (230.0 - 190.0 * t) as u8;
    let b = (230.0 - 190.0 * t) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorMetrics {
    pub mae: f64,
    pub mse: f64,
    /// Percentage difference between the grid averages.
    pub mpe: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorSummary {
    pub energy: ErrorMetrics,
    pub charge_gap: ErrorMetrics,
    pub spin_gap: ErrorMetrics,
}

/// Cellwise comparison over cells defined in both diagrams.
pub fn error_summary(approx: &GapDiagram, reference: &GapDiagram) -> ErrorSummary {
    let metrics = |q: Quantity| {
        let pairs: Vec<(f64, f64)> = approx
            .cells
            .iter()
            .filter_map(|c| {
                let r = reference.cell(c.n, c.u)?;
                Some((q.of(c)?, q.of(r)?))
            })
            .collect();
        let count = pairs.len();
        if count == 0 {
            return ErrorMetrics { mae: 0.0, mse: 0.0, mpe: 0.0, count };
        }
        let k = count as f64;
        let mae = pairs.iter().map(|(a, b)| (a - b).abs()).sum::<f64>() / k;
        let mse = pairs.iter().map(|(a, b)| (a - b).powi(2)).sum::<f64>() / k;
        let mean_a = pairs.iter().map(|p| p.0).sum::<f64>() / k;
        let mean_r = pairs.iter().map(|p| p.1).sum::<f64>() / k;
        let mpe = if mean_r.abs() > 0.0 { 100.0 * (mean_a - mean_r).abs() / mean_r.abs() } else { 0.0 };
        ErrorMetrics { mae, mse, mpe, count }
    };
    ErrorSummary {
        energy: metrics(Quantity::Energy),
        charge_gap: metrics(Quantity::ChargeGap),
        spin_gap: metrics(Quantity::SpinGap),
    }
}
