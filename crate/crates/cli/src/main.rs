mod config;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use hubbard_vqe::ansatz::{build_ansatz, AnsatzConfig};
use hubbard_vqe::exactdiag::{exact_spectrum, SpectrumResult};
use hubbard_vqe::observables::{
    build_diagram, error_summary, ErrorSummary, ExactEnergies, GapDiagram, Quantity, SectorEnergies, VqeEnergies,
};
use hubbard_vqe::vqe::{OptimizerSchedule, VqeResult, VqeSession};
use hubbard_vqe::Error;
use serde::Serialize;

use crate::config::{Format, RunArgs, RunConfig, SourceChoice};

/// Sector dimension up to which `vqe` also reports exact reference energies.
const EXACT_REFERENCE_DIM: usize = 5000;

#[derive(Debug, Parser)]
#[command(name = "hubbard-vqe", version, about = "Variational and exact energies of small Fermi-Hubbard lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lowest eigenvalues of one sector (or every split of --n-electrons).
    Exact(RunArgs),
    /// Ground and excited energies of one sector by VQE.
    Vqe(RunArgs),
    /// Charge- and spin-gap diagrams over electron number and U/t.
    Sweep(RunArgs),
    /// One line per circuit slot: kind, targets, parameter indices.
    CircuitDump(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Exact(a) => RunConfig::resolve(a).and_then(|c| cmd_exact(&c)),
        Command::Vqe(a) => RunConfig::resolve(a).and_then(|c| cmd_vqe(&c)),
        Command::Sweep(a) => RunConfig::resolve(a).and_then(|c| cmd_sweep(&c)),
        Command::CircuitDump(a) => RunConfig::resolve(a).and_then(|c| cmd_circuit_dump(&c)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => report(&err),
    }
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

/// Prints a structured error and maps it to an exit code: 3 for numerical
/// failures, 2 for everything else.
fn report(err: &anyhow::Error) -> ExitCode {
    let core = err.chain().find_map(|e| e.downcast_ref::<Error>());
    let (kind, code) = match core {
        Some(Error::NonFiniteObjective { .. }) => ("numerical", 3),
        Some(Error::TooLarge { .. }) => ("too_large", 2),
        Some(Error::InvalidSector(_)) => ("invalid_sector", 2),
        Some(Error::InvalidGeometry(_)) => ("invalid_geometry", 2),
        Some(Error::LevelOrder(_)) => ("level_order", 2),
        Some(_) | None => ("config", 2),
    };
    let doc = ErrorDoc { error: ErrorBody { kind, message: format!("{err:#}") } };
    println!("{}", serde_json::to_string(&doc).expect("plain strings serialize"));
    eprintln!("error: {err:#}");
    ExitCode::from(code)
}

fn emit(config: &RunConfig, text: &str) -> anyhow::Result<()> {
    match &config.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

#[derive(Serialize)]
struct ExactDoc {
    geometry: String,
    u: f64,
    spectra: Vec<SpectrumResult>,
}

fn cmd_exact(config: &RunConfig) -> anyhow::Result<()> {
    let u = config.require_u()?;
    let sites = config.geometry.n_sites();
    let sectors: Vec<(usize, usize)> = match (config.sector, config.n_electrons) {
        (Some(s), _) => vec![s],
        (None, Some(n)) => {
            if n > 2 * sites {
                bail!(Error::InvalidSector(format!("{n} electrons on {sites} sites")));
            }
            (0..=n.min(sites)).rev().filter(|up| n - up <= sites).map(|up| (up, n - up)).collect()
        }
        (None, None) => bail!("--sector or --n-electrons is required"),
    };
    let spectra = sectors
        .iter()
        .map(|&(up, down)| exact_spectrum(&config.geometry, u, up, down, config.k))
        .collect::<hubbard_vqe::Result<Vec<_>>>()?;
    let text = match config.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&ExactDoc { geometry: config.geometry.tag(), u, spectra })?,
        Format::Csv => {
            let mut out = String::from("sector_up,sector_down,level,energy\n");
            for s in &spectra {
                for (level, e) in s.energies.iter().enumerate() {
                    writeln!(out, "{},{},{level},{e}", s.sector.0, s.sector.1)?;
                }
            }
            out
        }
        Format::Svg => bail!("exact supports csv and json output"),
    };
    emit(config, &text)
}

#[derive(Serialize)]
struct LevelReport<'a> {
    #[serde(flatten)]
    result: &'a VqeResult,
    exact: Option<f64>,
    deviation: Option<f64>,
}

#[derive(Serialize)]
struct VqeDoc<'a> {
    geometry: String,
    u: f64,
    sector: (usize, usize),
    sector_dim: usize,
    n_params: usize,
    ansatz: AnsatzConfig,
    schedule: OptimizerSchedule,
    levels: Vec<LevelReport<'a>>,
}

fn cmd_vqe(config: &RunConfig) -> anyhow::Result<()> {
    let u = config.require_u()?;
    let (n_up, n_down) = config.require_sector()?;
    if config.levels == 0 {
        bail!("--levels must be at least 1");
    }
    let mut session = VqeSession::new(&config.geometry, u, n_up, n_down, &config.ansatz, &config.schedule)?
        .with_trace(config.trace.is_some());
    let sector_dim = session.sector_dim();
    let n_params = session.circuit().n_params;
    let results = session.solve_through(config.levels - 1)?;
    let exact = if sector_dim <= EXACT_REFERENCE_DIM {
        Some(exact_spectrum(&config.geometry, u, n_up, n_down, config.levels)?.energies)
    } else {
        None
    };
    let reference = |level: usize| exact.as_ref().and_then(|e| e.get(level).copied());

    if let Some(path) = &config.trace {
        let mut csv = String::from("level,restart,stage,iter,objective\n");
        for r in results {
            for t in &r.trace {
                writeln!(csv, "{},{},{:?},{},{}", r.level, t.restart, t.stage, t.iter, t.objective)?;
            }
        }
        std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
    }

    let text = match config.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&VqeDoc {
            geometry: config.geometry.tag(),
            u,
            sector: (n_up, n_down),
            sector_dim,
            n_params,
            ansatz: config.ansatz,
            schedule: config.schedule,
            levels: results
                .iter()
                .map(|r| LevelReport {
                    result: r,
                    exact: reference(r.level),
                    deviation: reference(r.level).map(|e| r.energy - e),
                })
                .collect(),
        })?,
        Format::Csv => {
            let mut out = String::from("level,energy,exact,deviation,mean,std_dev,max_prior_overlap\n");
            for r in results {
                let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                let overlap = r.overlaps_with_priors.iter().copied().fold(0.0, f64::max);
                writeln!(
                    out,
                    "{},{},{},{},{},{},{overlap}",
                    r.level,
                    r.energy,
                    opt(reference(r.level)),
                    opt(reference(r.level).map(|e| r.energy - e)),
                    r.mean,
                    r.std_dev
                )?;
            }
            out
        }
        Format::Svg => bail!("vqe supports csv and json output"),
    };
    emit(config, &text)
}

#[derive(Serialize)]
struct DiagramDoc<'a> {
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    ansatz: Option<AnsatzConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    schedule: Option<OptimizerSchedule>,
    #[serde(flatten)]
    diagram: &'a GapDiagram,
}

#[derive(Serialize)]
struct SweepDoc<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<DiagramDoc<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vqe: Option<DiagramDoc<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    errors: Option<ErrorSummary>,
}

fn diagram_doc<'a>(config: &RunConfig, diagram: &'a GapDiagram, vqe: bool) -> DiagramDoc<'a> {
    DiagramDoc {
        seed: config.schedule.seed,
        ansatz: vqe.then_some(config.ansatz),
        schedule: vqe.then_some(config.schedule),
        diagram,
    }
}

/// Error table in the layout of the paper's summary: one row per quantity.
fn summary_table(summary: &ErrorSummary) -> String {
    let mut out = format!("{:<14}{:>12}{:>12}{:>12}{:>8}\n", "quantity", "MAE", "MSE", "MPE(%)", "cells");
    for (name, m) in [
        ("ground_energy", summary.energy),
        ("charge_gap", summary.charge_gap),
        ("spin_gap", summary.spin_gap),
    ] {
        let _ = writeln!(out, "{name:<14}{:>12.6}{:>12.6}{:>12.4}{:>8}", m.mae, m.mse, m.mpe, m.count);
    }
    out
}

fn write_diagram(dir: &Path, name: &str, doc: &DiagramDoc<'_>, formats: &[Format]) -> anyhow::Result<()> {
    for format in formats {
        match format {
            Format::Csv => std::fs::write(dir.join(format!("{name}.csv")), doc.diagram.to_csv())?,
            Format::Json => std::fs::write(dir.join(format!("{name}.json")), to_json(doc)?)?,
            Format::Svg => {
                for q in Quantity::ALL {
                    std::fs::write(dir.join(format!("{name}_{}.svg", q.name())), doc.diagram.to_svg(q))?;
                }
            }
        }
    }
    Ok(())
}

fn cmd_sweep(config: &RunConfig) -> anyhow::Result<()> {
    let want_exact = matches!(config.source, SourceChoice::Exact | SourceChoice::Both);
    let want_vqe = matches!(config.source, SourceChoice::Vqe | SourceChoice::Both);
    let run = |source: &dyn SectorEnergies| {
        build_diagram(source, &config.geometry, &config.u_grid, config.level, config.workers)
    };
    let exact = want_exact.then(|| run(&ExactEnergies)).transpose()?;
    let vqe_source = VqeEnergies { config: config.ansatz, schedule: config.schedule };
    let vqe = want_vqe.then(|| run(&vqe_source)).transpose()?;
    let errors = match (&vqe, &exact) {
        (Some(v), Some(e)) => Some(error_summary(v, e)),
        _ => None,
    };
    for d in exact.iter().chain(&vqe) {
        for failure in &d.failures {
            eprintln!("warning: {failure}");
        }
    }
    let doc = SweepDoc {
        exact: exact.as_ref().map(|d| diagram_doc(config, d, false)),
        vqe: vqe.as_ref().map(|d| diagram_doc(config, d, true)),
        errors,
    };

    match &config.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let formats = match config.format {
                Some(f) => vec![f],
                None => vec![Format::Csv, Format::Json, Format::Svg],
            };
            if let Some(d) = &doc.exact {
                write_diagram(dir, "exact", d, &formats)?;
            }
            if let Some(d) = &doc.vqe {
                write_diagram(dir, "vqe", d, &formats)?;
            }
            if let Some(s) = &doc.errors {
                std::fs::write(dir.join("errors.json"), to_json(s)?)?;
                print!("{}", summary_table(s));
            }
            Ok(())
        }
        None => match config.format.unwrap_or(Format::Json) {
            Format::Json => {
                print!("{}", to_json(&doc)?);
                Ok(())
            }
            Format::Csv => {
                let mut text = String::new();
                if let (Some(_), Some(_)) = (&doc.exact, &doc.vqe) {
                    bail!("csv output of both sources needs --out DIR (or pick one with --source)");
                }
                for d in doc.exact.iter().chain(&doc.vqe) {
                    text.push_str(&d.diagram.to_csv());
                }
                print!("{text}");
                Ok(())
            }
            Format::Svg => bail!("svg output needs --out DIR"),
        },
    }
}

fn cmd_circuit_dump(config: &RunConfig) -> anyhow::Result<()> {
    let (n_up, n_down) = config.require_sector()?;
    let circuit = build_ansatz(&config.geometry, n_up, n_down, &config.ansatz)?;
    let text = match config.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&circuit)?,
        Format::Csv => circuit.summary(),
        Format::Svg => bail!("circuit-dump supports text (csv) and json output"),
    };
    emit(config, &text)
}
