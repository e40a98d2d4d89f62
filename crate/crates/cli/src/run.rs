use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use qilab::energy::{eta_pair, eta_spec, evolved_profile, static_profile};
use qilab::pointsplit::{
    default_alpha_schedule, delta_e_closed, delta_e_mode_numeric, delta_e_pointsplit, mode_spec,
    split_spec, EnergyShiftResult, MassiveDeltaConfig, PointSplitReport,
};
use qilab::qi::{
    average_spec, conservation_check, quantum_interest_scan, spatial_qi_experiment,
    temporal_qi_experiment, ViolationReport,
};
use qilab::sampling::{xi_min, xi_min_analytic, xi_min_reference, xi_spec, SamplingFunction};
use qilab::profile::format_float;
use qilab::PotentialConfig;

use crate::args::{parse_grid, BoundKind, Cli, Command, WellArgs};
use crate::manifest::{Manifest, Outputs, MANIFEST_FILE};
use crate::Failure;

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Replay { manifest } => replay(manifest),
        cmd => {
            let (outputs, status) = execute(cmd)?;
            let manifest = outputs.write(&cli.out, cmd)?;
            println!("wrote {} files and {MANIFEST_FILE} to {}", manifest.outputs.len(), cli.out.display());
            status
        }
    }
}

/// Run one command. The inner result carries late failures, such as a
/// non-converged route, that should still leave outputs on disk.
fn execute(cmd: &Command) -> Result<(Outputs, Result<()>)> {
    let mut out = Outputs::default();
    let mut status = Ok(());
    match cmd {
        Command::StaticProfile { well } => {
            let cfg = config(well)?;
            let pair = eta_pair(&cfg)?;
            out.spec("eta", eta_spec());
            out.add_json("eta.json", &EtaSummary::new(&cfg, pair.eta1, pair.eta2))?;
            let profile = static_profile(&cfg)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["x_lo", "x_hi", "density"])?;
            for row in profile.csv_rows() {
                w.write_record(&row)?;
            }
            out.add("profile.csv", w.into_inner()?);
            println!("eta1 = {}, eta2 = {}, eta = {}", pair.eta1, pair.eta2, pair.eta());
        }
        Command::Evolve { well, t_list } => {
            let cfg = config(well)?;
            out.spec("eta", eta_spec());
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["t", "x_lo", "x_hi", "density"])?;
            for &t in t_list {
                for [lo, hi, v] in evolved_profile(&cfg, t)?.csv_rows() {
                    w.write_record([format_float(t), lo, hi, v])?;
                }
            }
            out.add("profiles.csv", w.into_inner()?);
            let report = conservation_check(&cfg, t_list)?;
            println!("total energy {} at every t: {}", report.expected, report.exact);
            out.add_json("conservation.json", &report)?;
        }
        Command::QiSpatial { well, tau_grid } => {
            let cfg = config(well)?;
            let report = spatial_qi_experiment(&cfg, &grid(tau_grid)?)?;
            violation_outputs(&mut out, &report)?;
        }
        Command::QiTemporal { well, tau_grid } => {
            let cfg = config(well)?;
            let report = temporal_qi_experiment(&cfg, &grid(tau_grid)?)?;
            violation_outputs(&mut out, &report)?;
        }
        Command::QuantumInterest { well, t, window } => {
            let cfg = config(well)?;
            let &[lo, hi] = window.as_slice() else {
                return Err(Failure::Usage(format!("--window takes two values, got {}", window.len())).into());
            };
            out.spec("eta", eta_spec());
            let report = quantum_interest_scan(&cfg, *t, (lo, hi))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["start", "end", "width", "energy", "min_density"])?;
            for p in &report.pulses {
                w.write_record([p.start, p.end, p.width, p.energy, p.min_density].map(format_float))?;
            }
            out.add("pulses.csv", w.into_inner()?);
            out.add_json("quantum_interest.json", &report)?;
            println!(
                "{} negative pulses, {} positive intervals in [{lo}, {hi}]",
                report.pulses.len(),
                report.positive_intervals.len()
            );
        }
        Command::RegCompare { m, lambda_grid, alpha_schedule } => {
            status = reg_compare(&mut out, *m, lambda_grid, alpha_schedule.as_deref())?;
        }
        Command::Bound { kind, tau } => {
            let rho = match kind {
                BoundKind::Lorentzian => SamplingFunction::lorentzian(*tau)?,
                BoundKind::Quartic => SamplingFunction::quartic(*tau)?,
            };
            out.spec("xi_min", xi_spec());
            let q = xi_min(&rho)?;
            let summary = BoundSummary {
                kind: *kind,
                tau: *tau,
                closed_form: xi_min_reference(&rho),
                analytic: xi_min_analytic(&rho),
                quadrature: q.value,
                quadrature_error: q.error,
                converged: q.converged,
            };
            println!("closed form   {}", summary.closed_form);
            println!("analytic      {}", summary.analytic);
            println!("quadrature    {} (+- {:e})", summary.quadrature, summary.quadrature_error);
            out.add_json("bound.json", &summary)?;
            if !q.converged {
                status = Err(Failure::Numeric("bound quadrature did not converge".into()).into());
            }
        }
        Command::Replay { .. } => unreachable!("handled by dispatch"),
    }
    Ok((out, status))
}

fn config(well: &WellArgs) -> Result<PotentialConfig> {
    Ok(well.config()?)
}

fn grid(spec: &str) -> Result<Vec<f64>> {
    parse_grid(spec).map_err(|e| Failure::Usage(format!("--tau-grid: {e}")).into())
}

#[derive(Serialize)]
struct EtaSummary {
    lambda: f64,
    a: f64,
    strength: f64,
    eta1: f64,
    eta2: f64,
    eta: f64,
}

impl EtaSummary {
    fn new(cfg: &PotentialConfig, eta1: f64, eta2: f64) -> Self {
        Self {
            lambda: cfg.lambda(),
            a: cfg.separation(),
            strength: cfg.strength(),
            eta1,
            eta2,
            eta: -(eta1 + eta2),
        }
    }
}

#[derive(Serialize)]
struct BoundSummary {
    kind: BoundKind,
    tau: f64,
    closed_form: f64,
    analytic: f64,
    quadrature: f64,
    quadrature_error: f64,
    converged: bool,
}

fn violation_outputs(out: &mut Outputs, report: &ViolationReport) -> Result<()> {
    out.spec("eta", eta_spec());
    out.spec("weighted_average", average_spec());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["tau", "lhs", "lhs_quadrature", "bound", "violated"])?;
    for r in &report.rows {
        w.write_record([
            format_float(r.tau),
            format_float(r.lhs),
            format_float(r.lhs_quadrature),
            format_float(r.bound),
            r.violated.to_string(),
        ])?;
    }
    out.add("violations.csv", w.into_inner()?);
    out.add_json("report.json", report)?;
    let n = report.rows.iter().filter(|r| r.violated).count();
    println!(
        "{}: {n}/{} widths violate; crossover {:?}; routes agree: {}",
        report.experiment,
        report.rows.len(),
        report.crossover_bisected,
        report.routes_agree
    );
    if !report.routes_agree {
        eprintln!("warning: closed-form and quadrature verdicts differ");
    }
    Ok(())
}

#[derive(Serialize)]
struct RegCompareEntry {
    mode_numeric: EnergyShiftResult,
    closed: EnergyShiftResult,
    point_split: PointSplitReport,
}

fn reg_compare(out: &mut Outputs, m: f64, lambdas: &[f64], schedule: Option<&[f64]>) -> Result<Result<()>> {
    out.spec("mode_numeric", mode_spec());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "lambda",
        "m",
        "dE_mode",
        "dE_closed",
        "dE_pointsplit",
        "offset",
        "dE_pointsplit_numeric",
        "discrepancy",
    ])?;
    let mut entries = Vec::with_capacity(lambdas.len());
    let mut failed = Vec::new();
    for &lambda in lambdas {
        let cfg = MassiveDeltaConfig::new(m, lambda)?;
        let alphas = schedule.map(<[f64]>::to_vec).unwrap_or_else(|| default_alpha_schedule(&cfg));
        for &alpha in &alphas {
            out.spec(&format!("point_split_alpha_{alpha}"), split_spec(alpha));
        }
        let mode = delta_e_mode_numeric(&cfg)?;
        let closed = delta_e_closed(&cfg);
        let ps = delta_e_pointsplit(&cfg, &alphas)?;
        if !(mode.converged && ps.numeric.converged) {
            failed.push(lambda);
        }
        w.write_record(
            [
                lambda,
                m,
                mode.value,
                closed.value,
                ps.analytic.value,
                closed.value - ps.analytic.value,
                ps.numeric.value,
                ps.discrepancy,
            ]
            .map(format_float),
        )?;
        println!(
            "lambda {lambda}: mode {} closed {} split {} (numeric {}, rel {:.1e})",
            mode.value, closed.value, ps.analytic.value, ps.numeric.value, ps.discrepancy
        );
        entries.push(RegCompareEntry { mode_numeric: mode, closed, point_split: ps });
    }
    out.add("reg_compare.csv", w.into_inner()?);
    out.add_json("reg_compare.json", &entries)?;
    if failed.is_empty() {
        Ok(Ok(()))
    } else {
        Ok(Err(Failure::Numeric(format!("non-converged routes at lambda = {failed:?}")).into()))
    }
}

/// Rerun the recorded command into `<manifest dir>/replay` and compare digests.
fn replay(path: &Path) -> Result<()> {
    let original = Manifest::read(path).map_err(|e| Failure::Usage(format!("{e:#}")))?;
    if matches!(original.params, Command::Replay { .. }) {
        return Err(Failure::Usage("cannot replay a replay".into()).into());
    }
    let dir: PathBuf = path.parent().unwrap_or(Path::new(".")).join("replay");
    let (outputs, status) = execute(&original.params)?;
    let fresh = outputs.write(&dir, &original.params).context("writing replay outputs")?;
    let mut mismatches = Vec::new();
    for old in &original.outputs {
        match fresh.outputs.iter().find(|n| n.file == old.file) {
            Some(new) if new.sha256 == old.sha256 => println!("{}: match {}", old.file, old.sha256),
            Some(new) => {
                println!("{}: MISMATCH {} vs {}", old.file, old.sha256, new.sha256);
                mismatches.push(old.file.clone());
            }
            None => {
                println!("{}: MISSING", old.file);
                mismatches.push(old.file.clone());
            }
        }
    }
    for extra in fresh.outputs.iter().filter(|n| !original.outputs.iter().any(|o| o.file == n.file)) {
        println!("{}: EXTRA", extra.file);
        mismatches.push(extra.file.clone());
    }
    status?;
    if mismatches.is_empty() {
        println!("replay of `{}` reproduced {} outputs", original.command, original.outputs.len());
        Ok(())
    } else {
        Err(Failure::Numeric(format!("replay differs in {mismatches:?}")).into())
    }
}
