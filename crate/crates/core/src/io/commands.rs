//! One function per CLI subcommand. Each writes its JSON/CSV outputs plus a
//! `manifest.json` into the output directory and returns a short summary.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use crate::bilevel::{self, StructureVerdict};
use crate::error::{Error, Result};
use crate::grid::{Domain, Grid, GridSignal};
use crate::mosco::{self, MonotonicityCheck, SequenceScan};
use crate::regularizers::{ExtendedParam, FamilySpec};
use crate::solvers;
use crate::spectral;

use super::config::{hex_digest, RunConfig};
use super::demos::{self, DemoReport};
use super::signal::{self, SignalFormat};
use super::write_atomic;

#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub files: Vec<PathBuf>,
    pub summary: String,
    /// False when a demo check failed.
    pub ok: bool,
}

/// Collects outputs, then writes them and the manifest.
struct Outputs {
    dir: PathBuf,
    files: BTreeMap<String, Vec<u8>>,
}

impl Outputs {
    fn new(cfg: &RunConfig) -> Self {
        Outputs {
            dir: cfg.out.clone().unwrap_or_else(|| PathBuf::from("out")),
            files: BTreeMap::new(),
        }
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.files.insert(name.into(), bytes);
        Ok(())
    }

    fn raw(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.insert(name.into(), bytes);
    }

    fn finish(self, command: &str, cfg: &RunConfig, summary: String, ok: bool) -> Result<CommandOutput> {
        std::fs::create_dir_all(&self.dir)?;
        let mut written = Vec::new();
        let mut hashes = BTreeMap::new();
        for (name, bytes) in &self.files {
            let path = self.dir.join(name);
            write_atomic(&path, bytes)?;
            hashes.insert(name.clone(), hex_digest(bytes));
            written.push(path);
        }
        let manifest = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": cfg.seed,
            "config_sha256": cfg.hash()?,
            "config": cfg,
            "outputs": hashes,
        });
        let path = self.dir.join("manifest.json");
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        write_atomic(&path, &bytes)?;
        written.push(path);
        Ok(CommandOutput {
            files: written,
            summary,
            ok,
        })
    }
}

fn csv_bytes<F>(header: &[&str], fill: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    fill(&mut w)?;
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn param_cells(p: ExtendedParam) -> (String, String) {
    match p {
        ExtendedParam::LowerEdge => ("lower_edge".into(), String::new()),
        ExtendedParam::Interior(t) => ("interior".into(), format!("{t:e}")),
        ExtendedParam::UpperEdge => ("upper_edge".into(), String::new()),
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

#[derive(Serialize)]
struct LearnDocument<'a> {
    report: &'a bilevel::LearnReport,
    structure: StructureVerdict,
}

/// Grid search over `Λ̄`; writes `report.json`, `samples.csv`, `manifest.json`.
pub fn cmd_learn(cfg: &RunConfig) -> Result<CommandOutput> {
    cfg.validate()?;
    let training = cfg.training()?;
    let report = bilevel::learn(&cfg.family, &training, &cfg.param_grid(), cfg.refine_iters, &cfg.solver_config())?;
    if report.samples.iter().all(|s| s.i_bar.is_none()) {
        let first = report.samples.first().and_then(|s| s.error.clone()).unwrap_or_default();
        return Err(Error::Solver(format!("every lower-level solve failed; first error: {first}")));
    }
    let structure = bilevel::structure_report(&report);
    let mut out = Outputs::new(cfg);
    out.json("report.json", &LearnDocument { report: &report, structure: structure.clone() })?;
    let mut samples = report.samples.clone();
    samples.sort_by(|a, b| a.param.cmp_order(&b.param));
    out.raw(
        "samples.csv",
        csv_bytes(&["kind", "param", "i_bar", "refined", "converged", "error"], |w| {
            for s in &samples {
                let (kind, param) = param_cells(s.param);
                w.write_record([
                    kind,
                    param,
                    opt_num(s.i_bar),
                    s.refined.to_string(),
                    s.converged.to_string(),
                    s.error.clone().unwrap_or_default(),
                ])?;
            }
            Ok(())
        })?,
    );
    let summary = format!(
        "argmin {} with Ī = {:.6e}; {}",
        report.argmin_label, report.min_value, structure.verdict
    );
    out.finish("learn", cfg, summary, true)
}

fn require_param(cfg: &RunConfig) -> Result<ExtendedParam> {
    cfg.param
        .ok_or_else(|| Error::Config("this command needs a parameter (`param` in the config or --param)".into()))
}

#[derive(Serialize)]
struct SolveRecord {
    index: usize,
    file: String,
    objective: f64,
    method: solvers::Method,
    iterations: usize,
    residual: f64,
    converged: bool,
    possibly_nonunique: bool,
    certificate_gap: f64,
}

/// Lower-level reconstructions of every noisy signal at `param`.
pub fn cmd_solve(cfg: &RunConfig) -> Result<CommandOutput> {
    cfg.validate()?;
    let param = require_param(cfg)?;
    let noisy = cfg.noisy_signals()?;
    let ext = match &cfg.data {
        super::DataSpec::Files { noisy, .. } => noisy
            .first()
            .map(|p| SignalFormat::from_path(p))
            .unwrap_or(SignalFormat::Csv),
        _ => SignalFormat::Csv,
    }
    .extension();
    let scfg = cfg.solver_config();
    let mut out = Outputs::new(cfg);
    let mut records = Vec::new();
    for (j, u) in noisy.iter().enumerate() {
        let r = solvers::solve(&cfg.family, param, u, &scfg)?;
        let name = format!("recon_{j}.{ext}");
        let bytes = if ext == "pgm" { signal::pgm_bytes(&r.minimizer)? } else { signal::csv_bytes(&r.minimizer)? };
        out.raw(&name, bytes);
        records.push(SolveRecord {
            index: j,
            file: name,
            objective: r.objective,
            method: r.method,
            iterations: r.iterations,
            residual: r.residual,
            converged: r.converged,
            possibly_nonunique: r.possibly_nonunique,
            certificate_gap: r.certificate_gap,
        });
    }
    let all_converged = records.iter().all(|r| r.converged);
    out.json("solve.json", &json!({ "family": cfg.family, "param": param, "solves": records }))?;
    let summary = format!(
        "{} reconstruction(s) at {}; {}",
        noisy.len(),
        cfg.family.describe(param),
        if all_converged { "all converged" } else { "some solves did not converge" }
    );
    out.finish("solve", cfg, summary, true)
}

/// `Ī(param)` on the training pairs, with `R(u^c_j)` for reference.
pub fn cmd_eval(cfg: &RunConfig) -> Result<CommandOutput> {
    cfg.validate()?;
    let param = require_param(cfg)?;
    let training = cfg.training()?;
    let e = bilevel::extended_upper(&cfg.family, param, &training, &cfg.solver_config())?;
    let reg_clean = training
        .clean()
        .map(|u| cfg.family.evaluate(param, u))
        .collect::<Result<Vec<f64>>>()?;
    let solves: Vec<_> = e
        .reconstructions
        .iter()
        .map(|r| {
            json!({
                "method": r.method,
                "iterations": r.iterations,
                "residual": r.residual,
                "converged": r.converged,
                "certificate_gap": r.certificate_gap,
            })
        })
        .collect();
    let mut out = Outputs::new(cfg);
    out.json(
        "eval.json",
        &json!({
            "family": cfg.family,
            "param": param,
            "i_bar": e.i_bar,
            "distances": e.distances,
            "regularizer_clean": reg_clean,
            "solves": solves,
        }),
    )?;
    out.finish("eval", cfg, format!("Ī({}) = {:.9e}", cfg.family.describe(param), e.i_bar), true)
}

/// Data conditions for the configured family.
pub fn cmd_conditions(cfg: &RunConfig) -> Result<CommandOutput> {
    cfg.validate()?;
    let training = cfg.training()?;
    let conditions = bilevel::default_conditions(&cfg.family, &training, &cfg.solver_config())?;
    let mut out = Outputs::new(cfg);
    out.json("conditions.json", &json!({ "family": cfg.family, "conditions": conditions }))?;
    let held = conditions.values().filter(|c| c.holds).count();
    let summary = if conditions.is_empty() {
        "no conditions are defined for this configuration".to_string()
    } else {
        format!("{held} of {} conditions hold", conditions.len())
    };
    out.finish("conditions", cfg, summary, true)
}

#[derive(Serialize)]
struct MonotonicitySummary {
    checks: usize,
    failures: usize,
    worst_margin: f64,
    failed: Vec<MonotonicityCheck>,
}

fn summarize(checks: Vec<MonotonicityCheck>) -> MonotonicitySummary {
    let failed: Vec<_> = checks.iter().filter(|c| !c.pass).copied().collect();
    MonotonicitySummary {
        checks: checks.len(),
        failures: failed.len(),
        worst_margin: checks.iter().map(|c| c.rhs - c.lhs).fold(f64::INFINITY, f64::min),
        failed,
    }
}

fn mosco_grid(cfg: &RunConfig) -> Result<Arc<Grid>> {
    if let Some(g) = &cfg.grid {
        return g.build();
    }
    match cfg.family {
        FamilySpec::SpectralFractional { .. } => Grid::new(Domain::Interval { a: 0.0, b: std::f64::consts::PI }, 64),
        _ => Grid::new(Domain::Interval { a: 0.0, b: 1.0 }, 256),
    }
}

/// Sequence scans on the probe battery, plus monotonicity checks where the
/// family has one.
pub fn cmd_mosco(cfg: &RunConfig) -> Result<CommandOutput> {
    cfg.validate()?;
    let g = mosco_grid(cfg)?;
    let probes = mosco::probes(&g, cfg.seed);
    let randoms = mosco::random_signals(&g, 10, cfg.seed);
    let family = &cfg.family;
    let each = |f: &dyn Fn(&str, &GridSignal) -> Result<SequenceScan>| -> Result<Vec<SequenceScan>> {
        probes.iter().map(|(name, u)| f(name, u)).collect()
    };
    let mut monotonicity = None;
    let scans: Vec<SequenceScan> = match family {
        FamilySpec::Weight { .. } => {
            let seq: Vec<f64> = (1..=10).map(|k| 1.0 + 1.0 / k as f64).collect();
            each(&|n, u| mosco::scan_constant(family, ExtendedParam::Interior(1.0), &seq, u, n))?
        }
        FamilySpec::Exponent { .. } => {
            let seq: Vec<f64> = (1..=9).map(|k| 2f64.powi(k)).collect();
            // The step probe has an infinite Lipschitz limit; skip it.
            monotonicity = Some(summarize(mosco::certify_monotonicity(family, &[(2.0, 3.0), (4.0, 8.0)], &randoms)?));
            probes
                .iter()
                .filter(|(n, _)| n != "step")
                .map(|(n, u)| mosco::scan_constant(family, ExtendedParam::UpperEdge, &seq, u, n))
                .collect::<Result<_>>()?
        }
        FamilySpec::AubertKornprobst { rho } => {
            monotonicity = Some(summarize(mosco::certify_monotonicity(family, &[(0.1, 0.2)], &randoms)?));
            each(&|n, u| mosco::ak_recovery_scan(rho, u, n))?
        }
        FamilySpec::BrezisNguyen { phi, .. } => {
            let seq: Vec<f64> = (1..=10).map(|k| 0.3 * (1.0 + 1.0 / k as f64)).collect();
            let mut scans = each(&|n, u| mosco::scan_scaled_bn(0.3, &seq, phi, u, n))?;
            let far = [1.0, 10.0, 100.0, 1000.0];
            for (n, u) in probes.iter().filter(|(n, _)| n != "step") {
                scans.push(mosco::scan_bn_vanishing(&far, phi, u, n)?);
            }
            scans
        }
        FamilySpec::SpectralFractional { .. } => {
            let seq: Vec<f64> = (1..=8).map(|k| 1.0 - 0.5f64.powi(k)).collect();
            each(&|n, u| mosco::scan_constant(family, ExtendedParam::UpperEdge, &seq, u, n))?
        }
    };
    let mut out = Outputs::new(cfg);
    out.json("mosco.json", &json!({ "family": family, "scans": scans, "monotonicity": monotonicity }))?;
    out.raw(
        "mosco.csv",
        csv_bytes(&["scan", "probe", "param", "value", "bound", "expected"], |w| {
            for (k, s) in scans.iter().enumerate() {
                for r in s.rows() {
                    w.write_record([
                        k.to_string(),
                        s.probe.clone(),
                        format!("{:e}", r.param),
                        format!("{:e}", r.value),
                        opt_num(r.bound),
                        format!("{:e}", r.expected),
                    ])?;
                }
            }
            Ok(())
        })?,
    );
    let worst = scans.iter().map(|s| s.rel_gap).fold(0.0, f64::max);
    let mut summary = format!("{} scan(s), largest relative gap {worst:.3e}", scans.len());
    if let Some(m) = &monotonicity {
        summary += &format!("; monotonicity {}/{} pass", m.checks - m.failures, m.checks);
    }
    out.finish("mosco", cfg, summary, true)
}

/// Runs a named demo; `ok` is false when any check fails.
pub fn cmd_demo(name: &str, cfg: &RunConfig) -> Result<(CommandOutput, DemoReport)> {
    let report = demos::run_demo(name, &cfg.solver_config())?;
    let mut out = Outputs::new(cfg);
    out.json(&format!("demo-{name}.json"), &report)?;
    let summary = report.table();
    let ok = report.pass;
    Ok((out.finish("demo", cfg, summary, ok)?, report))
}

/// Spectral helper for the CLI: the `μ` window of the training data.
pub fn spectral_window(cfg: &RunConfig, bracket: (f64, f64)) -> Result<(f64, f64)> {
    let FamilySpec::SpectralFractional { m_max, .. } = cfg.family else {
        return Err(Error::Config("the μ window is defined for the spectral family only".into()));
    };
    let training = cfg.training()?;
    let cap = training.grid().points_per_axis().saturating_sub(1);
    let basis = Arc::new(spectral::build_basis(training.grid(), m_max.min(cap))?);
    spectral::mu_window(&training, &basis, bracket)
}
