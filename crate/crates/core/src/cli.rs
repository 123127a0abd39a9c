//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input (bad arguments, configuration or
//! preset name), 2 numerical failure or a failed check.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{rate_report, verify_theorem2, CheckStatus, Theorem2Criteria};
use crate::config::{load_config, RunConfig};
use crate::error::{Error, Result};
use crate::harness::{self, phase_grid, run_criteria, spurious_equilibria, ExperimentPreset, PRESET_NAMES};
use crate::integrate::{integrate, Settings, Trajectory};
use crate::models::ModelSpec;
use crate::oracle::ClosedForm;
use crate::report::{self, write_atomic, Report};
use crate::stability::analyze;
use crate::svg::{LinePlot, Series};

/// Output root used when neither `--out` nor `ANTDYN_OUT` is set.
pub const DEFAULT_OUT: &str = "antdyn-out";
pub const OUT_ENV: &str = "ANTDYN_OUT";

#[derive(Debug, Parser)]
#[command(name = "antdyn", version, about = "Pheromone dynamics on parallel paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a model and write trajectory CSV, SVG plot and report.
    Simulate(Target),
    /// List the equilibria with their spectra and stability labels.
    Equilibria(Target),
    /// Fit per-component decay rates and compare with theory.
    Rates {
        #[command(flatten)]
        target: Target,
        /// Fit on closed-form samples instead of the integrator (sum-identity only).
        #[arg(long)]
        exact: bool,
    },
    /// Check convergence to the shortest-path limit; exits 2 on failure.
    Verify(Target),
    /// Run a named preset (or `all`) and write its artifacts.
    Reproduce {
        /// Preset name or `all`.
        preset: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the planar vector field on a grid.
    Phase {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 31)]
        resolution: usize,
    },
}

#[derive(Debug, Args)]
struct Target {
    /// Preset name (see `reproduce`).
    #[arg(conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    /// Configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output root; defaults to $ANTDYN_OUT, then `antdyn-out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A resolved target: every model to run with its shared settings.
struct Job {
    name: String,
    models: Vec<(String, ModelSpec)>,
    x0: Vec<f64>,
    settings: Settings,
    config: Option<RunConfig>,
    preset: Option<ExperimentPreset>,
    out: PathBuf,
}

impl Job {
    fn path(&self, configured: Option<&String>, default: String) -> PathBuf {
        match configured {
            Some(p) if Path::new(p).is_absolute() => PathBuf::from(p),
            Some(p) => self.out.join(p),
            None => self.out.join(&self.name).join(default),
        }
    }

    fn criteria(&self, model: &ModelSpec, s0: f64) -> Theorem2Criteria {
        let mut c = run_criteria(model, &self.settings, s0);
        if let Some(cfg) = &self.config {
            c.vanish = cfg.analysis.vanish;
            c.limit_tol = c.limit_tol.max(cfg.analysis.limit_tol);
        }
        c
    }

    fn fit_window(&self) -> Option<(f64, f64)> {
        self.config.as_ref().and_then(|c| c.analysis.fit_window)
    }

    fn canonical_x0(&self, model: &ModelSpec) -> Vec<f64> {
        model.paths().to_canonical(&self.x0)
    }
}

fn out_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn resolve(target: Target) -> Result<Job> {
    let out = out_root(target.out);
    if let Some(path) = target.config {
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let cfg = load_config(&text)?;
        let (model, _) = cfg.build()?;
        let name = path
            .file_stem()
            .map_or_else(|| "config".to_string(), |s| s.to_string_lossy().into_owned());
        return Ok(Job {
            name,
            models: vec![(model.variant_name(), model)],
            x0: cfg.initial.clone(),
            settings: cfg.settings(),
            config: Some(cfg),
            preset: None,
            out,
        });
    }
    let name = target.preset.expect("clap requires a preset or --config");
    let p = harness::preset(&name)?;
    Ok(Job {
        name: p.name.to_string(),
        models: p.models.clone(),
        x0: p.x0.clone(),
        settings: p.settings(),
        config: None,
        preset: Some(p),
        out,
    })
}

fn emit(report: &Report, path: &Path) -> Result<()> {
    let text = report.render();
    write_atomic(path, text.as_bytes())?;
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes());
    Ok(())
}

fn csv_bytes(traj: &Trajectory, path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).map_err(|e| Error::io(path, e))?;
    Ok(buf)
}

fn simulate(job: &Job) -> Result<i32> {
    if let Some(p) = &job.preset {
        let artifacts = harness::run_preset(p.name, &job.out)?;
        for f in &artifacts.files {
            println!("wrote {}", f.display());
        }
        return Ok(0);
    }
    let cfg = job.config.as_ref().expect("config job");
    let (label, model) = &job.models[0];
    let traj = integrate(model, &job.canonical_x0(model), &job.settings)?;
    let csv = job.path(cfg.outputs.csv.as_ref(), format!("trajectory-{label}.csv"));
    write_atomic(&csv, &csv_bytes(&traj, &csv)?)?;
    let svg = job.path(cfg.outputs.svg.as_ref(), "figure.svg".to_string());
    let plot = LinePlot {
        title: job.name.clone(),
        caption: format!("{label}, alpha = {}, beta = {}, gamma = {}", model.alpha(), model.beta(), model.gamma()),
        x_label: "t".into(),
        y_label: "x_i".into(),
        series: (0..traj.dim())
            .map(|i| Series {
                name: format!("x_{}", i + 1),
                points: traj.times().iter().copied().zip(traj.component(i)).collect(),
            })
            .collect(),
    };
    write_atomic(&svg, plot.render().as_bytes())?;

    let mut rep = Report::new("simulate");
    rep.merge("model", &report::model_section(model))
        .pair("scheme", job.settings.scheme)
        .float("dt", job.settings.dt)
        .pair("steps", job.settings.steps)
        .pair("csv", csv.display())
        .pair("svg", svg.display())
        .pair(
            "final_state",
            traj.final_state().iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" "),
        )
        .pair("positivity", if traj.positivity_violated() { "violated" } else { "holds" });
    emit(&rep, &job.path(cfg.outputs.report.as_ref(), "simulate.txt".to_string()))?;
    Ok(0)
}

fn equilibria(job: &Job) -> Result<i32> {
    let mut rep = Report::new("equilibria");
    for (label, model) in &job.models {
        let eq = report::equilibria(model, &analyze(model)?);
        if job.models.len() == 1 {
            rep = eq;
        } else {
            rep.merge(label, &eq);
        }
    }
    let configured = job.config.as_ref().and_then(|c| c.outputs.report.as_ref());
    emit(&rep, &job.path(configured, "equilibria.txt".to_string()))?;
    Ok(0)
}

fn rates(job: &Job, exact: bool) -> Result<i32> {
    let mut rep = Report::new("rates");
    for (label, model) in &job.models {
        let x0 = job.canonical_x0(model);
        let traj = if exact {
            ClosedForm::new(model, &x0)?.sample_grid(job.settings.dt, job.settings.steps)?
        } else {
            integrate(model, &x0, &job.settings)?
        };
        let r = report::rates(&rate_report(model, &traj, job.fit_window())?);
        rep.pair(format!("{label}.source"), traj.source().name()).merge(label, &r);
    }
    let configured = job.config.as_ref().and_then(|c| c.outputs.report.as_ref());
    emit(&rep, &job.path(configured, "rates.txt".to_string()))?;
    Ok(0)
}

fn verify(job: &Job) -> Result<i32> {
    let mut rep = Report::new("verify");
    let mut worst = CheckStatus::Pass;
    for (label, model) in &job.models {
        let traj = integrate(model, &job.canonical_x0(model), &job.settings)?;
        let v = verify_theorem2(model, &traj, &job.criteria(model, traj.sums()[0]))?;
        worst = match (worst, v.status) {
            (CheckStatus::Fail, _) | (_, CheckStatus::Fail) => CheckStatus::Fail,
            (CheckStatus::Inconclusive, _) | (_, CheckStatus::Inconclusive) => CheckStatus::Inconclusive,
            _ => CheckStatus::Pass,
        };
        rep.merge(label, &report::theorem2(&v));
    }
    rep.pair("overall", worst);
    let configured = job.config.as_ref().and_then(|c| c.outputs.report.as_ref());
    emit(&rep, &job.path(configured, "verify.txt".to_string()))?;
    Ok(if worst == CheckStatus::Fail { 2 } else { 0 })
}

fn reproduce(name: &str, out: Option<PathBuf>) -> Result<i32> {
    let out = out_root(out);
    let names: Vec<&str> = if name == "all" {
        PRESET_NAMES.to_vec()
    } else {
        vec![name]
    };
    let mut code = 0;
    for n in names {
        let artifacts = harness::run_preset(n, &out)?;
        let status = artifacts.status();
        println!("{n}: {status} ({})", artifacts.dir.display());
        if status == CheckStatus::Fail {
            code = 2;
        }
    }
    Ok(code)
}

fn phase(job: &Job, resolution: usize) -> Result<i32> {
    let (label, model) = &job.models[0];
    let bounds = match job.preset.as_ref().map(|p| &p.kind) {
        Some(harness::PresetKind::Phase { bounds, .. }) => *bounds,
        _ => {
            let hi = 1.5 * model.shortest_limit();
            ((0.01, hi), (0.01, hi))
        }
    };
    let grid = phase_grid(model, bounds, resolution)?;
    let spurious = spurious_equilibria(model, &grid)?;
    let csv = job.path(None, format!("phase-grid-{label}.csv"));
    write_atomic(&csv, grid.to_csv().as_bytes())?;
    let mut rep = Report::new("phase");
    rep.merge("model", &report::model_section(model))
        .pair("resolution", resolution)
        .pair("grid", csv.display())
        .pair("nondifferentiable_points", grid.points.iter().filter(|p| p.nondifferentiable).count())
        .pair("spurious_equilibria", spurious.len());
    emit(&rep, &job.path(None, "phase.txt".to_string()))?;
    Ok(if spurious.is_empty() { 0 } else { 2 })
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Simulate(t) => simulate(&resolve(t)?),
        Command::Equilibria(t) => equilibria(&resolve(t)?),
        Command::Rates { target, exact } => rates(&resolve(target)?, exact),
        Command::Verify(t) => verify(&resolve(t)?),
        Command::Reproduce { preset, out } => reproduce(&preset, out),
        Command::Phase { target, resolution } => phase(&resolve(target)?, resolution),
    }
}

/// Runs the command line `args` (including the program name) and returns the exit code.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_and_usage_codes() {
        assert_eq!(main(["antdyn", "--help"]), 0);
        assert_eq!(main(["antdyn", "verify", "--help"]), 0);
        assert_eq!(main(["antdyn", "frobnicate"]), 1);
        assert_eq!(main(["antdyn", "equilibria"]), 1);
        assert_eq!(main(["antdyn", "equilibria", "no-such-preset"]), 1);
    }
}
