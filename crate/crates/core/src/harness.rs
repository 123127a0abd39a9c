//! Named experiment presets and phase-plane sampling.
//!
//! Every preset is a fixed, fully deterministic recipe. [`execute`] runs it in
//! memory; [`run_preset`] additionally writes the artifact bundle:
//!
//! ```text
//! <out>/<preset>/trajectory-<model>.csv
//! <out>/<preset>/figure.svg
//! <out>/<preset>/report.txt
//! ```
//!
//! Phase presets also write `phase-grid.csv`.

use std::path::{Path, PathBuf};

use crate::analysis::{
    compare_variants, rate_report, verify_theorem2, CheckStatus, Contender, RateReport, Ranking, Theorem2Criteria,
    Theorem2Report, DEFAULT_THETA,
};
use crate::error::{Error, Result};
use crate::integrate::{euler_sum_allowance, fmt_sig17, integrate, Scheme, Settings, Trajectory};
use crate::models::{Activation, ModelSpec, PathSystem, Saturation};
use crate::report::{self, write_atomic, Report};
use crate::stability::{analyze, find_equilibria};
use crate::svg::{Arrow, LinePlot, QuiverPlot, Series};

pub const PRESET_NAMES: &[&str] = &[
    "eigenant-fig1",
    "tanh-sum-fig2",
    "signum-sum-fig3",
    "signum-sum-fig3-gain1",
    "comparison-fig4",
    "tied-shortest-fig5",
    "phase-eigenant",
    "phase-maxant",
];

/// Field norms below this count as zero when looking for equilibria on a grid.
pub const SPURIOUS_NORM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum PresetKind {
    /// Independent runs, one curve set each.
    Trajectories,
    /// Runs ranked by time to reach the shortest-path limit.
    Comparison,
    /// Planar system: quiver grid plus orbits from `starts`.
    Phase {
        bounds: ((f64, f64), (f64, f64)),
        resolution: usize,
        starts: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPreset {
    pub name: &'static str,
    pub caption: &'static str,
    /// `(label, model)`; labels are unique within a preset.
    pub models: Vec<(String, ModelSpec)>,
    /// Initial state in the order the lengths were given.
    pub x0: Vec<f64>,
    pub dt: f64,
    pub steps: usize,
    pub scheme: Scheme,
    pub kind: PresetKind,
}

impl ExperimentPreset {
    pub fn settings(&self) -> Settings {
        Settings {
            dt: self.dt,
            steps: self.steps,
            scheme: self.scheme,
            policy: Default::default(),
        }
    }
}

fn ten_paths(lengths: &[f64], alpha: f64, beta: f64, gamma: f64, phi: Saturation, g: Activation) -> ModelSpec {
    let paths = PathSystem::from_lengths(lengths).expect("preset lengths are valid");
    ModelSpec::new(alpha, beta, gamma, paths)
        .expect("preset parameters are valid")
        .with_saturation(phi)
        .with_activation(g)
}

fn labelled(models: Vec<ModelSpec>) -> Vec<(String, ModelSpec)> {
    models.into_iter().map(|m| (m.variant_name(), m)).collect()
}

pub fn preset(name: &str) -> Result<ExperimentPreset> {
    use Activation::{Identity, Signum, Tanh};
    use Saturation::{Max, Sum};

    let lengths: Vec<f64> = (1..=10).map(f64::from).collect();
    let x0: Vec<f64> = (1..=10).map(|i| 0.1 * f64::from(i)).collect();
    let single = |name, caption, model: ModelSpec| ExperimentPreset {
        name,
        caption,
        models: labelled(vec![model]),
        x0: x0.clone(),
        dt: 0.02,
        steps: 2000,
        scheme: Scheme::Euler,
        kind: PresetKind::Trajectories,
    };
    let phase = |name, caption, phi| ExperimentPreset {
        name,
        caption,
        models: labelled(vec![ten_paths(&[1.0, 2.0], 1.0, 1.0, 1.0, phi, Identity)]),
        x0: vec![1.4, 1.4],
        dt: 0.02,
        steps: 2000,
        scheme: Scheme::Euler,
        kind: PresetKind::Phase {
            bounds: ((0.0, 1.5), (0.0, 1.5)),
            resolution: 31,
            starts: vec![[1.4, 1.4], [0.1, 1.4], [1.4, 0.05], [0.05, 0.05], [0.02, 1.0], [0.8, 0.3]],
        },
    };

    Ok(match name {
        "eigenant-fig1" => single(
            "eigenant-fig1",
            "EigenAnt, 10 paths, alpha = beta = 1, gamma = 10: the shortest path wins despite the initial bias",
            ten_paths(&lengths, 1.0, 1.0, 10.0, Sum, Identity),
        ),
        "tanh-sum-fig2" => single(
            "tanh-sum-fig2",
            "tanh activation, alpha = beta = 0.1, gamma = 10",
            ten_paths(&lengths, 0.1, 0.1, 10.0, Sum, Tanh),
        ),
        "signum-sum-fig3" => single(
            "signum-sum-fig3",
            "signum activation, alpha = beta = 0.1, gamma = 0.5",
            ten_paths(&lengths, 0.1, 0.1, 0.5, Sum, Signum),
        ),
        "signum-sum-fig3-gain1" => single(
            "signum-sum-fig3-gain1",
            "signum activation, alpha = beta = 0.1, gamma = 1",
            ten_paths(&lengths, 0.1, 0.1, 1.0, Sum, Signum),
        ),
        "comparison-fig4" => ExperimentPreset {
            name: "comparison-fig4",
            caption: "x_1 for sum and max saturation with identity, tanh and signum activation",
            models: labelled(vec![
                ten_paths(&lengths, 0.1, 0.1, 10.0, Sum, Identity),
                ten_paths(&lengths, 0.1, 0.1, 10.0, Sum, Tanh),
                ten_paths(&lengths, 0.1, 0.1, 1.0, Sum, Signum),
                ten_paths(&lengths, 0.1, 0.1, 10.0, Max, Identity),
                ten_paths(&lengths, 0.1, 0.1, 10.0, Max, Tanh),
                ten_paths(&lengths, 0.1, 0.1, 1.0, Max, Signum),
            ]),
            x0: x0.clone(),
            dt: 0.02,
            steps: 2000,
            scheme: Scheme::Euler,
            kind: PresetKind::Comparison,
        },
        "tied-shortest-fig5" => {
            let tied = [1.0, 1.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
            single(
                "tied-shortest-fig5",
                "three shortest paths of equal length: x_1 + x_2 + x_3 tends to beta d_1 / alpha = 1",
                ten_paths(&tied, 0.1, 0.1, 10.0, Sum, Identity),
            )
        }
        "phase-eigenant" => phase(
            "phase-eigenant",
            "EigenAnt phase portrait, d = (1, 1/2), alpha = beta = 1",
            Sum,
        ),
        "phase-maxant" => phase(
            "phase-maxant",
            "MaxAnt phase portrait, d = (1, 1/2), alpha = beta = 1",
            Max,
        ),
        other => return Err(Error::UnknownPreset(other.to_string())),
    })
}

pub fn presets() -> Vec<ExperimentPreset> {
    PRESET_NAMES.iter().map(|n| preset(n).expect("listed preset exists")).collect()
}

/// One sample of a phase grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub x: [f64; 2],
    /// `None` where the field is undefined (the origin).
    pub field: Option<[f64; 2]>,
    /// Unit vector along the field; zero where the field vanishes.
    pub arrow: [f64; 2],
    pub norm: f64,
    /// The saturation function is not differentiable here (max tie line).
    pub nondifferentiable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub bounds: ((f64, f64), (f64, f64)),
    pub resolution: usize,
    /// Row-major: `points[j * resolution + i]` has `x_1` index `i`, `x_2` index `j`.
    pub points: Vec<PhasePoint>,
}

impl PhaseGrid {
    pub fn at(&self, i: usize, j: usize) -> &PhasePoint {
        &self.points[j * self.resolution + i]
    }

    pub fn spacing(&self) -> (f64, f64) {
        let step = |(lo, hi): (f64, f64)| (hi - lo) / (self.resolution - 1) as f64;
        (step(self.bounds.0), step(self.bounds.1))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_1,x_2,f_1,f_2,u_1,u_2,nondifferentiable\n");
        for p in &self.points {
            let (f1, f2) = p.field.map_or(("nan".to_string(), "nan".to_string()), |f| {
                (fmt_sig17(f[0]), fmt_sig17(f[1]))
            });
            out.push_str(&format!(
                "{},{},{f1},{f2},{},{},{}\n",
                fmt_sig17(p.x[0]),
                fmt_sig17(p.x[1]),
                fmt_sig17(p.arrow[0]),
                fmt_sig17(p.arrow[1]),
                u8::from(p.nondifferentiable)
            ));
        }
        out
    }
}

/// Samples the vector field of a planar model on a regular grid.
///
/// Bounds must lie in the closed positive quadrant; points where the saturation
/// is undefined get `field = None`.
pub fn phase_grid(model: &ModelSpec, bounds: ((f64, f64), (f64, f64)), resolution: usize) -> Result<PhaseGrid> {
    if model.dim() != 2 {
        return Err(Error::invalid("model", format!("phase grids need n = 2, got {}", model.dim())));
    }
    if resolution < 2 {
        return Err(Error::invalid("resolution", "need at least 2 points per axis"));
    }
    for (lo, hi) in [bounds.0, bounds.1] {
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
            return Err(Error::invalid(
                "bounds",
                format!("[{lo}, {hi}] is not an interval in the positive quadrant"),
            ));
        }
    }
    let coord = |(lo, hi): (f64, f64), k: usize| lo + (hi - lo) * k as f64 / (resolution - 1) as f64;
    let mut points = Vec::with_capacity(resolution * resolution);
    for j in 0..resolution {
        for i in 0..resolution {
            let x = [coord(bounds.0, i), coord(bounds.1, j)];
            let field = model.vector_field(&x).ok().map(|f| [f[0], f[1]]);
            let norm = field.map_or(f64::NAN, |f| f[0].hypot(f[1]));
            let arrow = match field {
                Some(f) if norm > 0.0 => [f[0] / norm, f[1] / norm],
                _ => [0.0, 0.0],
            };
            points.push(PhasePoint {
                x,
                field,
                arrow,
                norm,
                nondifferentiable: field.is_some() && !model.saturation().is_differentiable_at(&x),
            });
        }
    }
    Ok(PhaseGrid {
        bounds,
        resolution,
        points,
    })
}

/// Grid points whose field norm is a local minimum below [`SPURIOUS_NORM_TOL`]
/// yet lie more than one grid cell from every analytic equilibrium.
pub fn spurious_equilibria(model: &ModelSpec, grid: &PhaseGrid) -> Result<Vec<[f64; 2]>> {
    let known = find_equilibria(model)?;
    let (hx, hy) = grid.spacing();
    let res = grid.resolution;
    let mut found = Vec::new();
    for j in 0..res {
        for i in 0..res {
            let p = grid.at(i, j);
            if !(p.norm < SPURIOUS_NORM_TOL) {
                continue;
            }
            let is_min = (j.saturating_sub(1)..=(j + 1).min(res - 1))
                .flat_map(|jj| (i.saturating_sub(1)..=(i + 1).min(res - 1)).map(move |ii| (ii, jj)))
                .all(|(ii, jj)| {
                    let q = grid.at(ii, jj);
                    q.norm.is_nan() || q.norm >= p.norm
                });
            let near_known = known.iter().any(|eq| {
                (p.x[0] - eq.point[0]).abs() <= hx * (1.0 + 1e-9) && (p.x[1] - eq.point[1]).abs() <= hy * (1.0 + 1e-9)
            });
            if is_min && !near_known {
                found.push(p.x);
            }
        }
    }
    Ok(found)
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub label: String,
    pub model: ModelSpec,
    pub trajectory: Trajectory,
    pub verify: Theorem2Report,
    pub rates: RateReport,
}

#[derive(Debug, Clone)]
pub struct PhaseOutcome {
    pub grid: PhaseGrid,
    pub spurious: Vec<[f64; 2]>,
    pub orbits: Vec<Trajectory>,
}

#[derive(Debug, Clone)]
pub struct PresetOutcome {
    pub preset: ExperimentPreset,
    pub runs: Vec<RunOutcome>,
    pub ranking: Option<Ranking>,
    pub phase: Option<PhaseOutcome>,
    pub report: Report,
    pub figure: String,
}

/// Convergence thresholds for a run of `model` with `settings` from total `s0`.
///
/// The envelope allowance follows the scheme; signum runs get a tolerance band
/// of `2 gamma dt` for chattering around the switching surface.
pub fn run_criteria(model: &ModelSpec, settings: &Settings, s0: f64) -> Theorem2Criteria {
    let allowance = match settings.scheme {
        Scheme::Euler => euler_sum_allowance(model, settings.dt, s0),
        Scheme::Rk4 => 1e-9 * model.shortest_limit().max(s0),
    };
    let mut criteria = Theorem2Criteria::new(allowance);
    if model.activation() == Activation::Signum {
        let band = 2.0 * model.gamma() * settings.dt;
        criteria.limit_tol = criteria.limit_tol.max(band);
        criteria.settle = criteria.settle.max(band);
    }
    criteria
}

/// Integrates `model` and attaches the convergence and rate checks.
pub fn run_model(label: &str, model: &ModelSpec, x0: &[f64], settings: &Settings) -> Result<RunOutcome> {
    let trajectory = integrate(model, x0, settings)?;
    let verify = verify_theorem2(model, &trajectory, &run_criteria(model, settings, trajectory.sums()[0]))?;
    let rates = rate_report(model, &trajectory, None)?;
    Ok(RunOutcome {
        label: label.to_string(),
        model: model.clone(),
        trajectory,
        verify,
        rates,
    })
}

pub fn execute(preset: &ExperimentPreset) -> Result<PresetOutcome> {
    let settings = preset.settings();
    let mut runs = Vec::with_capacity(preset.models.len());
    for (label, model) in &preset.models {
        let x0 = model.paths().to_canonical(&preset.x0);
        runs.push(run_model(label, model, &x0, &settings)?);
    }

    let ranking = match preset.kind {
        PresetKind::Comparison => {
            let contenders: Vec<Contender<'_>> = runs
                .iter()
                .map(|r| Contender {
                    label: &r.label,
                    model: &r.model,
                    trajectory: &r.trajectory,
                })
                .collect();
            Some(compare_variants(&contenders, DEFAULT_THETA)?)
        }
        _ => None,
    };

    let phase = match &preset.kind {
        PresetKind::Phase {
            bounds,
            resolution,
            starts,
        } => {
            let model = &preset.models[0].1;
            let grid = phase_grid(model, *bounds, *resolution)?;
            let spurious = spurious_equilibria(model, &grid)?;
            let orbits = starts
                .iter()
                .map(|s| integrate(model, &model.paths().to_canonical(s), &settings))
                .collect::<Result<Vec<_>>>()?;
            Some(PhaseOutcome { grid, spurious, orbits })
        }
        _ => None,
    };

    let mut rep = Report::new("preset");
    rep.pair("preset", preset.name)
        .pair("caption", preset.caption)
        .pair("scheme", preset.scheme)
        .float("dt", preset.dt)
        .pair("steps", preset.steps)
        .pair(
            "initial",
            preset.x0.iter().map(|&v| fmt_sig17(v)).collect::<Vec<_>>().join(" "),
        );
    for run in &runs {
        let l = &run.label;
        rep.merge(&format!("{l}.model"), &report::model_section(&run.model))
            .pair(format!("{l}.positivity"), if run.trajectory.positivity_violated() { "violated" } else { "holds" })
            .pair(
                format!("{l}.final_state"),
                run.trajectory.final_state().iter().map(|&v| fmt_sig17(v)).collect::<Vec<_>>().join(" "),
            )
            .merge(&format!("{l}.verify"), &report::theorem2(&run.verify))
            .merge(&format!("{l}.rates"), &report::rates(&run.rates));
    }
    if let Some(r) = &ranking {
        rep.merge("comparison", &report::ranking(r));
    }
    if let Some(p) = &phase {
        let model = &preset.models[0].1;
        rep.merge("phase", &report::equilibria(model, &analyze(model)?))
            .pair("phase.grid_resolution", p.grid.resolution)
            .pair(
                "phase.nondifferentiable_points",
                p.grid.points.iter().filter(|q| q.nondifferentiable).count(),
            )
            .pair("phase.spurious_equilibria", p.spurious.len());
    }

    let figure = figure(preset, &runs, phase.as_ref());
    Ok(PresetOutcome {
        preset: preset.clone(),
        runs,
        ranking,
        phase,
        report: rep,
        figure,
    })
}

fn figure(preset: &ExperimentPreset, runs: &[RunOutcome], phase: Option<&PhaseOutcome>) -> String {
    if let (Some(p), PresetKind::Phase { bounds, .. }) = (phase, &preset.kind) {
        let model = &preset.models[0].1;
        let markers = find_equilibria(model)
            .map(|eqs| eqs.iter().map(|e| (e.point[0], e.point[1])).collect())
            .unwrap_or_default();
        return QuiverPlot {
            title: preset.name.to_string(),
            caption: preset.caption.to_string(),
            bounds: *bounds,
            arrows: p
                .grid
                .points
                .iter()
                .map(|q| Arrow {
                    x: q.x[0],
                    y: q.x[1],
                    ux: q.arrow[0],
                    uy: q.arrow[1],
                })
                .collect(),
            markers,
            orbits: p
                .orbits
                .iter()
                .map(|o| o.states().map(|s| (s[0], s[1])).collect())
                .collect(),
        }
        .render();
    }

    let curve = |traj: &Trajectory, f: &dyn Fn(&[f64]) -> f64| -> Vec<(f64, f64)> {
        traj.times().iter().zip(traj.states()).map(|(&t, s)| (t, f(s))).collect()
    };
    let mut series = Vec::new();
    match preset.kind {
        PresetKind::Comparison => {
            for run in runs {
                series.push(Series {
                    name: run.label.clone(),
                    points: curve(&run.trajectory, &|s| s[0]),
                });
            }
        }
        _ => {
            let run = &runs[0];
            for i in 0..run.trajectory.dim() {
                series.push(Series {
                    name: format!("x_{}", i + 1),
                    points: curve(&run.trajectory, &|s| s[i]),
                });
            }
            let shortest = run.model.paths().shortest_set().to_vec();
            if shortest.len() > 1 {
                let name = shortest.iter().map(|j| format!("x_{}", j + 1)).collect::<Vec<_>>().join("+");
                series.push(Series {
                    name,
                    points: curve(&run.trajectory, &|s| shortest.iter().map(|&j| s[j]).sum()),
                });
            }
        }
    }
    LinePlot {
        title: preset.name.to_string(),
        caption: preset.caption.to_string(),
        x_label: "t".to_string(),
        y_label: if preset.kind == PresetKind::Comparison { "x_1" } else { "x_i" }.to_string(),
        series,
    }
    .render()
}

/// Files written by [`run_preset`].
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub outcome: PresetOutcome,
}

impl Artifacts {
    /// Overall status: `Fail` if any run failed its checks or a phase grid
    /// showed a spurious equilibrium.
    pub fn status(&self) -> CheckStatus {
        let o = &self.outcome;
        if o.phase.as_ref().is_some_and(|p| !p.spurious.is_empty())
            || o.runs.iter().any(|r| r.trajectory.positivity_violated())
        {
            return CheckStatus::Fail;
        }
        CheckStatus::Pass
    }
}

/// Runs the named preset and writes its artifacts below `out_root/<name>/`.
pub fn run_preset(name: &str, out_root: &Path) -> Result<Artifacts> {
    let outcome = execute(&preset(name)?)?;
    let dir = out_root.join(name);
    let mut files = Vec::new();
    let mut emit = |file: String, contents: &[u8]| -> Result<()> {
        let path = dir.join(file);
        write_atomic(&path, contents)?;
        files.push(path);
        Ok(())
    };
    for run in &outcome.runs {
        let mut csv = Vec::new();
        run.trajectory
            .write_csv(&mut csv)
            .map_err(|e| Error::io(dir.join("trajectory.csv"), e))?;
        emit(format!("trajectory-{}.csv", run.label), &csv)?;
    }
    if let Some(p) = &outcome.phase {
        for (k, orbit) in p.orbits.iter().enumerate() {
            let mut csv = Vec::new();
            orbit.write_csv(&mut csv).map_err(|e| Error::io(dir.join("orbit.csv"), e))?;
            emit(format!("trajectory-{}-orbit{}.csv", outcome.runs[0].label, k + 1), &csv)?;
        }
        emit("phase-grid.csv".to_string(), p.grid.to_csv().as_bytes())?;
    }
    emit("figure.svg".to_string(), outcome.figure.as_bytes())?;
    emit("report.txt".to_string(), outcome.report.render().as_bytes())?;
    Ok(Artifacts { dir, files, outcome })
}
