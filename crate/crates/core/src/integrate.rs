//! Fixed-step integration of a [`ModelSpec`] with runtime invariant checks.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::models::ModelSpec;

/// Floor used by [`PositivityPolicy::ClampEpsilon`].
pub const CLAMP_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Scheme {
    #[default]
    Euler,
    Rk4,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Euler => "euler",
            Scheme::Rk4 => "rk4",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euler" => Ok(Scheme::Euler),
            "rk4" => Ok(Scheme::Rk4),
            other => Err(format!("unknown scheme `{other}` (expected euler or rk4)")),
        }
    }
}

/// Where a set of samples came from; used as the CSV `source` tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Euler,
    Rk4,
    Exact,
    Asymptotic,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Euler => "euler",
            Source::Rk4 => "rk4",
            Source::Exact => "exact",
            Source::Asymptotic => "asymptotic",
        }
    }
}

impl From<Scheme> for Source {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Euler => Source::Euler,
            Scheme::Rk4 => Source::Rk4,
        }
    }
}

/// What to do when a stored state has a nonpositive component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PositivityPolicy {
    /// Abort with [`Error::Positivity`].
    #[default]
    Reject,
    /// Clamp to [`CLAMP_FLOOR`] and set [`Trajectory::positivity_violated`].
    ClampEpsilon,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub dt: f64,
    pub steps: usize,
    pub scheme: Scheme,
    pub policy: PositivityPolicy,
}

impl Settings {
    pub fn euler(dt: f64, steps: usize) -> Self {
        Self {
            dt,
            steps,
            scheme: Scheme::Euler,
            policy: PositivityPolicy::Reject,
        }
    }

    pub fn rk4(dt: f64, steps: usize) -> Self {
        Self {
            scheme: Scheme::Rk4,
            ..Self::euler(dt, steps)
        }
    }

    pub fn with_policy(mut self, policy: PositivityPolicy) -> Self {
        self.policy = policy;
        self
    }
}

/// Equally spaced samples of a solution, in paper time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
    sums: Vec<f64>,
    source: Source,
    dt: f64,
    positivity_violated: bool,
}

impl Trajectory {
    /// Wraps externally produced samples (e.g. closed-form evaluations).
    ///
    /// `times` need not be equally spaced; `dt` is recorded as given.
    pub fn from_samples(times: Vec<f64>, states: Vec<Vec<f64>>, source: Source, dt: f64) -> Result<Self> {
        let dim = states.first().map_or(0, Vec::len);
        if states.len() != times.len() || states.iter().any(|s| s.len() != dim) || dim == 0 {
            return Err(Error::invalid("samples", "ragged or empty sample matrix"));
        }
        let sums = states.iter().map(|s| s.iter().sum()).collect();
        Ok(Self {
            dim,
            times,
            states: states.concat(),
            sums,
            source,
            dt,
            positivity_violated: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored samples (`steps + 1`).
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.states.chunks_exact(self.dim)
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// Time series of component `i`.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states().map(|s| s[i]).collect()
    }

    /// Integration scheme, `None` for closed-form samples.
    pub fn scheme(&self) -> Option<Scheme> {
        match self.source {
            Source::Euler => Some(Scheme::Euler),
            Source::Rk4 => Some(Scheme::Rk4),
            Source::Exact | Source::Asymptotic => None,
        }
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.len() - 1]
    }

    pub fn positivity_violated(&self) -> bool {
        self.positivity_violated
    }

    /// Writes `t,x_1,...,x_n,S` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        self.write_csv_tagged(out, None)
    }

    /// As [`Self::write_csv`], with an extra trailing `source` column.
    pub fn write_csv_tagged<W: Write>(&self, mut out: W, source: Option<&str>) -> io::Result<()> {
        write!(out, "t")?;
        for i in 1..=self.dim {
            write!(out, ",x_{i}")?;
        }
        write!(out, ",S")?;
        if source.is_some() {
            write!(out, ",source")?;
        }
        writeln!(out)?;
        for (k, state) in self.states().enumerate() {
            write!(out, "{}", fmt_sig17(self.times[k]))?;
            for v in state {
                write!(out, ",{}", fmt_sig17(*v))?;
            }
            write!(out, ",{}", fmt_sig17(self.sums[k]))?;
            if let Some(tag) = source {
                write!(out, ",{tag}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Integrates `model` from `x0` (canonical order, strictly positive).
pub fn integrate(model: &ModelSpec, x0: &[f64], settings: &Settings) -> Result<Trajectory> {
    model.check_dim(x0)?;
    if !(settings.dt > 0.0) || !settings.dt.is_finite() {
        return Err(Error::invalid("dt", format!("must be positive and finite, got {}", settings.dt)));
    }
    if let Some((i, &v)) = x0.iter().enumerate().find(|(_, &v)| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::invalid(
            "initial",
            format!("initial component x_{} = {} must be positive and finite", i + 1, v),
        ));
    }

    let n = x0.len();
    let dt = settings.dt;
    let mut times = Vec::with_capacity(settings.steps + 1);
    let mut states = Vec::with_capacity((settings.steps + 1) * n);
    let mut sums = Vec::with_capacity(settings.steps + 1);
    let mut violated = false;

    let mut x = x0.to_vec();
    times.push(0.0);
    states.extend_from_slice(&x);
    sums.push(x.iter().sum());

    let mut work = Rk4Work::new(n);
    for step in 1..=settings.steps {
        match settings.scheme {
            Scheme::Euler => {
                model.vector_field_into(&x, &mut work.k1).map_err(|e| field_error(e, step))?;
                for (xi, ki) in x.iter_mut().zip(&work.k1) {
                    *xi += dt * ki;
                }
            }
            Scheme::Rk4 => work.step(model, &mut x, dt).map_err(|e| field_error(e, step))?,
        }
        if let Some(component) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step, component });
        }
        if let Some(component) = x.iter().position(|&v| v <= 0.0) {
            match settings.policy {
                PositivityPolicy::Reject => {
                    return Err(Error::Positivity {
                        step,
                        component,
                        value: x[component],
                    })
                }
                PositivityPolicy::ClampEpsilon => {
                    violated = true;
                    for v in x.iter_mut().filter(|v| **v <= 0.0) {
                        *v = CLAMP_FLOOR;
                    }
                }
            }
        }
        times.push(step as f64 * dt);
        states.extend_from_slice(&x);
        sums.push(x.iter().sum());
    }

    Ok(Trajectory {
        dim: n,
        times,
        states,
        sums,
        source: settings.scheme.into(),
        dt,
        positivity_violated: violated,
    })
}

fn field_error(e: Error, step: usize) -> Error {
    match e {
        Error::Domain(msg) => Error::Domain(format!("at step {step}: {msg}")),
        other => other,
    }
}

struct Rk4Work {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Work {
    fn new(n: usize) -> Self {
        Self {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    fn step(&mut self, model: &ModelSpec, x: &mut [f64], dt: f64) -> Result<()> {
        model.vector_field_into(x, &mut self.k1)?;
        stage(&mut self.tmp, x, &self.k1, 0.5 * dt);
        model.vector_field_into(&self.tmp, &mut self.k2)?;
        stage(&mut self.tmp, x, &self.k2, 0.5 * dt);
        model.vector_field_into(&self.tmp, &mut self.k3)?;
        stage(&mut self.tmp, x, &self.k3, dt);
        model.vector_field_into(&self.tmp, &mut self.k4)?;
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += dt / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        Ok(())
    }
}

fn stage(out: &mut [f64], x: &[f64], k: &[f64], h: f64) {
    for ((o, &xi), &ki) in out.iter_mut().zip(x).zip(k) {
        *o = xi + h * ki;
    }
}

/// Result of [`check_sum_bounds`].
#[derive(Debug, Clone, PartialEq)]
pub struct SumBoundReport {
    /// Allowance added to both sides of the envelope.
    pub epsilon: f64,
    /// Largest amount by which any sample leaves the widened envelope (0 if none).
    pub max_violation: f64,
    /// Sample index of the largest violation, if any.
    pub worst_step: Option<usize>,
}

impl SumBoundReport {
    pub fn holds(&self) -> bool {
        self.max_violation == 0.0
    }
}

/// Allowance for comparing an Euler trajectory that starts at total `s0` with
/// the continuous sum envelope.
///
/// Summed over components, an Euler step is `S <- (1 - c) S + h w` with
/// `c = alpha gamma dt` and `w` between `beta d_n` and `beta d_1`, so the
/// discrete envelope decays like `(1 - c)^k` instead of `e^{-ck}`. The gap
/// between the two is at most `c / (2e (1 - c))`. Infinite when `c >= 1`.
pub fn euler_sum_allowance(model: &ModelSpec, dt: f64, s0: f64) -> f64 {
    let c = model.alpha() * model.gamma() * dt;
    if !(c < 1.0) {
        return f64::INFINITY;
    }
    let (beta, alpha) = (model.beta(), model.alpha());
    let low = beta * model.paths().d_min() / alpha;
    let high = beta * model.paths().d_max() / alpha;
    let spread = (s0 - low).abs().max((s0 - high).abs());
    let rounding = 1e-10 * s0.max(high);
    spread * c / (2.0 * std::f64::consts::E * (1.0 - c)) + rounding
}

/// Checks the exponential envelope of the total pheromone `S(t)`:
///
/// ```text
/// bd_n/a + (S0 - bd_n/a) e^{-a g t} - eps <= S(t) <= bd_1/a + (S0 - bd_1/a) e^{-a g t} + eps
/// ```
///
/// Proved for the EigenAnt field only.
pub fn check_sum_bounds(traj: &Trajectory, model: &ModelSpec, epsilon: f64) -> Result<SumBoundReport> {
    if !model.is_eigenant() {
        return Err(Error::Unsupported(format!(
            "sum envelope holds for the sum-identity field only, not {}",
            model.variant_name()
        )));
    }
    let (alpha, beta, gamma) = (model.alpha(), model.beta(), model.gamma());
    let low_limit = beta * model.paths().d_min() / alpha;
    let high_limit = beta * model.paths().d_max() / alpha;
    let s0 = traj.sums()[0];
    let mut max_violation = 0.0f64;
    let mut worst_step = None;
    for (k, (&t, &s)) in traj.times().iter().zip(traj.sums()).enumerate() {
        let decay = (-alpha * gamma * t).exp();
        let lower = low_limit + (s0 - low_limit) * decay - epsilon;
        let upper = high_limit + (s0 - high_limit) * decay + epsilon;
        let violation = (lower - s).max(s - upper);
        if violation > max_violation {
            max_violation = violation;
            worst_step = Some(k);
        }
    }
    Ok(SumBoundReport {
        epsilon,
        max_violation,
        worst_step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Activation, PathSystem};

    fn tenpath(gamma: f64) -> (ModelSpec, Vec<f64>) {
        let lengths: Vec<f64> = (1..=10).map(f64::from).collect();
        let m = ModelSpec::new(1.0, 1.0, gamma, PathSystem::from_lengths(&lengths).unwrap()).unwrap();
        let x0 = (1..=10).map(|i| 0.1 * i as f64).collect();
        (m, x0)
    }

    #[test]
    fn zero_steps_returns_initial_state() {
        let (m, x0) = tenpath(10.0);
        let traj = integrate(&m, &x0, &Settings::euler(0.02, 0)).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.state(0), x0.as_slice());
    }

    #[test]
    fn shortest_path_wins() {
        let (m, x0) = tenpath(10.0);
        let traj = integrate(&m, &x0, &Settings::euler(0.02, 2000)).unwrap();
        let fin = traj.final_state();
        let gap = fin
            .iter()
            .enumerate()
            .map(|(i, &v)| (v - if i == 0 { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        assert!(gap < 1e-2, "gap {gap}");
        assert!(!traj.positivity_violated());
    }

    #[test]
    fn scalar_relaxation() {
        // dx/dt = -x + 1, x(t) = 1 + (x0 - 1) e^{-t}
        let m = ModelSpec::new(1.0, 1.0, 1.0, PathSystem::from_lengths(&[1.0]).unwrap()).unwrap();
        let traj = integrate(&m, &[2.0], &Settings::euler(0.02, 2000)).unwrap();
        assert!((traj.final_state()[0] - 1.0).abs() < 1e-6);
        let rk = integrate(&m, &[2.0], &Settings::rk4(0.02, 50)).unwrap();
        assert!((rk.final_state()[0] - (1.0 + (-1.0f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn times_and_sums_are_consistent() {
        let (m, x0) = tenpath(1.0);
        let traj = integrate(&m, &x0, &Settings::rk4(0.01, 37)).unwrap();
        for (k, &t) in traj.times().iter().enumerate() {
            assert_eq!(t, k as f64 * 0.01);
            assert_eq!(traj.sums()[k], traj.state(k).iter().sum::<f64>());
        }
    }

    #[test]
    fn positivity_policies() {
        // dt so large that Euler overshoots zero on the first step
        let (m, x0) = tenpath(10.0);
        let err = integrate(&m, &x0, &Settings::euler(0.5, 3)).unwrap_err();
        assert!(matches!(err, Error::Positivity { step: 1, .. }), "{err}");
        let traj = integrate(&m, &x0, &Settings::euler(0.5, 3).with_policy(PositivityPolicy::ClampEpsilon)).unwrap();
        assert!(traj.positivity_violated());
        assert!(traj.states().flatten().all(|&v| v > 0.0));
    }

    #[test]
    fn blow_up_is_reported_with_step() {
        let m = ModelSpec::new(1e-3, 1e300, 1e300, PathSystem::from_lengths(&[1.0, 2.0]).unwrap()).unwrap();
        let err = integrate(&m, &[1.0, 1.0], &Settings::euler(1.0, 5)).unwrap_err();
        assert!(matches!(err, Error::NonFinite { step: 1, .. }), "{err}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let (m, _) = tenpath(1.0);
        assert!(integrate(&m, &[1.0; 3], &Settings::euler(0.1, 1)).is_err());
        assert!(integrate(&m, &[0.0; 10], &Settings::euler(0.1, 1)).is_err());
        assert!(integrate(&m, &[1.0; 10], &Settings::euler(-0.1, 1)).is_err());
    }

    #[test]
    fn sum_envelope_holds_on_fig1_run() {
        let (m, x0) = tenpath(10.0);
        let traj = integrate(&m, &x0, &Settings::euler(0.02, 2000)).unwrap();
        let allowance = euler_sum_allowance(&m, 0.02, traj.sums()[0]);
        let report = check_sum_bounds(&traj, &m, allowance).unwrap();
        assert!(report.holds(), "{report:?}");
        // the continuous envelope alone is not enough at this step size
        assert!(!check_sum_bounds(&traj, &m, 0.0).unwrap().holds());
        assert!(euler_sum_allowance(&m, 0.2, 1.0).is_infinite());
    }

    #[test]
    fn equal_lengths_make_the_sum_exact() {
        let m = ModelSpec::new(0.5, 2.0, 1.0, PathSystem::from_lengths(&[2.0, 2.0, 2.0]).unwrap()).unwrap();
        // S' = -a S + b d, and S(0) = b d / a = 2: S is constant
        let traj = integrate(&m, &[0.5, 1.0, 0.5], &Settings::rk4(0.01, 500)).unwrap();
        assert!(traj.sums().iter().all(|&s| (s - 2.0).abs() < 1e-12));
        let report = check_sum_bounds(&traj, &m, 0.0).unwrap();
        assert!(report.max_violation < 1e-12);
    }

    #[test]
    fn sum_envelope_requires_eigenant() {
        let (m, x0) = tenpath(1.0);
        let tanh = m.with_activation(Activation::Tanh);
        let traj = integrate(&tanh, &x0, &Settings::euler(0.02, 3)).unwrap();
        assert!(matches!(check_sum_bounds(&traj, &tanh, 0.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn csv_layout() {
        let m = ModelSpec::new(1.0, 1.0, 1.0, PathSystem::from_lengths(&[1.0, 2.0]).unwrap()).unwrap();
        let traj = integrate(&m, &[0.5, 0.25], &Settings::euler(0.5, 1)).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x_1,x_2,S"));
        assert_eq!(
            lines.next(),
            Some("0.0000000000000000e0,5.0000000000000000e-1,2.5000000000000000e-1,7.5000000000000000e-1")
        );
        let mut buf = Vec::new();
        traj.write_csv_tagged(&mut buf, Some("euler")).unwrap();
        assert!(String::from_utf8(buf).unwrap().lines().nth(2).unwrap().ends_with(",euler"));
    }
}
