//! Empirical convergence rates and limits, checked against the global
//! convergence and rate results for EigenAnt.

use std::fmt;

use crate::error::{Error, Result};
use crate::integrate::{check_sum_bounds, SumBoundReport, Trajectory};
use crate::models::ModelSpec;
use crate::numerics::fit_line;

/// Minimum number of samples a decay fit accepts.
pub const MIN_FIT_SAMPLES: usize = 10;

/// Default threshold for [`compare_variants`].
pub const DEFAULT_THETA: f64 = 0.05;

/// How the asymptote of a fitted series is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitEstimate {
    Zero,
    /// Mean of the samples in the last 10% of the window.
    TailMean,
    Known(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Negated slope of `ln |x - limit|` against time.
    pub rate: f64,
    pub limit: f64,
    pub r_squared: f64,
    /// Window actually used, after truncation.
    pub window: (f64, f64),
    pub samples: usize,
}

/// Least-squares exponential rate of `values -> limit` over `window`.
///
/// Samples whose residual is not strictly positive (a decaying series that
/// underflowed or crossed zero) truncate the window there.
pub fn fit_decay_rate(times: &[f64], values: &[f64], window: (f64, f64), limit: LimitEstimate) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(Error::Fit("times and values differ in length".into()));
    }
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::Fit(format!("empty window [{lo}, {hi}]")));
    }
    let inside: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(&t, _)| t >= lo && t <= hi)
        .map(|(&t, &v)| (t, v))
        .collect();
    if inside.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!(
            "{} samples in window [{lo}, {hi}], need {MIN_FIT_SAMPLES}",
            inside.len()
        )));
    }

    let (limit_value, fit_span) = match limit {
        LimitEstimate::Zero => (0.0, &inside[..]),
        LimitEstimate::Known(v) => (v, &inside[..]),
        LimitEstimate::TailMean => {
            let tail_start = hi - 0.1 * (hi - lo);
            let split = inside.iter().position(|(t, _)| *t >= tail_start).unwrap_or(inside.len());
            let tail = &inside[split..];
            if tail.is_empty() {
                return Err(Error::Fit("no samples in the tail segment".into()));
            }
            let mean = tail.iter().map(|(_, v)| v).sum::<f64>() / tail.len() as f64;
            (mean, &inside[..split])
        }
    };

    let mut ts = Vec::with_capacity(fit_span.len());
    let mut logs = Vec::with_capacity(fit_span.len());
    for &(t, v) in fit_span {
        let residual = if limit == LimitEstimate::Zero { v } else { (v - limit_value).abs() };
        if !(residual > 0.0) || !residual.is_finite() {
            break;
        }
        ts.push(t);
        logs.push(residual.ln());
    }
    if ts.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!(
            "only {} usable samples before the series reached its limit or zero",
            ts.len()
        )));
    }
    let line = fit_line(&ts, &logs).ok_or_else(|| Error::Fit("degenerate time axis".into()))?;
    Ok(DecayFit {
        rate: -line.slope,
        limit: limit_value,
        r_squared: line.r_squared,
        window: (ts[0], ts[ts.len() - 1]),
        samples: ts.len(),
    })
}

/// Mean over the last 10% of `window`.
fn tail_mean(times: &[f64], values: &[f64], window: (f64, f64)) -> Option<f64> {
    let start = window.1 - 0.1 * (window.1 - window.0);
    let tail: Vec<f64> = times
        .iter()
        .zip(values)
        .filter(|(&t, _)| t >= start && t <= window.1)
        .map(|(_, &v)| v)
        .collect();
    (!tail.is_empty()).then(|| tail.iter().sum::<f64>() / tail.len() as f64)
}

/// Fitted against predicted behaviour of one component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentRate {
    pub index: usize,
    /// Per unit of gain-scaled time.
    pub fitted_rate: f64,
    /// `alpha (1 - d_i / d_1)`; zero for paths tied with the shortest.
    pub theoretical_rate: f64,
    pub fitted_limit: f64,
    /// `x_i(0) / (alpha sigma_1)` on the shortest set, zero elsewhere.
    pub theoretical_limit: f64,
    /// `|fitted - theoretical| / theoretical`, when the theoretical rate is nonzero.
    pub relative_rate_error: Option<f64>,
    pub fit_window: (f64, f64),
    pub fit_quality: f64,
    /// Set when the fit could not be performed.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// Gain used to rescale time; divide rates by it for paper-time rates.
    pub gamma: f64,
    pub components: Vec<ComponentRate>,
}

/// Last half of the horizon minus its final 2%.
pub fn default_fit_window(horizon: f64) -> (f64, f64) {
    (0.5 * horizon, 0.98 * horizon)
}

/// Rate report for every component of `traj`.
///
/// `window` is in gain-scaled time; `None` selects [`default_fit_window`].
pub fn rate_report(model: &ModelSpec, traj: &Trajectory, window: Option<(f64, f64)>) -> Result<RateReport> {
    model.check_dim(traj.state(0))?;
    let gamma = model.gamma();
    let tau: Vec<f64> = traj.times().iter().map(|t| gamma * t).collect();
    let window = window.unwrap_or_else(|| default_fit_window(gamma * traj.horizon()));
    let paths = model.paths();
    let x0 = traj.state(0);
    let d1 = paths.d_max();
    let tied_mass: f64 = paths.shortest_set().iter().map(|&j| x0[j]).sum();
    // x_i(0) / (alpha sigma_1) with sigma_1 = tied_mass / (beta d_1)
    let limit_scale = model.beta() * d1 / (model.alpha() * tied_mass);

    let components = (0..traj.dim())
        .map(|i| {
            let shortest = paths.is_shortest(i);
            let theoretical_rate = if shortest {
                0.0
            } else {
                model.alpha() * (1.0 - paths.d()[i] / d1)
            };
            let theoretical_limit = if shortest { x0[i] * limit_scale } else { 0.0 };
            let estimate = if shortest { LimitEstimate::TailMean } else { LimitEstimate::Zero };
            match fit_decay_rate(&tau, &traj.component(i), window, estimate) {
                Ok(fit) => ComponentRate {
                    index: i,
                    fitted_rate: fit.rate,
                    theoretical_rate,
                    fitted_limit: fit.limit,
                    theoretical_limit,
                    relative_rate_error: (theoretical_rate > 0.0)
                        .then(|| (fit.rate - theoretical_rate).abs() / theoretical_rate),
                    fit_window: fit.window,
                    fit_quality: fit.r_squared,
                    note: None,
                },
                Err(e) => ComponentRate {
                    index: i,
                    fitted_rate: f64::NAN,
                    theoretical_rate,
                    fitted_limit: if shortest {
                        tail_mean(&tau, &traj.component(i), window).unwrap_or(f64::NAN)
                    } else {
                        f64::NAN
                    },
                    theoretical_limit,
                    relative_rate_error: None,
                    fit_window: window,
                    fit_quality: 0.0,
                    note: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(RateReport { gamma, components })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckStatus {
    Pass,
    Fail,
    Inconclusive,
}

impl CheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Thresholds for [`verify_theorem2`], all relative to `beta d_1 / alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem2Criteria {
    /// A non-shortest component counts as converged below this fraction.
    pub vanish: f64,
    /// Allowed relative deviation of the shortest-set sum from its limit.
    pub limit_tol: f64,
    /// Max relative change of `S` over the last 10% of the horizon.
    pub settle: f64,
    /// Allowance for the sum envelope check (absolute).
    pub envelope_allowance: f64,
}

impl Theorem2Criteria {
    pub fn new(envelope_allowance: f64) -> Self {
        Self {
            vanish: 1e-4,
            limit_tol: 1e-2,
            settle: 1e-3,
            envelope_allowance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Report {
    pub status: CheckStatus,
    pub settle_change: f64,
    /// Final value of each non-shortest component.
    pub vanishing: Vec<(usize, f64)>,
    pub vanish_threshold: f64,
    pub shortest_sum: f64,
    pub shortest_target: f64,
    pub final_sum: f64,
    /// `None` for variants the envelope is not proved for.
    pub envelope: Option<SumBoundReport>,
    pub failures: Vec<String>,
}

/// Checks the final state of `traj` against the global convergence result:
/// non-shortest components vanish, the shortest-set sum reaches
/// `beta d_1 / alpha`, and `S` respects its envelope.
pub fn verify_theorem2(model: &ModelSpec, traj: &Trajectory, criteria: &Theorem2Criteria) -> Result<Theorem2Report> {
    model.check_dim(traj.state(0))?;
    let paths = model.paths();
    let target = model.shortest_limit();
    let last = traj.len() - 1;
    let horizon = traj.horizon();
    let settle_index = traj
        .times()
        .iter()
        .position(|&t| t >= 0.9 * horizon)
        .unwrap_or(last);
    let final_sum = traj.sums()[last];
    let settle_change = (final_sum - traj.sums()[settle_index]).abs() / final_sum.abs();

    let fin = traj.final_state();
    let vanish_threshold = criteria.vanish * target;
    let vanishing: Vec<(usize, f64)> = (0..fin.len())
        .filter(|&i| !paths.is_shortest(i))
        .map(|i| (i, fin[i]))
        .collect();
    let shortest_sum: f64 = paths.shortest_set().iter().map(|&j| fin[j]).sum();

    let envelope = if model.is_eigenant() {
        Some(check_sum_bounds(traj, model, criteria.envelope_allowance)?)
    } else {
        None
    };

    let mut failures = Vec::new();
    for &(i, v) in &vanishing {
        if v.abs() >= vanish_threshold {
            failures.push(format!("x_{} = {v:e} has not vanished (threshold {vanish_threshold:e})", i + 1));
        }
    }
    if (shortest_sum - target).abs() > criteria.limit_tol * target {
        failures.push(format!("shortest-set sum {shortest_sum} differs from limit {target}"));
    }
    if let Some(env) = &envelope {
        if !env.holds() {
            failures.push(format!("sum envelope violated by {:e}", env.max_violation));
        }
    }
    let settled = settle_change < criteria.settle && settle_index < last;
    let status = if !settled {
        CheckStatus::Inconclusive
    } else if failures.is_empty() {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    Ok(Theorem2Report {
        status,
        settle_change,
        vanishing,
        vanish_threshold,
        shortest_sum,
        shortest_target: target,
        final_sum,
        envelope,
        failures,
    })
}

/// One model in a speed comparison.
#[derive(Debug, Clone, Copy)]
pub struct Contender<'a> {
    pub label: &'a str,
    pub model: &'a ModelSpec,
    pub trajectory: &'a Trajectory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankEntry {
    pub label: String,
    /// First paper time with `|x_1 - limit| < theta * limit`; infinite if never.
    pub time_to_threshold: f64,
    pub limit: f64,
    /// 1-based competition rank; equal times share a rank.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub theta: f64,
    /// Sorted by ascending time to threshold.
    pub entries: Vec<RankEntry>,
}

impl Ranking {
    pub fn get(&self, label: &str) -> Option<&RankEntry> {
        self.entries.iter().find(|e| e.label == label)
    }
}

/// Ranks models by how quickly the shortest-path component reaches its
/// equilibrium value `beta d_1 / alpha`.
pub fn compare_variants(contenders: &[Contender<'_>], theta: f64) -> Result<Ranking> {
    let first = contenders
        .first()
        .ok_or_else(|| Error::invalid("contenders", "nothing to compare"))?;
    for c in contenders {
        if c.trajectory.horizon() != first.trajectory.horizon() {
            return Err(Error::invalid("contenders", format!("`{}` has a different horizon", c.label)));
        }
        if c.trajectory.state(0) != first.trajectory.state(0) {
            return Err(Error::invalid("contenders", format!("`{}` starts elsewhere", c.label)));
        }
        if c.model.paths().d() != first.model.paths().d() {
            return Err(Error::invalid("contenders", format!("`{}` has different path lengths", c.label)));
        }
    }
    let mut entries: Vec<RankEntry> = contenders
        .iter()
        .map(|c| {
            let limit = c.model.shortest_limit();
            let time_to_threshold = c
                .trajectory
                .states()
                .zip(c.trajectory.times())
                .find(|(x, _)| (x[0] - limit).abs() < theta * limit)
                .map_or(f64::INFINITY, |(_, &t)| t);
            RankEntry {
                label: c.label.to_string(),
                time_to_threshold,
                limit,
                rank: 0,
            }
        })
        .collect();
    entries.sort_by(|a, b| a.time_to_threshold.total_cmp(&b.time_to_threshold));
    for k in 0..entries.len() {
        entries[k].rank = if k > 0 && entries[k].time_to_threshold == entries[k - 1].time_to_threshold {
            entries[k - 1].rank
        } else {
            k + 1
        };
    }
    Ok(Ranking { theta, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{integrate, Settings, Source};
    use crate::models::PathSystem;

    #[test]
    fn synthetic_exponential() {
        let times: Vec<f64> = (0..100).map(|k| 20.0 * k as f64 / 99.0).collect();
        let values: Vec<f64> = times.iter().map(|t| 3.0 * (-0.5 * t).exp()).collect();
        let fit = fit_decay_rate(&times, &values, (0.0, 20.0), LimitEstimate::Zero).unwrap();
        assert!((fit.rate - 0.5).abs() < 1e-10);
        assert_eq!(fit.limit, 0.0);
        assert!((fit.r_squared - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tail_mean_limit() {
        let times: Vec<f64> = (0..400).map(|k| 0.1 * k as f64).collect();
        let values: Vec<f64> = times.iter().map(|t| 2.0 - (-0.8 * t).exp()).collect();
        let fit = fit_decay_rate(&times, &values, (0.0, 39.9), LimitEstimate::TailMean).unwrap();
        assert!((fit.limit - 2.0).abs() < 1e-12);
        // early samples dominate; rate is recovered
        assert!((fit.rate - 0.8).abs() < 0.05 * 0.8, "{fit:?}");
    }

    #[test]
    fn underflow_truncates_then_fails() {
        let times: Vec<f64> = (0..50).map(f64::from).collect();
        let mut values: Vec<f64> = times.iter().map(|t| (-t).exp()).collect();
        for v in values.iter_mut().skip(20) {
            *v = 0.0;
        }
        let fit = fit_decay_rate(&times, &values, (0.0, 49.0), LimitEstimate::Zero).unwrap();
        assert_eq!(fit.samples, 20);
        assert_eq!(fit.window, (0.0, 19.0));
        let err = fit_decay_rate(&times, &values, (15.0, 49.0), LimitEstimate::Zero).unwrap_err();
        assert!(matches!(err, Error::Fit(_)));
        assert!(fit_decay_rate(&times[..5], &values[..5], (0.0, 4.0), LimitEstimate::Zero).is_err());
    }

    fn section5() -> (ModelSpec, Vec<f64>) {
        let lengths: Vec<f64> = (1..=10).map(f64::from).collect();
        let m = ModelSpec::new(1.0, 1.0, 10.0, PathSystem::from_lengths(&lengths).unwrap()).unwrap();
        (m, (1..=10).map(|i| 0.1 * i as f64).collect())
    }

    #[test]
    fn theorem2_pass_and_inconclusive() {
        let (m, x0) = section5();
        let traj = integrate(&m, &x0, &Settings::euler(0.02, 2000)).unwrap();
        let crit = Theorem2Criteria::new(crate::integrate::euler_sum_allowance(&m, 0.02, traj.sums()[0]));
        let report = verify_theorem2(&m, &traj, &crit).unwrap();
        assert_eq!(report.status, CheckStatus::Pass, "{report:?}");
        assert!((report.final_sum - 1.0).abs() < 1e-2);

        let short = integrate(&m, &x0, &Settings::euler(0.02, 10)).unwrap();
        assert_eq!(verify_theorem2(&m, &short, &crit).unwrap().status, CheckStatus::Inconclusive);
    }

    #[test]
    fn theorem2_detects_failure() {
        // a fabricated settled trajectory that never left its start
        let (m, x0) = section5();
        let states = vec![x0.clone(); 50];
        let times = (0..50).map(f64::from).collect();
        let traj = Trajectory::from_samples(times, states, Source::Exact, 1.0).unwrap();
        let report = verify_theorem2(&m, &traj, &Theorem2Criteria::new(0.0)).unwrap();
        assert_eq!(report.status, CheckStatus::Fail);
        assert!(!report.failures.is_empty());
    }

    #[test]
    fn identical_trajectories_tie() {
        let (m, x0) = section5();
        let traj = integrate(&m, &x0, &Settings::euler(0.02, 300)).unwrap();
        let contenders = [
            Contender { label: "a", model: &m, trajectory: &traj },
            Contender { label: "b", model: &m, trajectory: &traj },
        ];
        let ranking = compare_variants(&contenders, DEFAULT_THETA).unwrap();
        assert_eq!(ranking.entries[0].rank, 1);
        assert_eq!(ranking.entries[1].rank, 1);
        assert_eq!(ranking.entries[0].time_to_threshold, ranking.entries[1].time_to_threshold);
        assert!(ranking.entries[0].time_to_threshold.is_finite());
    }

    #[test]
    fn unreached_threshold_is_infinite() {
        let (m, x0) = section5();
        let traj = integrate(&m, &x0, &Settings::euler(0.02, 3)).unwrap();
        let ranking = compare_variants(&[Contender { label: "slow", model: &m, trajectory: &traj }], 0.05).unwrap();
        assert!(ranking.entries[0].time_to_threshold.is_infinite());
    }

    #[test]
    fn mismatched_contenders_rejected() {
        let (m, x0) = section5();
        let a = integrate(&m, &x0, &Settings::euler(0.02, 10)).unwrap();
        let b = integrate(&m, &x0, &Settings::euler(0.02, 20)).unwrap();
        let contenders = [
            Contender { label: "a", model: &m, trajectory: &a },
            Contender { label: "b", model: &m, trajectory: &b },
        ];
        assert!(compare_variants(&contenders, 0.05).is_err());
    }
}
