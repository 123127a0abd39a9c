//! Closed-form EigenAnt solution and its large-time expansion.
//!
//! With `F(u) = sum_i x_i(0)/(beta d_i) * exp(beta d_i u)` the EigenAnt
//! trajectory is, in gain-scaled time `tau = gamma t`,
//!
//! ```text
//! u(tau)     = F^{-1}(F(0) + (e^{alpha tau} - 1) / alpha)
//! x_i(tau)   = x_i(0) exp(beta d_i u(tau) - alpha tau)
//! S(tau)     = e^{-alpha tau} F'(u(tau))
//! ```
//!
//! Every exponential sum is evaluated in the log domain; `e^{alpha tau}`
//! leaves double range long before the dynamics have settled.

use crate::error::{Error, Result};
use crate::integrate::{Source, Trajectory};
use crate::models::ModelSpec;
use crate::numerics::{bracketed_newton, logsumexp};

/// Largest `alpha * tau` accepted by [`ClosedForm::state_at`].
pub const MAX_SCALED_EXPONENT: f64 = 700.0 * std::f64::consts::LN_10;

/// Below this relative deficit `y` is treated as equal to `F(0)`.
pub const INVERSE_FLOOR_TOL: f64 = 1e-12;

const NEWTON_MAX_ITER: usize = 200;

/// A positive quantity carried as its logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub ln: f64,
    /// Sign of the value; the sums evaluated here are always positive.
    pub sign: f64,
}

impl LogValue {
    fn positive(ln: f64) -> Self {
        Self { ln, sign: 1.0 }
    }

    /// Linear value; may overflow to infinity.
    pub fn value(&self) -> f64 {
        self.sign * self.ln.exp()
    }
}

/// `F(u) = sum_i c_i exp(r_i u)` with `c_i = x_i(0)/(beta d_i)`, `r_i = beta d_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FFunction {
    ln_c: Vec<f64>,
    r: Vec<f64>,
    ln_f0: f64,
}

impl FFunction {
    pub fn new(coefficients: &[f64], exponents: &[f64]) -> Result<Self> {
        if coefficients.is_empty() || coefficients.len() != exponents.len() {
            return Err(Error::invalid("coefficients", "need one exponent per coefficient"));
        }
        if coefficients.iter().chain(exponents).any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid(
                "coefficients",
                "coefficients and exponents must be positive (requires a positive initial state)",
            ));
        }
        let ln_c: Vec<f64> = coefficients.iter().map(|c| c.ln()).collect();
        let ln_f0 = logsumexp(&ln_c);
        Ok(Self {
            ln_c,
            r: exponents.to_vec(),
            ln_f0,
        })
    }

    /// The function attached to an EigenAnt trajectory starting at `x0`.
    pub fn from_initial(model: &ModelSpec, x0: &[f64]) -> Result<Self> {
        model.check_dim(x0)?;
        let r: Vec<f64> = model.paths().d().iter().map(|d| model.beta() * d).collect();
        let c: Vec<f64> = x0.iter().zip(&r).map(|(x, r)| x / r).collect();
        Self::new(&c, &r)
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.ln_c.iter().map(|l| l.exp()).collect()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.r
    }

    /// `F(0) = sum_i c_i`.
    pub fn f0(&self) -> f64 {
        self.ln_f0.exp()
    }

    pub fn ln_f0(&self) -> f64 {
        self.ln_f0
    }

    pub fn eval(&self, u: f64) -> LogValue {
        let terms: Vec<f64> = self.ln_c.iter().zip(&self.r).map(|(lc, r)| lc + r * u).collect();
        LogValue::positive(logsumexp(&terms))
    }

    /// `F'(u) = sum_i c_i r_i exp(r_i u)`.
    pub fn eval_prime(&self, u: f64) -> LogValue {
        let terms: Vec<f64> = self
            .ln_c
            .iter()
            .zip(&self.r)
            .map(|(lc, r)| lc + r.ln() + r * u)
            .collect();
        LogValue::positive(logsumexp(&terms))
    }

    /// `F^{-1}(y)` for `y >= F(0)`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(Error::Domain(format!("F^-1 undefined at {y}; need y >= F(0) = {}", self.f0())));
        }
        self.inverse_ln(y.ln())
    }

    /// `F^{-1}(exp(ln_y))`, usable when `y` itself overflows.
    ///
    /// Newton on `ln F(u) - ln y`, safeguarded by bisection on
    /// `[0, (ln y - ln c_1)/r_1 + 1]`, a valid bracket since `F(u) >= c_1 e^{r_1 u}`.
    pub fn inverse_ln(&self, ln_y: f64) -> Result<f64> {
        if ln_y.is_nan() {
            return Err(Error::Domain("F^-1 of NaN".into()));
        }
        if ln_y <= self.ln_f0 {
            if ln_y >= self.ln_f0 + (-INVERSE_FLOOR_TOL).ln_1p() {
                return Ok(0.0);
            }
            return Err(Error::Domain(format!(
                "F^-1 undefined below F(0): ln y = {ln_y}, ln F(0) = {}",
                self.ln_f0
            )));
        }
        // term with the largest exponent
        let lead = (0..self.r.len())
            .max_by(|&a, &b| self.r[a].total_cmp(&self.r[b]))
            .expect("nonempty");
        let hi = (ln_y - self.ln_c[lead]).max(0.0) / self.r[lead] + 1.0;
        let tol = 4.0 * f64::EPSILON * ln_y.abs().max(1.0);
        let h = |u: f64| {
            let ln_f = self.eval(u).ln;
            let slope = (self.eval_prime(u).ln - ln_f).exp();
            (ln_f - ln_y, slope)
        };
        Ok(bracketed_newton(h, 0.0, hi, tol, NEWTON_MAX_ITER)?.x)
    }
}

/// `sigma_k = (1/(beta d'_k)) * sum_{j : d_j = d'_k} x_j(0)`, one per distinct length.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaCoefficients {
    pub sigma: Vec<f64>,
}

impl SigmaCoefficients {
    pub fn new(model: &ModelSpec, x0: &[f64]) -> Result<Self> {
        model.check_dim(x0)?;
        let paths = model.paths();
        let sigma = paths
            .multiplicity()
            .iter()
            .zip(paths.d_prime())
            .map(|(group, d)| group.iter().map(|&j| x0[j]).sum::<f64>() / (model.beta() * d))
            .collect::<Vec<_>>();
        if sigma.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::invalid("initial", "sigma coefficients require a positive initial state"));
        }
        Ok(Self { sigma })
    }
}

/// Closed-form state at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactState {
    /// Paper time.
    pub t: f64,
    pub x: Vec<f64>,
    /// Total pheromone from `e^{-alpha tau} F'(u)`, independent of `x`.
    pub sum: f64,
    /// `u = int_0^tau ds / S(s)`.
    pub u: f64,
}

/// Leading-order expansion at one instant, with the vanishing remainders dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticState {
    pub t: f64,
    pub x: Vec<f64>,
    pub sum: f64,
    /// Size of the first correction relative to the leading term inside `F^{-1}`.
    pub correction_ratio: f64,
    /// False when `correction_ratio` exceeds [`ASYMPTOTIC_VALIDITY`].
    pub valid: bool,
}

/// Threshold on [`AsymptoticState::correction_ratio`].
pub const ASYMPTOTIC_VALIDITY: f64 = 0.1;

/// Ground-truth evaluator for one EigenAnt initial value problem.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    model: ModelSpec,
    x0: Vec<f64>,
    f: FFunction,
    sigma: SigmaCoefficients,
}

impl ClosedForm {
    pub fn new(model: &ModelSpec, x0: &[f64]) -> Result<Self> {
        if !model.is_eigenant() {
            return Err(Error::Unsupported(format!(
                "no closed form for the {} field",
                model.variant_name()
            )));
        }
        Ok(Self {
            f: FFunction::from_initial(model, x0)?,
            sigma: SigmaCoefficients::new(model, x0)?,
            model: model.clone(),
            x0: x0.to_vec(),
        })
    }

    pub fn f(&self) -> &FFunction {
        &self.f
    }

    pub fn sigma(&self) -> &SigmaCoefficients {
        &self.sigma
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    /// `ln(F(0) + (e^{alpha tau} - 1)/alpha)`.
    fn ln_target(&self, tau: f64) -> f64 {
        let alpha = self.model.alpha();
        let at = alpha * tau;
        if at <= 700.0 {
            (self.f.f0() + at.exp_m1() / alpha).ln()
        } else {
            let shift = (alpha * self.f.f0() - 1.0) * (-at).exp();
            at - alpha.ln() + shift.ln_1p()
        }
    }

    /// Exact state at paper time `t` (gain-rescaled internally).
    pub fn state_at(&self, t: f64) -> Result<ExactState> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
        }
        let tau = self.model.gamma() * t;
        let alpha = self.model.alpha();
        if alpha * tau > MAX_SCALED_EXPONENT {
            return Err(Error::HorizonTooLarge { t, scaled: alpha * tau });
        }
        let u = if t == 0.0 { 0.0 } else { self.f.inverse_ln(self.ln_target(tau))? };
        let beta = self.model.beta();
        let x = self
            .x0
            .iter()
            .zip(self.model.paths().d())
            .map(|(x0, d)| x0 * (beta * d * u - alpha * tau).exp())
            .collect();
        let sum = (self.f.eval_prime(u).ln - alpha * tau).exp();
        Ok(ExactState { t, x, sum, u })
    }

    /// Leading term plus first correction of the large-time expansion.
    pub fn asymptotic_at(&self, t: f64) -> AsymptoticState {
        let tau = self.model.gamma() * t;
        let alpha = self.model.alpha();
        let beta = self.model.beta();
        let paths = self.model.paths();
        let d1 = paths.d_max();
        let sigma = &self.sigma.sigma;
        let ln_k = -(alpha * sigma[0]).ln();

        // first correction only exists with a second distinct length
        let second = paths.second_distinct().map(|d2| {
            let rho = d2 / d1;
            let rate = alpha * (1.0 - rho);
            let coef = (rho * ln_k - rate * tau).exp();
            (d2, rho, coef)
        });

        let x = (0..paths.len())
            .map(|i| {
                let x0 = self.x0[i];
                if paths.is_shortest(i) {
                    let correction = second.map_or(0.0, |(_, _, coef)| sigma[1] / sigma[0] * coef);
                    x0 * (ln_k.exp() - correction)
                } else {
                    let rho = paths.d()[i] / d1;
                    x0 * (rho * ln_k - alpha * (1.0 - rho) * tau).exp()
                }
            })
            .collect();
        let sum = beta * d1 / alpha
            - second.map_or(0.0, |(d2, _, coef)| beta * sigma[1] * (d1 - d2) * coef);

        let correction_ratio = second.map_or(0.0, |(_, rho, _)| {
            let ln_y = alpha * tau - alpha.ln();
            (sigma[1].ln() - rho * sigma[0].ln() + (rho - 1.0) * ln_y).exp()
        });
        AsymptoticState {
            t,
            x,
            sum,
            correction_ratio,
            valid: correction_ratio <= ASYMPTOTIC_VALIDITY,
        }
    }

    /// Exact samples at the given paper times.
    pub fn sample(&self, times: &[f64]) -> Result<Trajectory> {
        let states = times
            .iter()
            .map(|&t| self.state_at(t).map(|s| s.x))
            .collect::<Result<Vec<_>>>()?;
        let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
        Trajectory::from_samples(times.to_vec(), states, Source::Exact, dt)
    }

    /// Exact samples on the grid `k * dt`, `k = 0..=steps`.
    pub fn sample_grid(&self, dt: f64, steps: usize) -> Result<Trajectory> {
        let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
        self.sample(&times)
    }

    /// Asymptotic samples at the given paper times.
    pub fn sample_asymptotic(&self, times: &[f64]) -> Result<Trajectory> {
        let states = times.iter().map(|&t| self.asymptotic_at(t).x).collect();
        let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
        Trajectory::from_samples(times.to_vec(), states, Source::Asymptotic, dt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::PathSystem;
    use proptest::prelude::*;

    fn section5(gamma: f64) -> (ModelSpec, Vec<f64>) {
        let lengths: Vec<f64> = (1..=10).map(f64::from).collect();
        let m = ModelSpec::new(1.0, 1.0, gamma, PathSystem::from_lengths(&lengths).unwrap()).unwrap();
        (m, (1..=10).map(|i| 0.1 * i as f64).collect())
    }

    #[test]
    fn f_at_zero() {
        let (m, x0) = section5(1.0);
        let f = FFunction::from_initial(&m, &x0).unwrap();
        // c_i = 0.1 i / (1/i) = 0.1 i^2, sum = 38.5
        assert!((f.f0() - 38.5).abs() < 1e-12);
        assert!((f.eval(0.0).value() - 38.5).abs() < 1e-12);
    }

    #[test]
    fn single_exponential() {
        let f = FFunction::new(&[1.0], &[1.0]).unwrap();
        for u in [0.0, 0.5, 3.0] {
            assert!((f.eval(u).value() - u.exp()).abs() < 1e-14 * u.exp());
            assert!((f.eval_prime(u).value() - u.exp()).abs() < 1e-14 * u.exp());
        }
        assert!((f.inverse(2f64.exp()).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(f.inverse(1.0).unwrap(), 0.0);
        assert!(f.inverse(0.5).is_err());
        assert_eq!(f.inverse(1.0 - 1e-14).unwrap(), 0.0);
    }

    #[test]
    fn exact_state_at_zero_is_initial() {
        let (m, x0) = section5(10.0);
        let cf = ClosedForm::new(&m, &x0).unwrap();
        let s = cf.state_at(0.0).unwrap();
        assert_eq!(s.x, x0);
        assert!((s.sum - 5.5).abs() < 1e-12);
    }

    #[test]
    fn exact_sum_settles_to_shortest_limit() {
        let (m, x0) = section5(10.0);
        let cf = ClosedForm::new(&m, &x0).unwrap();
        // paper time 4 is gain-scaled time 40
        let s = cf.state_at(4.0).unwrap();
        assert!((s.sum - 1.0).abs() < 1e-3);
    }

    #[test]
    fn horizon_limit_is_explicit() {
        let (m, x0) = section5(1.0);
        let cf = ClosedForm::new(&m, &x0).unwrap();
        assert!(cf.state_at(1500.0).is_ok());
        assert!(matches!(cf.state_at(2000.0), Err(Error::HorizonTooLarge { .. })));
    }

    #[test]
    fn asymptotic_leading_terms() {
        let (m, x0) = section5(1.0);
        let cf = ClosedForm::new(&m, &x0).unwrap();
        let sigma1 = cf.sigma().sigma[0];
        assert!((sigma1 - 0.1).abs() < 1e-15);
        let late = cf.asymptotic_at(80.0);
        assert!(late.valid);
        assert!((late.x[0] - x0[0] / sigma1).abs() < 1e-12);
        let early = cf.asymptotic_at(0.0);
        assert!(!early.valid);
        // decay exponent of component 2 is alpha (1 - d_2/d_1) = 0.5
        let a = cf.asymptotic_at(40.0).x[1];
        let b = cf.asymptotic_at(42.0).x[1];
        assert!(((a / b).ln() / 2.0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_distinct_length_has_no_correction() {
        let m = ModelSpec::new(0.5, 1.0, 1.0, PathSystem::from_lengths(&[2.0, 2.0]).unwrap()).unwrap();
        let cf = ClosedForm::new(&m, &[0.3, 0.9]).unwrap();
        let a = cf.asymptotic_at(5.0);
        assert_eq!(a.correction_ratio, 0.0);
        assert!((a.sum - 1.0).abs() < 1e-15);
        // x_i(0) / (alpha sigma_1), sigma_1 = 1.2 / 0.5
        assert!((a.x[0] - 0.3 / (0.5 * 2.4)).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_eigenant() {
        let (m, x0) = section5(1.0);
        let tanh = m.with_activation(crate::models::Activation::Tanh);
        assert!(matches!(ClosedForm::new(&tanh, &x0), Err(Error::Unsupported(_))));
    }

    proptest! {
        #[test]
        fn inverse_round_trip(u in 0.0f64..500.0) {
            let (m, x0) = section5(1.0);
            let f = FFunction::from_initial(&m, &x0).unwrap();
            let back = f.inverse_ln(f.eval(u).ln).unwrap();
            prop_assert!((back - u).abs() < 1e-10, "u = {u}, back = {back}");
        }

        #[test]
        fn inverse_residual_is_relative_1e12(ln_y in 3.66f64..2000.0) {
            let (m, x0) = section5(1.0);
            let f = FFunction::from_initial(&m, &x0).unwrap();
            prop_assume!(ln_y > f.ln_f0());
            let u = f.inverse_ln(ln_y).unwrap();
            prop_assert!((f.eval(u).ln - ln_y).abs() < 1e-12);
        }
    }
}
