//! Equilibria, Jacobians and local stability labels.
//!
//! Every variant has exactly one nonzero equilibrium per path, `mu_i * e_i`
//! with `phi(mu_i e_i) = alpha / (beta d_i)`. At such a point the Jacobian is
//! diagonal except for row `i`, so its spectrum is its diagonal.

use std::fmt;

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::models::{ModelSpec, Saturation};
use crate::numerics::bracketed_newton;

/// Real-part tolerance separating stable, marginal and unstable spectra.
pub const STABILITY_TOL: f64 = 1e-9;

/// Search interval for the equilibrium scale `mu`.
pub const MU_BRACKET: (f64, f64) = (1e-12, 1e12);

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    /// Canonical path index.
    pub index: usize,
    pub mu: f64,
    pub point: Vec<f64>,
    /// Sup-norm of the vector field at `point`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StabilityLabel {
    LocallyAsymptoticallyStable,
    Unstable,
    Marginal,
}

impl StabilityLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            StabilityLabel::LocallyAsymptoticallyStable => "stable",
            StabilityLabel::Unstable => "unstable",
            StabilityLabel::Marginal => "marginal",
        }
    }
}

impl fmt::Display for StabilityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub equilibria: Vec<Equilibrium>,
    pub spectra: Vec<Vec<Complex<f64>>>,
    pub labels: Vec<StabilityLabel>,
    /// Free-text remark per equilibrium (tied shortest paths).
    pub notes: Vec<Option<String>>,
}

/// All `n` equilibria of the model.
///
/// Both supported saturations satisfy `phi(mu e_i) = 1/mu`, so the scale is
/// `beta d_i / alpha` in closed form.
pub fn find_equilibria(model: &ModelSpec) -> Result<Vec<Equilibrium>> {
    let n = model.dim();
    let d = model.paths().d();
    (0..n)
        .map(|i| {
            let mu = match model.saturation() {
                Saturation::Sum | Saturation::Max => model.beta() * d[i] / model.alpha(),
            };
            if !(MU_BRACKET.0..=MU_BRACKET.1).contains(&mu) {
                return Err(Error::Solver {
                    lo: MU_BRACKET.0,
                    hi: MU_BRACKET.1,
                    reason: format!("equilibrium scale {mu:e} of path {} lies outside the bracket", i + 1),
                });
            }
            let mut point = vec![0.0; n];
            point[i] = mu;
            let field = model.vector_field(&point)?;
            let residual = field.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            Ok(Equilibrium {
                index: i,
                mu,
                point,
                residual,
            })
        })
        .collect()
}

/// Solves `phi(mu e_i) = alpha / (beta d_i)` by bracketed Newton in `ln mu`.
///
/// Only monotonicity of `mu -> phi(mu e_i)` is used, so this route covers any
/// saturation satisfying the standing assumptions. It serves as an
/// independent check of the closed form in [`find_equilibria`].
pub fn equilibrium_scale_bracketed(model: &ModelSpec, i: usize) -> Result<f64> {
    let n = model.dim();
    let target = (model.alpha() / (model.beta() * model.paths().d()[i])).ln();
    let sat = model.saturation();
    let ln_phi_axis = |s: f64| -> f64 {
        let mut x = vec![0.0; n];
        x[i] = s.exp();
        sat.eval(&x).map(f64::ln).unwrap_or(f64::NAN)
    };
    // h increases in s because phi is nonincreasing along the axis
    let h = |s: f64| {
        let step = 1e-6;
        let value = target - ln_phi_axis(s);
        let slope = (ln_phi_axis(s - step) - ln_phi_axis(s + step)) / (2.0 * step);
        (value, slope)
    };
    let (lo, hi) = (MU_BRACKET.0.ln(), MU_BRACKET.1.ln());
    let root = bracketed_newton(h, lo, hi, 1e-13, 200).map_err(|e| match e {
        Error::Solver { reason, .. } => Error::Solver {
            lo: MU_BRACKET.0,
            hi: MU_BRACKET.1,
            reason,
        },
        other => other,
    })?;
    Ok(root.x.exp())
}

/// Jacobian of the vector field at `x`.
///
/// Row `i` is `gamma * (g(a_i) e_i + g'(a_i) x_i beta d_i grad phi(x))` with
/// `a_i = -alpha + beta phi(x) d_i`; for the identity activation this is
/// `gamma (-alpha I + beta phi D + beta D x grad phi^T)`.
pub fn jacobian(model: &ModelSpec, x: &[f64]) -> Result<DMatrix<f64>> {
    model.check_dim(x)?;
    let act = model.activation();
    // reject signum before touching the state
    act.derivative(0.0)?;
    let grad = model.saturation().gradient(x)?;
    let rates = model.inner_rates(x)?;
    let d = model.paths().d();
    let n = x.len();
    let gamma = model.gamma();
    let beta = model.beta();
    let mut j = DMatrix::zeros(n, n);
    for i in 0..n {
        let slope = act.derivative(rates[i])?;
        let row_scale = gamma * slope * x[i] * beta * d[i];
        for k in 0..n {
            j[(i, k)] = row_scale * grad[k];
        }
        j[(i, i)] += gamma * act.eval(rates[i]);
    }
    Ok(j)
}

/// Eigenvalues of `j`.
///
/// When every off-diagonal entry lies in a single row or a single column (the
/// structure at any equilibrium) the diagonal is returned exactly; otherwise a
/// dense Schur-based solver is used.
pub fn spectrum(j: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let n = j.nrows();
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if r != c && j[(r, c)] != 0.0 {
                rows.push(r);
                cols.push(c);
            }
        }
    }
    let single_row = rows.windows(2).all(|w| w[0] == w[1]);
    let single_col = cols.iter().all(|&c| c == cols.first().copied().unwrap_or(c));
    if single_row || single_col {
        return (0..n).map(|i| Complex::new(j[(i, i)], 0.0)).collect();
    }
    j.clone().complex_eigenvalues().iter().copied().collect()
}

pub fn classify_spectrum(spectrum: &[Complex<f64>], tol: f64) -> StabilityLabel {
    if spectrum.iter().any(|z| z.re > tol) {
        StabilityLabel::Unstable
    } else if spectrum.iter().all(|z| z.re < -tol) {
        StabilityLabel::LocallyAsymptoticallyStable
    } else {
        StabilityLabel::Marginal
    }
}

pub fn classify(spectra: &[Vec<Complex<f64>>], tol: f64) -> Vec<StabilityLabel> {
    spectra.iter().map(|s| classify_spectrum(s, tol)).collect()
}

/// Equilibria, spectra and labels for `model`.
pub fn analyze(model: &ModelSpec) -> Result<EquilibriumReport> {
    let equilibria = find_equilibria(model)?;
    let mut spectra = Vec::with_capacity(equilibria.len());
    for eq in &equilibria {
        spectra.push(spectrum(&jacobian(model, &eq.point)?));
    }
    let mut labels = classify(&spectra, STABILITY_TOL);
    let paths = model.paths();
    let tied = paths.shortest_set().len() > 1;
    let notes = equilibria
        .iter()
        .map(|eq| {
            if tied && paths.is_shortest(eq.index) {
                labels[eq.index] = StabilityLabel::Marginal;
                Some(format!(
                    "shortest length shared by {} paths; trajectories converge to the set sum = {}",
                    paths.shortest_set().len(),
                    model.shortest_limit()
                ))
            } else {
                None
            }
        })
        .collect();
    Ok(EquilibriumReport {
        equilibria,
        spectra,
        labels,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Activation, PathSystem};

    fn model(alpha: f64, beta: f64, d: &[f64]) -> ModelSpec {
        ModelSpec::new(alpha, beta, 1.0, PathSystem::from_reciprocals(d).unwrap()).unwrap()
    }

    #[test]
    fn equilibrium_scales() {
        let m = model(1.0, 1.0, &[1.0, 0.5]);
        let mus: Vec<f64> = find_equilibria(&m).unwrap().iter().map(|e| e.mu).collect();
        assert_eq!(mus, vec![1.0, 0.5]);

        let maxant = m.clone().with_saturation(Saturation::Max);
        let mus: Vec<f64> = find_equilibria(&maxant).unwrap().iter().map(|e| e.mu).collect();
        assert_eq!(mus, vec![1.0, 0.5]);

        let m = model(2.0, 1.0, &[1.0, 1.0, 1.0]);
        assert!(find_equilibria(&m).unwrap().iter().all(|e| e.mu == 0.5));
    }

    #[test]
    fn bracketed_route_agrees_with_closed_form() {
        let m = model(0.37, 4.1, &[1.0, 0.3, 0.01]);
        for eq in find_equilibria(&m).unwrap() {
            let mu = equilibrium_scale_bracketed(&m, eq.index).unwrap();
            assert!((mu - eq.mu).abs() <= 1e-10 * eq.mu);
        }
        let max = m.with_saturation(Saturation::Max);
        let mu = equilibrium_scale_bracketed(&max, 1).unwrap();
        assert!((mu - 4.1 * 0.3 / 0.37).abs() < 1e-9);
    }

    #[test]
    fn unbracketable_scale_is_reported() {
        let m = model(1e-8, 1e8, &[1.0]);
        let err = find_equilibria(&m).unwrap_err();
        assert!(matches!(err, Error::Solver { lo, hi, .. } if lo == 1e-12 && hi == 1e12));
        assert!(equilibrium_scale_bracketed(&m, 0).is_err());
    }

    #[test]
    fn jacobian_at_shortest_equilibrium() {
        let m = model(1.0, 1.0, &[1.0, 0.5]);
        let j = jacobian(&m, &[1.0, 0.0]).unwrap();
        assert_eq!(j[(1, 0)], 0.0);
        assert_eq!(j[(0, 0)], -1.0);
        assert_eq!(j[(1, 1)], -0.5);
        let spec = spectrum(&j);
        assert_eq!(classify_spectrum(&spec, STABILITY_TOL), StabilityLabel::LocallyAsymptoticallyStable);
    }

    #[test]
    fn jacobian_at_second_equilibrium_has_positive_entry() {
        let m = model(1.0, 1.0, &[1.0, 0.5]);
        let j = jacobian(&m, &[0.0, 0.5]).unwrap();
        assert_eq!(j[(0, 1)], 0.0);
        assert_eq!(j[(0, 0)], 1.0);
        assert_eq!(classify_spectrum(&spectrum(&j), STABILITY_TOL), StabilityLabel::Unstable);
    }

    #[test]
    fn classify_examples() {
        let c = |re: &[f64]| re.iter().map(|&r| Complex::new(r, 0.0)).collect::<Vec<_>>();
        assert_eq!(classify_spectrum(&c(&[-1.0, -0.5]), 1e-9), StabilityLabel::LocallyAsymptoticallyStable);
        assert_eq!(classify_spectrum(&c(&[1.0, -0.3]), 1e-9), StabilityLabel::Unstable);
        assert_eq!(classify_spectrum(&c(&[0.0, -1.0]), 1e-9), StabilityLabel::Marginal);
    }

    #[test]
    fn dense_spectrum_fallback() {
        // rotation generator: eigenvalues -1 +/- 2i
        let j = DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, -2.0, -1.0]);
        let mut spec = spectrum(&j);
        spec.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((spec[0] - Complex::new(-1.0, -2.0)).norm() < 1e-12);
        assert!((spec[1] - Complex::new(-1.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn signum_and_max_ties_are_rejected() {
        let m = model(1.0, 1.0, &[1.0, 0.5]).with_activation(Activation::Signum);
        assert!(matches!(jacobian(&m, &[1.0, 1.0]), Err(Error::Unsupported(_))));
        let m = model(1.0, 1.0, &[1.0, 0.5]).with_saturation(Saturation::Max);
        assert!(matches!(jacobian(&m, &[1.0, 1.0]), Err(Error::Nondifferentiable(_))));
    }

    #[test]
    fn tied_shortest_paths_are_marginal() {
        let m = ModelSpec::new(0.1, 0.1, 1.0, PathSystem::from_lengths(&[1.0, 1.0, 2.0]).unwrap()).unwrap();
        let report = analyze(&m).unwrap();
        assert_eq!(report.labels[0], StabilityLabel::Marginal);
        assert_eq!(report.labels[1], StabilityLabel::Marginal);
        assert_eq!(report.labels[2], StabilityLabel::Unstable);
        assert!(report.notes[0].is_some());
        assert!(report.notes[2].is_none());
    }

    #[test]
    fn residuals_are_tiny() {
        let m = model(3.3, 0.7, &[1.0, 0.9, 0.2]).with_activation(Activation::Tanh);
        for eq in find_equilibria(&m).unwrap() {
            assert!(eq.residual < 1e-9 * m.gamma() * m.beta() * m.paths().d_max());
        }
    }
}
