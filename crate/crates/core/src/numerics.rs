//! Small numerical kernels shared by the oracle, the equilibrium solver and
//! the rate fits.

use crate::error::{Error, Result};

/// `ln(sum(exp(v)))` with the max-exponent shift.
///
/// Returns `-inf` for an empty slice or when every term is `-inf`.
pub fn logsumexp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Outcome of [`bracketed_newton`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Newton iteration safeguarded by a bisection bracket, for an increasing
/// function on `[lo, hi]`.
///
/// `f` returns `(value, derivative)`. The bracket must satisfy
/// `f(lo) <= 0 <= f(hi)`. A Newton step that leaves the current bracket, or
/// fails to halve the residual, is replaced by a bisection step.
pub fn bracketed_newton<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Root>
where
    F: FnMut(f64) -> (f64, f64),
{
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Solver {
            lo,
            hi,
            reason: "empty or non-finite bracket".into(),
        });
    }
    let (f_lo, _) = f(lo);
    let (f_hi, _) = f(hi);
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(Error::Solver {
            lo,
            hi,
            reason: format!("no sign change (f(lo) = {f_lo:e}, f(hi) = {f_hi:e})"),
        });
    }
    if f_lo == 0.0 {
        return Ok(Root {
            x: lo,
            residual: 0.0,
            iterations: 0,
        });
    }
    if f_hi == 0.0 {
        return Ok(Root {
            x: hi,
            residual: 0.0,
            iterations: 0,
        });
    }

    let (mut a, mut b) = (lo, hi);
    let mut x = 0.5 * (a + b);
    let mut last_residual = f64::INFINITY;
    for iter in 1..=max_iter {
        let (fx, dfx) = f(x);
        if !fx.is_finite() {
            return Err(Error::Solver {
                lo,
                hi,
                reason: format!("non-finite residual at x = {x:e}"),
            });
        }
        if fx.abs() <= tol {
            return Ok(Root {
                x,
                residual: fx,
                iterations: iter,
            });
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        if b - a <= f64::EPSILON * x.abs().max(1.0) {
            return Ok(Root {
                x,
                residual: fx,
                iterations: iter,
            });
        }
        let newton = x - fx / dfx;
        let contracting = fx.abs() < 0.5 * last_residual;
        x = if dfx > 0.0 && newton > a && newton < b && (contracting || iter == 1) {
            newton
        } else {
            0.5 * (a + b)
        };
        last_residual = fx.abs();
    }
    Err(Error::Solver {
        lo,
        hi,
        reason: format!("no convergence in {max_iter} iterations"),
    })
}

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination, clamped to `[0, 1]`.
    pub r_squared: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Some(LineFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Relative comparison used for tie detection among reciprocal lengths.
pub(crate) fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logsumexp_matches_direct_sum() {
        let v = [-1.0, -2.0, -3.0];
        let direct = v.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((logsumexp(&v) - direct).abs() < 1e-15);
    }

    #[test]
    fn logsumexp_survives_huge_exponents() {
        let v = [1000.0, 1000.0];
        assert!((logsumexp(&v) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(logsumexp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn newton_finds_cube_root() {
        let root = bracketed_newton(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 2.0, 1e-14, 100).unwrap();
        assert!((root.x - 2f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn newton_survives_bad_derivative() {
        // derivative deliberately wrong: bisection must still converge
        let root = bracketed_newton(|x| (x - 0.3, 1e-9), 0.0, 1.0, 1e-13, 200).unwrap();
        assert!((root.x - 0.3).abs() < 1e-12);
    }

    #[test]
    fn newton_rejects_unbracketed() {
        let err = bracketed_newton(|x| (x + 1.0, 1.0), 0.0, 1.0, 1e-12, 10).unwrap_err();
        assert!(matches!(err, Error::Solver { .. }));
    }

    #[test]
    fn line_fit_exact() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-14);
        assert!((fit.intercept - 2.0).abs() < 1e-14);
        assert!((fit.r_squared - 1.0).abs() < 1e-14);
    }
}
