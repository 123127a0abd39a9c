use antdyn::stability::{jacobian, spectrum};
use antdyn::{Activation, Error, ModelSpec, PathSystem, Saturation};
use proptest::prelude::*;

fn central_difference(m: &ModelSpec, x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut j = vec![vec![0.0; n]; n];
    for k in 0..n {
        let h = 1e-6 * x[k];
        let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
        xp[k] += h;
        xm[k] -= h;
        let (fp, fm) = (m.vector_field(&xp).unwrap(), m.vector_field(&xm).unwrap());
        for i in 0..n {
            j[i][k] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    j
}

fn system() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..=6).prop_flat_map(|n| {
        (
            prop::collection::vec(0.1f64..1.0, n),
            prop::collection::vec(0.05f64..2.0, n),
        )
    })
}

fn max_rel_error(m: &ModelSpec, x: &[f64]) -> f64 {
    let j = jacobian(m, x).unwrap();
    let fd = central_difference(m, x);
    let scale = j.amax().max(1e-12);
    let mut worst = 0.0f64;
    for (i, row) in fd.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            worst = worst.max((j[(i, k)] - v).abs() / scale);
        }
    }
    worst
}

proptest! {
    #[test]
    fn sum_saturation_matches_finite_differences(
        (d, x) in system(),
        alpha in 0.1f64..3.0,
        beta in 0.1f64..3.0,
        gamma in 0.5f64..3.0,
        tanh in any::<bool>(),
    ) {
        let g = if tanh { Activation::Tanh } else { Activation::Identity };
        let m = ModelSpec::new(alpha, beta, gamma, PathSystem::from_reciprocals(&d).unwrap())
            .unwrap()
            .with_activation(g);
        prop_assert!(max_rel_error(&m, &x) < 1e-6);
    }

    #[test]
    fn max_saturation_matches_finite_differences_off_ties(
        (d, x) in system(),
        alpha in 0.1f64..3.0,
        beta in 0.1f64..3.0,
        tanh in any::<bool>(),
    ) {
        let mut sorted = x.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        prop_assume!(sorted[0] - sorted[1] > 1e-3);
        let g = if tanh { Activation::Tanh } else { Activation::Identity };
        let m = ModelSpec::new(alpha, beta, 1.0, PathSystem::from_reciprocals(&d).unwrap())
            .unwrap()
            .with_saturation(Saturation::Max)
            .with_activation(g);
        prop_assert!(max_rel_error(&m, &x) < 1e-6);
    }
}

#[test]
fn nonsmooth_cases_are_errors() {
    let paths = PathSystem::from_reciprocals(&[1.0, 0.5]).unwrap();
    let max = ModelSpec::new(1.0, 1.0, 1.0, paths.clone()).unwrap().with_saturation(Saturation::Max);
    assert!(matches!(jacobian(&max, &[0.7, 0.7]), Err(Error::Nondifferentiable(_))));
    assert!(max.vector_field(&[0.7, 0.7]).is_ok());

    let sign = ModelSpec::new(1.0, 1.0, 1.0, paths).unwrap().with_activation(Activation::Signum);
    assert!(matches!(jacobian(&sign, &[0.3, 0.4]), Err(Error::Unsupported(_))));
}

#[test]
fn dense_spectrum_matches_trace_and_determinant() {
    // away from equilibria the Jacobian is dense and goes through the Schur solver
    let m = ModelSpec::new(1.0, 2.0, 1.0, PathSystem::from_reciprocals(&[1.0, 0.5]).unwrap()).unwrap();
    let j = jacobian(&m, &[0.4, 0.9]).unwrap();
    let ev = spectrum(&j);
    let trace: f64 = ev.iter().map(|z| z.re).sum();
    let det = ev[0] * ev[1];
    assert!((trace - j.trace()).abs() < 1e-12);
    assert!((det.re - j.determinant()).abs() < 1e-12);
    assert!(det.im.abs() < 1e-12);
}
