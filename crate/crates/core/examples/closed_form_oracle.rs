// The exact EigenAnt solution against RK4 and the large-time expansion.
//
//     cargo run --example closed_form_oracle

use antdyn::oracle::ClosedForm;
use antdyn::{integrate, ModelSpec, PathSystem, Settings};

/// Sup-norm gaps (RK4 vs exact, expansion vs exact) at t = 1, 5, 10.
pub fn run_example() -> antdyn::Result<Vec<(f64, f64, f64)>> {
    let lengths: Vec<f64> = (1..=10).map(f64::from).collect();
    let model = ModelSpec::new(1.0, 1.0, 1.0, PathSystem::from_lengths(&lengths)?)?;
    let x0: Vec<f64> = (1..=10).map(|i| 0.1 * f64::from(i)).collect();
    let oracle = ClosedForm::new(&model, &x0)?;
    println!("F(0) = {}", oracle.f().f0());
    let rk4 = integrate(&model, &x0, &Settings::rk4(1e-3, 10_000))?;
    let sup = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let mut rows = Vec::new();
    for k in [1000, 5000, 10_000] {
        let t = rk4.times()[k];
        let exact = oracle.state_at(t)?;
        let asym = oracle.asymptotic_at(t);
        rows.push((t, sup(rk4.state(k), &exact.x), sup(&asym.x, &exact.x)));
    }
    Ok(rows)
}

fn main() -> antdyn::Result<()> {
    println!("{:>6} {:>12} {:>12}", "t", "rk4 gap", "expansion gap");
    for (t, rk4, asym) in run_example()? {
        println!("{t:>6} {rk4:>12.3e} {asym:>12.3e}");
    }
    Ok(())
}
