// Ten parallel paths of lengths 1..10, largest initial pheromone on the
// longest path. Forward Euler drives the state to (beta d_1 / alpha) e_1.
//
//     cargo run --example shortest_path_convergence

use antdyn::analysis::{verify_theorem2, CheckStatus};
use antdyn::harness::run_criteria;
use antdyn::{integrate, ModelSpec, PathSystem, Settings};

pub fn run_example() -> antdyn::Result<(Vec<f64>, CheckStatus)> {
    let lengths: Vec<f64> = (1..=10).map(f64::from).collect();
    let model = ModelSpec::new(1.0, 1.0, 10.0, PathSystem::from_lengths(&lengths)?)?;
    let x0: Vec<f64> = (1..=10).map(|i| 0.1 * f64::from(i)).collect();
    let settings = Settings::euler(0.02, 2000);
    let traj = integrate(&model, &x0, &settings)?;
    let report = verify_theorem2(&model, &traj, &run_criteria(&model, &settings, traj.sums()[0]))?;
    Ok((traj.final_state().to_vec(), report.status))
}

fn main() -> antdyn::Result<()> {
    let (state, status) = run_example()?;
    for (i, x) in state.iter().enumerate() {
        println!("x_{:<2} = {x:.6e}", i + 1);
    }
    println!("convergence check: {status}");
    Ok(())
}
