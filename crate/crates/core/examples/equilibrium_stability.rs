// Equilibria mu_i e_i with their Jacobian spectra. Only the shortest path
// is locally stable.
//
//     cargo run --example equilibrium_stability

use antdyn::report;
use antdyn::stability::{analyze, StabilityLabel};
use antdyn::{ModelSpec, PathSystem};

pub fn run_example() -> antdyn::Result<Vec<StabilityLabel>> {
    let lengths: Vec<f64> = (1..=10).map(f64::from).collect();
    let model = ModelSpec::new(1.0, 1.0, 10.0, PathSystem::from_lengths(&lengths)?)?;
    let eq = analyze(&model)?;
    print!("{}", report::equilibria(&model, &eq).render());
    Ok(eq.labels)
}

fn main() -> antdyn::Result<()> {
    run_example()?;
    Ok(())
}
