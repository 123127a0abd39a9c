// Sum and max saturation crossed with identity, tanh and signum activation,
// ranked by the time x_1 needs to come within 5% of its limit.
//
//     cargo run --example variant_comparison

use antdyn::analysis::Ranking;
use antdyn::harness::{execute, preset};

pub fn run_example() -> antdyn::Result<Ranking> {
    let outcome = execute(&preset("comparison-fig4")?)?;
    Ok(outcome.ranking.expect("comparison preset ranks its runs"))
}

fn main() -> antdyn::Result<()> {
    let ranking = run_example()?;
    for e in &ranking.entries {
        println!("{} {:<14} t = {:.2}", e.rank, e.label, e.time_to_threshold);
    }
    Ok(())
}
