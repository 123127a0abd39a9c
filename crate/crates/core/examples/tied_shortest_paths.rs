// Three paths share the shortest length. Their total tends to
// beta d_1 / alpha while their mutual ratios never change.
//
//     cargo run --example tied_shortest_paths

use antdyn::harness::{execute, preset};

/// Final `x_1 + x_2 + x_3` and the final ratios `x_2 / x_1`, `x_3 / x_1`.
pub fn run_example() -> antdyn::Result<(f64, [f64; 2])> {
    let outcome = execute(&preset("tied-shortest-fig5")?)?;
    let x = outcome.runs[0].trajectory.final_state();
    Ok((x[0] + x[1] + x[2], [x[1] / x[0], x[2] / x[0]]))
}

fn main() -> antdyn::Result<()> {
    let (sum, ratios) = run_example()?;
    println!("x_1 + x_2 + x_3 = {sum:.8}");
    println!("x_2 / x_1 = {:.12}, x_3 / x_1 = {:.12}", ratios[0], ratios[1]);
    Ok(())
}
