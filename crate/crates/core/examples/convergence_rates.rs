// Fitted exponential decay rates of the non-shortest components against
// alpha (1 - d_i / d_1), in gain-scaled time.
//
//     cargo run --example convergence_rates

use antdyn::analysis::{rate_report, RateReport};
use antdyn::oracle::ClosedForm;
use antdyn::report;
use antdyn::{ModelSpec, PathSystem};

pub fn run_example() -> antdyn::Result<RateReport> {
    let lengths: Vec<f64> = (1..=10).map(f64::from).collect();
    let model = ModelSpec::new(1.0, 1.0, 10.0, PathSystem::from_lengths(&lengths)?)?;
    let x0: Vec<f64> = (1..=10).map(|i| 0.1 * f64::from(i)).collect();
    let samples = ClosedForm::new(&model, &x0)?.sample_grid(0.02, 2000)?;
    rate_report(&model, &samples, None)
}

fn main() -> antdyn::Result<()> {
    print!("{}", report::rates(&run_example()?).render());
    Ok(())
}
