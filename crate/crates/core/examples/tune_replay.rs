// Replay recorded sweep measurements through the coordinate-wise tuner.

use std::path::Path;

use motune::motmetrics::MotpConvention;
use motune::tuner::{run_plan, sweep_csv, SweepPlan};
use motune::HyperParams;

pub fn run() -> motune::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/reference_sweeps.toml");
    let plan = SweepPlan::load(&path)?;
    let outcome = run_plan(&plan.axes, &HyperParams::default(), &plan.evaluator(None))?;
    for (axis, records) in &outcome.sweeps {
        let best = records.iter().rfind(|r| r.accepted).map(|r| r.value.to_string());
        println!("{:<10} -> {}", axis.name.as_str(), best.unwrap_or_default());
    }
    let (axis, records) = &outcome.sweeps[2];
    print!("{}", sweep_csv(axis, records, MotpConvention::Percent));
    Ok(())
}

#[allow(dead_code)]
fn main() -> motune::Result<()> {
    run()
}
