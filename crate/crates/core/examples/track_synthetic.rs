// Generate a noisy scenario, track it at the default hyperparameters and
// score the result.

use motune::motmetrics::evaluate;
use motune::synth::{generate, Motion, ScenarioSpec};
use motune::{run_sequence, HyperParams};

pub fn run() -> motune::Result<()> {
    let spec = ScenarioSpec {
        n_tracks: 8,
        n_frames: 200,
        motion: Motion::Piecewise { every: 40 },
        fn_rate: 0.05,
        fp_rate: 0.5,
        jitter_sigma: 1.0,
        duplicate_rate: 0.2,
        seed: 2024,
        ..ScenarioSpec::default()
    };
    let scenario = generate(&spec)?;
    let params = HyperParams::default();
    let tracks = run_sequence(&scenario.dets, &params)?;
    let report = evaluate(&scenario.gt, &tracks, 0.5)?;
    println!("{} gt tracks, {} predicted tracks", scenario.gt.len(), tracks.len());
    println!(
        "MOTA {:.2}  MOTP {:.4}  IDF1 {:.2}  IDs {}  FP {}  FN {}",
        report.mota, report.motp_dist, report.idf1, report.idsw, report.fp, report.fn_
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> motune::Result<()> {
    run()
}
