// Tune the detection stage on a synthetic corpus with planted duplicate
// boxes, then the tracking stage on the tuned detections.

use motune::synth::{generate, ScenarioSpec};
use motune::tuner::{run_plan, AxisName, LiveEvaluator, Sequence, SweepAxis};
use motune::HyperParams;

pub fn run() -> motune::Result<()> {
    let corpus = (0..3)
        .map(|seed| {
            let s = generate(&ScenarioSpec {
                n_tracks: 6,
                n_frames: 60,
                fn_rate: 0.05,
                fp_rate: 1.0,
                jitter_sigma: 1.0,
                duplicate_rate: 0.5,
                seed,
                ..ScenarioSpec::default()
            })?;
            Ok(Sequence::new(s.gt, s.dets))
        })
        .collect::<motune::Result<Vec<_>>>()?;
    let evaluator = LiveEvaluator::new(corpus);

    let axes = [
        SweepAxis::numeric(AxisName::DNms, &[0.3, 0.5, 0.6, 0.75, 0.9])?,
        SweepAxis::numeric(AxisName::DConf, &[0.0001, 0.1, 0.3, 0.55, 0.7])?,
        SweepAxis::numeric(AxisName::TMinHit, &[1.0, 3.0, 5.0])?,
        SweepAxis::numeric(AxisName::TAge, &[5.0, 20.0, 40.0])?,
    ];
    let outcome = run_plan(&axes, &HyperParams::default(), &evaluator)?;
    for (axis, records) in &outcome.sweeps {
        for r in records {
            let score = match (r.det_report(), r.mot_report()) {
                (Some(d), _) => format!("AP {:.4}", d.ap()),
                (_, Some(m)) => format!("MOTA {:.2} IDF1 {:.2}", m.mota, m.idf1),
                _ => r.error.clone().unwrap_or_default(),
            };
            let mark = if r.accepted { "*" } else { " " };
            println!("{mark} {:<9} {:<7} {score}", axis.name.as_str(), r.value.to_string());
        }
    }
    let p = &outcome.params;
    println!("selected d_nms {} d_conf {} t_min_hit {} t_age {}", p.d_nms, p.d_conf, p.t_min_hit, p.t_age);
    Ok(())
}

#[allow(dead_code)]
fn main() -> motune::Result<()> {
    run()
}
