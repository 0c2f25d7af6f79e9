// Constant-velocity Kalman filter on a box moving two pixels per frame.

use motune::motion::{state_to_bbox, KalmanConfig};
use motune::BBox;

pub fn run() -> motune::Result<()> {
    let kf = KalmanConfig::default();
    let start = BBox::new(10.0, 20.0, 30.0, 60.0)?;
    let mut state = kf.init(&start);
    for k in 1..=15 {
        state = kf.predict(&state);
        let predicted = state_to_bbox(&state)?;
        let truth = BBox::new(10.0 + 2.0 * k as f64, 20.0, 30.0, 60.0)?;
        let err = (predicted.center().x - truth.center().x).abs();
        if k % 5 == 0 {
            println!("frame {k:2}: predicted x {:.3}, truth {:.3}, error {err:.3}", predicted.x, truth.x);
        }
        state = kf.update(&state, &truth)?;
    }
    println!("velocity estimate: {:.3} px/frame", state.mean[4]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> motune::Result<()> {
    run()
}
