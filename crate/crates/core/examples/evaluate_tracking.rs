// CLEAR-MOT and identity metrics on a small hand-made sequence.

use motune::motmetrics::{evaluate, mota, motp_percent_to_distance, MotReport, MotpConvention};
use motune::{BBox, TrackPoint, Tracklet};

fn track(id: u32, frames: std::ops::RangeInclusive<u32>, x0: f64) -> motune::Result<Tracklet> {
    let points = frames
        .map(|f| {
            Ok(TrackPoint {
                frame: f,
                bbox: BBox::new(x0 + f as f64, 0.0, 10.0, 10.0)?,
                score: 1.0,
            })
        })
        .collect::<motune::Result<Vec<_>>>()?;
    Tracklet::new(id, points)
}

pub fn run() -> motune::Result<()> {
    let gt = vec![track(1, 1..=10, 0.0)?, track(2, 1..=10, 100.0)?];
    // the second object changes identity halfway and is missed on frame 1
    let pred = vec![track(7, 1..=10, 0.5)?, track(8, 2..=5, 100.5)?, track(9, 6..=10, 100.5)?];
    let r = evaluate(&gt, &pred, 0.5)?;
    println!("{}", MotReport::csv_header());
    println!("{}", r.csv_row(MotpConvention::Distance));
    println!("MOTP as overlap: {:.3}%", r.motp(MotpConvention::Percent));

    println!("MOTA(GT 200, FP 8, FN 10, IDSW 7) = {}", mota(200, 8, 10, 7)?);
    println!("MOTP 87.3% as distance = {:.4}", motp_percent_to_distance(87.3));
    Ok(())
}

#[allow(dead_code)]
fn main() -> motune::Result<()> {
    run()
}
