// COCO-style AP/AR of a detection set.

use std::collections::BTreeMap;

use motune::detmetrics::{evaluate_detections, AreaRange, DetSummary, IouSpec};
use motune::{BBox, Detection, FrameDetections};

pub fn run() -> motune::Result<()> {
    let gt = BTreeMap::from([(1, vec![BBox::new(0.0, 0.0, 20.0, 20.0)?, BBox::new(100.0, 0.0, 20.0, 20.0)?])]);
    // a confident false positive ranked above both true positives
    let dets = vec![FrameDetections::new(
        1,
        vec![
            Detection::new(BBox::new(300.0, 300.0, 20.0, 20.0)?, 0.9)?,
            Detection::new(BBox::new(0.0, 0.0, 20.0, 20.0)?, 0.8)?,
            Detection::new(BBox::new(101.0, 0.0, 20.0, 20.0)?, 0.7)?,
        ],
    )?];
    let report = evaluate_detections(&gt, &dets);
    println!("AP@0.50 = {:.4}", report.ap(IouSpec::At(0.5), AreaRange::All, 100));
    println!("AP@0.75 = {:.4}", report.ap(IouSpec::At(0.75), AreaRange::All, 100));
    println!("AR@[.5:.95] maxDets 1 = {:.4}", report.ar(IouSpec::Range, AreaRange::All, 1));
    println!("{}", DetSummary::csv_header());
    println!("{}", report.summary().csv_row());
    Ok(())
}

#[allow(dead_code)]
fn main() -> motune::Result<()> {
    run()
}
