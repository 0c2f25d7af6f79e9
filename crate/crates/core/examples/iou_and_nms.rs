// Box overlap and detection post-processing.

use motune::detpost::{filter_confidence, nms, postprocess};
use motune::{BBox, Detection, FrameDetections};

pub fn run() -> motune::Result<()> {
    let a = BBox::new(0.0, 0.0, 10.0, 10.0)?;
    let b = BBox::new(5.0, 0.0, 10.0, 10.0)?;
    println!("iou(a, b) = {:.4}", a.iou(&b));
    println!("iou(a, a) = {}", a.iou(&a));

    // IoU(A, B) = 0.67, IoU(B, C) = 0.33, IoU(A, C) = 0.18
    let frame = FrameDetections::new(
        1,
        vec![
            Detection::new(BBox::new(0.0, 0.0, 10.0, 10.0)?, 0.9)?,
            Detection::new(BBox::new(2.0, 0.0, 10.0, 10.0)?, 0.8)?,
            Detection::new(BBox::new(7.0, 0.0, 10.0, 10.0)?, 0.7)?,
            Detection::new(BBox::new(50.0, 50.0, 8.0, 8.0)?, 0.02)?,
        ],
    )?;
    for d_nms in [0.3, 0.5, 0.75, 1.0] {
        let kept = nms(&frame, d_nms);
        let scores: Vec<f64> = kept.detections.iter().map(|d| d.score).collect();
        println!("d_nms {d_nms:.2}: kept {scores:?}");
    }
    println!("d_conf 0.05 keeps {}", filter_confidence(&frame, 0.05).len());
    println!("postprocess(0.05, 0.5) keeps {}", postprocess(&frame, 0.05, 0.5).len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> motune::Result<()> {
    run()
}
