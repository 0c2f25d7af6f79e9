//! Detection post-processing: confidence filtering and greedy NMS.

use crate::error::{Error, Result};
use crate::geometry::{Detection, FrameDetections};

pub fn check_unit(key: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::out_of_range(key, value, "[0, 1]"))
    }
}

/// Keeps detections with `score >= d_conf`, preserving order.
pub fn filter_confidence(dets: &FrameDetections, d_conf: f64) -> FrameDetections {
    FrameDetections {
        frame: dets.frame,
        detections: dets
            .detections
            .iter()
            .filter(|d| d.score >= d_conf)
            .copied()
            .collect(),
    }
}

/// Greedy class-wise non-maximum suppression.
///
/// The highest scoring remaining detection is kept and every remaining
/// detection of the same class with IoU strictly greater than `d_nms`
/// against it is dropped. Equal scores keep input order. The output is sorted
/// by descending score.
pub fn nms(dets: &FrameDetections, d_nms: f64) -> FrameDetections {
    let order = score_order(&dets.detections);
    let mut suppressed = vec![false; order.len()];
    let mut kept = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if suppressed[pos] {
            continue;
        }
        let keep = dets.detections[i];
        kept.push(keep);
        for (later, &j) in order.iter().enumerate().skip(pos + 1) {
            if suppressed[later] {
                continue;
            }
            let other = &dets.detections[j];
            if other.class_id == keep.class_id && keep.bbox.iou(&other.bbox) > d_nms {
                suppressed[later] = true;
            }
        }
    }
    FrameDetections {
        frame: dets.frame,
        detections: kept,
    }
}

/// Indices sorted by descending score, ties by ascending index.
pub(crate) fn score_order(dets: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score).then(a.cmp(&b)));
    order
}

/// The canonical stage-1 pipeline: confidence filter, then NMS.
pub fn postprocess(dets: &FrameDetections, d_conf: f64, d_nms: f64) -> FrameDetections {
    nms(&filter_confidence(dets, d_conf), d_nms)
}
