//! COCO-style detection evaluation for a single class: average precision
//! and average recall over IoU thresholds 0.50:0.05:0.95, three area ranges
//! and maxDets caps of 1, 10 and 100.
//!
//! Matching and accumulation follow the COCO reference evaluator: per frame,
//! detections are taken in descending score order and greedily matched to
//! the unmatched gt box of highest IoU (>= threshold); gt boxes outside the
//! area range are ignored, as are unmatched detections outside it. Precision
//! is interpolated at 101 recall points. Cells without any gt box in range
//! hold [`SENTINEL`].

use std::collections::BTreeMap;
use std::fmt;

use crate::geometry::{BBox, FrameDetections};
use crate::tracker::Tracklet;

pub const SENTINEL: f64 = -1.0;
pub const MAX_DETS: [usize; 3] = [1, 10, 100];
const RECALL_POINTS: usize = 101;

pub fn iou_thresholds() -> [f64; 10] {
    std::array::from_fn(|i| 0.5 + 0.05 * i as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AreaRange {
    All,
    Small,
    Medium,
    Large,
}

impl AreaRange {
    pub const ALL: [AreaRange; 4] = [AreaRange::All, AreaRange::Small, AreaRange::Medium, AreaRange::Large];

    /// Inclusive bounds in square pixels.
    pub fn bounds(self) -> (f64, f64) {
        match self {
            AreaRange::All => (0.0, 1e10),
            AreaRange::Small => (0.0, 32.0 * 32.0),
            AreaRange::Medium => (32.0 * 32.0, 96.0 * 96.0),
            AreaRange::Large => (96.0 * 96.0, 1e10),
        }
    }

    fn contains(self, area: f64) -> bool {
        let (lo, hi) = self.bounds();
        area >= lo && area <= hi
    }

    fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AreaRange::All => "all",
            AreaRange::Small => "small",
            AreaRange::Medium => "medium",
            AreaRange::Large => "large",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetMetric {
    Ap,
    Ar,
}

/// IoU threshold selection: the 0.50:0.95 mean or a single threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IouSpec {
    Range,
    At(f64),
}

impl fmt::Display for IouSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IouSpec::Range => f.write_str("0.50:0.95"),
            IouSpec::At(t) => write!(f, "{t:.2}"),
        }
    }
}

/// One cell of the standard twelve-number summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetCell {
    pub metric: DetMetric,
    pub iou: IouSpec,
    pub area: AreaRange,
    pub max_dets: usize,
}

impl DetCell {
    pub const fn new(metric: DetMetric, iou: IouSpec, area: AreaRange, max_dets: usize) -> Self {
        DetCell {
            metric,
            iou,
            area,
            max_dets,
        }
    }

    pub fn label(&self) -> String {
        let m = match self.metric {
            DetMetric::Ap => "AP",
            DetMetric::Ar => "AR",
        };
        format!("{m}@[{}|{}|{}]", self.iou, self.area.as_str(), self.max_dets)
    }
}

/// The twelve summary cells, in the column order of the tuning tables.
pub const SUMMARY: [DetCell; 12] = [
    DetCell::new(DetMetric::Ap, IouSpec::Range, AreaRange::All, 100),
    DetCell::new(DetMetric::Ap, IouSpec::At(0.5), AreaRange::All, 100),
    DetCell::new(DetMetric::Ap, IouSpec::At(0.75), AreaRange::All, 100),
    DetCell::new(DetMetric::Ap, IouSpec::Range, AreaRange::Small, 100),
    DetCell::new(DetMetric::Ap, IouSpec::Range, AreaRange::Medium, 100),
    DetCell::new(DetMetric::Ap, IouSpec::Range, AreaRange::Large, 100),
    DetCell::new(DetMetric::Ar, IouSpec::Range, AreaRange::All, 1),
    DetCell::new(DetMetric::Ar, IouSpec::Range, AreaRange::All, 10),
    DetCell::new(DetMetric::Ar, IouSpec::Range, AreaRange::All, 100),
    DetCell::new(DetMetric::Ar, IouSpec::Range, AreaRange::Small, 100),
    DetCell::new(DetMetric::Ar, IouSpec::Range, AreaRange::Medium, 100),
    DetCell::new(DetMetric::Ar, IouSpec::Range, AreaRange::Large, 100),
];

/// Interpolated precision and final recall for every threshold, area range
/// and maxDets cap.
#[derive(Debug, Clone, PartialEq)]
pub struct DetEvalReport {
    /// `[iou][recall point][area][max_dets]`
    precision: Vec<f64>,
    /// `[iou][area][max_dets]`
    recall: Vec<f64>,
}

impl DetEvalReport {
    fn p_index(t: usize, r: usize, a: usize, m: usize) -> usize {
        ((t * RECALL_POINTS + r) * 4 + a) * MAX_DETS.len() + m
    }

    fn r_index(t: usize, a: usize, m: usize) -> usize {
        (t * 4 + a) * MAX_DETS.len() + m
    }

    fn iou_indices(iou: IouSpec) -> Vec<usize> {
        match iou {
            IouSpec::Range => (0..10).collect(),
            IouSpec::At(thr) => iou_thresholds()
                .iter()
                .position(|t| (t - thr).abs() < 1e-9)
                .into_iter()
                .collect(),
        }
    }

    /// Mean over the selected thresholds (and recall points for AP) of the
    /// non-sentinel entries; [`SENTINEL`] if there are none or the
    /// threshold/cap is not part of the evaluation grid.
    pub fn get(&self, cell: DetCell) -> f64 {
        let Some(m) = MAX_DETS.iter().position(|&d| d == cell.max_dets) else {
            return SENTINEL;
        };
        let a = cell.area.index();
        let values: Vec<f64> = match cell.metric {
            DetMetric::Ap => Self::iou_indices(cell.iou)
                .into_iter()
                .flat_map(|t| (0..RECALL_POINTS).map(move |r| Self::p_index(t, r, a, m)))
                .map(|i| self.precision[i])
                .collect(),
            DetMetric::Ar => Self::iou_indices(cell.iou)
                .into_iter()
                .map(|t| self.recall[Self::r_index(t, a, m)])
                .collect(),
        };
        let valid: Vec<f64> = values.into_iter().filter(|&v| v > SENTINEL).collect();
        if valid.is_empty() {
            SENTINEL
        } else {
            valid.iter().sum::<f64>() / valid.len() as f64
        }
    }

    pub fn ap(&self, iou: IouSpec, area: AreaRange, max_dets: usize) -> f64 {
        self.get(DetCell::new(DetMetric::Ap, iou, area, max_dets))
    }

    pub fn ar(&self, iou: IouSpec, area: AreaRange, max_dets: usize) -> f64 {
        self.get(DetCell::new(DetMetric::Ar, iou, area, max_dets))
    }

    pub fn summary(&self) -> DetSummary {
        DetSummary {
            values: SUMMARY.map(|c| self.get(c)),
        }
    }
}

/// The twelve summary numbers, indexed like [`SUMMARY`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetSummary {
    pub values: [f64; 12],
}

impl DetSummary {
    pub fn new(values: [f64; 12]) -> Self {
        DetSummary { values }
    }

    /// AP[0.50:0.95 | all | 100], the primary selection column.
    pub fn ap(&self) -> f64 {
        self.values[0]
    }

    /// AR[0.50:0.95 | all | 100].
    pub fn ar(&self) -> f64 {
        self.values[8]
    }

    pub fn get(&self, cell: DetCell) -> Option<f64> {
        SUMMARY.iter().position(|c| *c == cell).map(|i| self.values[i])
    }

    pub fn csv_header() -> String {
        SUMMARY.iter().map(DetCell::label).collect::<Vec<_>>().join(",")
    }

    pub fn csv_row(&self) -> String {
        self.values
            .iter()
            .map(|v| format!("{v:.6}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Ground-truth boxes grouped by frame.
pub fn gt_by_frame(gt: &[Tracklet]) -> BTreeMap<u32, Vec<BBox>> {
    let mut out: BTreeMap<u32, Vec<BBox>> = BTreeMap::new();
    for t in gt {
        for p in &t.points {
            out.entry(p.frame).or_default().push(p.bbox);
        }
    }
    out
}

/// Per-frame, per-area matching outcome of the top-100 detections.
struct FrameEval {
    scores: Vec<f64>,
    /// `[iou][det]`
    matched: Vec<Vec<bool>>,
    ignored: Vec<Vec<bool>>,
    relevant_gt: usize,
}

fn evaluate_frame(gts: &[BBox], dets: &[(f64, BBox)], area: AreaRange) -> FrameEval {
    // non-ignored gt first, as in the reference evaluator
    let mut gt_order: Vec<usize> = (0..gts.len()).collect();
    gt_order.sort_by_key(|&g| !area.contains(gts[g].area()));
    let gt_ignore: Vec<bool> = gt_order.iter().map(|&g| !area.contains(gts[g].area())).collect();
    let max_dets = MAX_DETS[MAX_DETS.len() - 1];
    let dets = &dets[..dets.len().min(max_dets)];

    let thresholds = iou_thresholds();
    let mut matched = vec![vec![false; dets.len()]; thresholds.len()];
    let mut ignored = vec![vec![false; dets.len()]; thresholds.len()];
    for (ti, &thr) in thresholds.iter().enumerate() {
        let mut gt_taken = vec![false; gt_order.len()];
        for (di, (_, dbox)) in dets.iter().enumerate() {
            let mut best = thr.min(1.0 - 1e-10);
            let mut hit: Option<usize> = None;
            for (k, &g) in gt_order.iter().enumerate() {
                if gt_taken[k] {
                    continue;
                }
                if let Some(h) = hit {
                    if !gt_ignore[h] && gt_ignore[k] {
                        break;
                    }
                }
                let v = dbox.iou(&gts[g]);
                if v < best {
                    continue;
                }
                best = v;
                hit = Some(k);
            }
            match hit {
                Some(k) => {
                    gt_taken[k] = true;
                    matched[ti][di] = true;
                    ignored[ti][di] = gt_ignore[k];
                }
                None => ignored[ti][di] = !area.contains(dbox.area()),
            }
        }
    }
    FrameEval {
        scores: dets.iter().map(|d| d.0).collect(),
        matched,
        ignored,
        relevant_gt: gt_ignore.iter().filter(|&&i| !i).count(),
    }
}

/// COCO-style evaluation of scored detections against per-frame gt boxes.
pub fn evaluate_detections(gt: &BTreeMap<u32, Vec<BBox>>, dets: &[FrameDetections]) -> DetEvalReport {
    let mut by_frame: BTreeMap<u32, Vec<(f64, BBox)>> = BTreeMap::new();
    for fd in dets {
        by_frame
            .entry(fd.frame)
            .or_default()
            .extend(fd.detections.iter().map(|d| (d.score, d.bbox)));
    }
    for v in by_frame.values_mut() {
        v.sort_by(|a, b| b.0.total_cmp(&a.0));
    }
    let mut frames: Vec<u32> = gt.keys().chain(by_frame.keys()).copied().collect();
    frames.sort_unstable();
    frames.dedup();

    let n_iou = iou_thresholds().len();
    let mut precision = vec![SENTINEL; n_iou * RECALL_POINTS * 4 * MAX_DETS.len()];
    let mut recall = vec![SENTINEL; n_iou * 4 * MAX_DETS.len()];
    let empty_gt = Vec::new();
    let empty_det = Vec::new();

    for area in AreaRange::ALL {
        let evals: Vec<FrameEval> = frames
            .iter()
            .map(|f| {
                evaluate_frame(
                    gt.get(f).unwrap_or(&empty_gt),
                    by_frame.get(f).unwrap_or(&empty_det),
                    area,
                )
            })
            .collect();
        let relevant: usize = evals.iter().map(|e| e.relevant_gt).sum();
        if relevant == 0 {
            continue;
        }
        for (mi, &cap) in MAX_DETS.iter().enumerate() {
            // (score, frame slot, det slot), stable in frame then det order
            let mut pool: Vec<(f64, usize, usize)> = evals
                .iter()
                .enumerate()
                .flat_map(|(fi, e)| e.scores.iter().take(cap).enumerate().map(move |(di, &s)| (s, fi, di)))
                .collect();
            pool.sort_by(|a, b| b.0.total_cmp(&a.0));

            for ti in 0..n_iou {
                let (mut tp, mut fp) = (0usize, 0usize);
                let mut rc = Vec::with_capacity(pool.len());
                let mut pr = Vec::with_capacity(pool.len());
                for &(_, fi, di) in &pool {
                    if evals[fi].ignored[ti][di] {
                        continue;
                    }
                    if evals[fi].matched[ti][di] {
                        tp += 1;
                    } else {
                        fp += 1;
                    }
                    rc.push(tp as f64 / relevant as f64);
                    pr.push(tp as f64 / (tp + fp) as f64);
                }
                recall[DetEvalReport::r_index(ti, area.index(), mi)] = rc.last().copied().unwrap_or(0.0);
                for i in (1..pr.len()).rev() {
                    if pr[i] > pr[i - 1] {
                        pr[i - 1] = pr[i];
                    }
                }
                for r in 0..RECALL_POINTS {
                    let level = r as f64 / (RECALL_POINTS - 1) as f64;
                    let pos = rc.partition_point(|&v| v < level);
                    let q = if pos < pr.len() { pr[pos] } else { 0.0 };
                    precision[DetEvalReport::p_index(ti, r, area.index(), mi)] = q;
                }
            }
        }
    }
    DetEvalReport { precision, recall }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Detection;

    fn bx(x: f64, y: f64, s: f64) -> BBox {
        BBox::new(x, y, s, s).unwrap()
    }

    fn frame(f: u32, dets: &[(BBox, f64)]) -> FrameDetections {
        FrameDetections::new(f, dets.iter().map(|&(b, s)| Detection::new(b, s).unwrap()).collect()).unwrap()
    }

    /// Hand reference for the PR curve: 101-point interpolation computed
    /// directly from the definition (max precision at recall >= level).
    fn interpolated_ap(points: &[(f64, f64)]) -> f64 {
        (0..=100)
            .map(|r| {
                let level = r as f64 / 100.0;
                points
                    .iter()
                    .filter(|(rc, _)| *rc >= level)
                    .map(|(_, p)| *p)
                    .fold(0.0, f64::max)
            })
            .sum::<f64>()
            / 101.0
    }

    #[test]
    fn perfect_detections() {
        let gt = BTreeMap::from([(1, vec![bx(0., 0., 20.), bx(100., 100., 50.)]), (2, vec![bx(10., 10., 20.)])]);
        let dets = vec![
            frame(1, &[(bx(0., 0., 20.), 1.0), (bx(100., 100., 50.), 1.0)]),
            frame(2, &[(bx(10., 10., 20.), 1.0)]),
        ];
        let r = evaluate_detections(&gt, &dets);
        let s = r.summary();
        for (cell, v) in SUMMARY.iter().zip(s.values) {
            match (cell.area, cell.metric, cell.max_dets) {
                (AreaRange::Large, _, _) => assert_eq!(v, SENTINEL),
                // frame 1 has two gt boxes, only one is reachable with one detection
                (AreaRange::All, DetMetric::Ar, 1) => assert!((v - 2.0 / 3.0).abs() < 1e-12, "{}", cell.label()),
                _ => assert!((v - 1.0).abs() < 1e-12, "{} = {v}", cell.label()),
            }
        }
    }

    #[test]
    fn no_detections() {
        let gt = BTreeMap::from([(1, vec![bx(0., 0., 20.)])]);
        let r = evaluate_detections(&gt, &[]);
        assert_eq!(r.ap(IouSpec::Range, AreaRange::All, 100), 0.0);
        assert_eq!(r.ap(IouSpec::Range, AreaRange::Small, 100), 0.0);
        assert_eq!(r.ap(IouSpec::Range, AreaRange::Medium, 100), SENTINEL);
        assert_eq!(r.ar(IouSpec::Range, AreaRange::All, 100), 0.0);
    }

    #[test]
    fn hand_pr_curve() {
        let gt = BTreeMap::from([(1, vec![bx(0., 0., 20.), bx(100., 0., 20.)])]);
        let dets = vec![frame(
            1,
            &[(bx(300., 300., 20.), 0.9), (bx(0., 0., 20.), 0.8), (bx(100., 0., 20.), 0.7)],
        )];
        let expected = interpolated_ap(&[(0.0, 0.0), (0.5, 0.5), (1.0, 2.0 / 3.0)]);
        assert!((expected - 2.0 / 3.0).abs() < 1e-12);
        let r = evaluate_detections(&gt, &dets);
        assert!((r.ap(IouSpec::At(0.5), AreaRange::All, 100) - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.ar(IouSpec::At(0.5), AreaRange::All, 100) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicates_count_once() {
        let g = bx(0., 0., 40.);
        let gt = BTreeMap::from([(1, vec![g])]);
        let dets = vec![frame(1, &[(g, 0.9), (g, 0.8), (g, 0.7)])];
        let r = evaluate_detections(&gt, &dets);
        // one TP then two FPs: recall reaches 1 at precision 1
        assert!((r.ap(IouSpec::At(0.5), AreaRange::All, 100) - 1.0).abs() < 1e-12);
        // duplicates placed first lower the curve
        let worse = vec![frame(1, &[(bx(200., 200., 40.), 0.95), (g, 0.9)])];
        let r = evaluate_detections(&gt, &worse);
        assert!((r.ap(IouSpec::At(0.5), AreaRange::All, 100) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn max_dets_caps_per_frame() {
        let gt = BTreeMap::from([(1, vec![bx(0., 0., 20.), bx(100., 0., 20.)])]);
        let dets = vec![frame(1, &[(bx(0., 0., 20.), 0.9), (bx(100., 0., 20.), 0.8)])];
        let r = evaluate_detections(&gt, &dets);
        assert!((r.ar(IouSpec::Range, AreaRange::All, 1) - 0.5).abs() < 1e-12);
        assert!((r.ar(IouSpec::Range, AreaRange::All, 10) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn area_boundaries_are_inclusive() {
        assert!(AreaRange::Small.contains(1024.0));
        assert!(AreaRange::Medium.contains(1024.0));
        assert!(!AreaRange::Large.contains(9215.0));
    }

    #[test]
    fn csv_layout() {
        assert_eq!(DetSummary::csv_header().split(',').count(), 12);
        assert!(DetSummary::csv_header().starts_with("AP@[0.50:0.95|all|100],AP@[0.50|all|100]"));
    }

    use proptest::prelude::*;

    // well-separated objects on a 200 px lattice, each det jittered around one gt
    fn separated_case() -> impl Strategy<Value = (BTreeMap<u32, Vec<BBox>>, Vec<FrameDetections>)> {
        let obj = (0u32..3, 0usize..16, 10.0..120.0f64, prop::collection::vec((-8.0..8.0f64, -8.0..8.0f64, 0.0..1.0f64), 0..3));
        prop::collection::vec(obj, 1..20).prop_map(|objs| {
            let mut gt: BTreeMap<u32, Vec<BBox>> = BTreeMap::new();
            let mut dets: BTreeMap<u32, Vec<(BBox, f64)>> = BTreeMap::new();
            for (f, cell, size, jit) in objs {
                let (x, y) = ((cell % 4) as f64 * 200.0, (cell / 4) as f64 * 200.0);
                let g = BBox::new(x, y, size, size).unwrap();
                let frame_gt = gt.entry(f + 1).or_default();
                if frame_gt.iter().any(|b| b.iou(&g) > 0.0) {
                    continue;
                }
                frame_gt.push(g);
                for (dx, dy, sc) in jit {
                    dets.entry(f + 1).or_default().push((BBox::new(x + dx, y + dy, size, size).unwrap(), sc));
                }
            }
            let dets = dets.into_iter().map(|(f, d)| frame(f, &d)).collect();
            (gt, dets)
        })
    }

    proptest! {
        #[test]
        fn ar_monotone_in_max_dets((gt, dets) in separated_case()) {
            let r = evaluate_detections(&gt, &dets);
            for area in AreaRange::ALL {
                let v: Vec<f64> = MAX_DETS.iter().map(|&m| r.ar(IouSpec::Range, area, m)).collect();
                prop_assert!(v[0] <= v[1] + 1e-12 && v[1] <= v[2] + 1e-12, "{v:?}");
            }
        }

        #[test]
        fn ap_monotone_in_threshold((gt, dets) in separated_case()) {
            let r = evaluate_detections(&gt, &dets);
            let aps: Vec<f64> = iou_thresholds().iter().map(|&t| r.ap(IouSpec::At(t), AreaRange::All, 100)).collect();
            for w in aps.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12, "{aps:?}");
            }
        }

        #[test]
        fn values_in_unit_interval_or_sentinel((gt, dets) in separated_case()) {
            for v in evaluate_detections(&gt, &dets).summary().values {
                prop_assert!(v == SENTINEL || (0.0..=1.0).contains(&v));
            }
        }
    }
}
