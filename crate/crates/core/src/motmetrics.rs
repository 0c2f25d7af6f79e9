//! Tracking evaluation: CLEAR-MOT counts, MOTA/MOTP/MOTAL, identity metrics
//! (IDF1/IDP/IDR) and the track-level MT/PT/ML/FM statistics.
//!
//! Evaluation happens in two steps. [`evaluate_counts`] produces raw
//! [`MotCounts`] for one sequence; counts add up across sequences and
//! [`MotReport::from_counts`] turns the sum into percentages, so a multi-
//! sequence report is a micro-average.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use crate::assoc::{solve_hungarian, CostMatrix};
use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::tracker::Tracklet;

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

/// Tracked-lifetime ratio above which a gt track is mostly tracked.
pub const MOSTLY_TRACKED: f64 = 0.8;
/// Tracked-lifetime ratio below which a gt track is mostly lost.
pub const MOSTLY_LOST: f64 = 0.2;

/// Correspondences of one frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameMatches {
    pub frame: u32,
    /// `(gt id, predicted id, IoU)`, sorted by gt id.
    pub pairs: Vec<(u32, u32, f64)>,
    pub unmatched_gt: Vec<u32>,
    pub unmatched_pred: Vec<u32>,
}

type FrameIndex = BTreeMap<u32, (Vec<(u32, BBox)>, Vec<(u32, BBox)>)>;

fn index_frames(gt: &[Tracklet], pred: &[Tracklet]) -> FrameIndex {
    let mut frames: FrameIndex = BTreeMap::new();
    for t in gt {
        for p in &t.points {
            frames.entry(p.frame).or_default().0.push((t.id, p.bbox));
        }
    }
    for t in pred {
        for p in &t.points {
            frames.entry(p.frame).or_default().1.push((t.id, p.bbox));
        }
    }
    for (g, p) in frames.values_mut() {
        g.sort_by_key(|e| e.0);
        p.sort_by_key(|e| e.0);
    }
    frames
}

/// CLEAR-MOT frame matching.
///
/// Per frame, a gt object keeps its previous partner when that prediction is
/// present and still overlaps by at least `iou_thr`. Remaining boxes are
/// matched by a maximum-cardinality, maximum-IoU assignment restricted to
/// pairs with IoU >= `iou_thr`.
pub fn match_frames(gt: &[Tracklet], pred: &[Tracklet], iou_thr: f64) -> Vec<FrameMatches> {
    let mut last_partner: HashMap<u32, u32> = HashMap::new();
    let mut out = Vec::new();
    for (frame, (gts, preds)) in index_frames(gt, pred) {
        let mut gt_done = vec![false; gts.len()];
        let mut pred_done = vec![false; preds.len()];
        let mut pairs = Vec::new();

        for (gi, (gid, gbox)) in gts.iter().enumerate() {
            let Some(&pid) = last_partner.get(gid) else { continue };
            let Some(pi) = preds.iter().position(|(id, _)| *id == pid) else { continue };
            if pred_done[pi] {
                continue;
            }
            let v = gbox.iou(&preds[pi].1);
            if v >= iou_thr {
                gt_done[gi] = true;
                pred_done[pi] = true;
                pairs.push((*gid, pid, v));
            }
        }

        let open_gt: Vec<usize> = (0..gts.len()).filter(|&i| !gt_done[i]).collect();
        let open_pred: Vec<usize> = (0..preds.len()).filter(|&i| !pred_done[i]).collect();
        if !open_gt.is_empty() && !open_pred.is_empty() {
            let forbidden = open_gt.len().max(open_pred.len()) as f64 + 1.0;
            let ious: Vec<Vec<f64>> = open_gt
                .iter()
                .map(|&g| open_pred.iter().map(|&p| gts[g].1.iou(&preds[p].1)).collect())
                .collect();
            let cost = CostMatrix::from_fn(open_gt.len(), open_pred.len(), |i, j| {
                if ious[i][j] >= iou_thr {
                    1.0 - ious[i][j]
                } else {
                    forbidden
                }
            });
            for (i, j) in solve_hungarian(&cost).pairs {
                if ious[i][j] >= iou_thr {
                    let (g, p) = (open_gt[i], open_pred[j]);
                    gt_done[g] = true;
                    pred_done[p] = true;
                    pairs.push((gts[g].0, preds[p].0, ious[i][j]));
                }
            }
        }

        pairs.sort_by_key(|p| p.0);
        out.push(FrameMatches {
            frame,
            pairs,
            unmatched_gt: (0..gts.len()).filter(|&i| !gt_done[i]).map(|i| gts[i].0).collect(),
            unmatched_pred: (0..preds.len()).filter(|&i| !pred_done[i]).map(|i| preds[i].0).collect(),
        });
        for &(g, p, _) in &out.last().expect("just pushed").pairs {
            last_partner.insert(g, p);
        }
    }
    out
}

/// Raw counts of one or more evaluated sequences.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotCounts {
    pub frames: u64,
    pub gt_boxes: u64,
    pub pred_boxes: u64,
    pub matches: u64,
    pub fp: u64,
    pub fn_: u64,
    pub idsw: u64,
    pub fm: u64,
    pub gt_tracks: u64,
    pub mt: u64,
    pub pt: u64,
    pub ml: u64,
    /// Sum of `1 - IoU` over matches.
    pub match_distance: f64,
    pub idtp: u64,
    pub idfp: u64,
    pub idfn: u64,
}

impl Add for MotCounts {
    type Output = MotCounts;

    fn add(mut self, o: MotCounts) -> MotCounts {
        self += o;
        self
    }
}

impl AddAssign for MotCounts {
    fn add_assign(&mut self, o: MotCounts) {
        self.frames += o.frames;
        self.gt_boxes += o.gt_boxes;
        self.pred_boxes += o.pred_boxes;
        self.matches += o.matches;
        self.fp += o.fp;
        self.fn_ += o.fn_;
        self.idsw += o.idsw;
        self.fm += o.fm;
        self.gt_tracks += o.gt_tracks;
        self.mt += o.mt;
        self.pt += o.pt;
        self.ml += o.ml;
        self.match_distance += o.match_distance;
        self.idtp += o.idtp;
        self.idfp += o.idfp;
        self.idfn += o.idfn;
    }
}

impl std::iter::Sum for MotCounts {
    fn sum<I: Iterator<Item = MotCounts>>(iter: I) -> MotCounts {
        iter.fold(MotCounts::default(), Add::add)
    }
}

/// CLEAR counts from frame correspondences. Identity fields are left zero;
/// see [`id_counts`].
pub fn clear_counts(matches: &[FrameMatches]) -> MotCounts {
    let mut c = MotCounts {
        frames: matches.len() as u64,
        ..MotCounts::default()
    };
    let mut last_partner: HashMap<u32, u32> = HashMap::new();
    // per gt id: tracked flag for every frame the gt is present
    let mut status: BTreeMap<u32, Vec<bool>> = BTreeMap::new();
    for fm in matches {
        c.fp += fm.unmatched_pred.len() as u64;
        c.fn_ += fm.unmatched_gt.len() as u64;
        c.matches += fm.pairs.len() as u64;
        c.gt_boxes += (fm.pairs.len() + fm.unmatched_gt.len()) as u64;
        c.pred_boxes += (fm.pairs.len() + fm.unmatched_pred.len()) as u64;
        for &(g, p, v) in &fm.pairs {
            c.match_distance += 1.0 - v;
            if let Some(prev) = last_partner.insert(g, p) {
                if prev != p {
                    c.idsw += 1;
                }
            }
            status.entry(g).or_default().push(true);
        }
        for &g in &fm.unmatched_gt {
            status.entry(g).or_default().push(false);
        }
    }
    for flags in status.values() {
        c.gt_tracks += 1;
        let tracked = flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64;
        if tracked > MOSTLY_TRACKED {
            c.mt += 1;
        } else if tracked < MOSTLY_LOST {
            c.ml += 1;
        } else {
            c.pt += 1;
        }
        c.fm += fragmentations(flags);
    }
    c
}

/// Untracked runs strictly between the first and last tracked frame.
fn fragmentations(flags: &[bool]) -> u64 {
    let (Some(first), Some(last)) = (
        flags.iter().position(|&f| f),
        flags.iter().rposition(|&f| f),
    ) else {
        return 0;
    };
    flags[first..=last]
        .windows(2)
        .filter(|w| w[0] && !w[1])
        .count() as u64
}

/// Identity counts from a global one-to-one matching of gt and predicted
/// identities that maximizes the number of co-located frames (IoU >= thr).
pub fn id_counts(gt: &[Tracklet], pred: &[Tracklet], iou_thr: f64) -> MotCounts {
    let gt_boxes: u64 = gt.iter().map(|t| t.len() as u64).sum();
    let pred_boxes: u64 = pred.iter().map(|t| t.len() as u64).sum();
    let gt_ids: Vec<u32> = gt.iter().map(|t| t.id).collect::<BTreeSet<_>>().into_iter().collect();
    let pred_ids: Vec<u32> = pred.iter().map(|t| t.id).collect::<BTreeSet<_>>().into_iter().collect();
    let gt_pos: HashMap<u32, usize> = gt_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let pred_pos: HashMap<u32, usize> = pred_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();

    let mut overlap = vec![vec![0u64; pred_ids.len()]; gt_ids.len()];
    for (gts, preds) in index_frames(gt, pred).values() {
        for (gid, gb) in gts {
            for (pid, pb) in preds {
                if gb.iou(pb) >= iou_thr {
                    overlap[gt_pos[gid]][pred_pos[pid]] += 1;
                }
            }
        }
    }
    let idtp = if gt_ids.is_empty() || pred_ids.is_empty() {
        0
    } else {
        let cost = CostMatrix::from_fn(gt_ids.len(), pred_ids.len(), |i, j| -(overlap[i][j] as f64));
        solve_hungarian(&cost)
            .pairs
            .iter()
            .map(|&(i, j)| overlap[i][j])
            .sum()
    };
    MotCounts {
        idtp,
        idfp: pred_boxes - idtp,
        idfn: gt_boxes - idtp,
        ..MotCounts::default()
    }
}

/// Raw counts of one sequence.
pub fn evaluate_counts(gt: &[Tracklet], pred: &[Tracklet], iou_thr: f64) -> MotCounts {
    let clear = clear_counts(&match_frames(gt, pred, iou_thr));
    let ids = id_counts(gt, pred, iou_thr);
    MotCounts {
        idtp: ids.idtp,
        idfp: ids.idfp,
        idfn: ids.idfn,
        ..clear
    }
}

/// Full report of one sequence.
pub fn evaluate(gt: &[Tracklet], pred: &[Tracklet], iou_thr: f64) -> Result<MotReport> {
    MotReport::from_counts(&evaluate_counts(gt, pred, iou_thr))
}

/// `(IDF1, IDP, IDR)` in percent.
///
/// Both sides empty is a perfect (vacuous) score; one side empty scores 0.
pub fn id_metrics(gt: &[Tracklet], pred: &[Tracklet], iou_thr: f64) -> (f64, f64, f64) {
    id_scores(&id_counts(gt, pred, iou_thr))
}

fn id_scores(c: &MotCounts) -> (f64, f64, f64) {
    let gt = c.idtp + c.idfn;
    let pred = c.idtp + c.idfp;
    match (gt, pred) {
        (0, 0) => (100.0, 100.0, 100.0),
        (0, _) | (_, 0) => (0.0, 0.0, 0.0),
        _ => {
            let idp = 100.0 * c.idtp as f64 / pred as f64;
            let idr = 100.0 * c.idtp as f64 / gt as f64;
            (idf1(idp, idr), idp, idr)
        }
    }
}

/// Harmonic mean of identity precision and recall (same unit as inputs).
pub fn idf1(idp: f64, idr: f64) -> f64 {
    if idp + idr == 0.0 {
        0.0
    } else {
        2.0 * idp * idr / (idp + idr)
    }
}

/// `1 - (FN + FP + IDSW) / GT`, in percent.
pub fn mota(gt_boxes: u64, fp: u64, fn_: u64, idsw: u64) -> Result<f64> {
    if gt_boxes == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    Ok(100.0 * (1.0 - (fn_ + fp + idsw) as f64 / gt_boxes as f64))
}

/// MOTA with a `log10(IDSW + 1)` identity penalty, in percent.
pub fn motal(gt_boxes: u64, fp: u64, fn_: u64, idsw: u64) -> Result<f64> {
    if gt_boxes == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    let penalty = fn_ as f64 + fp as f64 + (idsw as f64 + 1.0).log10();
    Ok(100.0 * (1.0 - penalty / gt_boxes as f64))
}

/// Percent-overlap MOTP to mean matching distance.
pub fn motp_percent_to_distance(pct: f64) -> f64 {
    1.0 - pct / 100.0
}

pub fn motp_distance_to_percent(dist: f64) -> f64 {
    100.0 * (1.0 - dist)
}

/// Which MOTP value is reported and used for ranking tie-breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MotpConvention {
    /// Mean `1 - IoU` over matches, lower is better.
    #[default]
    Distance,
    /// Mean IoU over matches in percent, higher is better.
    Percent,
}

impl MotpConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            MotpConvention::Distance => "distance",
            MotpConvention::Percent => "percent",
        }
    }
}

impl fmt::Display for MotpConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MotpConvention {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "distance" => Ok(MotpConvention::Distance),
            "percent" => Ok(MotpConvention::Percent),
            other => Err(format!("unknown MOTP convention `{other}`")),
        }
    }
}

/// Every tracking metric of one evaluation. Ratios are percentages except
/// `far` (false positives per frame) and `motp_dist` (in `[0, 1]`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MotReport {
    pub idf1: f64,
    pub idp: f64,
    pub idr: f64,
    pub rcll: f64,
    pub prcn: f64,
    pub far: f64,
    pub gt_tracks: u64,
    pub mt: u64,
    pub pt: u64,
    pub ml: u64,
    pub fp: u64,
    pub fn_: u64,
    pub idsw: u64,
    pub fm: u64,
    pub mota: f64,
    pub motp_pct: f64,
    pub motp_dist: f64,
    pub motal: f64,
    pub gt_boxes: u64,
    pub frames: u64,
}

/// Column names of [`MotReport::csv_row`].
pub const MOT_COLUMNS: [&str; 17] = [
    "IDF1", "IDP", "IDR", "Rcll", "Prcn", "FAR", "GT", "MT", "PT", "ML", "FP", "FN", "IDs", "FM",
    "MOTA", "MOTP", "MOTAL",
];

impl MotReport {
    pub fn from_counts(c: &MotCounts) -> Result<Self> {
        let mota = mota(c.gt_boxes, c.fp, c.fn_, c.idsw)?;
        let motal = motal(c.gt_boxes, c.fp, c.fn_, c.idsw)?;
        let motp_dist = if c.matches == 0 {
            1.0
        } else {
            c.match_distance / c.matches as f64
        };
        let (idf1, idp, idr) = id_scores(c);
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { 100.0 * num as f64 / den as f64 };
        Ok(MotReport {
            idf1,
            idp,
            idr,
            rcll: ratio(c.matches, c.gt_boxes),
            prcn: ratio(c.matches, c.matches + c.fp),
            far: if c.frames == 0 { 0.0 } else { c.fp as f64 / c.frames as f64 },
            gt_tracks: c.gt_tracks,
            mt: c.mt,
            pt: c.pt,
            ml: c.ml,
            fp: c.fp,
            fn_: c.fn_,
            idsw: c.idsw,
            fm: c.fm,
            mota,
            motp_pct: motp_distance_to_percent(motp_dist),
            motp_dist,
            motal,
            gt_boxes: c.gt_boxes,
            frames: c.frames,
        })
    }

    pub fn motp(&self, convention: MotpConvention) -> f64 {
        match convention {
            MotpConvention::Distance => self.motp_dist,
            MotpConvention::Percent => self.motp_pct,
        }
    }

    pub fn csv_header() -> String {
        MOT_COLUMNS.join(",")
    }

    /// Values in [`MOT_COLUMNS`] order. `GT` is the number of gt tracks.
    pub fn csv_row(&self, convention: MotpConvention) -> String {
        format!(
            "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{},{},{},{},{},{},{:.6},{:.6},{:.6}",
            self.idf1,
            self.idp,
            self.idr,
            self.rcll,
            self.prcn,
            self.far,
            self.gt_tracks,
            self.mt,
            self.pt,
            self.ml,
            self.fp,
            self.fn_,
            self.idsw,
            self.fm,
            self.mota,
            self.motp(convention),
            self.motal
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracker::TrackPoint;

    fn bx(x: f64, y: f64) -> BBox {
        BBox::new(x, y, 10.0, 10.0).unwrap()
    }

    fn tracklet(id: u32, pts: &[(u32, f64, f64)]) -> Tracklet {
        Tracklet::new(
            id,
            pts.iter()
                .map(|&(frame, x, y)| TrackPoint { frame, bbox: bx(x, y), score: 1.0 })
                .collect(),
        )
        .unwrap()
    }

    fn line(id: u32, frames: std::ops::RangeInclusive<u32>, x0: f64, dx: f64) -> Tracklet {
        tracklet(id, &frames.map(|t| (t, x0 + dx * t as f64, 0.0)).collect::<Vec<_>>())
    }

    #[test]
    fn perfect_tracking() {
        let gt = vec![line(1, 1..=10, 0.0, 2.0), line(2, 1..=10, 100.0, -1.0)];
        let r = evaluate(&gt, &gt, 0.5).unwrap();
        assert_eq!((r.fp, r.fn_, r.idsw, r.fm), (0, 0, 0, 0));
        assert_eq!(r.mota, 100.0);
        assert_eq!(r.motp_dist, 0.0);
        assert_eq!(r.idf1, 100.0);
        assert_eq!((r.mt, r.pt, r.ml), (2, 0, 0));
        let m = match_frames(&gt, &gt, 0.5);
        assert!(m.iter().all(|f| f.unmatched_gt.is_empty() && f.unmatched_pred.is_empty()));
    }

    #[test]
    fn empty_prediction_is_all_misses() {
        let gt = vec![line(1, 1..=4, 0.0, 1.0)];
        let m = match_frames(&gt, &[], 0.5);
        assert!(m.iter().all(|f| f.pairs.is_empty() && f.unmatched_gt.len() == 1));
        let r = evaluate(&gt, &[], 0.5).unwrap();
        assert_eq!(r.fn_, 4);
        assert_eq!(r.mota, 0.0);
        assert_eq!((r.idf1, r.idp, r.idr), (0.0, 0.0, 0.0));
        assert_eq!(r.ml, 1);
    }

    #[test]
    fn empty_ground_truth_is_an_error() {
        let pred = vec![line(1, 1..=3, 0.0, 1.0)];
        assert!(matches!(evaluate(&[], &pred, 0.5), Err(Error::EmptyGroundTruth)));
        assert_eq!(id_metrics(&[], &[], 0.5), (100.0, 100.0, 100.0));
    }

    #[test]
    fn mota_arithmetic() {
        assert_eq!(mota(200, 8, 10, 7).unwrap(), 87.5);
        assert!(mota(0, 0, 0, 0).is_err());
        assert!(motal(200, 8, 10, 7).unwrap() > 87.5);
    }

    #[test]
    fn motp_conventions_complement() {
        assert!((motp_percent_to_distance(87.3) - 0.1263).abs() <= 0.002);
        assert!((motp_distance_to_percent(0.25) - 75.0).abs() < 1e-12);
    }

    #[test]
    fn idf1_is_harmonic_mean() {
        assert!((idf1(81.3521, 81.2500) - 81.3010).abs() <= 0.001);
        assert!((idf1(77.7829, 75.4354) - 76.5911).abs() <= 0.002);
    }

    #[test]
    fn carry_over_holds_through_crossing() {
        // Two gt objects cross; at frame 2 the predictions sit so that a
        // fresh optimal matching would swap them, but both previous pairs
        // still clear the threshold.
        let gt = vec![
            tracklet(1, &[(1, 0.0, 0.0), (2, 4.0, 0.0), (3, 8.0, 0.0)]),
            tracklet(2, &[(1, 8.0, 0.0), (2, 5.0, 0.0), (3, 0.0, 0.0)]),
        ];
        let pred = vec![
            tracklet(10, &[(1, 0.0, 0.0), (2, 5.0, 0.0), (3, 8.0, 0.0)]),
            tracklet(20, &[(1, 8.0, 0.0), (2, 4.0, 0.0), (3, 0.0, 0.0)]),
        ];
        let m = match_frames(&gt, &pred, 0.5);
        // fresh matching at frame 2 would pair (1,20) and (2,10) with IoU 1
        assert_eq!(m[1].pairs.iter().map(|p| (p.0, p.1)).collect::<Vec<_>>(), vec![(1, 10), (2, 20)]);
        let r = evaluate(&gt, &pred, 0.5).unwrap();
        assert_eq!(r.idsw, 0);
    }

    #[test]
    fn identity_switch_and_fragmentation() {
        // gt 1 over frames 1..=10. Prediction 7 covers 1..=4, nothing at 5,
        // prediction 8 covers 6..=10.
        let gt = vec![line(1, 1..=10, 0.0, 1.0)];
        let pred = vec![line(7, 1..=4, 0.0, 1.0), line(8, 6..=10, 0.0, 1.0)];
        let r = evaluate(&gt, &pred, 0.5).unwrap();
        assert_eq!((r.fp, r.fn_, r.idsw, r.fm), (0, 1, 1, 1));
        assert_eq!(r.gt_boxes, 10);
        assert!((r.mota - 80.0).abs() < 1e-12);
        // identity: best single partner is 8 (5 frames)
        assert!((r.idr - 50.0).abs() < 1e-12);
        assert!((r.idp - 500.0 / 9.0).abs() < 1e-9);
        assert_eq!((r.mt, r.pt, r.ml), (1, 0, 0));
    }

    #[test]
    fn track_coverage_classes() {
        let gt = vec![
            line(1, 1..=20, 0.0, 0.0),
            line(2, 1..=20, 100.0, 0.0),
            line(3, 1..=20, 200.0, 0.0),
        ];
        let pred = vec![
            line(1, 1..=17, 0.0, 0.0),   // 85%
            line(2, 1..=10, 100.0, 0.0), // 50%
            line(3, 1..=2, 200.0, 0.0),  // 10%
        ];
        let r = evaluate(&gt, &pred, 0.5).unwrap();
        assert_eq!((r.mt, r.pt, r.ml), (1, 1, 1));
        assert_eq!(r.mt + r.pt + r.ml, r.gt_tracks);
    }

    #[test]
    fn counts_aggregate_by_summing() {
        let gt = vec![line(1, 1..=10, 0.0, 1.0)];
        let pred = vec![line(7, 1..=5, 0.0, 1.0)];
        let one = evaluate_counts(&gt, &pred, 0.5);
        let both = MotReport::from_counts(&(one + evaluate_counts(&gt, &gt, 0.5))).unwrap();
        assert_eq!(both.fn_, 5);
        assert_eq!(both.gt_boxes, 20);
        assert!((both.mota - 75.0).abs() < 1e-12);
    }

    #[test]
    fn csv_uses_table_columns() {
        let gt = vec![line(1, 1..=3, 0.0, 1.0)];
        let r = evaluate(&gt, &gt, 0.5).unwrap();
        assert_eq!(
            MotReport::csv_header(),
            "IDF1,IDP,IDR,Rcll,Prcn,FAR,GT,MT,PT,ML,FP,FN,IDs,FM,MOTA,MOTP,MOTAL"
        );
        let row = r.csv_row(MotpConvention::Distance);
        assert_eq!(row.split(',').count(), 17);
        assert!(row.contains(",100.000000,0.000000,100.000000"));
    }
}
