//! SORT-style track lifecycle: predict, associate, update, birth and death.
//!
//! A track is born `Tentative` from any unmatched detection and becomes
//! `Confirmed` once it has `t_min_hit` matched frames. A confirmed track that
//! misses a frame is `Lost` until it is matched again; any track unmatched for
//! more than `t_age` consecutive frames is `Deleted`.
//!
//! Only matched frames are emitted. Coasted predictions bridge identities
//! across gaps but never appear in the output.

use crate::assoc::{build_cost, gate};
use crate::detpost::postprocess;
use crate::error::{Error, Result};
use crate::geometry::{BBox, Detection, FrameDetections};
use crate::motion::{KalmanConfig, KalmanState};
use crate::params::HyperParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint {
    pub frame: u32,
    pub bbox: BBox,
    pub score: f64,
}

/// Identity-stamped sequence of boxes with strictly increasing frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Tracklet {
    pub id: u32,
    pub points: Vec<TrackPoint>,
}

impl Tracklet {
    pub fn new(id: u32, points: Vec<TrackPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyTracklet(id));
        }
        if let Some(w) = points.windows(2).find(|w| w[1].frame <= w[0].frame) {
            return Err(Error::FrameOrder {
                last: w[0].frame,
                got: w[1].frame,
            });
        }
        Ok(Tracklet { id, points })
    }

    pub fn frames(&self) -> impl Iterator<Item = u32> + '_ {
        self.points.iter().map(|p| p.frame)
    }

    pub fn first_frame(&self) -> u32 {
        self.points[0].frame
    }

    pub fn last_frame(&self) -> u32 {
        self.points[self.points.len() - 1].frame
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackState {
    Tentative,
    Confirmed,
    Lost,
    Deleted,
}

#[derive(Debug, Clone)]
pub struct Track {
    pub id: u32,
    pub state: TrackState,
    pub kalman: KalmanState,
    pub hits: u32,
    pub consecutive_misses: u32,
    /// Step index (1-based) at which the track was born.
    born_at: u64,
    /// Matched frames.
    pub history: Vec<TrackPoint>,
    /// Matched frames that were reported as output.
    pub emitted: Vec<TrackPoint>,
}

impl Track {
    fn matched_every_frame(&self, step: u64) -> bool {
        u64::from(self.hits) == step - self.born_at + 1
    }
}

/// One reported box of one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackOutput {
    pub track_id: u32,
    pub bbox: BBox,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerOptions {
    /// During the first `t_min_hit` steps of a sequence, report tracks that
    /// were matched on every frame since birth even before confirmation.
    pub warmup: bool,
    pub kalman: KalmanConfig,
}

impl Default for TrackerOptions {
    fn default() -> Self {
        TrackerOptions {
            warmup: true,
            kalman: KalmanConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Tracker {
    params: HyperParams,
    options: TrackerOptions,
    live: Vec<Track>,
    dead: Vec<Track>,
    next_id: u32,
    steps: u64,
    last_frame: Option<u32>,
}

impl Tracker {
    pub fn new(params: HyperParams) -> Result<Self> {
        Tracker::with_options(params, TrackerOptions::default())
    }

    pub fn with_options(params: HyperParams, options: TrackerOptions) -> Result<Self> {
        params.validate()?;
        Ok(Tracker {
            params,
            options,
            live: Vec::new(),
            dead: Vec::new(),
            next_id: 1,
            steps: 0,
            last_frame: None,
        })
    }

    pub fn params(&self) -> &HyperParams {
        &self.params
    }

    pub fn tracks(&self) -> &[Track] {
        &self.live
    }

    /// Advances one frame. `frame_dets` should already be post-processed.
    /// Returns the boxes of confirmed tracks matched in this frame, by id.
    pub fn step(&mut self, frame_dets: &FrameDetections) -> Result<Vec<TrackOutput>> {
        if let Some(last) = self.last_frame {
            if frame_dets.frame <= last {
                return Err(Error::FrameOrder {
                    last,
                    got: frame_dets.frame,
                });
            }
        }
        self.last_frame = Some(frame_dets.frame);
        self.steps += 1;
        let frame = frame_dets.frame;
        let kalman = &self.options.kalman;

        for t in &mut self.live {
            t.kalman = kalman.predict(&t.kalman);
        }
        let predicted: Vec<BBox> = self.live.iter().map(|t| t.kalman.clamped_bbox()).collect();
        let cost = build_cost(&predicted, &frame_dets.detections);
        let assignment = gate(&self.params.t_assoc.solve(&cost), &cost, self.params.t_cost);

        let mut matched = vec![false; self.live.len()];
        for &(ti, di) in &assignment.pairs {
            let det = &frame_dets.detections[di];
            let track = &mut self.live[ti];
            track.kalman = kalman.update(&track.kalman, &det.bbox)?;
            track.hits += 1;
            track.consecutive_misses = 0;
            track.history.push(point(frame, det));
            track.state = match track.state {
                TrackState::Lost => TrackState::Confirmed,
                TrackState::Tentative if track.hits >= self.params.t_min_hit => TrackState::Confirmed,
                s => s,
            };
            matched[ti] = true;
        }

        for &ti in &assignment.unmatched_tracks {
            let track = &mut self.live[ti];
            track.consecutive_misses += 1;
            if track.state == TrackState::Confirmed {
                track.state = TrackState::Lost;
            }
            if track.consecutive_misses > self.params.t_age {
                track.state = TrackState::Deleted;
            }
        }

        for &di in &assignment.unmatched_dets {
            let det = &frame_dets.detections[di];
            let state = if self.params.t_min_hit <= 1 {
                TrackState::Confirmed
            } else {
                TrackState::Tentative
            };
            self.live.push(Track {
                id: self.next_id,
                state,
                kalman: kalman.init(&det.bbox),
                hits: 1,
                consecutive_misses: 0,
                born_at: self.steps,
                history: vec![point(frame, det)],
                emitted: Vec::new(),
            });
            matched.push(true);
            self.next_id += 1;
        }

        let in_warmup = self.options.warmup && self.steps <= u64::from(self.params.t_min_hit);
        let mut outputs = Vec::new();
        for (track, &hit) in self.live.iter_mut().zip(&matched) {
            if !hit {
                continue;
            }
            let report = track.state == TrackState::Confirmed
                || (in_warmup && track.matched_every_frame(self.steps));
            if report {
                let p = *track.history.last().expect("matched track has history");
                track.emitted.push(p);
                outputs.push(TrackOutput {
                    track_id: track.id,
                    bbox: p.bbox,
                    score: p.score,
                });
            }
        }

        let (dead, live): (Vec<Track>, Vec<Track>) = std::mem::take(&mut self.live)
            .into_iter()
            .partition(|t| t.state == TrackState::Deleted);
        self.live = live;
        self.dead.extend(dead);

        outputs.sort_by_key(|o| o.track_id);
        Ok(outputs)
    }

    /// One tracklet per track that reported at least one box, holding exactly
    /// the reported points, ordered by id.
    pub fn finalize(self) -> Vec<Tracklet> {
        let mut out: Vec<Tracklet> = self
            .dead
            .into_iter()
            .chain(self.live)
            .filter(|t| !t.emitted.is_empty())
            .map(|t| Tracklet {
                id: t.id,
                points: t.emitted,
            })
            .collect();
        out.sort_by_key(|t| t.id);
        out
    }
}

fn point(frame: u32, det: &Detection) -> TrackPoint {
    TrackPoint {
        frame,
        bbox: det.bbox,
        score: det.score,
    }
}

/// Confidence filter, NMS and one tracker step per frame, then finalize.
///
/// Frames must be strictly increasing. Frame indices missing between two
/// inputs are stepped with no detections so coasting counts them.
pub fn run_sequence(dets: &[FrameDetections], params: &HyperParams) -> Result<Vec<Tracklet>> {
    run_sequence_with(dets, params, TrackerOptions::default())
}

pub fn run_sequence_with(
    dets: &[FrameDetections],
    params: &HyperParams,
    options: TrackerOptions,
) -> Result<Vec<Tracklet>> {
    let mut tracker = Tracker::with_options(params.clone(), options)?;
    let mut prev: Option<u32> = None;
    for fd in dets {
        if let Some(p) = prev {
            if fd.frame <= p {
                return Err(Error::FrameOrder { last: p, got: fd.frame });
            }
            for gap in p + 1..fd.frame {
                tracker.step(&FrameDetections::empty(gap)?)?;
            }
        }
        prev = Some(fd.frame);
        tracker.step(&postprocess(fd, params.d_conf, params.d_nms))?;
    }
    Ok(tracker.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(x: f64, y: f64) -> Detection {
        Detection::new(BBox::new(x, y, 10.0, 20.0).unwrap(), 0.9).unwrap()
    }

    fn frames(n: u32, f: impl Fn(u32) -> Vec<Detection>) -> Vec<FrameDetections> {
        (1..=n).map(|t| FrameDetections::new(t, f(t)).unwrap()).collect()
    }

    fn no_warmup() -> TrackerOptions {
        TrackerOptions {
            warmup: false,
            ..TrackerOptions::default()
        }
    }

    fn emitted_frames(t: &Tracklet) -> Vec<u32> {
        t.frames().collect()
    }

    #[test]
    fn confirmation_after_min_hits() {
        let mut tracker = Tracker::with_options(HyperParams::default(), no_warmup()).unwrap();
        let mut first = None;
        let mut ids = Vec::new();
        for fd in frames(5, |_| vec![det(50., 50.)]) {
            let out = tracker.step(&fd).unwrap();
            if !out.is_empty() && first.is_none() {
                first = Some(fd.frame);
            }
            ids.extend(out.iter().map(|o| o.track_id));
        }
        assert_eq!(first, Some(3));
        assert_eq!(ids, vec![1, 1, 1]);
        let tracklets = tracker.finalize();
        assert_eq!(tracklets.len(), 1);
        assert_eq!(emitted_frames(&tracklets[0]), vec![3, 4, 5]);
    }

    #[test]
    fn warmup_reports_from_first_frame() {
        let dets = frames(5, |_| vec![det(50., 50.)]);
        let out = run_sequence(&dets, &HyperParams::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(emitted_frames(&out[0]), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn warmup_does_not_cover_late_births() {
        let dets = frames(8, |t| if t >= 4 { vec![det(50., 50.)] } else { vec![] });
        let out = run_sequence(&dets, &HyperParams::default()).unwrap();
        assert_eq!(emitted_frames(&out[0]), vec![6, 7, 8]);
    }

    #[test]
    fn empty_stream_reports_nothing() {
        let mut tracker = Tracker::new(HyperParams::default()).unwrap();
        for fd in frames(10, |_| vec![]) {
            assert!(tracker.step(&fd).unwrap().is_empty());
        }
        assert!(tracker.finalize().is_empty());
    }

    fn run_with_gap(gap: u32) -> Vec<Tracklet> {
        let params = HyperParams {
            t_age: 2,
            ..HyperParams::default()
        };
        let last = 5 + gap + 5;
        let dets = frames(last, |t| {
            if (6..6 + gap).contains(&t) {
                vec![]
            } else {
                vec![det(50., 50.)]
            }
        });
        run_sequence_with(&dets, &params, no_warmup()).unwrap()
    }

    #[test]
    fn gap_within_age_keeps_identity() {
        let out = run_with_gap(2);
        assert_eq!(out.len(), 1);
        assert_eq!(emitted_frames(&out[0]), vec![3, 4, 5, 8, 9, 10, 11, 12]);
    }

    #[test]
    fn gap_beyond_age_starts_new_identity() {
        let out = run_with_gap(3);
        assert_eq!(out.len(), 2);
        assert_eq!(emitted_frames(&out[0]), vec![3, 4, 5]);
        // the reborn track needs t_min_hit hits again: frames 9, 10, 11 -> first report at 11
        assert_eq!(emitted_frames(&out[1]), vec![11, 12, 13]);
        assert_ne!(out[0].id, out[1].id);
    }

    #[test]
    fn two_objects_two_tracklets() {
        let dets = frames(6, |_| vec![det(10., 10.), det(300., 300.)]);
        let out = run_sequence_with(&dets, &HyperParams::default(), no_warmup()).unwrap();
        assert_eq!(out.len(), 2);
        assert_ne!(out[0].id, out[1].id);
        assert!(out.iter().all(|t| emitted_frames(t) == vec![3, 4, 5, 6]));
    }

    #[test]
    fn no_confirmed_tracks_no_tracklets() {
        let dets = frames(2, |_| vec![det(10., 10.)]);
        let out = run_sequence_with(&dets, &HyperParams::default(), no_warmup()).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn rejects_out_of_order_and_bad_params() {
        let mut tracker = Tracker::new(HyperParams::default()).unwrap();
        tracker.step(&FrameDetections::empty(2).unwrap()).unwrap();
        assert!(matches!(
            tracker.step(&FrameDetections::empty(2).unwrap()),
            Err(Error::FrameOrder { .. })
        ));
        let bad = HyperParams {
            d_conf: 1.1,
            ..HyperParams::default()
        };
        assert!(run_sequence(&frames(1, |_| vec![]), &bad).is_err());
    }

    #[test]
    fn deterministic() {
        let dets = frames(30, |t| {
            vec![det(t as f64 * 2.0, 10.), det(200. - t as f64, 40.), det(100., 5. + t as f64)]
        });
        let a = run_sequence(&dets, &HyperParams::default()).unwrap();
        let b = run_sequence(&dets, &HyperParams::default()).unwrap();
        assert_eq!(a, b);
    }
}
