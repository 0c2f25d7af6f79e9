//! Synthetic scenarios: ground-truth tracklets moving inside an arena and
//! corrupted candidate detections derived from them.
//!
//! Randomness comes from ChaCha8 seeded with `seed`, so output is identical
//! across platforms. Detection scores follow fixed bands: true boxes draw
//! from [`TP_SCORE_BAND`], clutter from [`CLUTTER_SCORE_BAND`]. A scenario
//! without any noise emits every gt box verbatim with score 1.0.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{BBox, Detection, FrameDetections};
use crate::tracker::{TrackPoint, Tracklet};

pub const TP_SCORE_BAND: (f64, f64) = (0.6, 1.0);
pub const CLUTTER_SCORE_BAND: (f64, f64) = (0.05, 0.5);
/// Relative offset of each duplicate from its source box. Two duplicates
/// offset in opposite directions still overlap with IoU > 0.8.
pub const DUPLICATE_OFFSET: f64 = 0.025;
const MIN_JITTERED_EXTENT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Motion {
    ConstantVelocity,
    /// Heading is redrawn every `every` frames; speed is kept.
    Piecewise { every: u32 },
}

/// A track whose detections are suppressed on frames `frames[0]..=frames[1]`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Occlusion {
    pub track: u32,
    pub frames: [u32; 2],
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSpec {
    pub n_tracks: u32,
    pub n_frames: u32,
    /// Width and height in pixels.
    pub arena: [f64; 2],
    pub motion: Motion,
    /// Probability that a gt box produces no detection.
    pub fn_rate: f64,
    /// Expected clutter boxes per frame.
    pub fp_rate: f64,
    pub jitter_sigma: f64,
    /// Probability that a detected gt box emits extra overlapping candidates.
    pub duplicate_rate: f64,
    pub duplicate_count: u32,
    pub occlusion: Vec<Occlusion>,
    pub seed: u64,
    /// Box side range in pixels, for gt and clutter alike.
    pub box_size: [f64; 2],
    /// Maximum speed in pixels per frame.
    pub max_speed: f64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            n_tracks: 5,
            n_frames: 100,
            arena: [640.0, 512.0],
            motion: Motion::ConstantVelocity,
            fn_rate: 0.0,
            fp_rate: 0.0,
            jitter_sigma: 0.0,
            duplicate_rate: 0.0,
            duplicate_count: 2,
            occlusion: Vec::new(),
            seed: 0,
            box_size: [20.0, 60.0],
            max_speed: 4.0,
        }
    }
}

impl ScenarioSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: ScenarioSpec = toml::from_str(text).map_err(|e| Error::Scenario(e.message().to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn is_noise_free(&self) -> bool {
        self.fn_rate == 0.0 && self.fp_rate == 0.0 && self.jitter_sigma == 0.0 && self.duplicate_rate == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Scenario(m));
        let [w, h] = self.arena;
        if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
            return bad(format!("arena {w} x {h} has no area"));
        }
        if self.n_frames == 0 {
            return bad("n_frames must be at least 1".into());
        }
        for (key, v) in [
            ("fn_rate", self.fn_rate),
            ("duplicate_rate", self.duplicate_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{key} = {v} outside [0, 1]"));
            }
        }
        if !(self.fp_rate >= 0.0 && self.fp_rate.is_finite()) {
            return bad(format!("fp_rate = {} must be a finite non-negative rate", self.fp_rate));
        }
        if !(self.jitter_sigma >= 0.0 && self.jitter_sigma.is_finite()) {
            return bad(format!("jitter_sigma = {} must be >= 0", self.jitter_sigma));
        }
        let [lo, hi] = self.box_size;
        if !(lo > 0.0 && lo <= hi && hi < w.min(h)) {
            return bad(format!("box_size [{lo}, {hi}] must satisfy 0 < min <= max < arena side"));
        }
        if !(self.max_speed >= 0.0 && self.max_speed.is_finite()) {
            return bad(format!("max_speed = {} must be >= 0", self.max_speed));
        }
        if self.duplicate_rate > 0.0 && self.duplicate_count == 0 {
            return bad("duplicate_count must be >= 1 when duplicate_rate > 0".into());
        }
        if let Motion::Piecewise { every: 0 } = self.motion {
            return bad("piecewise motion needs every >= 1".into());
        }
        for o in &self.occlusion {
            if o.track == 0 || o.track > self.n_tracks || o.frames[0] > o.frames[1] {
                return bad(format!("invalid occlusion of track {} over {:?}", o.track, o.frames));
            }
        }
        Ok(())
    }

    fn occluded(&self, track: u32, frame: u32) -> bool {
        self.occlusion
            .iter()
            .any(|o| o.track == track && (o.frames[0]..=o.frames[1]).contains(&frame))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub gt: Vec<Tracklet>,
    /// One entry per frame `1..=n_frames`, possibly empty.
    pub dets: Vec<FrameDetections>,
    /// Clutter boxes drawn over the whole scenario.
    pub clutter: usize,
}

struct Mover {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    vx: f64,
    vy: f64,
}

impl Mover {
    fn advance(&mut self, arena: [f64; 2]) {
        self.x += self.vx;
        self.y += self.vy;
        reflect(&mut self.x, &mut self.vx, arena[0] - self.w);
        reflect(&mut self.y, &mut self.vy, arena[1] - self.h);
    }

    fn bbox(&self) -> BBox {
        BBox::new(self.x, self.y, self.w, self.h).expect("mover keeps a positive extent")
    }
}

/// Folds `pos` back into `[0, max]`, flipping `vel` on each bounce.
fn reflect(pos: &mut f64, vel: &mut f64, max: f64) {
    while *pos < 0.0 || *pos > max {
        if *pos < 0.0 {
            *pos = -*pos;
        } else {
            *pos = 2.0 * max - *pos;
        }
        *vel = -*vel;
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn heading(rng: &mut ChaCha8Rng, speed: f64) -> (f64, f64) {
    let a = rng.random_range(0.0..std::f64::consts::TAU);
    (speed * a.cos(), speed * a.sin())
}

pub fn generate(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let size = (spec.box_size[0], spec.box_size[1]);
    let mut movers: Vec<Mover> = (0..spec.n_tracks)
        .map(|_| {
            let w = uniform(&mut rng, size);
            let h = uniform(&mut rng, size);
            let x = uniform(&mut rng, (0.0, spec.arena[0] - w));
            let y = uniform(&mut rng, (0.0, spec.arena[1] - h));
            let speed = uniform(&mut rng, (0.0, spec.max_speed));
            let (vx, vy) = heading(&mut rng, speed);
            Mover { x, y, w, h, vx, vy }
        })
        .collect();

    let jitter = Normal::new(0.0, spec.jitter_sigma).map_err(|e| Error::Scenario(e.to_string()))?;
    let clutter_count = (spec.fp_rate > 0.0)
        .then(|| Poisson::new(spec.fp_rate).map_err(|e| Error::Scenario(e.to_string())))
        .transpose()?;
    let noise_free = spec.is_noise_free();

    let mut points: Vec<Vec<TrackPoint>> = (0..spec.n_tracks).map(|_| Vec::new()).collect();
    let mut dets = Vec::with_capacity(spec.n_frames as usize);
    let mut clutter = 0usize;
    for frame in 1..=spec.n_frames {
        if frame > 1 {
            for m in &mut movers {
                if let Motion::Piecewise { every } = spec.motion {
                    if (frame - 1) % every == 0 {
                        let speed = m.vx.hypot(m.vy);
                        (m.vx, m.vy) = heading(&mut rng, speed);
                    }
                }
                m.advance(spec.arena);
            }
        }
        let mut frame_dets = Vec::new();
        for (i, m) in movers.iter().enumerate() {
            let gt_box = m.bbox();
            points[i].push(TrackPoint {
                frame,
                bbox: gt_box,
                score: 1.0,
            });
            let missed = spec.fn_rate > 0.0 && rng.random_bool(spec.fn_rate);
            if missed || spec.occluded(i as u32 + 1, frame) {
                continue;
            }
            if noise_free {
                frame_dets.push(Detection::new(gt_box, 1.0)?);
                continue;
            }
            let b = if spec.jitter_sigma > 0.0 {
                BBox::new(
                    gt_box.x + jitter.sample(&mut rng),
                    gt_box.y + jitter.sample(&mut rng),
                    (gt_box.w + jitter.sample(&mut rng)).max(MIN_JITTERED_EXTENT),
                    (gt_box.h + jitter.sample(&mut rng)).max(MIN_JITTERED_EXTENT),
                )?
            } else {
                gt_box
            };
            let score = uniform(&mut rng, TP_SCORE_BAND);
            frame_dets.push(Detection::new(b, score)?);
            if spec.duplicate_rate > 0.0 && rng.random_bool(spec.duplicate_rate) {
                for _ in 0..spec.duplicate_count {
                    let sx = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    let sy = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    let dup = BBox::new(
                        b.x + sx * DUPLICATE_OFFSET * b.w,
                        b.y + sy * DUPLICATE_OFFSET * b.h,
                        b.w,
                        b.h,
                    )?;
                    let dup_score = score * uniform(&mut rng, (0.7, 0.95));
                    frame_dets.push(Detection::new(dup, dup_score)?);
                }
            }
        }
        if let Some(p) = &clutter_count {
            let n = p.sample(&mut rng) as usize;
            clutter += n;
            for _ in 0..n {
                let w = uniform(&mut rng, size);
                let h = uniform(&mut rng, size);
                let x = uniform(&mut rng, (0.0, spec.arena[0] - w));
                let y = uniform(&mut rng, (0.0, spec.arena[1] - h));
                let score = uniform(&mut rng, CLUTTER_SCORE_BAND);
                frame_dets.push(Detection::new(BBox::new(x, y, w, h)?, score)?);
            }
        }
        dets.push(FrameDetections {
            frame,
            detections: frame_dets,
        });
    }
    let gt = points
        .into_iter()
        .enumerate()
        .map(|(i, p)| Tracklet::new(i as u32 + 1, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(Scenario { gt, dets, clutter })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detpost::nms;

    #[test]
    fn noise_free_dets_equal_gt() {
        let spec = ScenarioSpec {
            n_frames: 50,
            ..ScenarioSpec::default()
        };
        let s = generate(&spec).unwrap();
        assert_eq!(s.dets.len(), 50);
        for fd in &s.dets {
            assert_eq!(fd.detections.len(), 5);
            for (d, t) in fd.detections.iter().zip(&s.gt) {
                let p = t.points.iter().find(|p| p.frame == fd.frame).unwrap();
                assert_eq!((d.bbox, d.score), (p.bbox, 1.0));
            }
        }
    }

    #[test]
    fn same_seed_same_output() {
        let spec = ScenarioSpec {
            fn_rate: 0.1,
            fp_rate: 1.0,
            jitter_sigma: 2.0,
            duplicate_rate: 0.3,
            motion: Motion::Piecewise { every: 7 },
            seed: 42,
            ..ScenarioSpec::default()
        };
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = ScenarioSpec { seed: 43, ..spec.clone() };
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn clutter_count_follows_poisson() {
        let spec = ScenarioSpec {
            n_tracks: 0,
            n_frames: 500,
            fp_rate: 2.0,
            seed: 7,
            ..ScenarioSpec::default()
        };
        let s = generate(&spec).unwrap();
        let total: usize = s.dets.iter().map(|f| f.len()).sum();
        assert_eq!(total, s.clutter);
        let sigma = 1000f64.sqrt();
        assert!((total as f64 - 1000.0).abs() <= 3.0 * sigma, "{total}");
        assert!(s.dets.iter().flat_map(|f| &f.detections).all(|d| {
            (CLUTTER_SCORE_BAND.0..CLUTTER_SCORE_BAND.1).contains(&d.score)
        }));
    }

    #[test]
    fn boxes_stay_inside_arena() {
        let spec = ScenarioSpec {
            n_tracks: 12,
            n_frames: 400,
            max_speed: 25.0,
            motion: Motion::Piecewise { every: 5 },
            arena: [200.0, 150.0],
            box_size: [10.0, 40.0],
            seed: 3,
            ..ScenarioSpec::default()
        };
        for t in generate(&spec).unwrap().gt {
            for p in &t.points {
                let b = p.bbox;
                assert!(b.x >= 0.0 && b.y >= 0.0 && b.right() <= 200.0 && b.bottom() <= 150.0, "{b:?}");
            }
        }
    }

    #[test]
    fn duplicates_collapse_under_nms() {
        let spec = ScenarioSpec {
            n_tracks: 4,
            n_frames: 60,
            duplicate_rate: 1.0,
            duplicate_count: 3,
            arena: [2000.0, 2000.0],
            seed: 11,
            ..ScenarioSpec::default()
        };
        let s = generate(&spec).unwrap();
        for fd in &s.dets {
            let kept = nms(fd, 0.5);
            let gt_here = s.gt.iter().filter(|t| t.frames().any(|f| f == fd.frame)).count();
            // movers may overlap each other; only frames with separated gt are exact
            let boxes: Vec<BBox> = s.gt.iter().map(|t| t.points[fd.frame as usize - 1].bbox).collect();
            let separated = boxes.iter().enumerate().all(|(i, a)| boxes[i + 1..].iter().all(|b| a.iou(b) == 0.0));
            if separated {
                assert_eq!(kept.len(), gt_here, "frame {}", fd.frame);
            }
        }
    }

    #[test]
    fn occlusion_removes_detections_only() {
        let spec = ScenarioSpec {
            n_tracks: 2,
            n_frames: 30,
            occlusion: vec![Occlusion {
                track: 2,
                frames: [10, 14],
            }],
            ..ScenarioSpec::default()
        };
        let s = generate(&spec).unwrap();
        assert_eq!(s.gt[1].len(), 30);
        for fd in &s.dets {
            let expected = if (10..=14).contains(&fd.frame) { 1 } else { 2 };
            assert_eq!(fd.len(), expected);
        }
    }

    #[test]
    fn infeasible_specs_are_rejected() {
        for spec in [
            ScenarioSpec {
                arena: [0.0, 100.0],
                ..ScenarioSpec::default()
            },
            ScenarioSpec {
                n_frames: 0,
                ..ScenarioSpec::default()
            },
            ScenarioSpec {
                fn_rate: 1.5,
                ..ScenarioSpec::default()
            },
            ScenarioSpec {
                jitter_sigma: -1.0,
                ..ScenarioSpec::default()
            },
        ] {
            assert!(matches!(generate(&spec), Err(Error::Scenario(_))), "{spec:?}");
        }
    }

    #[test]
    fn spec_parses_from_toml() {
        let spec = ScenarioSpec::parse(
            "n_tracks = 3\nn_frames = 20\nseed = 9\nmotion = { kind = \"piecewise\", every = 4 }\n\
             occlusion = [{ track = 1, frames = [5, 8] }]\n",
        )
        .unwrap();
        assert_eq!(spec.motion, Motion::Piecewise { every: 4 });
        assert_eq!(spec.occlusion.len(), 1);
        assert!(ScenarioSpec::parse("n_trakcs = 3\n").is_err());
    }
}
