//! MOTChallenge text files, frame-ordering repair and run configuration.
//!
//! Every box file uses the 10-column layout
//! `frame,id,bb_left,bb_top,bb_width,bb_height,conf,x,y,z`. Detection files
//! carry `id = -1`; ground-truth and result files carry positive ids. World
//! coordinates are written as `-1` and ignored on input.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::assoc::AssocMethod;
use crate::error::{Error, Result};
use crate::geometry::{BBox, Detection, FrameDetections};
use crate::motion::KalmanConfig;
use crate::motmetrics::{MotpConvention, DEFAULT_IOU_THRESHOLD};
use crate::params::{HyperParams, MotionModelKind};
use crate::tracker::{TrackPoint, Tracklet, TrackerOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotKind {
    Det,
    Gt,
    Result,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MotFile {
    Detections(Vec<FrameDetections>),
    Tracklets(Vec<Tracklet>),
}

struct Row {
    frame: u32,
    id: i64,
    bbox: BBox,
    conf: f64,
}

fn parse_row(line: &str, origin: &str, lineno: usize) -> Result<Row> {
    let err = |msg: String| Error::Parse {
        path: origin.to_string(),
        line: lineno,
        msg,
    };
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() < 7 {
        return Err(err(format!("expected at least 7 comma-separated fields, found {}", fields.len())));
    }
    let num = |i: usize, name: &str| -> Result<f64> {
        fields[i]
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| err(format!("{name} `{}` is not a finite number", fields[i])))
    };
    let frame = num(0, "frame")?;
    if frame.fract() != 0.0 || frame < 1.0 || frame > u32::MAX as f64 {
        return Err(err(format!("frame `{}` must be a positive integer", fields[0])));
    }
    let id = num(1, "id")?;
    if id.fract() != 0.0 {
        return Err(err(format!("id `{}` must be an integer", fields[1])));
    }
    let (x, y, w, h) = (num(2, "bb_left")?, num(3, "bb_top")?, num(4, "bb_width")?, num(5, "bb_height")?);
    if w <= 0.0 || h <= 0.0 {
        return Err(err(format!("box width and height must be positive, got {w} x {h}")));
    }
    let bbox = BBox::new(x, y, w, h).map_err(|e| err(e.to_string()))?;
    Ok(Row {
        frame: frame as u32,
        id: id as i64,
        bbox,
        conf: num(6, "conf")?,
    })
}

/// Parses file contents; `origin` names the source in error messages.
pub fn parse_mot_str(text: &str, kind: MotKind, origin: &str) -> Result<MotFile> {
    let rows = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_row(l, origin, i + 1).map(|r| (i + 1, r)));

    match kind {
        MotKind::Det => {
            let mut frames: BTreeMap<u32, Vec<Detection>> = BTreeMap::new();
            for row in rows {
                let (lineno, r) = row?;
                let det = Detection::new(r.bbox, r.conf).map_err(|e| Error::Parse {
                    path: origin.to_string(),
                    line: lineno,
                    msg: e.to_string(),
                })?;
                frames.entry(r.frame).or_default().push(det);
            }
            Ok(MotFile::Detections(
                frames
                    .into_iter()
                    .map(|(frame, detections)| FrameDetections { frame, detections })
                    .collect(),
            ))
        }
        MotKind::Gt | MotKind::Result => {
            let mut tracks: BTreeMap<u32, BTreeMap<u32, TrackPoint>> = BTreeMap::new();
            for row in rows {
                let (lineno, r) = row?;
                let err = |msg: String| Error::Parse {
                    path: origin.to_string(),
                    line: lineno,
                    msg,
                };
                if r.id < 1 || r.id > u32::MAX as i64 {
                    return Err(err(format!("track id must be positive, got {}", r.id)));
                }
                let id = r.id as u32;
                let point = TrackPoint {
                    frame: r.frame,
                    bbox: r.bbox,
                    score: r.conf,
                };
                if tracks.entry(id).or_default().insert(r.frame, point).is_some() {
                    return Err(err(format!("track {id} appears twice in frame {}", r.frame)));
                }
            }
            tracks
                .into_iter()
                .map(|(id, pts)| Tracklet::new(id, pts.into_values().collect()))
                .collect::<Result<Vec<_>>>()
                .map(MotFile::Tracklets)
        }
    }
}

pub fn parse_mot_file(path: &Path, kind: MotKind) -> Result<MotFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mot_str(&text, kind, &path.display().to_string())
}

pub fn read_detections(path: &Path) -> Result<Vec<FrameDetections>> {
    match parse_mot_file(path, MotKind::Det)? {
        MotFile::Detections(d) => Ok(d),
        MotFile::Tracklets(_) => unreachable!(),
    }
}

pub fn read_tracklets(path: &Path) -> Result<Vec<Tracklet>> {
    match parse_mot_file(path, MotKind::Gt)? {
        MotFile::Tracklets(t) => Ok(t),
        MotFile::Detections(_) => unreachable!(),
    }
}

fn push_row(out: &mut String, frame: u32, id: i64, b: &BBox, conf: f64) {
    let _ = writeln!(
        out,
        "{frame},{id},{:.6},{:.6},{:.6},{:.6},{:.6},-1,-1,-1",
        b.x, b.y, b.w, b.h, conf
    );
}

pub fn format_detections(frames: &[FrameDetections]) -> String {
    let mut out = String::new();
    for fd in frames {
        for d in &fd.detections {
            push_row(&mut out, fd.frame, -1, &d.bbox, d.score);
        }
    }
    out
}

/// Rows ordered by frame, then id.
pub fn format_tracklets(tracklets: &[Tracklet]) -> String {
    let mut rows: Vec<(u32, u32, &TrackPoint)> = tracklets
        .iter()
        .flat_map(|t| t.points.iter().map(move |p| (p.frame, t.id, p)))
        .collect();
    rows.sort_by_key(|&(f, id, _)| (f, id));
    let mut out = String::new();
    for (f, id, p) in rows {
        push_row(&mut out, f, id as i64, &p.bbox, p.score);
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_detections(path: &Path, frames: &[FrameDetections]) -> Result<()> {
    write_text(path, &format_detections(frames))
}

pub fn write_tracklets(path: &Path, tracklets: &[Tracklet]) -> Result<()> {
    write_text(path, &format_tracklets(tracklets))
}

// ---------------------------------------------------------------------------
// Frame ordering

fn frame_number(name: &str) -> Result<u64> {
    let file = Path::new(name).file_name().and_then(|f| f.to_str()).unwrap_or(name);
    let stem = Path::new(file).file_stem().and_then(|s| s.to_str()).unwrap_or(file);
    let digits = stem.len() - stem.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    if digits == 0 {
        return Err(Error::NonNumericStem(name.to_string()));
    }
    stem[stem.len() - digits..]
        .parse()
        .map_err(|_| Error::NonNumericStem(name.to_string()))
}

/// Sorts names by the integer value of the trailing digits of their stem.
pub fn order_frames<S: AsRef<str>>(names: &[S]) -> Result<Vec<String>> {
    let mut keyed = Vec::with_capacity(names.len());
    for n in names {
        keyed.push((frame_number(n.as_ref())?, n.as_ref().to_string()));
    }
    keyed.sort();
    for w in keyed.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::DuplicateFrameNumber(w[0].1.clone(), w[1].1.clone()));
        }
    }
    Ok(keyed.into_iter().map(|(_, n)| n).collect())
}

/// Maps each name to a zero-padded sequential name (`000001.ext`, ...)
/// in numeric frame order, so lexicographic and numeric order agree.
pub fn rename_map<S: AsRef<str>>(names: &[S]) -> Result<Vec<(String, String)>> {
    let ordered = order_frames(names)?;
    let width = ordered.len().to_string().len().max(6);
    Ok(ordered
        .into_iter()
        .enumerate()
        .map(|(i, old)| {
            let ext = Path::new(&old)
                .extension()
                .and_then(|e| e.to_str())
                .map(|e| format!(".{e}"))
                .unwrap_or_default();
            let new = format!("{:0width$}{ext}", i + 1);
            (old, new)
        })
        .collect())
}

/// Renames files inside `dir` according to `map`, through temporary names
/// so that overlapping old and new names cannot collide.
pub fn apply_rename_map(dir: &Path, map: &[(String, String)]) -> Result<()> {
    let staged: Vec<(PathBuf, PathBuf)> = map
        .iter()
        .enumerate()
        .map(|(i, (_, new))| (dir.join(format!(".motune-rename-{i}")), dir.join(new)))
        .collect();
    for ((old, _), (tmp, _)) in map.iter().zip(&staged) {
        let src = dir.join(old);
        fs::rename(&src, tmp).map_err(|e| Error::io(src, e))?;
    }
    for (tmp, dst) in &staged {
        fs::rename(tmp, dst).map_err(|e| Error::io(dst, e))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Run configuration

/// Hyperparameters plus evaluation and tracker settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: HyperParams,
    pub iou_thr: f64,
    pub motp_convention: MotpConvention,
    pub warmup: bool,
    pub kalman: KalmanConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: HyperParams::default(),
            iou_thr: DEFAULT_IOU_THRESHOLD,
            motp_convention: MotpConvention::default(),
            warmup: true,
            kalman: KalmanConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn tracker_options(&self) -> TrackerOptions {
        TrackerOptions {
            warmup: self.warmup,
            kalman: self.kalman.clone(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    d_train: Option<i64>,
    d_infer: Option<i64>,
    d_nms: Option<f64>,
    d_conf: Option<f64>,
    t_mm: Option<String>,
    t_cost: Option<f64>,
    t_assoc: Option<String>,
    t_min_hit: Option<i64>,
    t_age: Option<i64>,
    detection_set: Option<String>,
    iou_thr: Option<f64>,
    motp_convention: Option<String>,
    warmup: Option<bool>,
    measurement_noise: Option<Vec<f64>>,
    process_noise: Option<Vec<f64>>,
    initial_covariance: Option<Vec<f64>>,
}

fn positive_u32(key: &str, v: Option<i64>, default: u32) -> Result<u32> {
    match v {
        None => Ok(default),
        Some(n) if n >= 1 && n <= u32::MAX as i64 => Ok(n as u32),
        Some(n) => Err(Error::out_of_range(key, n, "positive integer")),
    }
}

fn diagonal<const N: usize>(key: &str, v: Option<Vec<f64>>, default: [f64; N], allow_zero: bool) -> Result<[f64; N]> {
    let Some(v) = v else { return Ok(default) };
    let range = if allow_zero {
        "list of non-negative numbers"
    } else {
        "list of positive numbers"
    };
    let ok = v.iter().all(|x| x.is_finite() && (*x > 0.0 || (allow_zero && *x == 0.0)));
    let arr: [f64; N] = v
        .clone()
        .try_into()
        .map_err(|_| Error::out_of_range(key, format!("{v:?}"), range))?;
    if !ok {
        return Err(Error::out_of_range(key, format!("{v:?}"), range));
    }
    Ok(arr)
}

/// Parses a flat TOML configuration. Missing keys take their defaults;
/// unknown keys and out-of-range values are rejected by name.
pub fn parse_config(text: &str, origin: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_string(),
        line: e
            .span()
            .map(|s| text[..s.start.min(text.len())].lines().count().max(1))
            .unwrap_or(0),
        msg: e.message().to_string(),
    })?;
    let d = RunConfig::default();
    let dp = &d.params;
    let params = HyperParams {
        d_train: positive_u32("d_train", raw.d_train, dp.d_train)?,
        d_infer: positive_u32("d_infer", raw.d_infer, dp.d_infer)?,
        d_nms: raw.d_nms.unwrap_or(dp.d_nms),
        d_conf: raw.d_conf.unwrap_or(dp.d_conf),
        t_mm: match raw.t_mm {
            None => dp.t_mm,
            Some(s) => s
                .parse::<MotionModelKind>()
                .map_err(|_| Error::out_of_range("t_mm", &s, "kalman"))?,
        },
        t_cost: raw.t_cost.unwrap_or(dp.t_cost),
        t_assoc: match raw.t_assoc {
            None => dp.t_assoc,
            Some(s) => s
                .parse::<AssocMethod>()
                .map_err(|_| Error::out_of_range("t_assoc", &s, "hungarian | greedy"))?,
        },
        t_min_hit: positive_u32("t_min_hit", raw.t_min_hit, dp.t_min_hit)?,
        t_age: positive_u32("t_age", raw.t_age, dp.t_age)?,
        detection_set: raw.detection_set,
    };
    params.validate()?;
    let iou_thr = raw.iou_thr.unwrap_or(d.iou_thr);
    if !(iou_thr > 0.0 && iou_thr <= 1.0) {
        return Err(Error::out_of_range("iou_thr", iou_thr, "(0, 1]"));
    }
    let motp_convention = match raw.motp_convention {
        None => d.motp_convention,
        Some(s) => s
            .parse()
            .map_err(|_| Error::out_of_range("motp_convention", &s, "distance | percent"))?,
    };
    let kalman = KalmanConfig {
        measurement_noise: diagonal("measurement_noise", raw.measurement_noise, d.kalman.measurement_noise, false)?,
        process_noise: diagonal("process_noise", raw.process_noise, d.kalman.process_noise, true)?,
        initial_covariance: diagonal("initial_covariance", raw.initial_covariance, d.kalman.initial_covariance, false)?,
    };
    Ok(RunConfig {
        params,
        iou_thr,
        motp_convention,
        warmup: raw.warmup.unwrap_or(d.warmup),
        kalman,
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, &path.display().to_string())
}

fn toml_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
    format!("[{}]", items.join(", "))
}

/// Every effective setting as a config document that [`parse_config`]
/// reads back to the same value.
pub fn format_config(c: &RunConfig) -> String {
    let p = &c.params;
    let mut out = String::new();
    let _ = writeln!(out, "d_train = {}", p.d_train);
    let _ = writeln!(out, "d_infer = {}", p.d_infer);
    let _ = writeln!(out, "d_nms = {:?}", p.d_nms);
    let _ = writeln!(out, "d_conf = {:?}", p.d_conf);
    let _ = writeln!(out, "t_mm = \"{}\"", p.t_mm);
    let _ = writeln!(out, "t_cost = {:?}", p.t_cost);
    let _ = writeln!(out, "t_assoc = \"{}\"", p.t_assoc);
    let _ = writeln!(out, "t_min_hit = {}", p.t_min_hit);
    let _ = writeln!(out, "t_age = {}", p.t_age);
    if let Some(set) = &p.detection_set {
        let _ = writeln!(out, "detection_set = {}", toml::Value::String(set.clone()));
    }
    let _ = writeln!(out, "iou_thr = {:?}", c.iou_thr);
    let _ = writeln!(out, "motp_convention = \"{}\"", c.motp_convention);
    let _ = writeln!(out, "warmup = {}", c.warmup);
    let _ = writeln!(out, "measurement_noise = {}", toml_list(&c.kalman.measurement_noise));
    let _ = writeln!(out, "process_noise = {}", toml_list(&c.kalman.process_noise));
    let _ = writeln!(out, "initial_covariance = {}", toml_list(&c.kalman.initial_covariance));
    out
}

pub fn write_config(path: &Path, c: &RunConfig) -> Result<()> {
    write_text(path, &format_config(c))
}

/// Path of the manifest written next to a result file.
pub fn manifest_path(result: &Path) -> PathBuf {
    let mut s = result.as_os_str().to_owned();
    s.push(".manifest.toml");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_line_maps_fields() {
        let MotFile::Detections(d) = parse_mot_str("1,-1,10,20,5,5,0.9,-1,-1,-1\n", MotKind::Det, "t").unwrap() else {
            panic!()
        };
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].frame, 1);
        assert_eq!(d[0].detections[0].score, 0.9);
        assert_eq!(d[0].detections[0].bbox, BBox::new(10.0, 20.0, 5.0, 5.0).unwrap());
    }

    #[test]
    fn gt_line_extends_tracklet() {
        let text = "3,7,0,0,2,2,1,-1,-1,-1\n1,7,0,0,2,2,1,-1,-1,-1\n";
        let MotFile::Tracklets(t) = parse_mot_str(text, MotKind::Gt, "t").unwrap() else { panic!() };
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].id, 7);
        assert_eq!(t[0].frames().collect::<Vec<_>>(), [1, 3]);
    }

    #[test]
    fn frames_sort_numerically() {
        let text = "10,-1,0,0,1,1,0.5\n2,-1,0,0,1,1,0.5\n";
        let MotFile::Detections(d) = parse_mot_str(text, MotKind::Det, "t").unwrap() else { panic!() };
        assert_eq!(d.iter().map(|f| f.frame).collect::<Vec<_>>(), [2, 10]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("1,-1,0,0,1,1,0.5\n1,-1,0,0\n", MotKind::Det, 2),
            ("1,-1,0,0,1,1,0.5\n\n1,-1,0,0,0,1,0.5\n", MotKind::Det, 3),
            ("1,-1,0,0,1,-2,0.5\n", MotKind::Det, 1),
            ("1,-1,0,0,1,1,abc\n", MotKind::Det, 1),
            ("1,-1,0,0,1,1,1.5\n", MotKind::Det, 1),
            ("1,2,0,0,1,1,1\n1,2,5,5,1,1,1\n", MotKind::Gt, 2),
            ("1,0,0,0,1,1,1\n", MotKind::Result, 1),
            ("0,1,0,0,1,1,1\n", MotKind::Gt, 1),
        ];
        for (text, kind, line) in cases {
            match parse_mot_str(text, kind, "f.txt") {
                Err(Error::Parse { line: l, path, .. }) => {
                    assert_eq!((l, path.as_str()), (line, "f.txt"), "{text:?}")
                }
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn order_frames_is_numeric() {
        assert_eq!(order_frames(&["img_2", "img_10", "img_1"]).unwrap(), ["img_1", "img_2", "img_10"]);
        let padded = ["f0001.png", "f0002.png", "f0010.png"];
        assert_eq!(order_frames(&padded).unwrap(), padded);
        assert!(matches!(order_frames(&["a1", "cover"]), Err(Error::NonNumericStem(n)) if n == "cover"));
        assert!(matches!(order_frames(&["a01", "b1"]), Err(Error::DuplicateFrameNumber(..))));
    }

    #[test]
    fn rename_map_pads() {
        let m = rename_map(&["img_10.jpg", "img_2.jpg"]).unwrap();
        assert_eq!(m, [("img_2.jpg".into(), "000001.jpg".into()), ("img_10.jpg".into(), "000002.jpg".into())]);
    }

    #[test]
    fn empty_config_is_default() {
        assert_eq!(parse_config("", "c").unwrap(), RunConfig::default());
    }

    #[test]
    fn config_overrides_single_key() {
        let c = parse_config("t_cost = 0.2\n", "c").unwrap();
        assert_eq!(
            c.params,
            HyperParams {
                t_cost: 0.2,
                ..HyperParams::default()
            }
        );
    }

    #[test]
    fn config_range_errors_name_the_key() {
        for (text, key) in [
            ("d_conf = 1.5", "d_conf"),
            ("t_age = -3", "t_age"),
            ("t_min_hit = 0", "t_min_hit"),
            ("iou_thr = 0.0", "iou_thr"),
            ("t_assoc = \"auction\"", "t_assoc"),
            ("process_noise = [1, 2]", "process_noise"),
        ] {
            let e = parse_config(text, "c").unwrap_err().to_string();
            assert!(e.contains(key), "{text}: {e}");
        }
        let e = parse_config("t_agee = 3", "c").unwrap_err().to_string();
        assert!(e.contains("t_agee"), "{e}");
    }

    #[test]
    fn config_round_trips_bytewise() {
        let c = RunConfig {
            params: HyperParams {
                d_conf: 1e-10,
                t_assoc: AssocMethod::Greedy,
                detection_set: Some("yolo \"v8\"".into()),
                ..HyperParams::default()
            },
            warmup: false,
            motp_convention: MotpConvention::Percent,
            ..RunConfig::default()
        };
        let text = format_config(&c);
        let back = parse_config(&text, "m").unwrap();
        assert_eq!(back, c);
        assert_eq!(format_config(&back), text);
    }
}
