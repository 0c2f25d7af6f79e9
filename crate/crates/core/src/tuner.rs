//! Stage-wise, coordinate-wise hyperparameter tuning.
//!
//! Each axis is swept over an explicit grid while every other parameter is
//! frozen. A grid point replaces the incumbent only when its report ranks
//! strictly better (update); otherwise the incumbent is kept (reset).
//! Axes run in plan order, detection axes before tracking axes.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Deserialize;

use crate::assoc::AssocMethod;
use crate::detmetrics::{evaluate_detections, gt_by_frame, DetSummary};
use crate::detpost::postprocess;
use crate::error::{Error, Result};
use crate::geometry::{BBox, FrameDetections};
use crate::motmetrics::{evaluate_counts, motp_percent_to_distance, MotCounts, MotReport, MotpConvention};
use crate::params::{HyperParams, MotionModelKind};
use crate::tracker::{run_sequence_with, Tracklet, TrackerOptions};

const MOTA_TOLERANCE: f64 = 1e-9;

/// Name of the detection set used when `detection_set` is unset.
pub const DEFAULT_DETECTION_SET: &str = "default";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AxisName {
    DNms,
    DConf,
    DTrain,
    DInfer,
    DetectionSet,
    TMm,
    TCost,
    TAssoc,
    TMinHit,
    TAge,
}

impl AxisName {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisName::DNms => "d_nms",
            AxisName::DConf => "d_conf",
            AxisName::DTrain => "d_train",
            AxisName::DInfer => "d_infer",
            AxisName::DetectionSet => "detection_set",
            AxisName::TMm => "t_mm",
            AxisName::TCost => "t_cost",
            AxisName::TAssoc => "t_assoc",
            AxisName::TMinHit => "t_min_hit",
            AxisName::TAge => "t_age",
        }
    }

    pub fn default_objective(self) -> Objective {
        match self {
            AxisName::DNms | AxisName::DConf | AxisName::DTrain | AxisName::DInfer | AxisName::DetectionSet => {
                Objective::Detection
            }
            _ => Objective::Tracking,
        }
    }

    /// Current value of this axis in `params`.
    pub fn value_of(self, params: &HyperParams) -> AxisValue {
        match self {
            AxisName::DNms => AxisValue::Num(params.d_nms),
            AxisName::DConf => AxisValue::Num(params.d_conf),
            AxisName::DTrain => AxisValue::Num(params.d_train as f64),
            AxisName::DInfer => AxisValue::Num(params.d_infer as f64),
            AxisName::DetectionSet => AxisValue::Text(
                params
                    .detection_set
                    .clone()
                    .unwrap_or_else(|| DEFAULT_DETECTION_SET.to_string()),
            ),
            AxisName::TMm => AxisValue::Text(params.t_mm.to_string()),
            AxisName::TCost => AxisValue::Num(params.t_cost),
            AxisName::TAssoc => AxisValue::Text(params.t_assoc.to_string()),
            AxisName::TMinHit => AxisValue::Num(params.t_min_hit as f64),
            AxisName::TAge => AxisValue::Num(params.t_age as f64),
        }
    }

    /// Returns `params` with this axis set to `value`, validated.
    pub fn apply(self, params: &HyperParams, value: &AxisValue) -> Result<HyperParams> {
        let key = self.as_str();
        let bad = |range: &'static str| Error::out_of_range(key, value, range);
        let mut p = params.clone();
        match (self, value) {
            (AxisName::DNms, AxisValue::Num(v)) => p.d_nms = *v,
            (AxisName::DConf, AxisValue::Num(v)) => p.d_conf = *v,
            (AxisName::TCost, AxisValue::Num(v)) => p.t_cost = *v,
            (AxisName::DTrain | AxisName::DInfer | AxisName::TMinHit | AxisName::TAge, AxisValue::Num(v)) => {
                if v.fract() != 0.0 || *v < 1.0 || *v > u32::MAX as f64 {
                    return Err(bad("positive integer"));
                }
                let n = *v as u32;
                match self {
                    AxisName::DTrain => p.d_train = n,
                    AxisName::DInfer => p.d_infer = n,
                    AxisName::TMinHit => p.t_min_hit = n,
                    _ => p.t_age = n,
                }
            }
            (AxisName::TAssoc, AxisValue::Text(s)) => {
                p.t_assoc = s.parse::<AssocMethod>().map_err(|_| bad("hungarian | greedy"))?
            }
            (AxisName::TMm, AxisValue::Text(s)) => {
                p.t_mm = s.parse::<MotionModelKind>().map_err(|_| bad("kalman"))?
            }
            (AxisName::DetectionSet, AxisValue::Text(s)) => {
                p.detection_set = (s != DEFAULT_DETECTION_SET).then(|| s.clone())
            }
            (AxisName::TAssoc | AxisName::TMm | AxisName::DetectionSet, AxisValue::Num(_)) => {
                return Err(bad("a name"))
            }
            (_, AxisValue::Text(_)) => return Err(bad("a number")),
        }
        p.validate()?;
        Ok(p)
    }
}

impl fmt::Display for AxisName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AxisName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "d_nms" => AxisName::DNms,
            "d_conf" => AxisName::DConf,
            "d_train" => AxisName::DTrain,
            "d_infer" => AxisName::DInfer,
            "detection_set" => AxisName::DetectionSet,
            "t_mm" => AxisName::TMm,
            "t_cost" => AxisName::TCost,
            "t_assoc" => AxisName::TAssoc,
            "t_min_hit" => AxisName::TMinHit,
            "t_age" => AxisName::TAge,
            other => return Err(Error::Plan(format!("unknown axis `{other}`"))),
        })
    }
}

impl<'de> Deserialize<'de> for AxisName {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum AxisValue {
    Num(f64),
    Text(String),
}

impl fmt::Display for AxisValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisValue::Num(v) => write!(f, "{v}"),
            AxisValue::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for AxisValue {
    fn from(v: f64) -> Self {
        AxisValue::Num(v)
    }
}

impl From<&str> for AxisValue {
    fn from(s: &str) -> Self {
        AxisValue::Text(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Detection,
    Tracking,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Detection => "detection",
            Objective::Tracking => "tracking",
        }
    }
}

/// One hyperparameter and the candidate values to try, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub name: AxisName,
    pub grid: Vec<AxisValue>,
    pub objective: Objective,
}

impl SweepAxis {
    /// Rejects an empty grid and values outside the parameter's legal range.
    pub fn new(name: AxisName, grid: Vec<AxisValue>) -> Result<Self> {
        Self::with_objective(name, grid, name.default_objective())
    }

    pub fn with_objective(name: AxisName, grid: Vec<AxisValue>, objective: Objective) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::Plan(format!("axis `{name}` has an empty grid")));
        }
        let base = HyperParams::default();
        for v in &grid {
            name.apply(&base, v)?;
        }
        Ok(SweepAxis { name, grid, objective })
    }

    pub fn numeric(name: AxisName, grid: &[f64]) -> Result<Self> {
        Self::new(name, grid.iter().map(|&v| AxisValue::Num(v)).collect())
    }
}

/// Outcome of evaluating one parameter set under one objective.
#[derive(Debug, Clone, PartialEq)]
pub enum StageReport {
    Detection(DetSummary),
    Tracking(MotReport),
}

impl StageReport {
    /// `Greater` when `self` ranks better than `other`. Reports of different
    /// objectives are incomparable and rank `Equal`.
    pub fn rank(&self, other: &StageReport) -> Ordering {
        match (self, other) {
            (StageReport::Detection(a), StageReport::Detection(b)) => rank_detection(a, b),
            (StageReport::Tracking(a), StageReport::Tracking(b)) => rank_tracking(a, b),
            _ => Ordering::Equal,
        }
    }
}

/// MOTA (higher), then MOTP distance (lower), then IDF1 (higher).
pub fn rank_tracking(a: &MotReport, b: &MotReport) -> Ordering {
    if (a.mota - b.mota).abs() > MOTA_TOLERANCE {
        return a.mota.total_cmp(&b.mota);
    }
    b.motp_dist
        .total_cmp(&a.motp_dist)
        .then_with(|| a.idf1.total_cmp(&b.idf1))
}

/// AP[0.50:0.95|all|100], then AR[0.50:0.95|all|100], both higher.
pub fn rank_detection(a: &DetSummary, b: &DetSummary) -> Ordering {
    a.ap().total_cmp(&b.ap()).then_with(|| a.ar().total_cmp(&b.ar()))
}

/// Evaluates a parameter set. `axis` names the axis under sweep; pure
/// evaluators ignore it.
pub trait Evaluator: Sync {
    fn evaluate(&self, objective: Objective, axis: AxisName, params: &HyperParams) -> Result<StageReport>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub axis: AxisName,
    /// Position in the evaluated grid.
    pub step: usize,
    pub value: AxisValue,
    pub params: HyperParams,
    pub report: Option<StageReport>,
    pub accepted: bool,
    pub error: Option<String>,
}

impl ExperimentRecord {
    pub fn det_report(&self) -> Option<&DetSummary> {
        match &self.report {
            Some(StageReport::Detection(d)) => Some(d),
            _ => None,
        }
    }

    pub fn mot_report(&self) -> Option<&MotReport> {
        match &self.report {
            Some(StageReport::Tracking(m)) => Some(m),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub best: AxisValue,
    pub params: HyperParams,
    pub records: Vec<ExperimentRecord>,
}

/// Sweeps one axis from `incumbent`. Grid points are evaluated in parallel
/// and merged in grid order. A failing grid point is recorded and skipped.
pub fn sweep_axis(axis: &SweepAxis, incumbent: &HyperParams, evaluator: &dyn Evaluator) -> Result<SweepOutcome> {
    let outcomes: Vec<(HyperParams, Result<StageReport>)> = axis
        .grid
        .par_iter()
        .map(|v| match axis.name.apply(incumbent, v) {
            Ok(p) => {
                let r = evaluator.evaluate(axis.objective, axis.name, &p);
                (p, r)
            }
            Err(e) => (incumbent.clone(), Err(e)),
        })
        .collect();

    let mut records = Vec::with_capacity(outcomes.len());
    let mut best: Option<(usize, StageReport)> = None;
    for (step, ((params, result), value)) in outcomes.into_iter().zip(&axis.grid).enumerate() {
        let mut rec = ExperimentRecord {
            axis: axis.name,
            step,
            value: value.clone(),
            params,
            report: None,
            accepted: false,
            error: None,
        };
        match result {
            Ok(report) => {
                let improves = match &best {
                    None => true,
                    Some((_, b)) => report.rank(b) == Ordering::Greater,
                };
                if improves {
                    rec.accepted = true;
                    best = Some((step, report.clone()));
                }
                rec.report = Some(report);
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        records.push(rec);
    }
    let Some((step, _)) = best else {
        return Err(Error::Plan(format!("every grid point of axis `{}` failed", axis.name)));
    };
    Ok(SweepOutcome {
        best: records[step].value.clone(),
        params: records[step].params.clone(),
        records,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub params: HyperParams,
    /// One entry per axis, in plan order.
    pub sweeps: Vec<(SweepAxis, Vec<ExperimentRecord>)>,
}

/// Coordinate descent over `axes`. The incumbent value of each axis is
/// evaluated first when the grid does not contain it, so the result never
/// ranks below the seed on any axis objective.
pub fn run_plan(axes: &[SweepAxis], seed: &HyperParams, evaluator: &dyn Evaluator) -> Result<PlanOutcome> {
    check_stage_order(axes)?;
    seed.validate()?;
    let mut params = seed.clone();
    let mut sweeps = Vec::with_capacity(axes.len());
    for axis in axes {
        let current = axis.name.value_of(&params);
        let mut effective = axis.clone();
        if !effective.grid.contains(&current) {
            effective.grid.insert(0, current);
        }
        let out = sweep_axis(&effective, &params, evaluator)?;
        params = out.params;
        sweeps.push((effective, out.records));
    }
    Ok(PlanOutcome { params, sweeps })
}

fn check_stage_order(axes: &[SweepAxis]) -> Result<()> {
    let mut seen_tracking = false;
    for a in axes {
        match a.objective {
            Objective::Tracking => seen_tracking = true,
            Objective::Detection if seen_tracking => {
                return Err(Error::Plan(format!(
                    "detection axis `{}` follows a tracking axis",
                    a.name
                )))
            }
            Objective::Detection => {}
        }
    }
    Ok(())
}

/// Column layout of the tracking sweep tables.
pub const TRACKING_COLUMNS: [&str; 10] = ["IDF1", "IDP", "IDR", "FP", "FN", "IDs", "FM", "MOTA", "MOTP", "MOTAL"];

fn tracking_cells(m: &MotReport, conv: MotpConvention) -> Vec<String> {
    vec![
        format!("{:.6}", m.idf1),
        format!("{:.6}", m.idp),
        format!("{:.6}", m.idr),
        m.fp.to_string(),
        m.fn_.to_string(),
        m.idsw.to_string(),
        m.fm.to_string(),
        format!("{:.6}", m.mota),
        format!("{:.6}", m.motp(conv)),
        format!("{:.6}", m.motal),
    ]
}

/// One sweep as CSV: the axis value, the objective's metric columns, then
/// `accepted` and `error`.
pub fn sweep_csv(axis: &SweepAxis, records: &[ExperimentRecord], conv: MotpConvention) -> String {
    let metric_header = match axis.objective {
        Objective::Detection => DetSummary::csv_header(),
        Objective::Tracking => TRACKING_COLUMNS.join(","),
    };
    let width = metric_header.split(',').count();
    let mut out = format!("{},{metric_header},accepted,error\n", axis.name);
    for r in records {
        let cells = match &r.report {
            Some(StageReport::Detection(d)) => d.csv_row(),
            Some(StageReport::Tracking(m)) => tracking_cells(m, conv).join(","),
            None => vec![""; width].join(","),
        };
        let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        out.push_str(&format!("{},{cells},{},{err}\n", r.value, r.accepted));
    }
    out
}

// ---------------------------------------------------------------------------
// Plan files

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    #[serde(default)]
    axis: Vec<AxisEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AxisEntry {
    name: AxisName,
    grid: Vec<AxisValue>,
    objective: Option<Objective>,
    #[serde(default)]
    replay: Vec<ReplayRow>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReplayRow {
    value: AxisValue,
    metrics: Vec<f64>,
}

/// Ordered axes plus optional recorded measurements to replay instead of
/// evaluating live.
///
/// Replay rows list the table columns in order: the twelve detection
/// summary values for detection axes, or [`TRACKING_COLUMNS`] (MOTP in
/// percent) for tracking axes.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub axes: Vec<SweepAxis>,
    pub replay: BTreeMap<AxisName, Vec<(AxisValue, StageReport)>>,
}

impl SweepPlan {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let file: PlanFile = toml::from_str(text).map_err(|e| Error::Plan(format!("{origin}: {}", e.message())))?;
        let mut axes = Vec::new();
        let mut replay = BTreeMap::new();
        for entry in file.axis {
            let objective = entry.objective.unwrap_or(entry.name.default_objective());
            let axis = SweepAxis::with_objective(entry.name, entry.grid, objective)?;
            if !entry.replay.is_empty() {
                let mut rows = Vec::new();
                for row in entry.replay {
                    rows.push((row.value, replay_report(objective, &row.metrics)?));
                }
                for v in &axis.grid {
                    if !rows.iter().any(|(rv, _)| rv == v) {
                        return Err(Error::Plan(format!("axis `{}` has no replay row for {v}", axis.name)));
                    }
                }
                replay.insert(axis.name, rows);
            }
            axes.push(axis);
        }
        check_stage_order(&axes)?;
        Ok(SweepPlan { axes, replay })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// True when every axis is replayed and no live data is needed.
    pub fn is_fully_replayed(&self) -> bool {
        self.axes.iter().all(|a| self.replay.contains_key(&a.name))
    }

    /// Evaluator answering replayed axes from the recorded rows and all
    /// other axes from `live`.
    pub fn evaluator<'a>(&'a self, live: Option<&'a dyn Evaluator>) -> ReplayEvaluator<'a> {
        ReplayEvaluator { plan: self, live }
    }
}

fn replay_report(objective: Objective, m: &[f64]) -> Result<StageReport> {
    match objective {
        Objective::Detection => {
            let values: [f64; 12] = m
                .try_into()
                .map_err(|_| Error::Plan(format!("detection replay row needs 12 metrics, got {}", m.len())))?;
            Ok(StageReport::Detection(DetSummary::new(values)))
        }
        Objective::Tracking => {
            if m.len() != TRACKING_COLUMNS.len() {
                return Err(Error::Plan(format!(
                    "tracking replay row needs {} metrics, got {}",
                    TRACKING_COLUMNS.len(),
                    m.len()
                )));
            }
            let count = |v: f64| v.max(0.0).round() as u64;
            Ok(StageReport::Tracking(MotReport {
                idf1: m[0],
                idp: m[1],
                idr: m[2],
                fp: count(m[3]),
                fn_: count(m[4]),
                idsw: count(m[5]),
                fm: count(m[6]),
                mota: m[7],
                motp_pct: m[8],
                motp_dist: motp_percent_to_distance(m[8]),
                motal: m[9],
                ..MotReport::default()
            }))
        }
    }
}

/// Looks up the value of the swept axis in the plan's replay rows.
pub struct ReplayEvaluator<'a> {
    plan: &'a SweepPlan,
    live: Option<&'a dyn Evaluator>,
}

impl Evaluator for ReplayEvaluator<'_> {
    fn evaluate(&self, objective: Objective, axis: AxisName, params: &HyperParams) -> Result<StageReport> {
        match self.plan.replay.get(&axis) {
            Some(rows) => {
                let v = axis.value_of(params);
                rows.iter()
                    .find(|(rv, _)| *rv == v)
                    .map(|(_, r)| r.clone())
                    .ok_or_else(|| Error::Plan(format!("no replay row for {axis} = {v}")))
            }
            None => match self.live {
                Some(live) => live.evaluate(objective, axis, params),
                None => Err(Error::Plan(format!("axis `{axis}` has no replay rows and no data was given"))),
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Live evaluation

/// One sequence: ground truth plus one or more named detection sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub gt: Vec<Tracklet>,
    pub det_sets: BTreeMap<String, Vec<FrameDetections>>,
}

impl Sequence {
    pub fn new(gt: Vec<Tracklet>, dets: Vec<FrameDetections>) -> Self {
        Sequence {
            gt,
            det_sets: BTreeMap::from([(DEFAULT_DETECTION_SET.to_string(), dets)]),
        }
    }

    pub fn dets(&self, params: &HyperParams) -> Result<&[FrameDetections]> {
        let name = params.detection_set.as_deref().unwrap_or(DEFAULT_DETECTION_SET);
        self.det_sets
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::out_of_range("detection_set", name, "a detection set present in the corpus"))
    }
}

/// Evaluates parameters on a corpus. Detection reports pool every frame of
/// every sequence; tracking counts are summed over sequences.
#[derive(Debug, Clone)]
pub struct LiveEvaluator {
    pub corpus: Vec<Sequence>,
    pub iou_thr: f64,
    pub options: TrackerOptions,
}

impl LiveEvaluator {
    pub fn new(corpus: Vec<Sequence>) -> Self {
        LiveEvaluator {
            corpus,
            iou_thr: crate::motmetrics::DEFAULT_IOU_THRESHOLD,
            options: TrackerOptions::default(),
        }
    }

    pub fn detection(&self, params: &HyperParams) -> Result<DetSummary> {
        params.validate()?;
        let mut gt: BTreeMap<u32, Vec<BBox>> = BTreeMap::new();
        let mut dets = Vec::new();
        let mut offset = 0u32;
        for seq in &self.corpus {
            let seq_dets = seq.dets(params)?;
            let mut last = 0;
            for (f, boxes) in gt_by_frame(&seq.gt) {
                gt.insert(f + offset, boxes);
                last = last.max(f);
            }
            for fd in seq_dets {
                let mut kept = postprocess(fd, params.d_conf, params.d_nms);
                kept.frame += offset;
                last = last.max(fd.frame);
                dets.push(kept);
            }
            offset += last;
        }
        Ok(evaluate_detections(&gt, &dets).summary())
    }

    pub fn tracking(&self, params: &HyperParams) -> Result<MotReport> {
        let mut total = MotCounts::default();
        for seq in &self.corpus {
            let pred = run_sequence_with(seq.dets(params)?, params, self.options.clone())?;
            total += evaluate_counts(&seq.gt, &pred, self.iou_thr);
        }
        MotReport::from_counts(&total)
    }
}

impl Evaluator for LiveEvaluator {
    fn evaluate(&self, objective: Objective, _axis: AxisName, params: &HyperParams) -> Result<StageReport> {
        match objective {
            Objective::Detection => self.detection(params).map(StageReport::Detection),
            Objective::Tracking => self.tracking(params).map(StageReport::Tracking),
        }
    }
}
