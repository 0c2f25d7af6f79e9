//! The `motune` command line. Exit codes: 0 success, 1 usage error,
//! 2 data error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::detmetrics::{evaluate_detections, gt_by_frame, DetSummary};
use crate::detpost::postprocess;
use crate::error::Error;
use crate::io::{
    format_config, format_detections, load_config, manifest_path, read_detections, read_tracklets, write_text,
    write_tracklets, RunConfig,
};
use crate::motmetrics::{evaluate, MotReport, DEFAULT_IOU_THRESHOLD};
use crate::synth::{generate, ScenarioSpec};
use crate::tracker::run_sequence_with;
use crate::tuner::{run_plan, sweep_csv, LiveEvaluator, Sequence, SweepPlan};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "motune", version, about = "Stage-wise tuning of a SORT tracking pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Track a detection file and write a result file plus a run manifest.
    Track {
        #[arg(long)]
        dets: PathBuf,
        /// Run configuration; defaults apply when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print CLEAR-MOT and identity metrics of a result file as CSV.
    Eval {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        result: PathBuf,
        #[arg(long, default_value_t = DEFAULT_IOU_THRESHOLD)]
        iou_thr: f64,
    },
    /// Print the AP/AR summary of a detection file as CSV.
    DetEval {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        dets: PathBuf,
    },
    /// Confidence-filter and suppress a detection file; writes to stdout.
    Nms {
        #[arg(long)]
        dets: PathBuf,
        #[arg(long)]
        d_nms: f64,
        #[arg(long)]
        d_conf: f64,
    },
    /// Run a sweep plan; writes one CSV per axis and the final config.
    Tune {
        #[arg(long)]
        plan: PathBuf,
        /// Required unless every axis of the plan is replayed.
        #[arg(long)]
        gt: Option<PathBuf>,
        #[arg(long)]
        dets: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for grid points; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Generate a synthetic scenario as gt.txt and det.txt.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type CliResult = std::result::Result<(), Failure>;

/// Runs the command line with `args` (program name first).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DATA
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> CliResult {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::Data(Error::io("<stdout>", e)))
}

fn unit_flag(name: &str, v: f64) -> CliResult {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--{name} {v} is outside [0, 1]")))
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> CliResult {
    match cmd {
        Command::Track { dets, config, out: path } => {
            let cfg = match config {
                Some(p) => load_config(&p)?,
                None => RunConfig::default(),
            };
            let frames = read_detections(&dets)?;
            let tracklets = run_sequence_with(&frames, &cfg.params, cfg.tracker_options())?;
            write_tracklets(&path, &tracklets)?;
            write_text(&manifest_path(&path), &format_config(&cfg))?;
            let boxes: usize = tracklets.iter().map(|t| t.len()).sum();
            let n_frames = frames.last().map_or(0, |f| f.frame);
            emit(out, &format!("{} tracks, {boxes} boxes over {n_frames} frames\n", tracklets.len()))
        }
        Command::Eval { gt, result, iou_thr } => {
            if !(iou_thr > 0.0 && iou_thr <= 1.0) {
                return Err(Failure::Usage(format!("--iou-thr {iou_thr} is outside (0, 1]")));
            }
            let report = evaluate(&read_tracklets(&gt)?, &read_tracklets(&result)?, iou_thr)?;
            let conv = RunConfig::default().motp_convention;
            emit(out, &format!("{}\n{}\n", MotReport::csv_header(), report.csv_row(conv)))
        }
        Command::DetEval { gt, dets } => {
            let summary = evaluate_detections(&gt_by_frame(&read_tracklets(&gt)?), &read_detections(&dets)?).summary();
            emit(out, &format!("{}\n{}\n", DetSummary::csv_header(), summary.csv_row()))
        }
        Command::Nms { dets, d_nms, d_conf } => {
            unit_flag("d-nms", d_nms)?;
            unit_flag("d-conf", d_conf)?;
            let kept: Vec<_> = read_detections(&dets)?
                .iter()
                .map(|fd| postprocess(fd, d_conf, d_nms))
                .collect();
            emit(out, &format_detections(&kept))
        }
        Command::Tune {
            plan,
            gt,
            dets,
            out: dir,
            jobs,
        } => tune(&plan, gt.as_deref(), dets.as_deref(), &dir, jobs, out),
        Command::Synth { spec, out: dir } => {
            let scenario = generate(&ScenarioSpec::load(&spec)?)?;
            create_dir(&dir)?;
            write_tracklets(&dir.join("gt.txt"), &scenario.gt)?;
            write_text(&dir.join("det.txt"), &format_detections(&scenario.dets))?;
            emit(
                out,
                &format!("{} tracks over {} frames\n", scenario.gt.len(), scenario.dets.len()),
            )
        }
    }
}

fn create_dir(dir: &Path) -> CliResult {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Data(Error::io(dir, e)))
}

fn tune(plan: &Path, gt: Option<&Path>, dets: Option<&Path>, dir: &Path, jobs: usize, out: &mut dyn Write) -> CliResult {
    let plan = SweepPlan::load(plan)?;
    let live = match (gt, dets) {
        (Some(g), Some(d)) => Some(LiveEvaluator::new(vec![Sequence::new(read_tracklets(g)?, read_detections(d)?)])),
        (None, None) if plan.is_fully_replayed() => None,
        _ => return Err(Failure::Usage("--gt and --dets are required for axes without replay rows".into())),
    };
    let cfg = RunConfig::default();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::Usage(format!("--jobs {jobs}: {e}")))?;
    let evaluator = plan.evaluator(live.as_ref().map(|l| l as _));
    let outcome = pool.install(|| run_plan(&plan.axes, &cfg.params, &evaluator))?;

    create_dir(dir)?;
    for (i, (axis, records)) in outcome.sweeps.iter().enumerate() {
        let path = dir.join(format!("{:02}_{}.csv", i + 1, axis.name));
        write_text(&path, &sweep_csv(axis, records, cfg.motp_convention))?;
    }
    let final_cfg = RunConfig {
        params: outcome.params,
        ..cfg
    };
    write_text(&dir.join("config.toml"), &format_config(&final_cfg))?;
    emit(out, &format_config(&final_cfg))
}
