pub mod assoc;
pub mod cli;
pub mod detmetrics;
pub mod detpost;
pub mod error;
pub mod geometry;
pub mod io;
pub mod motion;
pub mod motmetrics;
pub mod params;
pub mod synth;
pub mod tracker;
pub mod tuner;

pub use error::{Error, Result};
pub use geometry::{BBox, Detection, FrameDetections, Point};
pub use params::{HyperParams, MotionModelKind};
pub use tracker::{run_sequence, Tracker, Tracklet, TrackPoint};
