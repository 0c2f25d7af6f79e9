use std::fmt;
use std::str::FromStr;

use crate::assoc::AssocMethod;
use crate::error::{Error, Result};

/// Motion model used by the tracker. Only the Kalman variant exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MotionModelKind {
    #[default]
    Kalman,
}

impl MotionModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MotionModelKind::Kalman => "kalman",
        }
    }
}

impl fmt::Display for MotionModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MotionModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "kalman" => Ok(MotionModelKind::Kalman),
            other => Err(format!("unknown motion model `{other}`")),
        }
    }
}

/// Every tunable knob of both stages.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    /// Training image size in pixels. Recorded only; detections are precomputed.
    pub d_train: u32,
    /// Inference image size in pixels. Recorded only.
    pub d_infer: u32,
    pub d_nms: f64,
    pub d_conf: f64,
    pub t_mm: MotionModelKind,
    /// Minimum IoU for a track/detection pair to count as a match.
    pub t_cost: f64,
    pub t_assoc: AssocMethod,
    pub t_min_hit: u32,
    /// Consecutive unmatched frames a track may coast before deletion.
    pub t_age: u32,
    /// Named precomputed detection set; `None` is the default set.
    pub detection_set: Option<String>,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            d_train: 1600,
            d_infer: 1600,
            d_nms: 0.75,
            d_conf: 0.0001,
            t_mm: MotionModelKind::Kalman,
            t_cost: 0.01,
            t_assoc: AssocMethod::Hungarian,
            t_min_hit: 3,
            t_age: 40,
            detection_set: None,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [("d_nms", self.d_nms), ("d_conf", self.d_conf), ("t_cost", self.t_cost)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::out_of_range(key, v, "[0, 1]"));
            }
        }
        for (key, v) in [
            ("d_train", self.d_train),
            ("d_infer", self.d_infer),
            ("t_min_hit", self.t_min_hit),
            ("t_age", self.t_age),
        ] {
            if v == 0 {
                return Err(Error::out_of_range(key, v, "positive integer"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = HyperParams::default();
        p.validate().unwrap();
        assert_eq!((p.d_train, p.d_infer, p.t_min_hit, p.t_age), (1600, 1600, 3, 40));
        assert_eq!((p.d_nms, p.d_conf, p.t_cost), (0.75, 0.0001, 0.01));
    }

    #[test]
    fn range_errors_name_the_key() {
        let p = HyperParams {
            d_conf: 1.1,
            ..HyperParams::default()
        };
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("d_conf"), "{err}");
        let p = HyperParams {
            t_age: 0,
            ..HyperParams::default()
        };
        assert!(p.validate().is_err());
    }
}
