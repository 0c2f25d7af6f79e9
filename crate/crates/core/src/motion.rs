//! Constant-velocity Kalman filter over box state.
//!
//! State is `[u, v, s, r, du, dv, ds]`: box center, area, aspect ratio
//! (w / h) and per-frame velocities of the first three. The aspect ratio
//! carries no velocity. Measurements are `[u, v, s, r]`.
//!
//! Noise constants follow the SORT reference tracker and are exposed through
//! [`KalmanConfig`] so runs can record them.

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::geometry::BBox;

pub type StateVector = SVector<f64, 7>;
pub type StateCov = SMatrix<f64, 7, 7>;
type Measurement = SVector<f64, 4>;
type ObsMatrix = SMatrix<f64, 4, 7>;

/// Smallest area / ratio used when converting a drifted state to a box.
pub const MIN_EXTENT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    pub mean: StateVector,
    pub cov: StateCov,
}

impl KalmanState {
    pub fn area(&self) -> f64 {
        self.mean[2]
    }

    pub fn ratio(&self) -> f64 {
        self.mean[3]
    }

    /// Box of the current mean, clamping a non-positive area or ratio to
    /// [`MIN_EXTENT`]. Long coasting can drive the area negative.
    pub fn clamped_bbox(&self) -> BBox {
        let s = self.mean[2].max(MIN_EXTENT);
        let r = self.mean[3].max(MIN_EXTENT);
        let w = (s * r).sqrt();
        BBox {
            x: self.mean[0] - w / 2.0,
            y: self.mean[1] - s / w / 2.0,
            w,
            h: s / w,
        }
    }
}

/// Diagonal noise and initial covariance constants.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanConfig {
    /// Diagonal of R over `[u, v, s, r]`.
    pub measurement_noise: [f64; 4],
    /// Diagonal of Q over the full state.
    pub process_noise: [f64; 7],
    /// Diagonal of the initial covariance.
    pub initial_covariance: [f64; 7],
}

impl Default for KalmanConfig {
    fn default() -> Self {
        KalmanConfig {
            measurement_noise: [1.0, 1.0, 10.0, 10.0],
            process_noise: [1.0, 1.0, 1.0, 1.0, 0.01, 0.01, 1e-4],
            initial_covariance: [10.0, 10.0, 10.0, 10.0, 1e4, 1e4, 1e4],
        }
    }
}

fn transition() -> StateCov {
    let mut f = StateCov::identity();
    f[(0, 4)] = 1.0;
    f[(1, 5)] = 1.0;
    f[(2, 6)] = 1.0;
    f
}

fn observation() -> ObsMatrix {
    let mut h = ObsMatrix::zeros();
    for i in 0..4 {
        h[(i, i)] = 1.0;
    }
    h
}

fn measure(b: &BBox) -> Measurement {
    let c = b.center();
    Measurement::new(c.x, c.y, b.area(), b.w / b.h)
}

fn symmetrize(m: &StateCov) -> StateCov {
    (m + m.transpose()) * 0.5
}

impl KalmanConfig {
    pub fn init(&self, b: &BBox) -> KalmanState {
        let z = measure(b);
        let mut mean = StateVector::zeros();
        mean.fixed_rows_mut::<4>(0).copy_from(&z);
        KalmanState {
            mean,
            cov: StateCov::from_diagonal(&StateVector::from(self.initial_covariance)),
        }
    }

    pub fn predict(&self, state: &KalmanState) -> KalmanState {
        let f = transition();
        let q = StateCov::from_diagonal(&StateVector::from(self.process_noise));
        KalmanState {
            mean: f * state.mean,
            cov: symmetrize(&(f * state.cov * f.transpose() + q)),
        }
    }

    /// Kalman correction against a measured box. Uses the Joseph form so the
    /// covariance stays symmetric positive semidefinite.
    pub fn update(&self, state: &KalmanState, measurement: &BBox) -> Result<KalmanState> {
        let h = observation();
        let r = SMatrix::<f64, 4, 4>::from_diagonal(&Measurement::from(self.measurement_noise));
        let innovation = measure(measurement) - h * state.mean;
        let s = h * state.cov * h.transpose() + r;
        let chol = s.cholesky().ok_or(Error::IllConditioned)?;
        // K = P H^T S^-1, solved as S K^T = H P
        let gain = chol.solve(&(h * state.cov)).transpose();
        let ikh = StateCov::identity() - gain * h;
        let cov = ikh * state.cov * ikh.transpose() + gain * r * gain.transpose();
        let mean = state.mean + gain * innovation;
        if !mean.iter().all(|v| v.is_finite()) {
            return Err(Error::IllConditioned);
        }
        Ok(KalmanState {
            mean,
            cov: symmetrize(&cov),
        })
    }
}

pub fn init_state(b: &BBox) -> KalmanState {
    KalmanConfig::default().init(b)
}

pub fn predict(state: &KalmanState) -> KalmanState {
    KalmanConfig::default().predict(state)
}

pub fn update(state: &KalmanState, measurement: &BBox) -> Result<KalmanState> {
    KalmanConfig::default().update(state, measurement)
}

/// Inverse of the center/area/ratio encoding.
pub fn state_to_bbox(state: &KalmanState) -> Result<BBox> {
    let (s, r) = (state.area(), state.ratio());
    if !(s > 0.0 && r > 0.0 && s.is_finite() && r.is_finite()) {
        return Err(Error::DegenerateState { area: s, ratio: r });
    }
    let w = (s * r).sqrt();
    let h = s / w;
    BBox::from_center(state.mean[0], state.mean[1], w, h)
}
