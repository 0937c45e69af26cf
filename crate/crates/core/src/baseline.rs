//! Constant-velocity Kalman filter baseline.
//!
//! State is `(x, y, vx, vy)` with white-acceleration process noise. The
//! filter is started at the first history point with the velocity
//! differenced from the first two points and a diffuse `1e4 I` covariance,
//! then updated with the remaining points and extrapolated.

use alloc::vec::Vec;

use nalgebra::{Matrix2, Matrix2x4, Matrix4, Vector2, Vector4};

use crate::model::GaussianStep;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum BaselineError {
    #[error("need at least 2 history points, got {0}")]
    ShortHistory(usize),
    #[error("non-finite value in the filter state")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanState {
    pub mean: Vector4<f64>,
    pub covariance: Matrix4<f64>,
}

impl KalmanState {
    pub fn position(&self) -> [f64; 2] {
        [self.mean[0], self.mean[1]]
    }

    pub fn velocity(&self) -> [f64; 2] {
        [self.mean[2], self.mean[3]]
    }

    /// Marginal position distribution.
    pub fn position_gaussian(&self) -> GaussianStep {
        let p = &self.covariance;
        let sx = libm::sqrt(p[(0, 0)].max(0.0));
        let sy = libm::sqrt(p[(1, 1)].max(0.0));
        let rho = if sx > 0.0 && sy > 0.0 {
            (p[(0, 1)] / (sx * sy)).clamp(-0.999_999, 0.999_999)
        } else {
            0.0
        };
        GaussianStep {
            mux: self.mean[0],
            muy: self.mean[1],
            sx,
            sy,
            rho,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvKalman {
    /// Step between history points (s).
    pub dt: f64,
    /// Position measurement noise per axis (m).
    pub measurement_std: f64,
    /// White-acceleration process noise (m/s²).
    pub accel_std: f64,
    pub initial_variance: f64,
}

impl Default for CvKalman {
    fn default() -> Self {
        Self {
            dt: 0.2,
            measurement_std: 0.5,
            accel_std: 1.0,
            initial_variance: 1e4,
        }
    }
}

impl CvKalman {
    fn transition(&self) -> Matrix4<f64> {
        let dt = self.dt;
        Matrix4::new(
            1.0, 0.0, dt, 0.0, //
            0.0, 1.0, 0.0, dt, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        )
    }

    fn process_noise(&self) -> Matrix4<f64> {
        let dt = self.dt;
        let q = self.accel_std * self.accel_std;
        let a = dt * dt * dt * dt / 4.0;
        let b = dt * dt * dt / 2.0;
        let c = dt * dt;
        Matrix4::new(
            a, 0.0, b, 0.0, //
            0.0, a, 0.0, b, //
            b, 0.0, c, 0.0, //
            0.0, b, 0.0, c,
        ) * q
    }

    fn observation() -> Matrix2x4<f64> {
        Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
    }

    pub fn predict(&self, s: &KalmanState) -> KalmanState {
        let f = self.transition();
        let p = f * s.covariance * f.transpose() + self.process_noise();
        KalmanState {
            mean: f * s.mean,
            covariance: (p + p.transpose()) * 0.5,
        }
    }

    /// Measurement update in Joseph form.
    pub fn update(&self, s: &KalmanState, z: [f64; 2]) -> Result<KalmanState, BaselineError> {
        let h = Self::observation();
        let r = Matrix2::identity() * (self.measurement_std * self.measurement_std);
        let innovation = Vector2::new(z[0], z[1]) - h * s.mean;
        let s_cov = h * s.covariance * h.transpose() + r;
        let s_inv = s_cov.try_inverse().ok_or(BaselineError::NonFinite)?;
        let k = s.covariance * h.transpose() * s_inv;
        let i_kh = Matrix4::identity() - k * h;
        let p = i_kh * s.covariance * i_kh.transpose() + k * r * k.transpose();
        let out = KalmanState {
            mean: s.mean + k * innovation,
            covariance: (p + p.transpose()) * 0.5,
        };
        if out.mean.iter().chain(out.covariance.iter()).all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(BaselineError::NonFinite)
        }
    }

    fn initial(&self, p0: [f64; 2], p1: [f64; 2]) -> KalmanState {
        KalmanState {
            mean: Vector4::new(p0[0], p0[1], (p1[0] - p0[0]) / self.dt, (p1[1] - p0[1]) / self.dt),
            covariance: Matrix4::identity() * self.initial_variance,
        }
    }

    /// Posterior after the last history point, with the covariance after
    /// every update (for diagnostics).
    pub fn filter_trace(&self, history: &[[f64; 2]]) -> Result<Vec<KalmanState>, BaselineError> {
        if history.len() < 2 {
            return Err(BaselineError::ShortHistory(history.len()));
        }
        let mut state = self.initial(history[0], history[1]);
        let mut trace = Vec::with_capacity(history.len());
        trace.push(state);
        for z in &history[1..] {
            state = self.update(&self.predict(&state), *z)?;
            trace.push(state);
        }
        Ok(trace)
    }

    pub fn filter(&self, history: &[[f64; 2]]) -> Result<KalmanState, BaselineError> {
        Ok(*self.filter_trace(history)?.last().expect("non-empty trace"))
    }

    /// Predicted position distributions for `horizon` steps after the
    /// last history point.
    pub fn forecast(&self, history: &[[f64; 2]], horizon: usize) -> Result<Vec<GaussianStep>, BaselineError> {
        let mut state = self.filter(history)?;
        let mut out = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            state = self.predict(&state);
            out.push(state.position_gaussian());
        }
        Ok(out)
    }
}

/// Predicted mean positions for `horizon` steps with default noise settings.
pub fn cv_filter_predict(history: &[[f64; 2]], horizon: usize) -> Result<Vec<[f64; 2]>, BaselineError> {
    Ok(CvKalman::default()
        .forecast(history, horizon)?
        .into_iter()
        .map(|g| g.mean())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn exact_constant_velocity() {
        let history: Vec<[f64; 2]> = (0..16).map(|k| [0.0, 20.0 * 0.2 * k as f64]).collect();
        let pred = cv_filter_predict(&history, 25).unwrap();
        let last = history[15][1];
        for (k, p) in pred.iter().enumerate() {
            assert!(p[0].abs() < 1e-6);
            assert!((p[1] - (last + 20.0 * 0.2 * (k + 1) as f64)).abs() < 1e-6);
        }
    }

    #[test]
    fn stationary_stays_put() {
        let history = vec![[3.0, -7.5]; 16];
        for p in cv_filter_predict(&history, 25).unwrap() {
            assert!((p[0] - 3.0).abs() < 1e-6 && (p[1] + 7.5).abs() < 1e-6);
        }
    }

    #[test]
    fn short_history_is_rejected() {
        assert_eq!(cv_filter_predict(&[[0.0, 0.0]], 5), Err(BaselineError::ShortHistory(1)));
    }

    #[test]
    fn covariance_stays_symmetric_psd() {
        let history: Vec<[f64; 2]> = (0..16)
            .map(|k| [0.3 * libm::sin(k as f64), 5.0 * k as f64 + 0.2 * libm::cos(3.0 * k as f64)])
            .collect();
        let kf = CvKalman::default();
        let mut states = kf.filter_trace(&history).unwrap();
        let mut s = *states.last().unwrap();
        for _ in 0..25 {
            s = kf.predict(&s);
            states.push(s);
        }
        for st in states {
            let p = st.covariance;
            assert!((p - p.transpose()).abs().max() < 1e-12);
            let eig = p.symmetric_eigen();
            assert!(eig.eigenvalues.iter().all(|e| *e >= -1e-10));
            assert!((0..4).all(|i| p[(i, i)] >= 0.0));
        }
    }
}
