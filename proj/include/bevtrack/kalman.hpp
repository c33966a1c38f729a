#pragma once

#include <Eigen/Dense>

namespace bevtrack::assoc {

/// Constant-velocity ground-plane filter state: (x, y, vx, vy) with
/// velocities in meters per frame and a symmetric positive-definite
/// covariance.
struct KalmanState {
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Identity();
};

/// Process and measurement noise for the constant-velocity model, expressed
/// as standard deviations.
struct KalmanNoise {
  double initial_pos_std = 0.5;   // m
  double initial_vel_std = 0.5;   // m/frame
  double process_pos_std = 0.05;  // m per frame
  double process_vel_std = 0.1;   // m/frame per frame
  double measurement_std = 0.1;   // m

  Eigen::Matrix4d process_covariance() const;
  Eigen::Matrix2d measurement_covariance() const;
};

/// State transition over one frame (dt = 1).
Eigen::Matrix4d transition_matrix();

/// Position measurement model.
Eigen::Matrix<double, 2, 4> measurement_matrix();

/// New track state from a first position measurement: zero velocity and a
/// diagonal covariance from the initial standard deviations.
KalmanState kalman_initiate(const Eigen::Vector2d& position,
                            const KalmanNoise& noise);

/// Advances the state one frame under the constant-velocity model.
KalmanState kalman_predict(const KalmanState& state, const KalmanNoise& noise);

/// Folds a position measurement into the state.  The covariance update uses
/// the Joseph form, which preserves symmetry and positive definiteness.
KalmanState kalman_update(const KalmanState& state, const Eigen::Vector2d& measurement,
                          const KalmanNoise& noise);

/// Squared Mahalanobis distance of a measurement under the state's innovation
/// covariance S = H P H^T + R.  Throws ValidationError if S is not positive
/// definite.
double mahalanobis_sq(const KalmanState& state, const Eigen::Vector2d& measurement,
                      const Eigen::Matrix2d& measurement_covariance);

}  // namespace bevtrack::assoc
