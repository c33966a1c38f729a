#include "bevtrack/kalman.hpp"

#include "bevtrack/errors.hpp"

namespace bevtrack::assoc {

Eigen::Matrix4d KalmanNoise::process_covariance() const {
  Eigen::Vector4d diag;
  diag << process_pos_std * process_pos_std, process_pos_std * process_pos_std,
      process_vel_std * process_vel_std, process_vel_std * process_vel_std;
  return diag.asDiagonal();
}

Eigen::Matrix2d KalmanNoise::measurement_covariance() const {
  return Eigen::Vector2d::Constant(measurement_std * measurement_std).asDiagonal();
}

Eigen::Matrix4d transition_matrix() {
  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 2) = 1.0;
  f(1, 3) = 1.0;
  return f;
}

Eigen::Matrix<double, 2, 4> measurement_matrix() {
  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  return h;
}

KalmanState kalman_initiate(const Eigen::Vector2d& position,
                            const KalmanNoise& noise) {
  KalmanState state;
  state.mean << position.x(), position.y(), 0.0, 0.0;
  Eigen::Vector4d diag;
  diag << noise.initial_pos_std * noise.initial_pos_std,
      noise.initial_pos_std * noise.initial_pos_std,
      noise.initial_vel_std * noise.initial_vel_std,
      noise.initial_vel_std * noise.initial_vel_std;
  state.covariance = diag.asDiagonal();
  return state;
}

KalmanState kalman_predict(const KalmanState& state, const KalmanNoise& noise) {
  const Eigen::Matrix4d f = transition_matrix();
  KalmanState out;
  out.mean = f * state.mean;
  out.covariance = f * state.covariance * f.transpose() + noise.process_covariance();
  out.covariance = ((out.covariance + out.covariance.transpose()) * 0.5).eval();
  return out;
}

namespace {

Eigen::Matrix2d innovation_covariance(const KalmanState& state,
                                      const Eigen::Matrix2d& r) {
  const auto h = measurement_matrix();
  return h * state.covariance * h.transpose() + r;
}

}  // namespace

KalmanState kalman_update(const KalmanState& state, const Eigen::Vector2d& measurement,
                          const KalmanNoise& noise) {
  const auto h = measurement_matrix();
  const Eigen::Matrix2d r = noise.measurement_covariance();
  const Eigen::Matrix2d s = innovation_covariance(state, r);

  Eigen::LLT<Eigen::Matrix2d> llt(s);
  if (llt.info() != Eigen::Success) {
    throw ValidationError("innovation covariance is not positive definite");
  }
  // K = P H^T S^-1, computed through the Cholesky factors of S.
  const Eigen::Matrix<double, 4, 2> pht = state.covariance * h.transpose();
  const Eigen::Matrix<double, 4, 2> gain = llt.solve(pht.transpose()).transpose();

  KalmanState out;
  out.mean = state.mean + gain * (measurement - h * state.mean);
  const Eigen::Matrix4d ikh = Eigen::Matrix4d::Identity() - gain * h;
  out.covariance = ikh * state.covariance * ikh.transpose() +
                   gain * r * gain.transpose();
  out.covariance = ((out.covariance + out.covariance.transpose()) * 0.5).eval();
  return out;
}

double mahalanobis_sq(const KalmanState& state, const Eigen::Vector2d& measurement,
                      const Eigen::Matrix2d& measurement_covariance) {
  const Eigen::Matrix2d s = innovation_covariance(state, measurement_covariance);
  Eigen::LLT<Eigen::Matrix2d> llt(s);
  if (llt.info() != Eigen::Success) {
    throw ValidationError("innovation covariance is not positive definite");
  }
  const Eigen::Vector2d residual =
      measurement - measurement_matrix() * state.mean;
  return residual.dot(llt.solve(residual));
}

}  // namespace bevtrack::assoc
