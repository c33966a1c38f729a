#pragma once

#include <Eigen/Dense>

namespace bevtrack {

/// Default appearance embedding dimensionality.
inline constexpr int kEmbeddingDim = 64;

/// One ground-plane detection: position in meters, confidence score, and a
/// unit-norm appearance embedding.
struct DetectionRecord {
  double x = 0.0;
  double y = 0.0;
  double score = 1.0;
  Eigen::VectorXd embedding;

  Eigen::Vector2d position() const { return {x, y}; }
};

}  // namespace bevtrack
