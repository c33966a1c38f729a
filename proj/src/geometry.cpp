#include "bevtrack/geometry.hpp"

#include <cmath>
#include <string>

#include "bevtrack/errors.hpp"

namespace bevtrack::geometry {

void validate(const GroundGrid& grid) {
  if (!(grid.cell_size > 0.0) || grid.rows <= 0 || grid.cols <= 0) {
    throw ValidationError("grid must have positive cell size and dimensions");
  }
}

bool is_rotation(const Eigen::Matrix3d& r, double tol) {
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity())
                           .cwiseAbs()
                           .maxCoeff();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

CameraModel compose_projection(const CameraIntrinsics& intrinsics,
                               const CameraExtrinsics& extrinsics, int id) {
  if (!(intrinsics.fx > 0.0) || !(intrinsics.fy > 0.0)) {
    throw CalibrationError("camera " + std::to_string(id) +
                           ": focal lengths must be positive");
  }
  if (intrinsics.image_width <= 0 || intrinsics.image_height <= 0) {
    throw CalibrationError("camera " + std::to_string(id) +
                           ": image dimensions must be positive");
  }
  if (intrinsics.cx < 0.0 || intrinsics.cx > intrinsics.image_width ||
      intrinsics.cy < 0.0 || intrinsics.cy > intrinsics.image_height) {
    throw CalibrationError("camera " + std::to_string(id) +
                           ": principal point outside the image");
  }
  if (!is_rotation(extrinsics.rotation)) {
    throw CalibrationError("camera " + std::to_string(id) +
                           ": rotation is not orthonormal with determinant +1");
  }

  CameraModel model;
  model.id = id;
  model.intrinsics = intrinsics;
  model.extrinsics = extrinsics;

  Matrix34d rt;
  rt.leftCols<3>() = extrinsics.rotation;
  rt.col(3) = extrinsics.translation;
  model.projection = intrinsics.matrix() * rt;
  model.ground_homography_matrix = ground_homography(model.projection);
  return model;
}

Eigen::Matrix3d ground_homography(const Matrix34d& projection) {
  Eigen::Matrix3d h;
  h.col(0) = projection.col(0);
  h.col(1) = projection.col(1);
  h.col(2) = projection.col(3);
  return h;
}

std::optional<ImagePoint> try_project_world_to_image(const CameraModel& camera,
                                                     const Eigen::Vector3d& world) {
  const Eigen::Vector3d homogeneous =
      camera.projection * world.homogeneous();
  const double depth = homogeneous.z();
  if (depth <= kDepthEps) return std::nullopt;
  return ImagePoint{homogeneous.head<2>() / depth, depth};
}

ImagePoint project_world_to_image(const CameraModel& camera,
                                  const Eigen::Vector3d& world) {
  auto point = try_project_world_to_image(camera, world);
  if (!point) {
    throw BehindCameraError("world point projects at or behind the camera");
  }
  return *point;
}

namespace {

/// Explicit 3x3 inverse via the adjugate and determinant.  Kept in closed
/// form so the conditioning check below sees exactly the matrix being used.
bool invert3x3(const Eigen::Matrix3d& a, Eigen::Matrix3d& inverse) {
  Eigen::Matrix3d adjugate;
  adjugate(0, 0) = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
  adjugate(0, 1) = a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2);
  adjugate(0, 2) = a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1);
  adjugate(1, 0) = a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2);
  adjugate(1, 1) = a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0);
  adjugate(1, 2) = a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2);
  adjugate(2, 0) = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
  adjugate(2, 1) = a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1);
  adjugate(2, 2) = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);

  const double det = a(0, 0) * adjugate(0, 0) + a(0, 1) * adjugate(1, 0) +
                     a(0, 2) * adjugate(2, 0);
  if (det == 0.0 || !std::isfinite(det)) return false;
  inverse = adjugate / det;
  return inverse.allFinite();
}

double inf_norm(const Eigen::Matrix3d& a) {
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace

Eigen::Vector2d project_image_to_ground(const CameraModel& camera,
                                        const Eigen::Vector2d& pixel) {
  const Eigen::Matrix3d& h = camera.ground_homography_matrix;
  Eigen::Matrix3d h_inv;
  if (!invert3x3(h, h_inv)) {
    throw DegenerateHomographyError("ground homography is singular");
  }
  if (inf_norm(h) * inf_norm(h_inv) > kMaxHomographyCond) {
    throw DegenerateHomographyError("ground homography is ill-conditioned");
  }
  const Eigen::Vector3d ground = h_inv * pixel.homogeneous();
  if (std::abs(ground.z()) <= kDepthEps) {
    throw HorizonError("pixel ray is parallel to the ground plane");
  }
  return ground.head<2>() / ground.z();
}

GridCoord world_to_grid(const GroundGrid& grid, double x, double y) {
  validate(grid);
  const double u = (x - grid.origin_x) / grid.cell_size;
  const double v = (y - grid.origin_y) / grid.cell_size;
  const double row = std::floor(u);
  const double col = std::floor(v);
  if (row < 0.0 || col < 0.0 || row >= grid.rows || col >= grid.cols) {
    throw OutOfBoundsError("world point (" + std::to_string(x) + ", " +
                           std::to_string(y) + ") is outside the grid");
  }
  GridCoord coord;
  coord.row = static_cast<int>(row);
  coord.col = static_cast<int>(col);
  coord.offset_x = u - row;
  coord.offset_y = v - col;
  return coord;
}

Eigen::Vector2d grid_to_world(const GroundGrid& grid, int row, int col,
                              double offset_x, double offset_y) {
  validate(grid);
  if (row < 0 || col < 0 || row >= grid.rows || col >= grid.cols) {
    throw OutOfBoundsError("cell (" + std::to_string(row) + ", " +
                           std::to_string(col) + ") is outside the grid");
  }
  return {grid.origin_x + (row + offset_x) * grid.cell_size,
          grid.origin_y + (col + offset_y) * grid.cell_size};
}

CameraExtrinsics perturb_translation(const CameraExtrinsics& extrinsics,
                                     double sigma, Rng& rng) {
  CameraExtrinsics out = extrinsics;
  for (int i = 0; i < 3; ++i) {
    out.translation(i) += sigma * rng.normal();
  }
  return out;
}

}  // namespace bevtrack::geometry
