#pragma once

#include <Eigen/Dense>
#include <optional>

#include "bevtrack/rng.hpp"

namespace bevtrack::geometry {

using Matrix34d = Eigen::Matrix<double, 3, 4>;

/// Numerical tolerances shared by the projection routines.
inline constexpr double kDepthEps = 1e-9;          // behind-camera / horizon cutoff
inline constexpr double kOrthonormalTol = 1e-9;    // rotation validity
inline constexpr double kMaxHomographyCond = 1e12; // usable ground homography

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int image_width = 0;
  int image_height = 0;

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d k;
    k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
    return k;
  }
};

struct CameraExtrinsics {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();  // world -> camera
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

/// A calibrated camera with its cached projection and ground homography.
struct CameraModel {
  int id = 0;
  CameraIntrinsics intrinsics;
  CameraExtrinsics extrinsics;
  Matrix34d projection = Matrix34d::Zero();          // K [R | t]
  Eigen::Matrix3d ground_homography_matrix = Eigen::Matrix3d::Zero();
};

struct ImagePoint {
  Eigen::Vector2d uv = Eigen::Vector2d::Zero();
  double depth = 0.0;  // projective scale of the dehomogenization
};

/// Rectangular ground-plane grid. World x maps to rows and world y to
/// columns; the origin is the corner of cell (0, 0).
struct GroundGrid {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell_size = 0.1;
  int rows = 0;
  int cols = 0;
};

struct GridCoord {
  int row = 0;
  int col = 0;
  double offset_x = 0.0;  // fractional position within the cell, in [0, 1)
  double offset_y = 0.0;
};

/// Throws ValidationError unless cell_size > 0 and rows, cols > 0.
void validate(const GroundGrid& grid);

/// Returns true when r is orthonormal with determinant +1 within tol.
bool is_rotation(const Eigen::Matrix3d& r, double tol = kOrthonormalTol);

/// Nearest rotation matrix in the Frobenius sense (polar decomposition).
Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m);

/// Validates the calibration and caches P = K [R | t] and the ground
/// homography.  Throws CalibrationError on invalid intrinsics or a
/// non-orthonormal rotation.
CameraModel compose_projection(const CameraIntrinsics& intrinsics,
                               const CameraExtrinsics& extrinsics, int id = 0);

/// Ground-plane homography: P with its third column removed, mapping
/// (x, y, 1) on z = 0 to image coordinates.  Purely structural; the result
/// may be singular for degenerate rigs.
Eigen::Matrix3d ground_homography(const Matrix34d& projection);

/// Projects a world point into the image.  Returns nothing when the point's
/// projective depth is <= kDepthEps (at or behind the camera plane).
std::optional<ImagePoint> try_project_world_to_image(const CameraModel& camera,
                                                     const Eigen::Vector3d& world);

/// Throwing variant of try_project_world_to_image (BehindCameraError).
ImagePoint project_world_to_image(const CameraModel& camera,
                                  const Eigen::Vector3d& world);

/// Back-projects a pixel to the z = 0 plane through the inverse ground
/// homography (explicit adjugate-over-determinant inverse).  Throws
/// DegenerateHomographyError if the homography is singular or its condition
/// number exceeds kMaxHomographyCond, and HorizonError when the ray is
/// parallel to the ground plane.
Eigen::Vector2d project_image_to_ground(const CameraModel& camera,
                                        const Eigen::Vector2d& pixel);

/// Quantizes a world position into the grid.  Throws OutOfBoundsError when
/// the point falls outside the grid extent.
GridCoord world_to_grid(const GroundGrid& grid, double x, double y);

/// Continuous world position of a grid coordinate; the exact inverse of
/// world_to_grid for in-bounds points.
Eigen::Vector2d grid_to_world(const GroundGrid& grid, int row, int col,
                              double offset_x = 0.0, double offset_y = 0.0);

/// Adds iid Gaussian noise with the given sigma to each translation
/// component; the rotation is untouched.
CameraExtrinsics perturb_translation(const CameraExtrinsics& extrinsics,
                                     double sigma, Rng& rng);

}  // namespace bevtrack::geometry
