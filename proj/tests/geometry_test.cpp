#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "bevtrack/errors.hpp"
#include "bevtrack/geometry.hpp"
#include "bevtrack/rng.hpp"
#include "bevtrack/sim.hpp"

using namespace bevtrack;
using geometry::CameraExtrinsics;
using geometry::CameraIntrinsics;
using geometry::CameraModel;
using geometry::GroundGrid;
using geometry::Matrix34d;

namespace {

CameraIntrinsics identity_intrinsics() {
  CameraIntrinsics k;
  k.fx = 1.0;
  k.fy = 1.0;
  k.cx = 0.0;
  k.cy = 0.0;
  k.image_width = 2;
  k.image_height = 2;
  return k;
}

/// Naive triple-loop multiply, written independently of the library's Eigen
/// expression, to cross-check P = K [R | t].
Matrix34d naive_projection(const CameraIntrinsics& intrinsics,
                           const CameraExtrinsics& extrinsics) {
  double k[3][3] = {{intrinsics.fx, 0.0, intrinsics.cx},
                    {0.0, intrinsics.fy, intrinsics.cy},
                    {0.0, 0.0, 1.0}};
  double rt[3][4];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rt[r][c] = extrinsics.rotation(r, c);
    rt[r][3] = extrinsics.translation(r);
  }
  Matrix34d p = Matrix34d::Zero();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      double sum = 0.0;
      for (int i = 0; i < 3; ++i) sum += k[r][i] * rt[i][c];
      p(r, c) = sum;
    }
  }
  return p;
}

Eigen::Matrix3d rotation_from_angles(double a, double b, double c) {
  return (Eigen::AngleAxisd(a, Eigen::Vector3d::UnitX()) *
          Eigen::AngleAxisd(b, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(c, Eigen::Vector3d::UnitZ()))
      .toRotationMatrix();
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("identity composition gives P = [I | 0]") {
    const CameraModel model =
        geometry::compose_projection(identity_intrinsics(), CameraExtrinsics{});
    Matrix34d expected = Matrix34d::Zero();
    expected.leftCols<3>() = Eigen::Matrix3d::Identity();
    CHECK((model.projection - expected).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("scaled intrinsics with a translation compose directly") {
    CameraIntrinsics k = identity_intrinsics();
    k.fx = 2.0;
    k.fy = 2.0;
    CameraExtrinsics ext;
    ext.translation = Eigen::Vector3d(0.0, 0.0, 1.0);
    const CameraModel model = geometry::compose_projection(k, ext);
    Matrix34d expected;
    expected << 2, 0, 0, 0, 0, 2, 0, 0, 0, 0, 1, 1;
    CHECK((model.projection - expected).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("realistic composition matches a naive multiply within 1e-9") {
    Rng rng(404);
    for (int trial = 0; trial < 20; ++trial) {
      CameraIntrinsics k;
      k.fx = rng.uniform(500.0, 2000.0);
      k.fy = rng.uniform(500.0, 2000.0);
      k.cx = rng.uniform(0.0, 1920.0);
      k.cy = rng.uniform(0.0, 1080.0);
      k.image_width = 1920;
      k.image_height = 1080;
      CameraExtrinsics ext;
      ext.rotation = rotation_from_angles(rng.uniform(-1.0, 1.0),
                                          rng.uniform(-1.0, 1.0),
                                          rng.uniform(-1.0, 1.0));
      ext.translation =
          Eigen::Vector3d(rng.normal(0, 5), rng.normal(0, 5), rng.normal(0, 5));
      const CameraModel model = geometry::compose_projection(k, ext);
      CHECK((model.projection - naive_projection(k, ext)).cwiseAbs().maxCoeff() <
            1e-9);
      CHECK((model.ground_homography_matrix -
             geometry::ground_homography(model.projection))
                .cwiseAbs()
                .maxCoeff() == 0.0);
    }
  }

  TEST_CASE("non-orthonormal rotation is rejected") {
    CameraExtrinsics ext;
    ext.rotation(0, 0) = 1.5;
    CHECK_THROWS_AS(geometry::compose_projection(identity_intrinsics(), ext),
                    CalibrationError);
  }

  TEST_CASE("invalid intrinsics are rejected") {
    CameraIntrinsics k = identity_intrinsics();
    k.fx = 0.0;
    CHECK_THROWS_AS(geometry::compose_projection(k, CameraExtrinsics{}),
                    CalibrationError);
    k = identity_intrinsics();
    k.image_width = 0;
    CHECK_THROWS_AS(geometry::compose_projection(k, CameraExtrinsics{}),
                    CalibrationError);
    k = identity_intrinsics();
    k.cx = -1.0;
    CHECK_THROWS_AS(geometry::compose_projection(k, CameraExtrinsics{}),
                    CalibrationError);
  }

  TEST_CASE("ground homography deletes the third column") {
    Matrix34d p;
    p << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
    Eigen::Matrix3d expected;
    expected << 1, 2, 4, 5, 6, 8, 9, 10, 12;
    CHECK((geometry::ground_homography(p) - expected).cwiseAbs().maxCoeff() ==
          0.0);
  }

  TEST_CASE("ground homography of [I | 0] is singular but well-formed") {
    Matrix34d p = Matrix34d::Zero();
    p.leftCols<3>() = Eigen::Matrix3d::Identity();
    const Eigen::Matrix3d h = geometry::ground_homography(p);
    Eigen::Matrix3d expected;
    expected << 1, 0, 0, 0, 1, 0, 0, 0, 0;
    CHECK((h - expected).cwiseAbs().maxCoeff() == 0.0);
    CHECK(h.determinant() == 0.0);
  }

  TEST_CASE("homography agrees with full projection on the ground plane") {
    const auto rig = sim::default_rig(sim::RigPreset::kWildtrackLike);
    Rng rng(99);
    for (const auto& camera : rig.cameras) {
      for (int i = 0; i < 100; ++i) {
        const double x = rng.uniform(0.0, rig.area_x);
        const double y = rng.uniform(0.0, rig.area_y);
        const Eigen::Vector3d via_p =
            camera.projection * Eigen::Vector4d(x, y, 0.0, 1.0);
        const Eigen::Vector3d via_h =
            camera.ground_homography_matrix * Eigen::Vector3d(x, y, 1.0);
        CHECK((via_p - via_h).cwiseAbs().maxCoeff() < 1e-9);
      }
    }
  }

  TEST_CASE("forward projection dehomogenizes and reports depth") {
    const CameraModel model =
        geometry::compose_projection(identity_intrinsics(), CameraExtrinsics{});
    const auto a = geometry::project_world_to_image(model, {0.0, 0.0, 2.0});
    CHECK(a.depth == 2.0);
    CHECK(a.uv.x() == 0.0);
    CHECK(a.uv.y() == 0.0);
    const auto b = geometry::project_world_to_image(model, {2.0, 4.0, 2.0});
    CHECK(b.uv.x() == 1.0);
    CHECK(b.uv.y() == 2.0);
  }

  TEST_CASE("points at or behind the camera are rejected") {
    const CameraModel model =
        geometry::compose_projection(identity_intrinsics(), CameraExtrinsics{});
    CHECK_THROWS_AS(geometry::project_world_to_image(model, {0.0, 0.0, -1.0}),
                    BehindCameraError);
    CHECK_FALSE(geometry::try_project_world_to_image(model, {0.0, 0.0, 0.0}));
    CHECK_FALSE(geometry::try_project_world_to_image(model, {1.0, 1.0, 1e-12}));
  }

  TEST_CASE("identity homography back-projects pixels unchanged") {
    CameraModel model;
    model.ground_homography_matrix = Eigen::Matrix3d::Identity();
    const Eigen::Vector2d ground =
        geometry::project_image_to_ground(model, {3.0, 4.0});
    CHECK(ground.x() == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(ground.y() == doctest::Approx(4.0).epsilon(1e-12));
  }

  TEST_CASE("diagonal homography back-projects by inverse scaling") {
    CameraModel model;
    model.ground_homography_matrix = Eigen::Vector3d(2.0, 2.0, 1.0).asDiagonal();
    const Eigen::Vector2d ground =
        geometry::project_image_to_ground(model, {6.0, 8.0});
    CHECK(ground.x() == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(ground.y() == doctest::Approx(4.0).epsilon(1e-12));
  }

  TEST_CASE("singular and ill-conditioned homographies are rejected") {
    CameraModel model;
    model.ground_homography_matrix = Eigen::Matrix3d::Zero();
    model.ground_homography_matrix(0, 0) = 1.0;
    model.ground_homography_matrix(1, 1) = 1.0;
    CHECK_THROWS_AS(geometry::project_image_to_ground(model, {1.0, 1.0}),
                    DegenerateHomographyError);

    model.ground_homography_matrix =
        Eigen::Vector3d(1.0, 1.0, 1e13).asDiagonal();
    CHECK_THROWS_AS(geometry::project_image_to_ground(model, {1.0, 1.0}),
                    DegenerateHomographyError);

    model.ground_homography_matrix =
        Eigen::Vector3d(1e11, 1e11, 1.0).asDiagonal();
    CHECK_NOTHROW(geometry::project_image_to_ground(model, {1.0, 1.0}));
  }

  TEST_CASE("pixels on the horizon are rejected") {
    CameraModel model;
    // Inverse maps (u, v, 1) to (u, v, 1 - u): w vanishes along u = 1.
    Eigen::Matrix3d h_inv;
    h_inv << 1, 0, 0, 0, 1, 0, -1, 0, 1;
    model.ground_homography_matrix = h_inv.inverse();
    CHECK_THROWS_AS(geometry::project_image_to_ground(model, {1.0, 5.0}),
                    HorizonError);
    CHECK_NOTHROW(geometry::project_image_to_ground(model, {0.5, 5.0}));
  }

  TEST_CASE("projection round-trips on the ground plane for preset rigs") {
    for (const auto preset :
         {sim::RigPreset::kWildtrackLike, sim::RigPreset::kMultiviewxLike}) {
      const auto rig = sim::default_rig(preset);
      Rng rng(7);
      for (const auto& camera : rig.cameras) {
        int tested = 0;
        while (tested < 100) {
          const Eigen::Vector3d world(rng.uniform(0.0, rig.area_x),
                                      rng.uniform(0.0, rig.area_y), 0.0);
          const auto image = geometry::try_project_world_to_image(camera, world);
          if (!image) continue;
          ++tested;
          const Eigen::Vector2d back =
              geometry::project_image_to_ground(camera, image->uv);
          CHECK((back - world.head<2>()).norm() < 1e-6);
        }
      }
    }
  }

  TEST_CASE("world_to_grid quantizes with fractional offsets") {
    GroundGrid grid;
    grid.cell_size = 0.1;
    grid.rows = 120;
    grid.cols = 360;
    const auto coord = geometry::world_to_grid(grid, 1.23, 0.07);
    CHECK(coord.row == 12);
    CHECK(coord.col == 0);
    CHECK(coord.offset_x == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(coord.offset_y == doctest::Approx(0.7).epsilon(1e-9));

    const auto origin = geometry::world_to_grid(grid, 0.0, 0.0);
    CHECK(origin.row == 0);
    CHECK(origin.col == 0);
    CHECK(origin.offset_x == 0.0);
    CHECK(origin.offset_y == 0.0);

    CHECK_THROWS_AS(geometry::world_to_grid(grid, -0.01, 0.0), OutOfBoundsError);
    CHECK_THROWS_AS(geometry::world_to_grid(grid, 0.0, 36.0), OutOfBoundsError);
  }

  TEST_CASE("grid_to_world inverts the quantization") {
    GroundGrid grid;
    grid.cell_size = 0.1;
    grid.rows = 120;
    grid.cols = 360;
    const Eigen::Vector2d world = geometry::grid_to_world(grid, 12, 0, 0.3, 0.7);
    CHECK(world.x() == doctest::Approx(1.23).epsilon(1e-12));
    CHECK(world.y() == doctest::Approx(0.07).epsilon(1e-12));
    const Eigen::Vector2d corner = geometry::grid_to_world(grid, 0, 0);
    CHECK(corner.x() == 0.0);
    CHECK(corner.y() == 0.0);
    CHECK_THROWS_AS(geometry::grid_to_world(grid, -1, 0), OutOfBoundsError);
    CHECK_THROWS_AS(geometry::grid_to_world(grid, 0, 360), OutOfBoundsError);
  }

  TEST_CASE("grid round trip is exact to 1e-12 on 1000 random points") {
    GroundGrid grid;
    grid.origin_x = -3.0;
    grid.origin_y = 2.0;
    grid.cell_size = 0.25;
    grid.rows = 40;
    grid.cols = 80;
    Rng rng(555);
    for (int i = 0; i < 1000; ++i) {
      const double x = grid.origin_x + rng.uniform() * grid.rows * grid.cell_size;
      const double y = grid.origin_y + rng.uniform() * grid.cols * grid.cell_size;
      const auto coord = geometry::world_to_grid(grid, x, y);
      CHECK(coord.offset_x >= 0.0);
      CHECK(coord.offset_x < 1.0);
      CHECK(coord.offset_y >= 0.0);
      CHECK(coord.offset_y < 1.0);
      const Eigen::Vector2d back = geometry::grid_to_world(
          grid, coord.row, coord.col, coord.offset_x, coord.offset_y);
      CHECK(std::abs(back.x() - x) < 1e-12);
      CHECK(std::abs(back.y() - y) < 1e-12);
    }
  }

  TEST_CASE("grid validation rejects degenerate grids") {
    GroundGrid grid;
    grid.cell_size = 0.0;
    grid.rows = 1;
    grid.cols = 1;
    CHECK_THROWS_AS(geometry::validate(grid), ValidationError);
    grid.cell_size = 0.1;
    grid.rows = 0;
    CHECK_THROWS_AS(geometry::validate(grid), ValidationError);
  }

  TEST_CASE("rotation checks accept rotations and reject reflections") {
    CHECK(geometry::is_rotation(Eigen::Matrix3d::Identity()));
    const Eigen::Matrix3d r = rotation_from_angles(0.3, -0.8, 1.2);
    CHECK(geometry::is_rotation(r));
    Eigen::Matrix3d reflection = Eigen::Matrix3d::Identity();
    reflection(2, 2) = -1.0;
    CHECK_FALSE(geometry::is_rotation(reflection));
    CHECK_FALSE(geometry::is_rotation(1.0001 * r));
  }

  TEST_CASE("nearest_rotation projects back onto the rotation group") {
    Rng rng(8);
    const Eigen::Matrix3d r = rotation_from_angles(0.4, 0.9, -0.2);
    Eigen::Matrix3d noisy = r;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) noisy(i, j) += 1e-4 * rng.normal();
    }
    const Eigen::Matrix3d snapped = geometry::nearest_rotation(noisy);
    CHECK(geometry::is_rotation(snapped));
    CHECK((snapped - r).cwiseAbs().maxCoeff() < 1e-3);

    // A reflection still snaps to a proper rotation (det +1).
    Eigen::Matrix3d reflection = Eigen::Matrix3d::Identity();
    reflection(2, 2) = -1.0;
    CHECK(geometry::is_rotation(geometry::nearest_rotation(reflection)));
  }

  TEST_CASE("perturb_translation: zero sigma, determinism, calibrated spread") {
    CameraExtrinsics ext;
    ext.translation = Eigen::Vector3d(1.0, 2.0, 3.0);

    Rng rng(1);
    const auto same = geometry::perturb_translation(ext, 0.0, rng);
    CHECK((same.translation - ext.translation).cwiseAbs().maxCoeff() == 0.0);
    CHECK((same.rotation - ext.rotation).cwiseAbs().maxCoeff() == 0.0);

    Rng a(2), b(2);
    const auto pa = geometry::perturb_translation(ext, 0.5, a);
    const auto pb = geometry::perturb_translation(ext, 0.5, b);
    CHECK((pa.translation - pb.translation).cwiseAbs().maxCoeff() == 0.0);

    Rng rng2(3);
    const int n = 10000;
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    Eigen::Vector3d sum_sq = Eigen::Vector3d::Zero();
    for (int i = 0; i < n; ++i) {
      const auto p = geometry::perturb_translation(ext, 0.1, rng2);
      const Eigen::Vector3d d = p.translation - ext.translation;
      sum += d;
      sum_sq += d.cwiseProduct(d);
    }
    for (int c = 0; c < 3; ++c) {
      const double mean = sum(c) / n;
      const double var = sum_sq(c) / n - mean * mean;
      const double std = std::sqrt(var);
      CHECK(std >= 0.097);
      CHECK(std <= 0.103);
    }
  }
}
