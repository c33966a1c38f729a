#pragma once

#include <stdexcept>
#include <string>

namespace bevtrack {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid calibration data (non-orthonormal rotation, bad intrinsics, ...).
struct CalibrationError : Error {
  using Error::Error;
};

/// A world point lies behind the camera (projective depth <= eps).
struct BehindCameraError : Error {
  using Error::Error;
};

/// The ground homography is singular or numerically unusable.
struct DegenerateHomographyError : Error {
  using Error::Error;
};

/// An image ray is parallel to the ground plane (point at infinity).
struct HorizonError : Error {
  using Error::Error;
};

/// A world point falls outside the grid extent.
struct OutOfBoundsError : Error {
  using Error::Error;
};

/// Invalid configuration or malformed input file.
struct ConfigError : Error {
  using Error::Error;
};

/// File could not be read or written.
struct IoError : Error {
  using Error::Error;
};

/// Data violates a documented invariant (bad embedding, non-SPD matrix, ...).
struct ValidationError : Error {
  using Error::Error;
};

/// Frames presented to a stateful consumer out of order.
struct SequencingError : Error {
  using Error::Error;
};

/// A metric has no defined value on the given input (e.g. zero ground truth).
struct UndefinedMetricError : Error {
  using Error::Error;
};

}  // namespace bevtrack
