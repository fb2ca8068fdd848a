#pragma once

#include <stdexcept>
#include <string>

namespace planerecon {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A mask or label volume that was expected to contain foreground is empty.
struct EmptyShapeError : Error {
  explicit EmptyShapeError(const std::string& msg) : Error(msg) {}
};

/// Two grids that must share dims/spacing/origin do not.
struct GridMismatchError : Error {
  explicit GridMismatchError(const std::string& msg) : Error(msg) {}
};

/// The analytic phantom is not fully contained in the requested grid.
struct TruncatedPhantomError : Error {
  explicit TruncatedPhantomError(const std::string& msg) : Error(msg) {}
};

/// Invalid or unsatisfiable acquisition configuration.
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Requested instant lies outside the reconstructable band.
struct OutOfBandError : Error {
  explicit OutOfBandError(const std::string& msg) : Error(msg) {}
};

/// A mask does not meet the intersection line of a secant plane pair.
struct NoIntersectionError : Error {
  explicit NoIntersectionError(const std::string& msg) : Error(msg) {}
};

/// Mask propagation produced an empty fused mask.
struct PropagationCollapseError : Error {
  explicit PropagationCollapseError(const std::string& msg) : Error(msg) {}
};

/// A slice series is missing entries required by its schedule.
struct IncompleteSeriesError : Error {
  explicit IncompleteSeriesError(const std::string& msg) : Error(msg) {}
};

/// File or stream level failure.
struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(msg) {}
};

/// Division by a zero reference quantity.
struct DivisionByZeroError : Error {
  explicit DivisionByZeroError(const std::string& msg) : Error(msg) {}
};

}  // namespace planerecon
