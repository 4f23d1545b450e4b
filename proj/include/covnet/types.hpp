#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace covnet {

// Dense row-major storage; all numeric work is done in 64-bit floats.
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using Index = Eigen::Index;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or precondition violation by the caller.
struct ContractError : Error {
  using Error::Error;
};

// Non-finite values crossing a module boundary.
struct NumericError : Error {
  using Error::Error;
};

// Pair/triplet construction cannot proceed (e.g. singleton class).
struct MappingError : Error {
  using Error::Error;
};

// Filesystem failures.
struct IoError : Error {
  using Error::Error;
};

// Malformed input files; message carries the offending location.
struct FormatError : Error {
  using Error::Error;
};

// Checkpoint written by an incompatible format version.
struct VersionError : Error {
  using Error::Error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) throw NumericError(std::string(what) + ": non-finite entries");
}

}  // namespace covnet
