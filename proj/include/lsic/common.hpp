#ifndef LSIC_COMMON_HPP_
#define LSIC_COMMON_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lsic {

#ifdef LSIC_SINGLE_PRECISION
using real = float;
#else
using real = double;
#endif

using Vec = Eigen::Matrix<real, Eigen::Dynamic, 1>;
using Mat = Eigen::Matrix<real, Eigen::Dynamic, Eigen::Dynamic>;
// Row-major variant for tables whose rows are sliced individually
// (embedding tables, factor matrices).
using RowMat = Eigen::Matrix<real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline real logistic(real x) { return real(1) / (real(1) + std::exp(-x)); }

// Error taxonomy. The CLI maps these onto its exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SplitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lsic

#endif  // LSIC_COMMON_HPP_
