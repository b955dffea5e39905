#ifndef LSIC_GRADCHECK_HPP_
#define LSIC_GRADCHECK_HPP_

#include "lsic/tensor.hpp"

#include <functional>
#include <string>

namespace lsic {

struct GradCheckReport {
  real max_rel_error = 0;
  std::string worst_tensor;
  Eigen::Index worst_index = -1;
  int coords_checked = 0;
};

// Central finite-difference verification of analytic gradients.
//
// `f(with_grads)` evaluates the scalar loss at the current parameter values;
// when `with_grads` is true it must also overwrite every trainable tensor's
// grad buffer with the analytic gradient. The check samples up to
// `coords_per_tensor` coordinates of each trainable tensor and reports
//   max |analytic - (f(v+eps) - f(v-eps)) / 2eps| / max(1, |analytic|).
// Throws if `f` is not deterministic (two plain evaluations differ) or if
// epsilon is outside [1e-7, 1e-3].
GradCheckReport finite_diff_check(const std::function<real(bool)>& f,
                                  ParamSet& params, real epsilon, Rng& rng,
                                  int coords_per_tensor = 8);

}  // namespace lsic

#endif  // LSIC_GRADCHECK_HPP_
