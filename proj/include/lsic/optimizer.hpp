#ifndef LSIC_OPTIMIZER_HPP_
#define LSIC_OPTIMIZER_HPP_

#include "lsic/tensor.hpp"

namespace lsic {

struct OptimizerConfig {
  real learning_rate = real(1e-4);
  real clip_range = real(0.2);  // updates clipped per-coordinate to [-c, c]
  real l2_lambda = real(0.05);

  void validate() const {
    if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
    if (!(clip_range > 0)) throw ConfigError("clip_range must be > 0");
    if (l2_lambda < 0) throw ConfigError("l2_lambda must be >= 0");
  }
};

// One SGD step over every trainable tensor:
//   v <- v - lr * clip(grad + l2_lambda * v, -c, c)
// Grads are zeroed afterward. Throws TrainingError naming the tensor on a
// non-finite gradient or parameter.
void sgd_step(ParamSet& params, const OptimizerConfig& cfg);

}  // namespace lsic

#endif  // LSIC_OPTIMIZER_HPP_
