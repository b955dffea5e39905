#include "lsic/optimizer.hpp"

namespace lsic {

void sgd_step(ParamSet& params, const OptimizerConfig& cfg) {
  cfg.validate();
  const real c = cfg.clip_range;
  for (auto& tp : params.tensors()) {
    ParamTensor& t = *tp;
    if (!t.trainable) continue;
    if (!t.grad_finite())
      throw TrainingError("non-finite gradient in tensor '" + t.name + "'");
    t.values -= cfg.learning_rate *
                (t.grad + cfg.l2_lambda * t.values).min(c).max(-c);
    if (!t.values_finite())
      throw TrainingError("non-finite values in tensor '" + t.name +
                          "' after sgd step");
    t.zero_grad();
  }
}

}  // namespace lsic
