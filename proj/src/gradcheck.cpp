#include "lsic/gradcheck.hpp"

#include <cmath>
#include <vector>

namespace lsic {

GradCheckReport finite_diff_check(const std::function<real(bool)>& f,
                                  ParamSet& params, real epsilon, Rng& rng,
                                  int coords_per_tensor) {
  if (!(epsilon >= real(1e-7) && epsilon <= real(1e-3)))
    throw std::invalid_argument("finite_diff_check: epsilon outside [1e-7, 1e-3]");

  const real l1 = f(false);
  const real l2 = f(false);
  if (l1 != l2)
    throw std::runtime_error("finite_diff_check: routine is not deterministic");

  params.zero_grads();
  f(true);

  // Snapshot analytic grads before the probing evaluations overwrite anything.
  std::vector<Eigen::Array<real, Eigen::Dynamic, 1>> analytic;
  for (auto& t : params.tensors()) analytic.push_back(t->grad);

  GradCheckReport report;
  for (std::size_t ti = 0; ti < params.tensors().size(); ++ti) {
    ParamTensor& t = *params.tensors()[ti];
    if (!t.trainable || t.size() == 0) continue;
    const int n = static_cast<int>(t.size());
    std::vector<int> coords = rng.sample_without_replacement(
        n, std::min(coords_per_tensor, n));
    for (int idx : coords) {
      const real saved = t.values[idx];
      t.values[idx] = saved + epsilon;
      const real lp = f(false);
      t.values[idx] = saved - epsilon;
      const real lm = f(false);
      t.values[idx] = saved;

      const real numeric = (lp - lm) / (2 * epsilon);
      const real exact = analytic[ti][idx];
      const real rel =
          std::abs(exact - numeric) / std::max(real(1), std::abs(exact));
      ++report.coords_checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_tensor = t.name;
        report.worst_index = idx;
      }
    }
  }
  // Leave grads as the analytic values for the caller.
  for (std::size_t ti = 0; ti < params.tensors().size(); ++ti)
    params.tensors()[ti]->grad = analytic[ti];
  return report;
}

}  // namespace lsic
