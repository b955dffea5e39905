#ifndef LSIC_TENSOR_HPP_
#define LSIC_TENSOR_HPP_

#include "lsic/common.hpp"
#include "lsic/rng.hpp"

#include <memory>
#include <string>
#include <vector>

namespace lsic {

// A named trainable array with a matching gradient buffer. 2-d tensors are
// stored row-major so that rows (embedding/factor rows) are contiguous.
struct ParamTensor {
  std::string name;
  std::vector<int> shape;
  Eigen::Array<real, Eigen::Dynamic, 1> values;
  Eigen::Array<real, Eigen::Dynamic, 1> grad;
  bool trainable = true;

  ParamTensor() = default;
  ParamTensor(std::string n, std::vector<int> s);

  Eigen::Index size() const { return values.size(); }
  int rows() const { return shape.empty() ? 0 : shape[0]; }
  int cols() const { return shape.size() > 1 ? shape[1] : 1; }

  Eigen::Map<RowMat> mat() {
    return Eigen::Map<RowMat>(values.data(), rows(), cols());
  }
  Eigen::Map<const RowMat> mat() const {
    return Eigen::Map<const RowMat>(values.data(), rows(), cols());
  }
  Eigen::Map<RowMat> grad_mat() {
    return Eigen::Map<RowMat>(grad.data(), rows(), cols());
  }
  Eigen::Map<Vec> vec() { return Eigen::Map<Vec>(values.data(), size()); }
  Eigen::Map<const Vec> vec() const {
    return Eigen::Map<const Vec>(values.data(), size());
  }
  Eigen::Map<Vec> grad_vec() { return Eigen::Map<Vec>(grad.data(), size()); }

  auto row(int r) { return mat().row(r); }
  auto row(int r) const { return mat().row(r); }
  auto grad_row(int r) { return grad_mat().row(r); }

  void zero_grad() { grad.setZero(); }
  bool values_finite() const { return values.isFinite().all(); }
  bool grad_finite() const { return grad.isFinite().all(); }
};

// Owning, ordered registry of tensors. Iteration order is insertion order,
// which keeps reductions and checkpoints deterministic.
class ParamSet {
 public:
  ParamTensor* add(std::string name, std::vector<int> shape);
  ParamTensor* find(const std::string& name);
  const ParamTensor* find(const std::string& name) const;

  std::vector<std::unique_ptr<ParamTensor>>& tensors() { return tensors_; }
  const std::vector<std::unique_ptr<ParamTensor>>& tensors() const {
    return tensors_;
  }

  void zero_grads();
  Eigen::Index total_size() const;

 private:
  std::vector<std::unique_ptr<ParamTensor>> tensors_;
};

// Fills a fresh tensor with i.i.d. uniform draws from [low, high).
ParamTensor init_uniform(const std::string& name, const std::vector<int>& shape,
                         real low, real high, Rng& rng);
// In-place variant used when the tensor already lives in a ParamSet.
void fill_uniform(ParamTensor& t, real low, real high, Rng& rng);

}  // namespace lsic

#endif  // LSIC_TENSOR_HPP_
