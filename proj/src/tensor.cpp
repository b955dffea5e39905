#include "lsic/tensor.hpp"

namespace lsic {

namespace {
Eigen::Index shape_size(const std::vector<int>& shape) {
  if (shape.empty()) throw std::invalid_argument("tensor shape is empty");
  Eigen::Index n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor dimension must be positive");
    n *= d;
  }
  return n;
}
}  // namespace

ParamTensor::ParamTensor(std::string n, std::vector<int> s)
    : name(std::move(n)), shape(std::move(s)) {
  const Eigen::Index sz = shape_size(shape);
  values.setZero(sz);
  grad.setZero(sz);
}

ParamTensor* ParamSet::add(std::string name, std::vector<int> shape) {
  if (find(name) != nullptr)
    throw std::invalid_argument("duplicate tensor name: " + name);
  tensors_.push_back(std::make_unique<ParamTensor>(std::move(name), std::move(shape)));
  return tensors_.back().get();
}

ParamTensor* ParamSet::find(const std::string& name) {
  for (auto& t : tensors_)
    if (t->name == name) return t.get();
  return nullptr;
}

const ParamTensor* ParamSet::find(const std::string& name) const {
  for (auto& t : tensors_)
    if (t->name == name) return t.get();
  return nullptr;
}

void ParamSet::zero_grads() {
  for (auto& t : tensors_) t->zero_grad();
}

Eigen::Index ParamSet::total_size() const {
  Eigen::Index n = 0;
  for (auto& t : tensors_) n += t->size();
  return n;
}

void fill_uniform(ParamTensor& t, real low, real high, Rng& rng) {
  if (!(low < high))
    throw std::invalid_argument("init_uniform: low must be < high");
  for (Eigen::Index i = 0; i < t.size(); ++i)
    t.values[i] = rng.uniform(low, high);
  t.zero_grad();
}

ParamTensor init_uniform(const std::string& name, const std::vector<int>& shape,
                         real low, real high, Rng& rng) {
  ParamTensor t(name, shape);
  fill_uniform(t, low, high, rng);
  return t;
}

}  // namespace lsic
