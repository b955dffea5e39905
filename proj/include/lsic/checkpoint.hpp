#ifndef LSIC_CHECKPOINT_HPP_
#define LSIC_CHECKPOINT_HPP_

#include "lsic/tensor.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace lsic {

// Self-describing on-disk container: magic + version, a JSON header with
// tensor names/shapes and metadata, then raw float64 blobs. Values round-trip
// bit-exactly.
class Checkpoint {
 public:
  struct Blob {
    std::vector<int> shape;
    std::vector<double> data;
  };

  std::map<std::string, Blob> tensors;
  std::map<std::string, std::string> strings;    // rng state, config hash, ...
  std::map<std::string, std::int64_t> counters;  // epochs, best epoch, ...

  void put(const std::string& name, const ParamTensor& t);
  void fill(const std::string& name, ParamTensor& t) const;
  bool has(const std::string& name) const { return tensors.count(name) > 0; }

  // Store/load a whole ParamSet under a name prefix ("g.", "d.", ...).
  void put_set(const std::string& prefix, const ParamSet& ps);
  void fill_set(const std::string& prefix, ParamSet& ps) const;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

}  // namespace lsic

#endif  // LSIC_CHECKPOINT_HPP_
