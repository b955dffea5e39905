#include "lsic/rng.hpp"

#include <algorithm>
#include <sstream>

namespace lsic {

std::vector<int> Rng::sample_without_replacement(int n, int k) {
  if (k >= n) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  // Floyd's algorithm.
  std::vector<int> picked;
  picked.reserve(k);
  for (int j = n - k; j < n; ++j) {
    const int t = uniform_int(j + 1);
    if (std::find(picked.begin(), picked.end(), t) == picked.end()) {
      picked.push_back(t);
    } else {
      picked.push_back(j);
    }
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

std::string Rng::state() const {
  std::ostringstream os;
  os << seed_ << ' ' << gen_;
  return os.str();
}

void Rng::restore(const std::string& s) {
  std::istringstream is(s);
  is >> seed_ >> gen_;
  if (!is) throw IoError("Rng::restore: malformed state string");
}

}  // namespace lsic
