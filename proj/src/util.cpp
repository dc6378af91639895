#include "spnbn/util.hpp"

#include <cmath>

#include "spnbn/error.hpp"

namespace spnbn {

AssignmentSpace::AssignmentSpace(std::vector<int> cards) : cards_(std::move(cards)) {
  for (int c : cards_) {
    if (c < 1) throw Error("assignment space: cardinality must be >= 1");
    size_ *= static_cast<std::size_t>(c);
  }
}

std::vector<int> AssignmentSpace::decode(std::size_t index) const {
  std::vector<int> out(cards_.size());
  decode_into(index, out);
  return out;
}

void AssignmentSpace::decode_into(std::size_t index, std::vector<int>& out) const {
  out.resize(cards_.size());
  for (int i = static_cast<int>(cards_.size()) - 1; i >= 0; --i) {
    out[i] = static_cast<int>(index % cards_[i]);
    index /= cards_[i];
  }
}

std::size_t AssignmentSpace::encode(const std::vector<int>& values) const {
  std::size_t index = 0;
  for (std::size_t i = 0; i < cards_.size(); ++i) {
    index = index * cards_[i] + static_cast<std::size_t>(values[i]);
  }
  return index;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  return mix64(seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

std::int64_t quantize_weight(double w) {
  return static_cast<std::int64_t>(std::llround(w * 1e12));
}

}  // namespace spnbn
