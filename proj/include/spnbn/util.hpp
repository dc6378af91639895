#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace spnbn {

// Mixed-radix assignment space over a fixed list of cardinalities.
// Index 0 corresponds to the all-zero assignment; the LAST position is the
// fastest-moving digit, so the first position is the most significant.
class AssignmentSpace {
 public:
  AssignmentSpace() = default;
  explicit AssignmentSpace(std::vector<int> cards);

  std::size_t size() const { return size_; }
  int arity() const { return static_cast<int>(cards_.size()); }
  const std::vector<int>& cards() const { return cards_; }

  std::vector<int> decode(std::size_t index) const;
  void decode_into(std::size_t index, std::vector<int>& out) const;
  std::size_t encode(const std::vector<int>& values) const;

 private:
  std::vector<int> cards_;
  std::size_t size_ = 1;
};

// splitmix64; used for fingerprints and deterministic seeding.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value);

// Weight quantization used by structural fingerprints (12 decimal places).
std::int64_t quantize_weight(double w);

}  // namespace spnbn
