#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace rydcft {

class SparseOperator;

// Bit-packed occupation pattern; site i (1-based) lives in bit i-1.
using State = std::uint32_t;

inline constexpr int kMaxSites = 31;

inline bool is_blockade_allowed(State s) { return (s & (s >> 1)) == 0; }
inline int occupation(State s, int site) { return static_cast<int>((s >> (site - 1)) & 1u); }
State reflect_bits(State s, int L);

// Fibonacci-like count d(L) of adjacency-free strings; d(0)=1 is used internally.
std::uint64_t constrained_dimension(int L);

class ConstrainedBasis {
 public:
  explicit ConstrainedBasis(int L);

  int length() const { return L_; }
  std::size_t size() const { return states_.size(); }
  State state(std::size_t k) const { return states_[k]; }
  const std::vector<State>& states() const { return states_; }

  // O(L) rank of an allowed pattern; nullopt for patterns outside the space.
  std::optional<std::size_t> index_of(State s) const;

 private:
  int L_;
  std::vector<State> states_;
  std::vector<std::uint64_t> rank_weight_;
};

ConstrainedBasis enumerate_basis(int L);

using Permutation = std::vector<std::size_t>;

Permutation reflection_permutation(const ConstrainedBasis& basis);

SparseOperator local_number_operator(const ConstrainedBasis& basis, int site);

}  // namespace rydcft
