#include "rydcft/hilbert.hpp"

#include <string>

#include "rydcft/errors.hpp"
#include "rydcft/sparse_operator.hpp"

namespace rydcft {

State reflect_bits(State s, int L) {
  State r = 0;
  for (int i = 0; i < L; ++i) {
    if ((s >> i) & 1u) r |= State{1} << (L - 1 - i);
  }
  return r;
}

std::uint64_t constrained_dimension(int L) {
  if (L < 0) throw SizeError("negative chain length");
  std::uint64_t a = 1, b = 2;  // d(0), d(1)
  for (int i = 0; i < L; ++i) {
    const std::uint64_t c = a + b;
    a = b;
    b = c;
  }
  return a;
}

namespace {

// Highest site first, 0 before 1: yields ascending numeric order.
void fill_states(int pos, State prefix, bool prev_set, std::vector<State>& out) {
  if (pos < 0) {
    out.push_back(prefix);
    return;
  }
  fill_states(pos - 1, prefix, false, out);
  if (!prev_set) fill_states(pos - 1, prefix | (State{1} << pos), true, out);
}

}  // namespace

ConstrainedBasis::ConstrainedBasis(int L) : L_(L) {
  if (L < 1 || L > kMaxSites) {
    throw SizeError("chain length L=" + std::to_string(L) + " outside supported range 1.." +
                    std::to_string(kMaxSites));
  }
  states_.reserve(constrained_dimension(L));
  fill_states(L - 1, 0, false, states_);
  rank_weight_.resize(L);
  for (int p = 0; p < L; ++p) rank_weight_[p] = constrained_dimension(p);
}

std::optional<std::size_t> ConstrainedBasis::index_of(State s) const {
  if (!is_blockade_allowed(s) || (L_ < 32 && (s >> L_) != 0)) return std::nullopt;
  // A set bit at position p outranks every allowed pattern of the p lower bits.
  std::uint64_t rank = 0;
  while (s != 0) {
    const int p = 31 - __builtin_clz(s);
    rank += rank_weight_[p];
    s &= ~(State{1} << p);
  }
  return static_cast<std::size_t>(rank);
}

ConstrainedBasis enumerate_basis(int L) { return ConstrainedBasis(L); }

Permutation reflection_permutation(const ConstrainedBasis& basis) {
  Permutation perm(basis.size());
  const int L = basis.length();
  for (std::size_t k = 0; k < basis.size(); ++k) {
    perm[k] = *basis.index_of(reflect_bits(basis.state(k), L));
  }
  return perm;
}

SparseOperator local_number_operator(const ConstrainedBasis& basis, int site) {
  if (site < 1 || site > basis.length()) {
    throw DomainError("site " + std::to_string(site) + " outside 1.." +
                      std::to_string(basis.length()));
  }
  Eigen::VectorXd d(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) d[k] = occupation(basis.state(k), site);
  return SparseOperator::diagonal(d);
}

}  // namespace rydcft
