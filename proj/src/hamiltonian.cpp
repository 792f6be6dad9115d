#include "rydcft/hamiltonian.hpp"

#include <cmath>
#include <numbers>

#include "rydcft/errors.hpp"

namespace rydcft {

void ChainParams::validate() const {
  if (L < 1 || L > kMaxSites) throw SizeError("L=" + std::to_string(L) + " outside 1..31");
  if (!local_detunings.empty() && static_cast<int>(local_detunings.size()) != L)
    throw ValidationError("local_detunings must have L entries");
  if (eta < 0.0 || eta > 1.0) throw DomainError("eta must lie in [0,1]");
  if (tail_range < 0) throw ValidationError("tail_range must be >= 0 (0 = all)");
  if (include_h2 && v1 == 0.0) throw DomainError("v1 = 0 with include_h2: division by zero");
  for (double x : {omega, delta, v1, v2, eta})
    if (!std::isfinite(x)) throw ValidationError("non-finite chain parameter");
}

double ChainParams::local_detuning(int site) const {
  return local_detunings.empty() ? 0.0 : local_detunings[static_cast<std::size_t>(site - 1)];
}

double ChainParams::v2_over_omega() const {
  if (omega == 0.0) throw DomainError("omega = 0: ratio undefined");
  return v2 / omega;
}

double ChainParams::delta_over_omega() const {
  if (omega == 0.0) throw DomainError("omega = 0: ratio undefined");
  return delta / omega;
}

ChainParams ChainParams::fss(int L, double omega, double delta, double v2) {
  ChainParams p;
  p.L = L;
  p.omega = omega;
  p.delta = delta;
  p.v2 = v2;
  p.tail_range = 2;
  return p;
}

std::vector<double> boundary_detuning_profile(int L, double v2) {
  if (L < 1) throw SizeError("L must be >= 1");
  std::vector<double> d(static_cast<std::size_t>(L));
  for (int i = 1; i <= L; ++i)
    d[i - 1] = -64.0 * v2 * (std::pow(i + 1.0, -6.0) + std::pow(L + 2.0 - i, -6.0));
  return d;
}

namespace {

void check_basis(const ConstrainedBasis& basis, const ChainParams& p) {
  p.validate();
  if (basis.length() != p.L)
    throw ValidationError("basis length " + std::to_string(basis.length()) +
                          " does not match L=" + std::to_string(p.L));
}

SparseOperator kinetic_operator(const ConstrainedBasis& basis) {
  const int L = basis.length();
  SparseOperator::RowBuilder b(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const State s = basis.state(k);
    for (int i = 0; i < L; ++i) {
      const State t = s ^ (State{1} << i);
      if (is_blockade_allowed(t)) b.add(static_cast<Index>(*basis.index_of(t)), 0.5);
    }
    b.end_row();
  }
  return b.finish();
}

Eigen::VectorXd tail_and_local_diagonal(const ConstrainedBasis& basis, const ChainParams& p) {
  const int L = p.L;
  const int range = p.tail_range == 0 ? L : p.tail_range;
  std::vector<double> coupling(static_cast<std::size_t>(L) + 1, 0.0);
  for (int r = 2; r <= std::min(range, L - 1); ++r) coupling[r] = 64.0 * p.v2 / std::pow(r, 6.0);
  std::vector<double> site_shift(static_cast<std::size_t>(L));
  const auto bd = boundary_detuning_profile(L, p.v2);
  for (int i = 1; i <= L; ++i) site_shift[i - 1] = p.local_detuning(i) + p.eta * bd[i - 1];

  Eigen::VectorXd d(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const State s = basis.state(k);
    double e = 0.0;
    for (int i = 0; i < L; ++i) {
      if (!((s >> i) & 1u)) continue;
      e -= site_shift[i];
      for (int r = 2; r <= std::min(range, L - 1 - i); ++r)
        if ((s >> (i + r)) & 1u) e += coupling[r];
    }
    d[k] = e;
  }
  return d;
}

// Second-order correction with the -omega^2/(4 v1) prefactor replaced by -1/(4 v1).
SparseOperator h2_unit_operator(const ConstrainedBasis& basis, double v1) {
  const int L = basis.length();
  const double pref = -1.0 / (4.0 * v1);
  SparseOperator::RowBuilder b(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const State s = basis.state(k);
    double diag = 2.0 * __builtin_popcount(s);
    for (int i = 1; i + 1 < L; ++i)
      if (((s >> (i - 1)) & 1u) && ((s >> (i + 1)) & 1u)) diag -= 1.5;
    b.add(static_cast<Index>(k), pref * diag);
    // Hop across bond (i, i+1) in either direction whenever the result obeys the blockade.
    for (int i = 0; i + 1 < L; ++i) {
      const State pair = (s >> i) & 3u;
      if (pair == 1u || pair == 2u) {
        const State t = s ^ (State{3} << i);
        if (is_blockade_allowed(t)) b.add(static_cast<Index>(*basis.index_of(t)), pref);
      }
    }
    b.end_row();
  }
  return b.finish();
}

}  // namespace

SparseOperator HamiltonianTerms::assemble(double omega, double delta) const {
  std::vector<std::pair<double, const SparseOperator*>> t{
      {omega, &kinetic}, {-delta, &number}, {1.0, &fixed}};
  if (has_h2) t.emplace_back(omega * omega, &h2_unit);
  return SparseOperator::combine(t);
}

HamiltonianTerms build_hamiltonian_terms(const ConstrainedBasis& basis, const ChainParams& p) {
  check_basis(basis, p);
  HamiltonianTerms h;
  h.kinetic = kinetic_operator(basis);
  Eigen::VectorXd n(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) n[k] = __builtin_popcount(basis.state(k));
  h.number = SparseOperator::diagonal(n);
  h.fixed = SparseOperator::diagonal(tail_and_local_diagonal(basis, p));
  h.has_h2 = p.include_h2;
  h.h2_unit = p.include_h2 ? h2_unit_operator(basis, p.v1) : SparseOperator(basis.size());
  return h;
}

SparseOperator build_hamiltonian(const ConstrainedBasis& basis, const ChainParams& p) {
  return build_hamiltonian_terms(basis, p).assemble(p.omega, p.delta);
}

SparseOperator build_h2_correction(const ConstrainedBasis& basis, const ChainParams& p) {
  if (basis.length() != p.L) throw ValidationError("basis length does not match L");
  if (p.v1 == 0.0) throw DomainError("v1 = 0: second-order correction diverges");
  const SparseOperator unit = h2_unit_operator(basis, p.v1);
  return SparseOperator::combine({{p.omega * p.omega, &unit}});
}

SparseOperator build_h_eta(const ConstrainedBasis& basis, const ChainParams& p_tci, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("eta must lie in [0,1]");
  ChainParams p = p_tci;
  p.eta = eta;
  return build_hamiltonian(basis, p);
}

SparseOperator cdw_operator(const ConstrainedBasis& basis, int bond) {
  if (bond < 1 || bond >= basis.length())
    throw DomainError("bond " + std::to_string(bond) + " outside 1..L-1");
  const double sign = (bond % 2 == 1) ? 1.0 : -1.0;  // (-1)^(i+1)
  Eigen::VectorXd d(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const State s = basis.state(k);
    d[k] = sign * (occupation(s, bond) - occupation(s, bond + 1));
  }
  return SparseOperator::diagonal(d);
}

SparseOperator total_cdw_operator(const ConstrainedBasis& basis) {
  const int L = basis.length();
  Eigen::VectorXd d = Eigen::VectorXd::Zero(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const State s = basis.state(k);
    for (int i = 1; i < L; ++i)
      d[k] += ((i % 2 == 1) ? 1.0 : -1.0) * (occupation(s, i) - occupation(s, i + 1));
  }
  return SparseOperator::diagonal(d);
}

double EdgeCdw::value(const Eigen::VectorXd& psi) const {
  return 0.5 * (std::abs(left.expectation(psi)) + std::abs(right.expectation(psi)));
}

EdgeCdw edge_cdw_observable(const ConstrainedBasis& basis) {
  if (basis.length() < 2) throw DomainError("edge order needs L >= 2");
  return EdgeCdw{cdw_operator(basis, 1), cdw_operator(basis, basis.length() - 1)};
}

SparseOperator weighted_number_operator(const ConstrainedBasis& basis, const std::vector<double>& w) {
  if (static_cast<int>(w.size()) != basis.length())
    throw ValidationError("site weights must have L entries");
  Eigen::VectorXd d = Eigen::VectorXd::Zero(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const State s = basis.state(k);
    for (int i = 1; i <= basis.length(); ++i)
      if (occupation(s, i)) d[k] += w[i - 1];
  }
  return SparseOperator::diagonal(d);
}

std::vector<double> wavevector_profile(int L, double k, double alpha) {
  std::vector<double> w(static_cast<std::size_t>(L));
  for (int i = 1; i <= L; ++i) w[i - 1] = std::cos(k * (i - 0.5 * (L + 1)) + alpha);
  return w;
}

std::vector<double> odd_parity_profile(int L) {
  if (L < 2) throw SizeError("odd-parity profile needs L >= 2");
  std::vector<double> w(static_cast<std::size_t>(L));
  for (int i = 1; i <= L; ++i) w[i - 1] = std::cos(std::numbers::pi * (i - 1) / (L - 1));
  return w;
}

}  // namespace rydcft
