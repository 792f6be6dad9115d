#pragma once

#include <string>
#include <vector>

#include "rydcft/hilbert.hpp"
#include "rydcft/sparse_operator.hpp"

namespace rydcft {

// All energies are angular frequencies in units of 2*pi*MHz: a stored 6.0 means 2*pi x 6.0 MHz,
// which is also the frequency read off in MHz. Times are in microseconds.
struct ChainParams {
  int L = 0;
  double omega = 0.0;
  double delta = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
  std::vector<double> local_detunings;  // per site; empty means all zero
  double eta = 0.0;
  bool include_h2 = false;
  int tail_range = 0;  // largest |i-j| kept in the van der Waals tail; 0 keeps every pair

  void validate() const;
  double local_detuning(int site) const;  // 1-based
  double v2_over_omega() const;
  double delta_over_omega() const;

  // Interaction-range shortcuts.
  static ChainParams fss(int L, double omega, double delta, double v2);
};

// Hamiltonian split into pieces with simple time-dependent prefactors:
//   H = omega * kinetic - delta * number + fixed + omega^2 * h2_unit
struct HamiltonianTerms {
  SparseOperator kinetic;  // sum_i (1/2) P X P
  SparseOperator number;   // sum_i n_i
  SparseOperator fixed;    // tails and local detunings, including the eta profile
  SparseOperator h2_unit;  // second-order correction divided by omega^2 (zero when disabled)
  bool has_h2 = false;

  SparseOperator assemble(double omega, double delta) const;
};

HamiltonianTerms build_hamiltonian_terms(const ConstrainedBasis& basis, const ChainParams& p);
SparseOperator build_hamiltonian(const ConstrainedBasis& basis, const ChainParams& p);
SparseOperator build_h2_correction(const ConstrainedBasis& basis, const ChainParams& p);

std::vector<double> boundary_detuning_profile(int L, double v2);
SparseOperator build_h_eta(const ConstrainedBasis& basis, const ChainParams& p_tci, double eta);

// Staggered bond order (-1)^(i+1) (n_i - n_{i+1}) on bond i+1/2; i in 1..L-1.
SparseOperator cdw_operator(const ConstrainedBasis& basis, int bond);
// Sum of the bond order over every bond.
SparseOperator total_cdw_operator(const ConstrainedBasis& basis);

struct EdgeCdw {
  SparseOperator left;   // bond 3/2
  SparseOperator right;  // bond L-1/2
  // (|<left>| + |<right>|)/2
  double value(const Eigen::VectorXd& psi) const;
};
EdgeCdw edge_cdw_observable(const ConstrainedBasis& basis);

// sum_i w_i n_i
SparseOperator weighted_number_operator(const ConstrainedBasis& basis, const std::vector<double>& w);
// cos(k j + alpha) with centred site index j = i - (L+1)/2
std::vector<double> wavevector_profile(int L, double k, double alpha);
// cos(pi (i-1)/(L-1)): the reflection-odd drive pattern
std::vector<double> odd_parity_profile(int L);

}  // namespace rydcft
