#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rydcft/hamiltonian.hpp"

namespace rydcft {

enum : int { kParityOdd = -1, kParityAmbiguous = 0, kParityEven = 1 };

struct Spectrum {
  std::vector<double> energies;          // ascending
  std::vector<int> parities;             // empty until labelled
  std::vector<double> reflection_value;  // <psi|R|psi> per state after labelling
  Eigen::MatrixXd vectors;               // columns; empty when not kept
  std::optional<ChainParams> meta;
  std::string method;
  int iterations = 0;
  double max_relative_residual = 0.0;

  std::size_t size() const { return energies.size(); }
  bool has_vectors() const { return vectors.cols() == static_cast<Eigen::Index>(energies.size()) && !energies.empty(); }
  std::vector<double> gaps() const;
  Eigen::VectorXd vector(std::size_t k) const { return vectors.col(static_cast<Eigen::Index>(k)); }
};

struct EigenOptions {
  double tol = 1e-9;                 // relative residual per Ritz pair
  int max_restarts = 400;
  std::size_t dense_threshold = 4000;
  std::size_t always_dense_below = 1000;
  int subspace = 0;                  // Lanczos basis size; 0 picks from n_states
  std::uint64_t seed = 20240611;
  bool keep_vectors = true;
  const Permutation* reflection = nullptr;  // when set, clusters are resolved and labelled
  double degeneracy_tol = 1e-8;
  const Eigen::VectorXd* start = nullptr;   // optional warm start
};

Spectrum eigensolve_lowest(const SparseOperator& H, std::size_t n_states, const EigenOptions& opt = {});

// Rotates degenerate clusters into reflection eigenstates and assigns +1/-1 (0 = flagged).
std::vector<int> parity_label(Spectrum& spec, const Permutation& R, double degeneracy_tol = 1e-8);

struct Transition {
  std::size_t index;
  double gap;       // E_e - E_g, same units as energies
  double strength;  // |<g|K|e>|^2
};

struct TransitionTable {
  std::size_t ground = 0;
  double diagonal = 0.0;  // |<g|K|g>|^2
  double k_squared = 0.0; // <g|K^2|g>
  std::vector<Transition> entries;
};

TransitionTable transition_strengths(const Spectrum& spec, const SparseOperator& K, std::size_t ground = 0);

// Matrix of <m|K|n> over the stored vectors.
Eigen::MatrixXd matrix_elements(const Spectrum& spec, const SparseOperator& K);

void write_spectrum_csv(std::ostream& os, const Spectrum& spec, const TransitionTable* table = nullptr);

}  // namespace rydcft
