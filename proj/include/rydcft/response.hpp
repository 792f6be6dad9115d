#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

#include "rydcft/schedule.hpp"
#include "rydcft/spectral.hpp"

namespace rydcft {

struct ResponsePoint {
  double f = 0.0;      // MHz
  double value = 0.0;
  double sigma = 0.0;  // 0 when not applicable
  bool flagged = false;
};

struct ResponseCurve {
  enum class Kind { delta_n, linear_response, dsf };
  Kind kind = Kind::delta_n;
  std::vector<ResponsePoint> points;
  std::string provenance;

  std::vector<double> freqs() const;
  std::vector<double> values() const;
  void validate() const;  // ascending, finite
};

void write_response_csv(std::ostream& os, const ResponseCurve& c);

struct ThermalWeights {
  double beta = std::numeric_limits<double>::infinity();  // 1/(2 pi MHz)
  std::vector<double> weights;
  double truncation = 0.0;  // weight of the highest included state

  static ThermalWeights from_energies(const std::vector<double>& energies, double beta, double budget = 1e-6);
};

// F(nu) = (2 pi)^-1/2 int_0^T f(t) e^{-i nu t} dt with nu in rad/us. Square windows are
// closed form; the gaussian window is integrated over its actual [0, T] support.
std::complex<double> envelope_transform(const ModulationPulse& pulse, double nu);
// Closed form of the gaussian transform on the infinite line (centred at T/2).
std::complex<double> gaussian_transform_closed_form(double width, double center, double nu);

// Second-order population transfer including counter-rotating and cross terms. The
// cross-term phase refers to the envelope centre: cos(2 phi + omega T).
ResponseCurve quadratic_response_full(const TransitionTable& t, const ModulationPulse& pulse,
                                      const std::vector<double>& freqs);
ResponseCurve quadratic_response_full(const Spectrum& spec, const SparseOperator& K, const ModulationPulse& pulse,
                                      const std::vector<double>& freqs);

// Peak-resolved sum of Gaussians, (pi w^2 A^2/4) sum_e |K_ge|^2 exp(-w^2 (omega - dE)^2 / 2).
ResponseCurve quadratic_response_resolved(const TransitionTable& t, const ModulationPulse& pulse,
                                          const std::vector<double>& freqs, std::string* warning = nullptr);
ResponseCurve quadratic_response_resolved(const Spectrum& spec, const SparseOperator& K, const ModulationPulse& pulse,
                                          const std::vector<double>& freqs, std::string* warning = nullptr);

enum class PhaseRule { fixed, maximize };

// Exact first-order change of <Q> after the pulse, thermal initial state.
ResponseCurve linear_response_finite_T(const Spectrum& spec, const SparseOperator& K, const SparseOperator& Q,
                                       const ModulationPulse& pulse, const std::vector<double>& freqs, double beta,
                                       PhaseRule rule = PhaseRule::fixed);
// Same from precomputed matrix elements K_mn, Q_mn.
ResponseCurve linear_response_finite_T(const std::vector<double>& energies, const Eigen::MatrixXd& Kmn,
                                       const Eigen::MatrixXd& Qmn, const ModulationPulse& pulse,
                                       const std::vector<double>& freqs, double beta, PhaseRule rule);

// S(k, omega) from eigenstates with unit-area gaussian broadening (width in MHz; 0 = 3x the
// mean level spacing inside the frequency window). Value is per unit angular frequency.
ResponseCurve dsf_eigensum(const Spectrum& spec, const std::vector<SparseOperator>& o, double k,
                           const std::vector<double>& freqs, double beta, double broaden_mhz = 0.0,
                           double* used_broadening = nullptr);

// S = dQ / (pi f(T^-) A L (1 - e^{-beta omega})), A converted to angular units.
ResponseCurve dsf_from_modulation(const ResponseCurve& dq, double amplitude, int L, double beta, double envelope_tail);

// Lattice energy-density operators eps_{i+1/2} = n_i + n_{i+1}, i = 1..L-1, and n_i.
std::vector<SparseOperator> epsilon_operators(const ConstrainedBasis& basis);
std::vector<SparseOperator> number_operators(const ConstrainedBasis& basis);

}  // namespace rydcft
