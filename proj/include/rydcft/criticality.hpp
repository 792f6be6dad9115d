#pragma once

#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "rydcft/hamiltonian.hpp"

namespace rydcft {

using Curve = std::vector<std::pair<double, double>>;  // (delta, value), delta ascending
using ScanLog = std::function<void(const std::string&)>;

struct CrossingPoint {
  int L_small = 0;
  int L_large = 0;
  double delta_x = 0.0;
  double value_x = 0.0;
};

struct ScalingSeries {
  std::vector<double> x;  // 1 / L_effective
  std::vector<double> y;
  int order = 1;
  std::vector<double> coeffs;  // y = c0 + c1 x + c2 x^2
  Eigen::MatrixXd covariance;
  double value = 0.0;  // extrapolation to x = 0
  double sigma = 0.0;
};

ScalingSeries extrapolate(const std::vector<double>& x, const std::vector<double>& y, int order);

// <sigma_{L/2}> of psi. Odd L uses bond (L-1)/2 + 1/2; even L averages the two central bonds.
double mid_chain_order(const ConstrainedBasis& basis, const Eigen::VectorXd& psi);
double sigma_rs_scale(int L);  // sin(pi/(L+2))^(-1/8)
double sigma_rs(const ConstrainedBasis& basis, const ChainParams& params);

// Root of the linear interpolation of a - b; curves share no grid requirement (b is
// interpolated onto a's points inside the common range).
CrossingPoint find_crossing(const Curve& a, const Curve& b, int L_a = 0, int L_b = 0);

struct CrossingOptions {
  double step = 0.02;  // grid spacing, units of omega
  double tol = 1e-4;   // bracket width, units of omega
  double lo = -std::numeric_limits<double>::infinity();  // search window, units of omega
  double hi = std::numeric_limits<double>::infinity();
  int max_steps = 80;  // outward grid steps on each side of the guess
};

// Grid walk outward from the guess (nearest sign change wins), then bisection on
// re-evaluated points. Arguments and options are in the same units as `scale`.
CrossingPoint find_crossing(const std::function<double(double)>& fa, const std::function<double(double)>& fb,
                            double guess, const CrossingOptions& opt, double scale = 1.0);

struct CrossingScan {
  std::vector<CrossingPoint> points;
  ScalingSeries delta_fit;  // delta_x / omega vs 1/L_centre
};

// sigma_RS crossings for pairs (L, L + pair_gap) drawn from Ls.
CrossingScan ising_crossing_scan(const ChainParams& base, const std::vector<int>& Ls, int pair_gap,
                                 double guess_over_omega, const CrossingOptions& opt = {}, int fit_order = 2,
                                 const ScanLog& log = {});

// (E_i - E_0) / (E_1 - E_0) over all states.
double gap_ratio(const ConstrainedBasis& basis, const ChainParams& params, int level);

struct RatioScan {
  std::vector<int> levels;
  std::map<int, std::vector<CrossingPoint>> crossings;
  std::map<int, ScalingSeries> ratio_fit;  // value_x vs 1/L_centre
  std::map<int, ScalingSeries> delta_fit;  // delta_x / omega vs 1/L_centre
};

// Consecutive odd pairs from Ls; ratios extrapolated with ratio_order, crossings with delta_order.
RatioScan tci_ratio_scan(const ChainParams& base, const std::vector<int>& Ls, const std::vector<int>& levels,
                         double guess_over_omega, const CrossingOptions& opt = {}, int ratio_order = 1,
                         int delta_order = 2, const ScanLog& log = {});

struct EtaPoint {
  double eta = 0.0;
  double e1 = 0.0;  // first gap in the parity sector
  double e2 = 0.0;
  double ratio = 0.0;
};

// Parity-resolved gaps of H(eta); parity = +1 or -1 relative to the ground state.
EtaPoint eta_point(const ConstrainedBasis& basis, const ChainParams& base, double eta, int parity = 1,
                   std::size_t n_states = 10);
std::vector<EtaPoint> eta_ratio_scan(const ChainParams& base, const std::vector<double>& etas, int parity = 1,
                                     const ScanLog& log = {});
// eta where the parity-resolved E2/E1 equals target, searched from a guess.
double eta_crossing(const ChainParams& base, double target, double guess, double step = 0.05, double tol = 1e-3,
                    int parity = 1);

}  // namespace rydcft
