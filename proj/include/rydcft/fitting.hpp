#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "rydcft/response.hpp"

namespace rydcft {

// Residual vector r(p) and Jacobian dr/dp.
using ResidualFn = std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* J)>;
// Parameter vectors that the model refuses (e.g. negative widths).
using AcceptFn = std::function<bool(const Eigen::VectorXd& p)>;

struct LmOptions {
  int max_iterations = 500;
  double ftol = 1e-14;  // relative change of chi2
  double xtol = 1e-12;  // relative step size
  double lambda0 = 1e-3;
};

struct LmResult {
  Eigen::VectorXd p;
  double chi2 = 0.0;
  Eigen::MatrixXd jtj;
  int iterations = 0;
  bool converged = false;
};

LmResult levenberg_marquardt(const ResidualFn& f, Eigen::VectorXd p0, const AcceptFn& accept = {},
                             const LmOptions& opt = {});

struct Peak {
  double amplitude = 0.0;
  double center = 0.0;  // MHz
  double width = 0.0;   // MHz
};

struct FitWindow {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

struct PeakInit {
  std::optional<double> baseline;
  std::vector<Peak> peaks;
};

struct PeakFit {
  std::string kernel = "gaussian";  // or "three_term"
  double phi_f = 0.0;
  double baseline = 0.0;
  std::vector<Peak> peaks;  // sorted by center
  double chi2 = 0.0;
  int dof = 0;
  bool weighted = true;  // false: unit weights, chi2 is unweighted
  bool converged = false;
  Eigen::MatrixXd covariance;  // order: baseline, then (amplitude, center, width) per peak
  std::vector<double> param_sigma;  // sqrt of the covariance diagonal

  Eigen::VectorXd parameters() const;
  double center_sigma(std::size_t i) const { return param_sigma.at(2 + 3 * i); }
  double evaluate(double f) const;
};

// Candidate peaks: local maxima above baseline + 2 sigma_noise, tallest first; when fewer
// than n_peaks are found the tallest is split around its flanks.
PeakInit heuristic_peak_init(const ResponseCurve& c, int n_peaks, const FitWindow& window = {});

PeakFit multi_gaussian_fit(const ResponseCurve& c, int n_peaks, const FitWindow& window = {},
                           const PeakInit* init = nullptr, std::uint64_t seed = 1);
PeakFit three_term_gaussian_fit(const ResponseCurve& c, int n_peaks, double phi_f, const FitWindow& window = {},
                                const PeakInit* init = nullptr, std::uint64_t seed = 1);

// a0 + sum a exp(-((f-c)/w)^2) and the three-term kernel with cross term 2 cos(2 phi_f).
double gaussian_kernel(double f, const Peak& p);
double three_term_kernel(double f, const Peak& p, double phi_f);

struct OscFit {
  double offset = 0.0;
  double amplitude = 0.0;
  double omega = 0.0;  // rad/us
  double phase = 0.0;
  double tau = 0.0;    // us; infinity when no decay is resolved
  bool tau_unbounded = false;
  double sigma_offset = 0.0, sigma_amplitude = 0.0, sigma_omega = 0.0, sigma_phase = 0.0, sigma_tau = 0.0;
  double chi2 = 0.0;

  double frequency_mhz() const;
  double evaluate(double t) const;
};

// Periodogram peak of the mean-subtracted series, in rad/us.
double dominant_frequency(const std::vector<double>& t, const std::vector<double>& y);
OscFit damped_cosine_fit(const std::vector<double>& t, const std::vector<double>& y);

struct BootstrapResult {
  Eigen::VectorXd mean;
  Eigen::VectorXd sigma;
  int resamples = 0;
  int failures = 0;
  bool flagged = false;  // more than 20% of refits failed
};

using CurveFitOp = std::function<Eigen::VectorXd(const ResponseCurve&)>;
// Resamples each point from Normal(y, sigma^2) and refits; deterministic for a seed.
BootstrapResult bootstrap_uncertainty(const ResponseCurve& c, const CurveFitOp& fit, int n_resamples,
                                      std::uint64_t seed, int threads = 1);

struct HypothesisTest {
  double scale = 0.0;  // fitted MHz per unit normalized energy
  double chi2 = 0.0;
  int dof = 0;
  double reduced_chi2 = 0.0;
};

// One-parameter scale fit f ~ s r, chi2 = sum (f - s r)^2 / sigma^2, dof = N - 1.
HypothesisTest cft_hypothesis_test(const std::vector<double>& centers, const std::vector<double>& sigmas,
                                   const std::vector<double>& oracle);

nlohmann::json to_json(const PeakFit& f);
nlohmann::json to_json(const OscFit& f);
nlohmann::json to_json(const HypothesisTest& h);
nlohmann::json to_json(const BootstrapResult& b);

// Imports (f_MHz, value[, sigma]) CSV; missing sigma column gives sigma = 0 (unit weights).
ResponseCurve read_response_csv(const std::string& path);

}  // namespace rydcft
