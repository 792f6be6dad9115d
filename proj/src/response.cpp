#include "rydcft/response.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "rydcft/errors.hpp"
#include "rydcft/io.hpp"

namespace rydcft {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;
using cd = std::complex<double>;

// 20-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGLx[10] = {0.0765265211334973, 0.2277858511416451, 0.3737060887154195, 0.5108670019508271,
                             0.6360536807265150, 0.7463319064601508, 0.8391169718222188, 0.9122344282513259,
                             0.9639719272779138, 0.9931285991850949};
constexpr double kGLw[10] = {0.1527533871307258, 0.1491729864726037, 0.1420961093183820, 0.1316886384491766,
                             0.1181945319615184, 0.1019301198172404, 0.0832767415767048, 0.0626720483341091,
                             0.0406014298003869, 0.0176140071391521};

double angular(double mhz) { return kTwoPi * mhz; }
}  // namespace

std::vector<double> ResponseCurve::freqs() const {
  std::vector<double> f;
  for (const auto& p : points) f.push_back(p.f);
  return f;
}

std::vector<double> ResponseCurve::values() const {
  std::vector<double> v;
  for (const auto& p : points) v.push_back(p.value);
  return v;
}

void ResponseCurve::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].value)) throw NumericalError("response curve has a non-finite value");
    if (i && points[i].f < points[i - 1].f) throw ValidationError("response curve frequencies must ascend");
  }
}

void write_response_csv(std::ostream& os, const ResponseCurve& c) {
  os << "f_MHz,value,sigma\n";
  for (const auto& p : c.points) os << fmt_num(p.f) << ',' << fmt_num(p.value) << ',' << fmt_num(p.sigma) << '\n';
}

ThermalWeights ThermalWeights::from_energies(const std::vector<double>& energies, double beta, double budget) {
  if (energies.empty()) throw ValidationError("thermal weights need at least one state");
  ThermalWeights w;
  w.beta = beta;
  w.weights.assign(energies.size(), 0.0);
  if (std::isinf(beta)) {
    w.weights[0] = 1.0;
    return w;
  }
  // beta is in 1/(2 pi MHz) and energies in 2 pi MHz, so the product is dimensionless.
  double z = 0.0;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    w.weights[i] = std::exp(-beta * (energies[i] - energies[0]));
    z += w.weights[i];
  }
  for (double& x : w.weights) x /= z;
  w.truncation = w.weights.back();
  if (w.truncation > budget)
    throw NumericalError("thermal truncation weight " + fmt_num(w.truncation) + " exceeds budget " + fmt_num(budget) +
                         ": compute more states");
  return w;
}

std::complex<double> gaussian_transform_closed_form(double width, double center, double nu) {
  return width / std::sqrt(2.0) * std::exp(-0.25 * width * width * nu * nu) * std::polar(1.0, -nu * center);
}

std::complex<double> envelope_transform(const ModulationPulse& pulse, double nu) {
  const double T = pulse.duration;
  if (pulse.envelope == Envelope::square) {
    if (std::abs(nu * T) < 1e-8) return cd(T / std::sqrt(kTwoPi), 0.0);
    return (1.0 - std::polar(1.0, -nu * T)) / (cd(0.0, nu) * std::sqrt(kTwoPi));
  }
  // Composite Gauss-Legendre, panels sized to resolve both the envelope and the phase.
  const double w = pulse.width;
  const int panels = std::max(8, static_cast<int>(std::ceil(T / w * 4.0 + std::abs(nu) * T / 2.0)));
  const double h = T / panels;
  cd acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    for (int k = 0; k < 10; ++k) {
      for (double s : {-1.0, 1.0}) {
        const double t = mid + s * 0.5 * h * kGLx[k];
        acc += kGLw[k] * pulse.envelope_at(t) * std::polar(1.0, -nu * t);
      }
    }
  }
  return acc * (0.5 * h) / std::sqrt(kTwoPi);
}

ResponseCurve quadratic_response_full(const TransitionTable& t, const ModulationPulse& pulse,
                                      const std::vector<double>& freqs) {
  ResponseCurve c;
  c.kind = ResponseCurve::Kind::delta_n;
  c.provenance = "quadratic_full";
  const double w = pulse.width, A = angular(pulse.amplitude);
  const double pref = kPi * w * w * A * A / 4.0;
  for (double f : freqs) {
    const double om = angular(f);
    const double cross = std::cos(2.0 * pulse.phase + om * pulse.duration);
    double v = 0.0;
    for (const auto& e : t.entries) {
      const double dE = angular(e.gap);
      v += e.strength * (std::exp(-0.5 * w * w * (om + dE) * (om + dE)) +
                         std::exp(-0.5 * w * w * (om - dE) * (om - dE)) +
                         2.0 * std::exp(-0.5 * w * w * (om * om + dE * dE)) * cross);
    }
    c.points.push_back({f, pref * v, 0.0, false});
  }
  return c;
}

ResponseCurve quadratic_response_full(const Spectrum& spec, const SparseOperator& K, const ModulationPulse& pulse,
                                      const std::vector<double>& freqs) {
  return quadratic_response_full(transition_strengths(spec, K), pulse, freqs);
}

ResponseCurve quadratic_response_resolved(const TransitionTable& t, const ModulationPulse& pulse,
                                          const std::vector<double>& freqs, std::string* warning) {
  ResponseCurve c;
  c.kind = ResponseCurve::Kind::delta_n;
  c.provenance = "quadratic_resolved";
  const double w = pulse.width, A = angular(pulse.amplitude);
  const double pref = kPi * w * w * A * A / 4.0;
  if (warning) {
    warning->clear();
    std::vector<double> g;
    for (const auto& e : t.entries) g.push_back(e.gap);
    std::sort(g.begin(), g.end());
    double min_spacing = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < g.size(); ++i)
      if (g[i] - g[i - 1] > 1e-9) min_spacing = std::min(min_spacing, g[i] - g[i - 1]);
    if (!g.empty() && angular(g.front()) * w < 1.0)
      *warning = "pulse too short to resolve the lowest gap (w * dE < 1)";
    else if (std::isfinite(min_spacing) && angular(min_spacing) * w < 1.0)
      *warning = "level spacing below the pulse Fourier width";
  }
  for (double f : freqs) {
    const double om = angular(f);
    double v = 0.0;
    for (const auto& e : t.entries) {
      const double x = om - angular(e.gap);
      v += e.strength * std::exp(-0.5 * w * w * x * x);
    }
    c.points.push_back({f, pref * v, 0.0, false});
  }
  return c;
}

ResponseCurve quadratic_response_resolved(const Spectrum& spec, const SparseOperator& K, const ModulationPulse& pulse,
                                          const std::vector<double>& freqs, std::string* warning) {
  return quadratic_response_resolved(transition_strengths(spec, K), pulse, freqs, warning);
}

ResponseCurve linear_response_finite_T(const std::vector<double>& E, const Eigen::MatrixXd& Kmn,
                                       const Eigen::MatrixXd& Qmn, const ModulationPulse& pulse,
                                       const std::vector<double>& freqs, double beta, PhaseRule rule) {
  const auto n = static_cast<Eigen::Index>(E.size());
  if (Kmn.rows() != n || Qmn.rows() != n) throw ValidationError("matrix-element size mismatch");
  const ThermalWeights tw = ThermalWeights::from_energies(E, beta);
  const double A = angular(pulse.amplitude), T = pulse.duration;
  ResponseCurve c;
  c.kind = ResponseCurve::Kind::linear_response;
  c.provenance = "linear_finite_T";
  for (double f : freqs) {
    const double om = angular(f);
    const double phi = rule == PhaseRule::maximize ? maximizing_phase(f, T) : pulse.phase;
    const cd eph = std::polar(1.0, -phi);
    double v = 0.0;
    for (Eigen::Index m = 0; m < n; ++m) {
      for (Eigen::Index k = 0; k < n; ++k) {
        const double dp = tw.weights[m] - tw.weights[k];
        if (dp == 0.0) continue;
        const double qk = Qmn(m, k) * Kmn(k, m);
        if (qk == 0.0) continue;
        const double wnm = angular(E[k] - E[m]);
        const cd term = qk * envelope_transform(pulse, om - wnm) * std::polar(1.0, -wnm * T) * eph;
        v += dp * term.imag();
      }
    }
    c.points.push_back({f, std::sqrt(kTwoPi) * A * v, 0.0, false});
  }
  return c;
}

ResponseCurve linear_response_finite_T(const Spectrum& spec, const SparseOperator& K, const SparseOperator& Q,
                                       const ModulationPulse& pulse, const std::vector<double>& freqs, double beta,
                                       PhaseRule rule) {
  const Eigen::MatrixXd Kmn = matrix_elements(spec, K);
  const Eigen::MatrixXd Qmn = (&K == &Q) ? Kmn : matrix_elements(spec, Q);
  return linear_response_finite_T(spec.energies, Kmn, Qmn, pulse, freqs, beta, rule);
}

ResponseCurve dsf_eigensum(const Spectrum& spec, const std::vector<SparseOperator>& o, double k,
                           const std::vector<double>& freqs, double beta, double broaden_mhz, double* used) {
  if (o.empty()) throw ValidationError("dsf_eigensum needs at least one local operator");
  if (freqs.empty()) throw ValidationError("dsf_eigensum needs a frequency grid");
  const auto n = static_cast<Eigen::Index>(spec.size());
  const int L = spec.meta ? spec.meta->L : static_cast<int>(o.size());
  // (O_k)_{mn} with O_k = sum_j e^{-ikj} o_j, j counted from 1.
  Eigen::MatrixXcd Ok = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t j = 0; j < o.size(); ++j)
    Ok += std::polar(1.0, -k * static_cast<double>(j + 1)) * matrix_elements(spec, o[j]).cast<cd>();
  const ThermalWeights tw = ThermalWeights::from_energies(spec.energies, beta);

  double width = broaden_mhz;
  if (width <= 0.0) {
    const double lo = *std::min_element(freqs.begin(), freqs.end());
    const double hi = *std::max_element(freqs.begin(), freqs.end());
    std::vector<double> inside;
    for (std::size_t e = 1; e < spec.size(); ++e) {
      const double g = spec.energies[e] - spec.energies[0];
      if (g >= lo && g <= hi) inside.push_back(g);
    }
    const double spacing = inside.size() >= 2 ? (inside.back() - inside.front()) / (inside.size() - 1)
                                              : (hi - lo > 0 ? hi - lo : 1.0);
    width = 3.0 * spacing;
  }
  if (used) *used = width;
  const double sw = angular(width);
  ResponseCurve c;
  c.kind = ResponseCurve::Kind::dsf;
  c.provenance = "dsf_eigensum";
  for (double f : freqs) {
    const double om = angular(f);
    double v = 0.0;
    for (Eigen::Index m = 0; m < n; ++m) {
      if (tw.weights[m] == 0.0) continue;
      for (Eigen::Index q = 0; q < n; ++q) {
        const double x = (om - angular(spec.energies[q] - spec.energies[m])) / sw;
        v += tw.weights[m] * std::norm(Ok(m, q)) * std::exp(-0.5 * x * x) / (sw * std::sqrt(kTwoPi));
      }
    }
    c.points.push_back({f, v / L, 0.0, false});
  }
  return c;
}

ResponseCurve dsf_from_modulation(const ResponseCurve& dq, double amplitude, int L, double beta, double tail) {
  if (amplitude == 0.0 || L < 1 || tail == 0.0) throw ValidationError("dsf_from_modulation: zero normalization");
  ResponseCurve c;
  c.kind = ResponseCurve::Kind::dsf;
  c.provenance = "dsf_from_modulation";
  const double A = angular(amplitude);
  for (const auto& p : dq.points) {
    const double om = angular(p.f);
    ResponsePoint q = p;
    double balance = 1.0;
    if (!std::isinf(beta)) {
      balance = 1.0 - std::exp(-beta * p.f);  // beta in 1/(2 pi MHz), p.f in MHz
      if (om <= 0.0) q.flagged = true;
    } else if (om <= 0.0) {
      q.flagged = true;
    }
    const double denom = kPi * tail * A * L * balance;
    q.value = q.flagged ? 0.0 : p.value / denom;
    q.sigma = q.flagged ? 0.0 : p.sigma / std::abs(denom);
    c.points.push_back(q);
  }
  return c;
}

std::vector<SparseOperator> epsilon_operators(const ConstrainedBasis& basis) {
  std::vector<SparseOperator> out;
  const int L = basis.length();
  for (int i = 1; i < L; ++i) {
    std::vector<double> w(static_cast<std::size_t>(L), 0.0);
    w[i - 1] = w[i] = 1.0;
    out.push_back(weighted_number_operator(basis, w));
  }
  return out;
}

std::vector<SparseOperator> number_operators(const ConstrainedBasis& basis) {
  std::vector<SparseOperator> out;
  for (int i = 1; i <= basis.length(); ++i) out.push_back(local_number_operator(basis, i));
  return out;
}

}  // namespace rydcft
