#include "rydcft/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "rydcft/errors.hpp"
#include "rydcft/io.hpp"
#include "rydcft/rng.hpp"

namespace rydcft {

LmResult levenberg_marquardt(const ResidualFn& f, Eigen::VectorXd p, const AcceptFn& accept, const LmOptions& opt) {
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  f(p, r, &J);
  if (!r.allFinite() || !J.allFinite()) throw NumericalError("non-finite residual at the initial guess");
  double chi2 = r.squaredNorm();
  double lambda = opt.lambda0;
  LmResult out;
  for (int it = 0; it < opt.max_iterations; ++it) {
    out.iterations = it + 1;
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    Eigen::VectorXd d = A.diagonal().cwiseMax(1e-300);
    bool stepped = false;
    while (lambda < 1e16) {
      Eigen::MatrixXd M = A;
      M.diagonal() += lambda * d;
      const Eigen::VectorXd step = M.ldlt().solve(-g);
      const Eigen::VectorXd pn = p + step;
      if (!step.allFinite() || (accept && !accept(pn))) {
        lambda *= 10;
        continue;
      }
      Eigen::VectorXd rn;
      f(pn, rn, nullptr);
      const double chi2n = rn.allFinite() ? rn.squaredNorm() : std::numeric_limits<double>::infinity();
      if (chi2n <= chi2) {
        const double rel = (chi2 - chi2n) / std::max(chi2, 1e-300);
        const bool small_step = step.norm() <= opt.xtol * (p.norm() + opt.xtol);
        p = pn;
        f(p, r, &J);
        chi2 = chi2n;
        lambda = std::max(lambda / 10, 1e-12);
        stepped = true;
        if (rel < opt.ftol || small_step || chi2 == 0.0) out.converged = true;
        break;
      }
      lambda *= 10;
    }
    if (!stepped) {
      out.converged = true;  // no descent direction left at working precision
      break;
    }
    if (out.converged) break;
  }
  out.p = p;
  out.chi2 = chi2;
  out.jtj = J.transpose() * J;
  return out;
}

double gaussian_kernel(double f, const Peak& p) {
  const double u = (f - p.center) / p.width;
  return p.amplitude * std::exp(-u * u);
}

double three_term_kernel(double f, const Peak& p, double phi_f) {
  const double w2 = p.width * p.width;
  const double u1 = (f - p.center), u2 = (f + p.center);
  return p.amplitude * (std::exp(-u1 * u1 / w2) + std::exp(-u2 * u2 / w2) +
                        2.0 * std::cos(2.0 * phi_f) * std::exp(-(f * f + p.center * p.center) / w2));
}

Eigen::VectorXd PeakFit::parameters() const {
  Eigen::VectorXd p(1 + 3 * peaks.size());
  p(0) = baseline;
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    p(1 + 3 * i) = peaks[i].amplitude;
    p(2 + 3 * i) = peaks[i].center;
    p(3 + 3 * i) = peaks[i].width;
  }
  return p;
}

double PeakFit::evaluate(double f) const {
  double y = baseline;
  for (const auto& pk : peaks) y += kernel == "three_term" ? three_term_kernel(f, pk, phi_f) : gaussian_kernel(f, pk);
  return y;
}

namespace {

struct Window {
  std::vector<double> f, y, s;
  bool weighted = true;
  double lo = 0, hi = 0;
};

Window select(const ResponseCurve& c, const FitWindow& w) {
  Window out;
  for (const auto& p : c.points)
    if (p.f >= w.lo && p.f <= w.hi) {
      out.f.push_back(p.f);
      out.y.push_back(p.value);
      out.s.push_back(p.sigma);
    }
  if (out.f.empty()) throw ValidationError("fit window contains no data");
  out.weighted = std::all_of(out.s.begin(), out.s.end(), [](double s) { return s > 0; });
  if (!out.weighted) std::fill(out.s.begin(), out.s.end(), 1.0);
  out.lo = *std::min_element(out.f.begin(), out.f.end());
  out.hi = *std::max_element(out.f.begin(), out.f.end());
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

PeakFit fit_peaks(const ResponseCurve& c, int n_peaks, bool three_term, double phi_f, const FitWindow& window,
                  const PeakInit* init, std::uint64_t seed) {
  if (n_peaks < 1) throw ValidationError("n_peaks must be >= 1");
  const Window w = select(c, window);
  const auto n = static_cast<Eigen::Index>(w.f.size());
  const Eigen::Index np = 1 + 3 * n_peaks;
  if (n < np) throw ValidationError("fewer data points than fit parameters");
  PeakInit start = init ? *init : heuristic_peak_init(c, n_peaks, window);
  if (static_cast<int>(start.peaks.size()) != n_peaks) throw ValidationError("initial guess has the wrong peak count");
  const double cross = 2.0 * std::cos(2.0 * phi_f);

  const ResidualFn resid = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
    r.resize(n);
    if (J) J->setZero(n, np);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double f = w.f[i], inv = 1.0 / w.s[i];
      double model = p(0);
      if (J) (*J)(i, 0) = -inv;
      for (int k = 0; k < n_peaks; ++k) {
        const double a = p(1 + 3 * k), cc = p(2 + 3 * k), wd = p(3 + 3 * k);
        const double w2 = wd * wd, w3 = w2 * wd;
        double K, dKc, dKw;
        const double g1 = std::exp(-(f - cc) * (f - cc) / w2);
        if (!three_term) {
          K = g1;
          dKc = g1 * 2 * (f - cc) / w2;
          dKw = g1 * 2 * (f - cc) * (f - cc) / w3;
        } else {
          const double g2 = std::exp(-(f + cc) * (f + cc) / w2);
          const double g3 = std::exp(-(f * f + cc * cc) / w2);
          K = g1 + g2 + cross * g3;
          dKc = g1 * 2 * (f - cc) / w2 - g2 * 2 * (f + cc) / w2 - cross * g3 * 2 * cc / w2;
          dKw = g1 * 2 * (f - cc) * (f - cc) / w3 + g2 * 2 * (f + cc) * (f + cc) / w3 +
                cross * g3 * 2 * (f * f + cc * cc) / w3;
        }
        model += a * K;
        if (J) {
          (*J)(i, 1 + 3 * k) = -inv * K;
          (*J)(i, 2 + 3 * k) = -inv * a * dKc;
          (*J)(i, 3 + 3 * k) = -inv * a * dKw;
        }
      }
      r(i) = (w.y[i] - model) * inv;
    }
  };
  const AcceptFn accept = [&](const Eigen::VectorXd& p) {
    for (int k = 0; k < n_peaks; ++k) {
      if (!(p(3 + 3 * k) > 0)) return false;
      if (p(2 + 3 * k) < w.lo || p(2 + 3 * k) > w.hi) return false;
    }
    return true;
  };

  Eigen::VectorXd p0(np);
  p0(0) = start.baseline.value_or(median(w.y));
  for (int k = 0; k < n_peaks; ++k) {
    p0(1 + 3 * k) = start.peaks[k].amplitude;
    p0(2 + 3 * k) = std::clamp(start.peaks[k].center, w.lo, w.hi);
    p0(3 + 3 * k) = start.peaks[k].width;
  }
  const CounterRng rng(seed, 0x5eed);
  std::optional<LmResult> best;
  std::uint64_t counter = 0;
  for (int s = 0; s < 5; ++s) {
    Eigen::VectorXd p = p0;
    if (s > 0) {
      for (int k = 0; k < n_peaks; ++k) {
        const double wd = p0(3 + 3 * k);
        p(1 + 3 * k) *= 1.0 + 0.2 * rng.normal(counter++);
        p(2 + 3 * k) = std::clamp(p(2 + 3 * k) + 0.25 * wd * rng.normal(counter++), w.lo, w.hi);
        p(3 + 3 * k) = wd * std::exp(0.25 * rng.normal(counter++));
      }
    }
    if (!accept(p)) continue;
    try {
      LmResult r = levenberg_marquardt(resid, p, accept);
      if (r.converged && (!best || r.chi2 < best->chi2)) best = std::move(r);
    } catch (const NumericalError&) {
    }
  }
  if (!best) throw ConvergenceError("peak fit did not converge from any start");

  PeakFit out;
  out.kernel = three_term ? "three_term" : "gaussian";
  out.phi_f = phi_f;
  out.weighted = w.weighted;
  out.converged = true;
  out.chi2 = best->chi2;
  out.dof = static_cast<int>(n - np);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(best->jtj);
  if (lu.rank() < np) throw NumericalError("singular covariance in peak fit");
  out.covariance = lu.inverse();
  if (!w.weighted && out.dof > 0) out.covariance *= out.chi2 / out.dof;
  std::vector<std::size_t> order(n_peaks);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return best->p(2 + 3 * a) < best->p(2 + 3 * b); });
  Eigen::VectorXi perm(np);
  perm(0) = 0;
  for (int k = 0; k < n_peaks; ++k)
    for (int j = 0; j < 3; ++j) perm(1 + 3 * k + j) = static_cast<int>(1 + 3 * order[k] + j);
  Eigen::MatrixXd cov(np, np);
  for (Eigen::Index i = 0; i < np; ++i)
    for (Eigen::Index j = 0; j < np; ++j) cov(i, j) = out.covariance(perm(i), perm(j));
  out.covariance = cov;
  out.baseline = best->p(0);
  for (int k = 0; k < n_peaks; ++k) {
    const auto o = static_cast<Eigen::Index>(order[k]);
    out.peaks.push_back({best->p(1 + 3 * o), best->p(2 + 3 * o), best->p(3 + 3 * o)});
  }
  for (Eigen::Index i = 0; i < np; ++i) out.param_sigma.push_back(std::sqrt(std::max(0.0, cov(i, i))));
  return out;
}

}  // namespace

PeakInit heuristic_peak_init(const ResponseCurve& c, int n_peaks, const FitWindow& window) {
  const Window w = select(c, window);
  const std::size_t n = w.f.size();
  if (n < 3) throw ValidationError("too few points for peak initialization");
  const double base = median(w.y);
  std::vector<double> dev;
  for (double y : w.y) dev.push_back(std::abs(y - base));
  double noise = 1.4826 * median(dev);
  if (w.weighted) noise = std::accumulate(w.s.begin(), w.s.end(), 0.0) / static_cast<double>(n);
  const double floor = base + 2.0 * noise;
  struct Cand {
    std::size_t i;
    double h;
  };
  // Maxima are located on a 5-point running mean so single noisy samples do not register as peaks.
  std::vector<double> sm(w.y);
  if (n >= 15) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = i < 2 ? 0 : i - 2, b = std::min(n - 1, i + 2);
      double acc = 0.0;
      for (std::size_t j = a; j <= b; ++j) acc += w.y[j];
      sm[i] = acc / static_cast<double>(b - a + 1);
    }
  }
  std::vector<Cand> cands;
  for (std::size_t i = 0; i < n; ++i) {
    const bool left = i == 0 || sm[i] > sm[i - 1];
    const bool right = i + 1 == n || sm[i] >= sm[i + 1];
    if (left && right && sm[i] > floor) cands.push_back({i, w.y[i] - base});
  }
  if (cands.empty()) {
    const auto it = std::max_element(w.y.begin(), w.y.end());
    cands.push_back({static_cast<std::size_t>(it - w.y.begin()), *it - base});
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.h > b.h; });
  const double spacing = (w.hi - w.lo) / std::max<std::size_t>(n - 1, 1);
  const auto half_width = [&](std::size_t i, double h) {
    const double half = base + 0.5 * h;
    std::size_t l = i, r = i;
    while (l > 0 && sm[l] > half) --l;
    while (r + 1 < n && sm[r] > half) ++r;
    const double hw = 0.5 * (w.f[r] - w.f[l]);
    return std::max(hw, spacing) / std::sqrt(std::log(2.0));
  };
  PeakInit init;
  init.baseline = base;
  for (const auto& cd : cands) {
    if (static_cast<int>(init.peaks.size()) == n_peaks) break;
    // a taller accepted peak already owns this region
    const bool shadowed = std::any_of(init.peaks.begin(), init.peaks.end(), [&](const Peak& q) {
      return std::abs(w.f[cd.i] - q.center) < 1.5 * q.width;
    });
    if (!shadowed) init.peaks.push_back({cd.h, w.f[cd.i], half_width(cd.i, cd.h)});
  }
  // Not enough separate maxima: split the tallest feature across its flanks.
  while (static_cast<int>(init.peaks.size()) < n_peaks) {
    Peak& top = init.peaks.front();
    const int extra = n_peaks - static_cast<int>(init.peaks.size());
    const double spread = top.width;
    Peak p = top;
    p.amplitude *= 0.5;
    p.width *= 0.6;
    top.amplitude *= 0.7;
    top.width *= 0.6;
    const double side = (extra % 2 ? 1.0 : -1.0) * 0.6 * spread * (1 + (extra - 1) / 2);
    p.center = std::clamp(top.center + side, w.lo, w.hi);
    top.center = std::clamp(top.center - 0.3 * side, w.lo, w.hi);
    init.peaks.push_back(p);
  }
  return init;
}

PeakFit multi_gaussian_fit(const ResponseCurve& c, int n_peaks, const FitWindow& window, const PeakInit* init,
                           std::uint64_t seed) {
  return fit_peaks(c, n_peaks, false, 0.0, window, init, seed);
}

PeakFit three_term_gaussian_fit(const ResponseCurve& c, int n_peaks, double phi_f, const FitWindow& window,
                                const PeakInit* init, std::uint64_t seed) {
  return fit_peaks(c, n_peaks, true, phi_f, window, init, seed);
}

double OscFit::frequency_mhz() const { return omega / (2.0 * std::numbers::pi); }

double OscFit::evaluate(double t) const {
  const double decay = tau_unbounded ? 1.0 : std::exp(-t / tau);
  return offset + amplitude * std::cos(omega * t + phase) * decay;
}

double dominant_frequency(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 4) throw ValidationError("series needs matching t and y with >= 4 samples");
  const std::size_t n = t.size();
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  if (!(var > 1e-28 * n)) throw NumericalError("no dominant frequency: series is constant");
  const double span = t.back() - t.front();
  if (!(span > 0)) throw ValidationError("time samples must increase");
  const double nyquist = std::numbers::pi * static_cast<double>(n - 1) / span;
  const double dw = 2.0 * std::numbers::pi / (8.0 * span);
  const double w_min = std::numbers::pi / span;  // skip trends slower than half a period
  const auto power = [&](double w) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += (y[i] - mean) * std::polar(1.0, -w * t[i]);
    return std::norm(acc);
  };
  std::vector<double> ws, ps;
  for (double w = w_min; w <= nyquist; w += dw) {
    ws.push_back(w);
    ps.push_back(power(w));
  }
  if (ws.size() < 3) throw NumericalError("no dominant frequency: series too short");
  const auto it = std::max_element(ps.begin(), ps.end());
  const std::size_t k = static_cast<std::size_t>(it - ps.begin());
  const double avg = std::accumulate(ps.begin(), ps.end(), 0.0) / static_cast<double>(ps.size());
  if (*it < 3.0 * avg) throw NumericalError("no dominant frequency in the periodogram");
  if (k == 0 || k + 1 == ps.size()) return ws[k];
  const double a = ps[k - 1], b = ps[k], c = ps[k + 1];
  const double den = a - 2 * b + c;
  return den < 0 ? ws[k] + 0.5 * dw * (a - c) / den : ws[k];
}

OscFit damped_cosine_fit(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 8) throw ValidationError("damped cosine fit needs >= 8 samples");
  const double w0 = dominant_frequency(t, y);
  const double span = t.back() - t.front();
  if (w0 * span < 2.0 * std::numbers::pi) throw ValidationError("series spans less than one period");
  const auto n = static_cast<Eigen::Index>(t.size());

  // Linear amplitudes at the periodogram frequency seed the nonlinear fit.
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd Y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = 1;
    X(i, 1) = std::cos(w0 * t[i]);
    X(i, 2) = std::sin(w0 * t[i]);
    Y(i) = y[i];
  }
  const Eigen::VectorXd lin = X.colPivHouseholderQr().solve(Y);

  const auto make = [&](bool with_decay) {
    return [&, with_decay](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
      r.resize(n);
      if (J) J->setZero(n, p.size());
      const double gamma = with_decay ? p(4) : 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double ti = t[i], e = std::exp(-gamma * ti);
        const double co = std::cos(p(3) * ti), si = std::sin(p(3) * ti);
        const double osc = p(1) * co + p(2) * si;
        r(i) = y[i] - (p(0) + e * osc);
        if (J) {
          (*J)(i, 0) = -1;
          (*J)(i, 1) = -e * co;
          (*J)(i, 2) = -e * si;
          (*J)(i, 3) = -e * ti * (-p(1) * si + p(2) * co);
          if (with_decay) (*J)(i, 4) = ti * e * osc;
        }
      }
    };
  };
  Eigen::VectorXd p(5);
  p << lin(0), lin(1), lin(2), w0, 0.1 / span;
  LmResult res = levenberg_marquardt(make(true), p);
  bool decays = res.p(4) > 1e-9 / span;
  if (!decays) {
    Eigen::VectorXd q(4);
    q << lin(0), lin(1), lin(2), w0;
    res = levenberg_marquardt(make(false), q);
  }
  if (!res.converged) throw ConvergenceError("damped cosine fit did not converge");
  const Eigen::Index np = res.p.size();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(res.jtj);
  if (lu.rank() < np) throw NumericalError("singular covariance in damped cosine fit");
  const int dof = static_cast<int>(n - np);
  Eigen::MatrixXd cov = lu.inverse() * (dof > 0 ? res.chi2 / dof : 0.0);

  OscFit out;
  out.chi2 = res.chi2;
  const double c = res.p(1), s = res.p(2), b = std::hypot(c, s);
  out.offset = res.p(0);
  out.amplitude = b;
  out.omega = res.p(3);
  out.phase = std::atan2(-s, c);
  if (out.omega < 0) {
    out.omega = -out.omega;
    out.phase = -out.phase;
  }
  out.sigma_offset = std::sqrt(std::max(0.0, cov(0, 0)));
  out.sigma_omega = std::sqrt(std::max(0.0, cov(3, 3)));
  if (b > 0) {
    Eigen::Vector2d gb(c / b, s / b), gp(s / (b * b), -c / (b * b));
    const Eigen::Matrix2d cs = cov.block(1, 1, 2, 2);
    out.sigma_amplitude = std::sqrt(std::max(0.0, gb.dot(cs * gb)));
    out.sigma_phase = std::sqrt(std::max(0.0, gp.dot(cs * gp)));
  }
  if (decays) {
    out.tau = 1.0 / res.p(4);
    out.sigma_tau = std::sqrt(std::max(0.0, cov(4, 4))) * out.tau * out.tau;
  } else {
    out.tau = std::numeric_limits<double>::infinity();
    out.tau_unbounded = true;
  }
  return out;
}

BootstrapResult bootstrap_uncertainty(const ResponseCurve& c, const CurveFitOp& fit, int n_resamples,
                                      std::uint64_t seed, int threads) {
  if (n_resamples < 2) throw ValidationError("bootstrap needs at least 2 resamples");
  const CounterRng rng(seed, 0xb007);
  std::vector<std::optional<Eigen::VectorXd>> fits(static_cast<std::size_t>(n_resamples));
  parallel_for(fits.size(), threads, [&](std::size_t r) {
    ResponseCurve rc = c;
    const std::uint64_t base = static_cast<std::uint64_t>(r) * (c.points.size() + 1);
    for (std::size_t j = 0; j < rc.points.size(); ++j) rc.points[j].value += rc.points[j].sigma * rng.normal(base + j);
    try {
      Eigen::VectorXd p = fit(rc);
      if (p.allFinite()) fits[r] = std::move(p);
    } catch (const std::exception&) {
    }
  });
  BootstrapResult out;
  out.resamples = n_resamples;
  std::vector<Eigen::VectorXd> ok;
  for (auto& f : fits)
    if (f) ok.push_back(*f);
  out.failures = n_resamples - static_cast<int>(ok.size());
  out.flagged = out.failures > 0.2 * n_resamples;
  if (ok.size() < 2) {
    out.flagged = true;
    return out;
  }
  const Eigen::Index np = ok.front().size();
  out.mean = Eigen::VectorXd::Zero(np);
  for (const auto& v : ok) {
    if (v.size() != np) throw ValidationError("bootstrap refits returned different parameter counts");
    out.mean += v;
  }
  out.mean /= static_cast<double>(ok.size());
  Eigen::VectorXd var = Eigen::VectorXd::Zero(np);
  for (const auto& v : ok) var += (v - out.mean).cwiseAbs2();
  out.sigma = (var / static_cast<double>(ok.size() - 1)).cwiseSqrt();
  return out;
}

HypothesisTest cft_hypothesis_test(const std::vector<double>& centers, const std::vector<double>& sigmas,
                                   const std::vector<double>& oracle) {
  if (centers.size() < 2) throw ValidationError("hypothesis test needs at least 2 centers");
  if (oracle.size() < centers.size()) throw ValidationError("fewer oracle levels than fitted centers");
  if (!sigmas.empty() && sigmas.size() != centers.size()) throw ValidationError("sigma count does not match centers");
  const auto weight = [&](std::size_t i) {
    const double s = sigmas.empty() ? 1.0 : sigmas[i];
    if (!(s > 0)) throw ValidationError("fit sigmas must be positive");
    return 1.0 / (s * s);
  };
  double num = 0, den = 0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    num += weight(i) * centers[i] * oracle[i];
    den += weight(i) * oracle[i] * oracle[i];
  }
  if (!(den > 0)) throw ValidationError("oracle levels are all zero");
  HypothesisTest h;
  h.scale = num / den;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double r = centers[i] - h.scale * oracle[i];
    h.chi2 += weight(i) * r * r;
  }
  h.dof = static_cast<int>(centers.size()) - 1;
  h.reduced_chi2 = h.chi2 / h.dof;
  return h;
}

nlohmann::json to_json(const PeakFit& f) {
  nlohmann::json peaks = nlohmann::json::array();
  for (std::size_t i = 0; i < f.peaks.size(); ++i) {
    const auto& p = f.peaks[i];
    peaks.push_back({{"amplitude", p.amplitude},
                     {"center_MHz", p.center},
                     {"width_MHz", p.width},
                     {"sigma_amplitude", f.param_sigma.at(1 + 3 * i)},
                     {"sigma_center_MHz", f.param_sigma.at(2 + 3 * i)},
                     {"sigma_width_MHz", f.param_sigma.at(3 + 3 * i)}});
  }
  return {{"kernel", f.kernel}, {"phi_f", f.phi_f},      {"baseline", f.baseline},
          {"peaks", peaks},     {"chi2", f.chi2},        {"dof", f.dof},
          {"weighted", f.weighted}, {"chi2_label", f.weighted ? "weighted" : "unweighted"}};
}

nlohmann::json to_json(const OscFit& f) {
  nlohmann::json j = {{"offset", f.offset},
                      {"amplitude", f.amplitude},
                      {"omega_rad_per_us", f.omega},
                      {"frequency_MHz", f.frequency_mhz()},
                      {"phase", f.phase},
                      {"tau_unbounded", f.tau_unbounded},
                      {"sigma_frequency_MHz", f.sigma_omega / (2 * std::numbers::pi)},
                      {"chi2", f.chi2}};
  if (f.tau_unbounded) j["tau_us"] = nullptr;
  else j["tau_us"] = f.tau;
  return j;
}

nlohmann::json to_json(const HypothesisTest& h) {
  return {{"scale_MHz", h.scale}, {"chi2", h.chi2}, {"dof", h.dof}, {"reduced_chi2", h.reduced_chi2}};
}

nlohmann::json to_json(const BootstrapResult& b) {
  nlohmann::json sig = nlohmann::json::array();
  for (Eigen::Index i = 0; i < b.sigma.size(); ++i) sig.push_back(b.sigma(i));
  return {{"resamples", b.resamples}, {"failures", b.failures}, {"flagged", b.flagged}, {"sigma", sig}};
}

ResponseCurve read_response_csv(const std::string& path) {
  const NumericTable t = read_numeric_csv(path);
  const int fc = t.column("f_MHz");
  int vc = t.column("value");
  if (vc < 0) vc = t.column("delta_n");
  const int sc = t.column("sigma");
  if (fc < 0 || vc < 0) throw ValidationError(path + ": needs f_MHz and value (or delta_n) columns");
  ResponseCurve c;
  c.provenance = "imported:" + path;
  for (const auto& row : t.rows) {
    if (static_cast<int>(row.size()) <= std::max({fc, vc, sc})) throw ValidationError(path + ": short row");
    c.points.push_back({row[fc], row[vc], sc >= 0 ? row[sc] : 0.0, false});
  }
  std::sort(c.points.begin(), c.points.end(), [](const auto& a, const auto& b) { return a.f < b.f; });
  c.validate();
  return c;
}

}  // namespace rydcft
