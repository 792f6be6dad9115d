#include "rydcft/criticality.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "rydcft/errors.hpp"
#include "rydcft/io.hpp"
#include "rydcft/spectral.hpp"

namespace rydcft {

ScalingSeries extrapolate(const std::vector<double>& x, const std::vector<double>& y, int order) {
  if (order != 1 && order != 2) throw ValidationError("fit order must be 1 or 2");
  if (x.size() != y.size()) throw ValidationError("x and y lengths differ");
  const auto n = static_cast<Eigen::Index>(x.size());
  const Eigen::Index p = order + 1;
  if (n < p) throw ValidationError("extrapolation needs at least order+1 points");
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd Y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) X(i, j) = std::pow(x[i], static_cast<double>(j));
    Y(i) = y[i];
  }
  const Eigen::MatrixXd XtX = X.transpose() * X;
  const Eigen::VectorXd c = XtX.ldlt().solve(X.transpose() * Y);
  ScalingSeries s;
  s.x = x;
  s.y = y;
  s.order = order;
  s.coeffs.assign(c.data(), c.data() + c.size());
  const double rss = (Y - X * c).squaredNorm();
  const double s2 = n > p ? rss / static_cast<double>(n - p) : 0.0;
  s.covariance = s2 * XtX.inverse();
  s.value = c(0);
  s.sigma = std::sqrt(std::max(0.0, s.covariance(0, 0)));
  return s;
}

namespace {

double bond_order(const ConstrainedBasis& basis, const Eigen::VectorXd& psi, int bond) {
  const double sign = (bond % 2) ? 1.0 : -1.0;  // (-1)^(i+1)
  double acc = 0.0;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const State s = basis.state(k);
    const int d = occupation(s, bond) - occupation(s, bond + 1);
    if (d) acc += psi[static_cast<Eigen::Index>(k)] * psi[static_cast<Eigen::Index>(k)] * d;
  }
  return sign * acc;
}

}  // namespace

double mid_chain_order(const ConstrainedBasis& basis, const Eigen::VectorXd& psi) {
  const int L = basis.length();
  if (L < 3) throw SizeError("mid-chain order needs L >= 3");
  if (L % 2) return bond_order(basis, psi, (L - 1) / 2);
  return 0.5 * (std::abs(bond_order(basis, psi, L / 2 - 1)) + std::abs(bond_order(basis, psi, L / 2)));
}

double sigma_rs_scale(int L) { return std::pow(std::sin(std::numbers::pi / (L + 2)), -0.125); }

double sigma_rs(const ConstrainedBasis& basis, const ChainParams& params) {
  EigenOptions opt;
  const Spectrum s = eigensolve_lowest(build_hamiltonian(basis, params), 1, opt);
  return mid_chain_order(basis, s.vector(0)) * sigma_rs_scale(basis.length());
}

CrossingPoint find_crossing(const Curve& a, const Curve& b, int L_a, int L_b) {
  if (a.size() < 2 || b.size() < 2) throw ValidationError("crossing curves need at least 2 points");
  const auto interp_b = [&](double x, bool& ok) {
    ok = x >= b.front().first && x <= b.back().first;
    if (!ok) return 0.0;
    auto it = std::lower_bound(b.begin(), b.end(), x, [](const auto& p, double v) { return p.first < v; });
    if (it == b.begin() || it->first == x) return it->second;
    const auto& q = *it;
    const auto& p = *(it - 1);
    return p.second + (q.second - p.second) * (x - p.first) / (q.first - p.first);
  };
  std::vector<std::pair<double, double>> d;  // (x, a - b)
  std::vector<double> av;
  for (const auto& [x, y] : a) {
    bool ok = false;
    const double yb = interp_b(x, ok);
    if (ok) {
      d.emplace_back(x, y - yb);
      av.push_back(y);
    }
  }
  if (d.size() < 2) throw NoCrossingError("curves do not overlap");
  if (std::all_of(d.begin(), d.end(), [](const auto& p) { return p.second == 0.0; }))
    throw NoCrossingError("curves are identical; crossing is degenerate");
  for (std::size_t i = 0; i + 1 < d.size(); ++i) {
    const double d0 = d[i].second, d1 = d[i + 1].second;
    if (d0 == 0.0) return {std::min(L_a, L_b), std::max(L_a, L_b), d[i].first, av[i]};
    if (d0 * d1 < 0) {
      const double t = d0 / (d0 - d1);
      const double x = d[i].first + t * (d[i + 1].first - d[i].first);
      return {std::min(L_a, L_b), std::max(L_a, L_b), x, av[i] + t * (av[i + 1] - av[i])};
    }
  }
  if (d.back().second == 0.0) return {std::min(L_a, L_b), std::max(L_a, L_b), d.back().first, av.back()};
  throw NoCrossingError("curves do not bracket a sign change");
}

CrossingPoint find_crossing(const std::function<double(double)>& fa, const std::function<double(double)>& fb,
                            double guess, const CrossingOptions& opt, double scale) {
  if (!(opt.step > 0) || !(opt.tol > 0)) throw ValidationError("crossing step and tol must be positive");
  const double step = opt.step * scale, lo = opt.lo * scale, hi = opt.hi * scale;
  struct Eval {
    double x, a, d;
  };
  const auto eval = [&](double x) {
    const double va = fa(x);
    return Eval{x, va, va - fb(x)};
  };
  if (guess < lo || guess > hi) guess = std::clamp(guess, lo, hi);
  Eval centre = eval(guess);
  if (centre.d == 0.0) return {0, 0, centre.x, centre.a};
  Eval left = centre, right = centre;
  bool left_open = true, right_open = true;
  Eval b0{}, b1{};
  bool found = false;
  for (int k = 1; k <= opt.max_steps && !found && (left_open || right_open); ++k) {
    if (right_open) {
      const double x = guess + k * step;
      if (x > hi) {
        right_open = false;
      } else {
        const Eval e = eval(x);
        if (e.d == 0.0) return {0, 0, e.x, e.a};
        if (e.d * right.d < 0) {
          b0 = right, b1 = e, found = true;
          break;
        }
        right = e;
      }
    }
    if (left_open) {
      const double x = guess - k * step;
      if (x < lo) {
        left_open = false;
      } else {
        const Eval e = eval(x);
        if (e.d == 0.0) return {0, 0, e.x, e.a};
        if (e.d * left.d < 0) {
          b0 = e, b1 = left, found = true;
          break;
        }
        left = e;
      }
    }
  }
  if (!found) throw NoCrossingError("no sign change of the difference inside the search window");
  const double tol = opt.tol * scale;
  while (b1.x - b0.x > tol) {
    const Eval m = eval(0.5 * (b0.x + b1.x));
    if (m.d == 0.0) return {0, 0, m.x, m.a};
    if (m.d * b0.d < 0) b1 = m;
    else b0 = m;
  }
  const double t = b0.d / (b0.d - b1.d);
  return {0, 0, b0.x + t * (b1.x - b0.x), b0.a + t * (b1.a - b0.a)};
}

namespace {

struct ChainCache {
  ConstrainedBasis basis;
  HamiltonianTerms terms;
  Permutation reflection;
  Eigen::VectorXd warm;
  std::map<double, Spectrum> spectra;

  ChainCache(const ChainParams& p) : basis(p.L), terms(build_hamiltonian_terms(basis, p)) {}
};

const Spectrum& spectrum_at(ChainCache& c, const ChainParams& base, double delta, std::size_t n_states,
                            bool labelled = false) {
  auto it = c.spectra.find(delta);
  if (it != c.spectra.end() && it->second.size() >= n_states) return it->second;
  EigenOptions opt;
  if (labelled) {
    if (c.reflection.empty()) c.reflection = reflection_permutation(c.basis);
    opt.reflection = &c.reflection;
  }
  if (c.warm.size() == static_cast<Eigen::Index>(c.basis.size())) opt.start = &c.warm;
  n_states = std::min(n_states, c.basis.size());
  Spectrum s = eigensolve_lowest(c.terms.assemble(base.omega, delta), n_states, opt);
  c.warm = s.vector(0);
  return c.spectra[delta] = std::move(s);
}

std::string describe(int L, double delta_over_omega, const std::string& what, double value) {
  std::ostringstream os;
  os << "L=" << L << " delta/omega=" << fmt_num(delta_over_omega) << ' ' << what << '=' << fmt_num(value);
  return os.str();
}

}  // namespace

CrossingScan ising_crossing_scan(const ChainParams& base, const std::vector<int>& Ls, int pair_gap,
                                 double guess_over_omega, const CrossingOptions& opt, int fit_order,
                                 const ScanLog& log) {
  if (pair_gap <= 0) throw ValidationError("pair gap must be positive");
  std::map<int, std::unique_ptr<ChainCache>> caches;
  const auto cache = [&](int L) -> ChainCache& {
    auto& slot = caches[L];
    if (!slot) {
      ChainParams p = base;
      p.L = L;
      p.local_detunings.clear();
      p.validate();
      slot = std::make_unique<ChainCache>(p);
    }
    return *slot;
  };
  const auto sigma_fn = [&](int L) {
    return [&, L](double delta) {
      ChainCache& c = cache(L);
      const Spectrum& s = spectrum_at(c, base, delta, 1);
      const double v = mid_chain_order(c.basis, s.vector(0)) * sigma_rs_scale(L);
      if (log) log(describe(L, delta / base.omega, "sigma_rs", v));
      return v;
    };
  };
  CrossingScan scan;
  double guess = guess_over_omega * base.omega;
  std::vector<int> sorted = Ls;
  std::sort(sorted.begin(), sorted.end());
  for (int La : sorted) {
    const int Lb = La + pair_gap;
    if (!std::binary_search(sorted.begin(), sorted.end(), Lb)) continue;
    CrossingPoint cp = find_crossing(sigma_fn(La), sigma_fn(Lb), guess, opt, base.omega);
    cp.L_small = La;
    cp.L_large = Lb;
    scan.points.push_back(cp);
    guess = cp.delta_x;
    caches.erase(La);  // La never shows up again in an ascending walk
  }
  if (scan.points.empty()) throw ValidationError("no (L, L + gap) pairs in the L list");
  std::vector<double> x, y;
  for (const auto& p : scan.points) {
    x.push_back(2.0 / (p.L_small + p.L_large));
    y.push_back(p.delta_x / base.omega);
  }
  if (static_cast<int>(x.size()) > fit_order) scan.delta_fit = extrapolate(x, y, fit_order);
  else if (!x.empty()) {
    scan.delta_fit.x = x;
    scan.delta_fit.y = y;
    scan.delta_fit.value = y.back();
    scan.delta_fit.sigma = std::numeric_limits<double>::quiet_NaN();
  }
  return scan;
}

double gap_ratio(const ConstrainedBasis& basis, const ChainParams& params, int level) {
  if (level < 1) throw ValidationError("gap ratio level must be >= 1");
  const Spectrum s = eigensolve_lowest(build_hamiltonian(basis, params), static_cast<std::size_t>(level) + 1);
  return (s.energies[level] - s.energies[0]) / (s.energies[1] - s.energies[0]);
}

RatioScan tci_ratio_scan(const ChainParams& base, const std::vector<int>& Ls, const std::vector<int>& levels,
                         double guess_over_omega, const CrossingOptions& opt, int ratio_order, int delta_order,
                         const ScanLog& log) {
  if (levels.empty()) throw ValidationError("no ratio levels requested");
  std::vector<int> sorted = Ls;
  std::sort(sorted.begin(), sorted.end());
  for (int L : sorted)
    if (L % 2 == 0) throw ValidationError("tci_ratio_scan expects odd L");
  const int top = *std::max_element(levels.begin(), levels.end());
  for (int l : levels)
    if (l < 2) throw ValidationError("ratio levels start at 2");
  std::map<int, std::unique_ptr<ChainCache>> caches;
  const auto cache = [&](int L) -> ChainCache& {
    auto& slot = caches[L];
    if (!slot) {
      ChainParams p = base;
      p.L = L;
      p.local_detunings.clear();
      p.validate();
      slot = std::make_unique<ChainCache>(p);
    }
    return *slot;
  };
  const auto ratio_fn = [&](int L, int level) {
    return [&, L, level](double delta) {
      const Spectrum& s = spectrum_at(cache(L), base, delta, static_cast<std::size_t>(top) + 1);
      const double r = (s.energies[level] - s.energies[0]) / (s.energies[1] - s.energies[0]);
      if (log) log(describe(L, delta / base.omega, "E" + std::to_string(level) + "/E1", r));
      return r;
    };
  };
  RatioScan scan;
  scan.levels = levels;
  for (int level : levels) {
    double guess = guess_over_omega * base.omega;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      const int La = sorted[i], Lb = sorted[i + 1];
      CrossingPoint cp = find_crossing(ratio_fn(La, level), ratio_fn(Lb, level), guess, opt, base.omega);
      cp.L_small = La;
      cp.L_large = Lb;
      scan.crossings[level].push_back(cp);
      guess = cp.delta_x;
    }
    std::vector<double> x, r, d;
    for (const auto& p : scan.crossings[level]) {
      x.push_back(2.0 / (p.L_small + p.L_large));
      r.push_back(p.value_x);
      d.push_back(p.delta_x / base.omega);
    }
    if (static_cast<int>(x.size()) > ratio_order) scan.ratio_fit[level] = extrapolate(x, r, ratio_order);
    if (static_cast<int>(x.size()) > delta_order) scan.delta_fit[level] = extrapolate(x, d, delta_order);
  }
  return scan;
}

EtaPoint eta_point(const ConstrainedBasis& basis, const ChainParams& base, double eta, int parity,
                   std::size_t n_states) {
  if (parity != 1 && parity != -1) throw ValidationError("parity must be +1 or -1");
  ChainParams p = base;
  p.eta = eta;
  const Permutation R = reflection_permutation(basis);
  EigenOptions opt;
  opt.reflection = &R;
  for (;;) {
    const Spectrum s = eigensolve_lowest(build_hamiltonian(basis, p), std::min(n_states, basis.size()), opt);
    const int g = s.parities[0];
    std::vector<double> gaps;
    for (std::size_t k = 1; k < s.size(); ++k)
      if (s.parities[k] != kParityAmbiguous && s.parities[k] * g == parity) gaps.push_back(s.energies[k] - s.energies[0]);
    if (gaps.size() >= 2) return {eta, gaps[0], gaps[1], gaps[1] / gaps[0]};
    if (n_states >= basis.size()) throw NumericalError("fewer than two levels in the requested parity sector");
    n_states *= 2;
  }
}

std::vector<EtaPoint> eta_ratio_scan(const ChainParams& base, const std::vector<double>& etas, int parity,
                                     const ScanLog& log) {
  const ConstrainedBasis basis(base.L);
  std::vector<EtaPoint> out;
  for (double eta : etas) {
    out.push_back(eta_point(basis, base, eta, parity));
    if (log) {
      std::ostringstream os;
      os << "L=" << base.L << " eta=" << fmt_num(eta) << " E2/E1=" << fmt_num(out.back().ratio);
      log(os.str());
    }
  }
  return out;
}

double eta_crossing(const ChainParams& base, double target, double guess, double step, double tol, int parity) {
  const ConstrainedBasis basis(base.L);
  CrossingOptions opt;
  opt.step = step;
  opt.tol = tol;
  opt.lo = 0.0;
  opt.hi = 1.5;
  const auto f = [&](double eta) { return eta_point(basis, base, eta, parity).ratio; };
  const auto g = [&](double) { return target; };
  return find_crossing(f, g, guess, opt, 1.0).delta_x;
}

}  // namespace rydcft
