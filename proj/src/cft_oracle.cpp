#include "rydcft/cft_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <numbers>
#include <ostream>

#include "rydcft/errors.hpp"

namespace rydcft {

Rational make_rational(long num, long den) {
  if (den == 0) throw DomainError("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const long g = std::gcd(num, den);
  return {num / (g ? g : 1), den / (g ? g : 1)};
}

Rational operator+(const Rational& a, const Rational& b) {
  return make_rational(a.num * b.den + b.num * a.den, a.den * b.den);
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num == 0) throw DomainError("division by a zero rational");
  return make_rational(a.num * b.den, a.den * b.num);
}

std::string Rational::str() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

ChainParity chain_parity_of(int L) { return L % 2 ? ChainParity::odd_L : ChainParity::even_L; }

std::string to_string(BoundaryCondition bc) {
  switch (bc) {
    case BoundaryCondition::ising_fixed_pp: return "ising_fixed_pp";
    case BoundaryCondition::ising_fixed_pm: return "ising_fixed_pm";
    case BoundaryCondition::ising_free: return "ising_free";
    case BoundaryCondition::tci_free: return "free";
    case BoundaryCondition::tci_intermediate: return "intermediate";
    case BoundaryCondition::tci_fixed: return "fixed";
  }
  return "free";
}

BoundaryCondition boundary_condition_from_string(const std::string& s) {
  for (auto bc : {BoundaryCondition::ising_fixed_pp, BoundaryCondition::ising_fixed_pm, BoundaryCondition::ising_free,
                  BoundaryCondition::tci_free, BoundaryCondition::tci_intermediate, BoundaryCondition::tci_fixed})
    if (to_string(bc) == s) return bc;
  if (s == "tci_free") return BoundaryCondition::tci_free;
  if (s == "tci_intermediate") return BoundaryCondition::tci_intermediate;
  if (s == "tci_fixed") return BoundaryCondition::tci_fixed;
  throw ValidationError("unknown boundary condition '" + s + "'");
}

double FermionMode::momentum(int L) const { return std::numbers::pi / L * (n + 0.5); }

namespace {

// Reflection sign of a filling, before normalizing to the ground state. Each mode picks up
// -(-1)^n (-1)^(L+1) and reordering the m attached G factors adds (-1)^(m(m-1)/2).
int filling_sign(const std::vector<int>& occ, bool odd_L) {
  int s = 1;
  for (int n : occ) {
    const int mode = -((n % 2) ? -1 : 1) * (odd_L ? 1 : -1);
    s *= mode;
  }
  const std::size_t m = occ.size();
  if ((m * (m - 1) / 2) % 2) s = -s;
  return s;
}

}  // namespace

std::vector<CftLevel> ising_levels(ChainParity parity, FermionSector sector, std::size_t count) {
  if (count == 0) throw ValidationError("count must be >= 1");
  const bool odd_L = parity == ChainParity::odd_L;
  const int want = sector == FermionSector::even_fermion ? 0 : 1;
  // Enough modes that every filling up to the requested depth is present: a filling whose
  // energy is at most E uses modes n <= E, and the count of fillings grows quickly.
  std::vector<std::vector<int>> fillings;
  int modes = 4;
  for (;;) {
    fillings.clear();
    for (unsigned mask = 0; mask < (1u << modes); ++mask) {
      if (static_cast<int>(__builtin_popcount(mask) % 2) != want) continue;
      std::vector<int> occ;
      for (int n = 0; n < modes; ++n)
        if (mask & (1u << n)) occ.push_back(n);
      fillings.push_back(occ);
    }
    const auto twice_energy = [](const std::vector<int>& o) {
      long e = 0;
      for (int n : o) e += 2 * n + 1;
      return e;
    };
    std::stable_sort(fillings.begin(), fillings.end(), [&](const auto& a, const auto& b) {
      const long ea = twice_energy(a), eb = twice_energy(b);
      return ea != eb ? ea < eb : a < b;
    });
    if (fillings.size() >= count) {
      // Every filling not yet representable needs a mode >= modes, i.e. energy >= modes + 1/2.
      const long cutoff = twice_energy(fillings[count - 1]);
      if (cutoff < 2 * modes + 1) break;
    }
    ++modes;
    if (modes > 24) throw ValidationError("too many Ising levels requested");
  }
  const std::vector<int> ground = odd_L ? std::vector<int>{} : std::vector<int>{0};
  const int ref = filling_sign(ground, odd_L);
  std::vector<CftLevel> out;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& occ = fillings[i];
    long twice = 0;
    for (int n : occ) twice += 2 * n + 1;
    CftLevel lv;
    lv.primary = "fermion";
    lv.normalized_energy = make_rational(twice, 2);
    lv.parity = filling_sign(occ, odd_L) * ref;
    lv.occupation = occ;
    // Tower bookkeeping: primary from the fractional part, descendant level from the rest.
    lv.primary = (twice % 2) ? "epsilon" : "I";
    lv.J = static_cast<int>(twice / 2);
    out.push_back(lv);
  }
  return out;
}

std::vector<CftLevel> tci_levels(BoundaryCondition bc, ChainParity parity, std::size_t count) {
  struct Row {
    const char* primary;
    int J;
    long num, den;
    int parity;
  };
  std::vector<Row> rows;
  const bool odd = parity == ChainParity::odd_L;
  switch (bc) {
    case BoundaryCondition::tci_free:
      rows = {{"I", 0, 0, 1, 1}, {"epsilon''", 0, 3, 2, odd ? 1 : -1}, {"I", 2, 2, 1, 1},
              {"epsilon''", 1, 5, 2, odd ? -1 : 1}};
      break;
    case BoundaryCondition::tci_intermediate:
      if (odd)
        rows = {{"I", 0, 0, 1, 1}, {"epsilon'", 0, 3, 5, 1}, {"epsilon'", 1, 8, 5, -1}, {"I", 2, 2, 1, 1}};
      else
        rows = {{"epsilon", 0, 1, 10, 1}, {"epsilon", 1, 11, 10, -1}, {"epsilon''", 0, 3, 2, 1},
                {"epsilon", 2, 21, 10, 1}};
      break;
    case BoundaryCondition::tci_fixed:
      if (odd)
        rows = {{"I", 0, 0, 1, 1}, {"I", 2, 2, 1, 1}, {"I", 3, 3, 1, -1}, {"I", 4, 4, 1, 1}};
      else
        rows = {{"epsilon''", 0, 3, 2, 1}, {"epsilon''", 1, 5, 2, -1}, {"epsilon''", 2, 7, 2, 1},
                {"epsilon''", 3, 9, 2, -1}};
      break;
    default:
      throw ValidationError("tci_levels needs a tricritical boundary condition");
  }
  if (count == 0 || count > rows.size())
    throw ValidationError("tci_levels: only " + std::to_string(rows.size()) + " levels are tabulated");
  std::vector<CftLevel> out;
  for (std::size_t i = 0; i < count; ++i) {
    CftLevel lv;
    lv.primary = rows[i].primary;
    lv.J = rows[i].J;
    lv.normalized_energy = make_rational(rows[i].num, rows[i].den);
    lv.parity = rows[i].parity;
    out.push_back(lv);
  }
  return out;
}

std::vector<LevelRow> merge_rows(const std::vector<CftLevel>& levels) {
  std::vector<LevelRow> rows;
  for (const auto& lv : levels) {
    std::string label = lv.primary;
    if (lv.occupation) {
      label = "{";
      for (std::size_t i = 0; i < lv.occupation->size(); ++i) label += (i ? "," : "") + std::to_string((*lv.occupation)[i]);
      label += "}";
      if (lv.occupation->empty()) label = "{}";
    }
    if (!rows.empty() && rows.back().normalized_energy == lv.normalized_energy && lv.occupation &&
        rows.back().parity == lv.parity) {
      rows.back().label += ", " + label;
    } else {
      rows.push_back({label, lv.normalized_energy, lv.parity});
    }
  }
  return rows;
}

void write_levels_csv(std::ostream& os, const std::vector<CftLevel>& levels) {
  os << "primary,J,normalized_energy,parity\n";
  for (const auto& lv : levels)
    os << lv.primary << ',' << lv.J << ',' << lv.normalized_energy.str() << ',' << (lv.parity > 0 ? "even" : "odd")
       << '\n';
}

std::vector<double> oracle_gap_ladder(const std::vector<CftLevel>& levels, int parity_filter) {
  if (levels.size() < 2) return {};
  const double e0 = levels.front().normalized_energy.value();
  std::vector<double> gaps;
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (parity_filter == 0 || levels[i].parity == parity_filter) gaps.push_back(levels[i].normalized_energy.value() - e0);
  return gaps;
}

std::vector<std::pair<std::string, Rational>> tci_primaries() {
  return {{"I", make_rational(0, 1)},        {"sigma", make_rational(3, 80)},   {"epsilon", make_rational(1, 10)},
          {"sigma'", make_rational(7, 16)},  {"epsilon'", make_rational(3, 5)}, {"epsilon''", make_rational(3, 2)}};
}

std::vector<std::pair<std::string, Rational>> ising_primaries() {
  return {{"I", make_rational(0, 1)}, {"sigma", make_rational(1, 16)}, {"epsilon", make_rational(1, 2)}};
}

double sinc_matrix_element(double k, double alpha, int a, int b, int L) {
  if (a == b) throw ValidationError("two-fermion matrix element needs distinct modes");
  if (a < 0 || b < 0 || L < 1) throw ValidationError("mode indices must be >= 0 and L >= 1");
  const double pi = std::numbers::pi;
  const double r = std::remainder(alpha, pi);  // alpha folded into [-pi/2, pi/2]
  int P = 0;
  const bool odd_diff = std::abs(a - b) % 2 == 1;
  if (std::abs(r) < 1e-12) {
    P = odd_diff ? 1 : 0;
  } else if (std::abs(std::abs(r) - pi / 2) < 1e-12) {
    P = odd_diff ? 0 : -1;
  } else {
    throw DomainError("sinc_matrix_element: alpha must be a multiple of pi/2");
  }
  if (P == 0) return 0.0;
  const auto sinc = [](double x) { return std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x; };
  const double dk = (a - b) * pi / L;
  const double s = sinc((k - dk) * L / 2.0) + P * sinc((k + dk) * L / 2.0);
  return s * s;
}

double dsf_prediction(DsfField field, double k, double omega, double v) {
  if (!(v > 0)) throw DomainError("velocity must be positive");
  const double gap = std::abs(omega) - v * std::abs(k);
  if (gap <= 0) return 0.0;
  if (field == DsfField::epsilon) return 1.0;
  return std::pow(omega * omega - v * v * k * k, -7.0 / 8.0);
}

std::vector<CombLine> dsf_comb(bool periodic, double v, int L, int lines) {
  if (!(v > 0) || L < 1) throw DomainError("comb needs v > 0 and L >= 1");
  std::vector<CombLine> out;
  const double unit = std::numbers::pi * v / L;
  // A delta in the rescaled variable carries a Jacobian of unit when written in omega.
  const double w = 2.0 * std::numbers::pi * std::numbers::pi / v;
  for (int m = 0; m < lines; ++m) out.push_back({unit * (periodic ? 2 * m + 1 : 2 * (m + 1)), w});
  return out;
}

VelocityFit light_cone_velocity(const std::vector<double>& k, const std::vector<double>& f) {
  if (k.size() != f.size()) throw ValidationError("k and f_th must have equal length");
  if (k.size() < 2) throw ValidationError("light-cone fit needs at least 2 points");
  const double n = static_cast<double>(k.size());
  const double mk = std::accumulate(k.begin(), k.end(), 0.0) / n;
  const double mf = std::accumulate(f.begin(), f.end(), 0.0) / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    sxx += (k[i] - mk) * (k[i] - mk);
    sxy += (k[i] - mk) * (f[i] - mf);
  }
  if (sxx == 0) throw ValidationError("light-cone fit needs distinct k values");
  const double slope = sxy / sxx;
  VelocityFit out;
  out.intercept = mf - slope * mk;
  out.v = 2.0 * std::numbers::pi * std::abs(slope);
  if (k.size() > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < k.size(); ++i) {
      const double r = f[i] - out.intercept - slope * k[i];
      rss += r * r;
    }
    out.sigma = 2.0 * std::numbers::pi * std::sqrt(rss / (n - 2) / sxx);
  }
  return out;
}

}  // namespace rydcft
