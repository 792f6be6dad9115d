#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rydcft/criticality.hpp"
#include "rydcft/errors.hpp"
#include "rydcft/spectral.hpp"

using namespace rydcft;

TEST_CASE("sampled crossing of two lines") {
  Curve a, b;
  for (int i = 0; i <= 10; ++i) {
    const double x = 0.2 * i;
    a.push_back({x, 2.0 * x - 1.0});
    b.push_back({x, 0.5 * x + 0.5});
  }
  auto c = find_crossing(a, b, 9, 13);
  CHECK(c.delta_x == 1.0);
  CHECK(c.value_x == 1.0);
  CHECK(c.L_small == 9);
  CHECK(c.L_large == 13);
  CHECK_THROWS_AS(find_crossing(a, a), NoCrossingError);
  Curve far;
  for (int i = 0; i <= 10; ++i) far.push_back({0.2 * i, 10.0 + i});
  CHECK_THROWS_AS(find_crossing(a, far), NoCrossingError);
}

TEST_CASE("function crossing is exact on polynomials") {
  const auto fa = [](double x) { return x * x * x - 0.5; };
  const auto fb = [](double x) { return 0.2 * x; };
  CrossingOptions opt;
  opt.step = 0.1;
  opt.tol = 1e-12;
  auto c = find_crossing(fa, fb, 0.3, opt);
  // root of x^3 - 0.2 x - 0.5 by Newton as the reference
  double r = 1.0;
  for (int i = 0; i < 60; ++i) r -= (r * r * r - 0.2 * r - 0.5) / (3 * r * r - 0.2);
  CHECK(std::abs(c.delta_x - r) < 1e-10);
  CHECK(std::abs(c.value_x - 0.2 * r) < 1e-10);

  // quadratic pair with two roots: the one nearest the guess wins
  const auto qa = [](double x) { return x * x; };
  const auto qb = [](double) { return 1.0; };
  CHECK(std::abs(find_crossing(qa, qb, -0.8, opt).delta_x + 1.0) < 1e-10);
  CHECK(std::abs(find_crossing(qa, qb, 0.7, opt).delta_x - 1.0) < 1e-10);

  opt.lo = 2.0;
  opt.hi = 3.0;
  CHECK_THROWS_AS(find_crossing(qa, qb, 2.5, opt), NoCrossingError);
}

TEST_CASE("polynomial extrapolation") {
  std::vector<double> x{0.1, 0.08, 0.06, 0.05, 0.04};
  std::vector<double> y;
  for (double v : x) y.push_back(1.7 - 0.3 * v + 2.0 * v * v);
  auto s = extrapolate(x, y, 2);
  CHECK(s.value == doctest::Approx(1.7).epsilon(1e-12));
  CHECK(s.coeffs[1] == doctest::Approx(-0.3).epsilon(1e-9));
  CHECK(s.sigma < 1e-9);
  auto lin = extrapolate({0.1, 0.05}, {1.0, 1.5}, 1);
  CHECK(lin.value == doctest::Approx(2.0));
  CHECK_THROWS_AS(extrapolate(x, y, 3), ValidationError);
  CHECK_THROWS_AS(extrapolate({0.1, 0.2}, {1.0, 2.0}, 2), ValidationError);
}

TEST_CASE("rescaled order parameter limits") {
  const int L = 11;
  auto basis = enumerate_basis(L);
  ChainParams p;
  p.L = L;
  p.omega = 0.01;
  p.v2 = 0.0;
  p.delta = 30.0;  // deep ordered
  CHECK(std::abs(sigma_rs(basis, p)) == doctest::Approx(sigma_rs_scale(L)).epsilon(1e-4));
  CHECK(sigma_rs_scale(L) > 1.0);
  CHECK(sigma_rs_scale(L) == doctest::Approx(std::pow(std::sin(std::numbers::pi / (L + 2)), -0.125)));
  p.delta = -30.0;  // deep disordered
  CHECK(std::abs(sigma_rs(basis, p)) < 1e-4);
}

TEST_CASE("even chains average the two central bonds") {
  const int L = 6;
  auto basis = enumerate_basis(L);
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
  psi[static_cast<Eigen::Index>(*basis.index_of(0b010101u))] = 1.0;
  // bonds 2 and 3: (-1)^3 (0 - 1) = 1 and (-1)^4 (1 - 0) = 1
  CHECK(mid_chain_order(basis, psi) == doctest::Approx(1.0));
  CHECK_THROWS_AS(mid_chain_order(enumerate_basis(2), Eigen::VectorXd::Ones(3)), SizeError);
}

TEST_CASE("gap ratio on a small chain") {
  auto basis = enumerate_basis(9);
  ChainParams p;
  p.L = 9;
  p.omega = 6.0;
  p.delta = 10.0;
  p.v2 = 3.06;
  auto spec = eigensolve_lowest(build_hamiltonian(basis, p), 4);
  const double expect = (spec.energies[2] - spec.energies[0]) / (spec.energies[1] - spec.energies[0]);
  CHECK(gap_ratio(basis, p, 2) == doctest::Approx(expect).epsilon(1e-9));
  CHECK_THROWS_AS(gap_ratio(basis, p, 0), ValidationError);
}

TEST_CASE("small Ising crossing scan") {
  ChainParams base;
  base.omega = 6.0;
  base.v2 = 3.06;
  base.v1 = 164.6;
  base.include_h2 = true;
  CrossingOptions opt;
  opt.step = 0.04;
  opt.tol = 1e-4;
  auto scan = ising_crossing_scan(base, {7, 9, 11, 13}, 2, 1.7, opt, 1);
  REQUIRE(scan.points.size() == 3);
  for (const auto& c : scan.points) {
    CHECK(c.L_large == c.L_small + 2);
    CHECK(c.delta_x / base.omega > 1.5);
    CHECK(c.delta_x / base.omega < 1.9);
  }
  CHECK(scan.delta_fit.x.size() == 3);
  CHECK_THROWS_AS(ising_crossing_scan(base, {7, 9}, 0, 1.7, opt, 1), ValidationError);
}

TEST_CASE("eta scan endpoints are parity-resolved gaps") {
  ChainParams base;
  base.L = 9;
  base.omega = 5.5;
  base.v2 = -8.965;
  base.v1 = -573.44;
  base.delta = -8.3;
  base.include_h2 = true;
  auto pts = eta_ratio_scan(base, {0.0, 1.0});
  REQUIRE(pts.size() == 2);
  for (const auto& q : pts) {
    CHECK(q.e2 > q.e1);
    CHECK(q.ratio == doctest::Approx(q.e2 / q.e1));
  }
  CHECK_THROWS_AS(eta_point(enumerate_basis(9), base, 0.0, 2), ValidationError);
}
