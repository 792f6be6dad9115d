#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "rydcft/cft_oracle.hpp"
#include "rydcft/errors.hpp"

using namespace rydcft;

namespace {

std::string rows_text(const std::vector<LevelRow>& rows) {
  std::string s;
  for (const auto& r : rows) s += r.label + " | " + r.normalized_energy.str() + " | " + (r.parity > 0 ? "even" : "odd") + "\n";
  return s;
}

std::string levels_text(const std::vector<CftLevel>& lv) {
  std::string s;
  for (const auto& l : lv) s += l.primary + " | " + l.normalized_energy.str() + " | " + (l.parity > 0 ? "even" : "odd") + "\n";
  return s;
}

}  // namespace

TEST_CASE("rational arithmetic") {
  CHECK(make_rational(6, 4).str() == "3/2");
  CHECK(make_rational(-2, -4).str() == "1/2");
  CHECK(make_rational(4, 2).str() == "2");
  CHECK(make_rational(0, 7).str() == "0");
  CHECK((make_rational(1, 10) + make_rational(1, 1)).str() == "11/10");
  CHECK((make_rational(3, 5) / make_rational(3, 2)).str() == "2/5");
  CHECK((make_rational(2, 1) / make_rational(3, 2)).str() == "4/3");
  CHECK_THROWS_AS(make_rational(1, 0), DomainError);
  CHECK_THROWS_AS(make_rational(1, 2) / make_rational(0, 1), DomainError);
}

TEST_CASE("Ising table, odd chains") {
  auto lv = ising_levels(ChainParity::odd_L, FermionSector::even_fermion, 7);
  CHECK(rows_text(merge_rows(lv)) ==
        "{} | 0 | even\n"
        "{0,1} | 2 | even\n"
        "{0,2} | 3 | odd\n"
        "{0,3}, {1,2} | 4 | even\n"
        "{0,4}, {1,3} | 5 | odd\n");
}

TEST_CASE("Ising table, even chains") {
  auto lv = ising_levels(ChainParity::even_L, FermionSector::odd_fermion, 6);
  CHECK(rows_text(merge_rows(lv)) ==
        "{0} | 1/2 | even\n"
        "{1} | 3/2 | odd\n"
        "{2} | 5/2 | even\n"
        "{3} | 7/2 | odd\n"
        "{0,1,2}, {4} | 9/2 | even\n");
}

TEST_CASE("Ising ladders") {
  auto lv = ising_levels(ChainParity::odd_L, FermionSector::even_fermion, 20);
  auto even = oracle_gap_ladder(lv, 1);
  auto odd = oracle_gap_ladder(lv, -1);
  // strongest-coupled even states are the adjacent pairs {b,b+1}; first distinct values
  CHECK(even[0] == 2.0);
  CHECK(even[1] == 4.0);
  CHECK(odd[0] == 3.0);
  for (std::size_t i = 1; i < lv.size(); ++i) CHECK(lv[i].normalized_energy.value() >= lv[i - 1].normalized_energy.value());
  // fermion number parity
  for (const auto& l : lv) CHECK(l.occupation->size() % 2 == 0);
  CHECK_THROWS_AS(ising_levels(ChainParity::odd_L, FermionSector::even_fermion, 0), ValidationError);
}

TEST_CASE("mode momenta increase") {
  for (int n = 0; n < 10; ++n) CHECK(FermionMode{n + 1}.momentum(19) > FermionMode{n}.momentum(19));
  CHECK(FermionMode{0}.momentum(10) == doctest::Approx(std::numbers::pi / 20));
}

TEST_CASE("TCI table, odd chains") {
  CHECK(levels_text(tci_levels(BoundaryCondition::tci_free, ChainParity::odd_L, 4)) ==
        "I | 0 | even\nepsilon'' | 3/2 | even\nI | 2 | even\nepsilon'' | 5/2 | odd\n");
  CHECK(levels_text(tci_levels(BoundaryCondition::tci_intermediate, ChainParity::odd_L, 4)) ==
        "I | 0 | even\nepsilon' | 3/5 | even\nepsilon' | 8/5 | odd\nI | 2 | even\n");
  CHECK(levels_text(tci_levels(BoundaryCondition::tci_fixed, ChainParity::odd_L, 4)) ==
        "I | 0 | even\nI | 2 | even\nI | 3 | odd\nI | 4 | even\n");
}

TEST_CASE("TCI table, even chains") {
  CHECK(levels_text(tci_levels(BoundaryCondition::tci_free, ChainParity::even_L, 4)) ==
        "I | 0 | even\nepsilon'' | 3/2 | odd\nI | 2 | even\nepsilon'' | 5/2 | even\n");
  CHECK(levels_text(tci_levels(BoundaryCondition::tci_intermediate, ChainParity::even_L, 4)) ==
        "epsilon | 1/10 | even\nepsilon | 11/10 | odd\nepsilon'' | 3/2 | even\nepsilon | 21/10 | even\n");
  CHECK(levels_text(tci_levels(BoundaryCondition::tci_fixed, ChainParity::even_L, 4)) ==
        "epsilon'' | 3/2 | even\nepsilon'' | 5/2 | odd\nepsilon'' | 7/2 | even\nepsilon'' | 9/2 | odd\n");
  CHECK_THROWS_AS(tci_levels(BoundaryCondition::ising_free, ChainParity::odd_L, 2), ValidationError);
  CHECK_THROWS_AS(tci_levels(BoundaryCondition::tci_free, ChainParity::odd_L, 5), ValidationError);
}

TEST_CASE("TCI ratios") {
  const auto E = [](BoundaryCondition bc, int i) {
    return tci_levels(bc, ChainParity::odd_L, 4)[i].normalized_energy;
  };
  // even-parity E2/E1 per boundary condition
  CHECK((E(BoundaryCondition::tci_free, 2) / E(BoundaryCondition::tci_free, 1)).str() == "4/3");
  CHECK((E(BoundaryCondition::tci_intermediate, 3) / E(BoundaryCondition::tci_intermediate, 1)).str() == "10/3");
  CHECK((E(BoundaryCondition::tci_fixed, 3) / E(BoundaryCondition::tci_fixed, 1)).str() == "2");
  CHECK((E(BoundaryCondition::tci_intermediate, 1) / E(BoundaryCondition::tci_free, 1)).str() == "2/5");
  CHECK((E(BoundaryCondition::tci_fixed, 1) / E(BoundaryCondition::tci_free, 1)).str() == "4/3");
}

TEST_CASE("levels csv") {
  std::ostringstream os;
  write_levels_csv(os, tci_levels(BoundaryCondition::tci_intermediate, ChainParity::odd_L, 2));
  CHECK(os.str() == "primary,J,normalized_energy,parity\nI,0,0,even\nepsilon',0,3/5,even\n");
}

TEST_CASE("boundary condition names round-trip") {
  for (auto bc : {BoundaryCondition::ising_fixed_pp, BoundaryCondition::ising_fixed_pm, BoundaryCondition::ising_free,
                  BoundaryCondition::tci_free, BoundaryCondition::tci_intermediate, BoundaryCondition::tci_fixed})
    CHECK(boundary_condition_from_string(to_string(bc)) == bc);
  CHECK_THROWS_AS(boundary_condition_from_string("periodic"), ValidationError);
}

TEST_CASE("sinc matrix elements") {
  const int L = 19;
  const double pi = std::numbers::pi;
  // k = 0, alpha = 0: adjacent modes dominate
  double best = -1;
  int best_diff = 0;
  for (int d = 1; d <= 6; ++d) {
    const double s = sinc_matrix_element(0.0, 0.0, 0, d, L);
    if (s > best) best = s, best_diff = d;
  }
  CHECK(best_diff == 1);
  // k = pi/18, alpha = pi/2: modes two apart
  best = -1;
  for (int d = 1; d <= 6; ++d) {
    const double s = sinc_matrix_element(pi / 18, pi / 2, 0, d, L);
    if (s > best) best = s, best_diff = d;
  }
  CHECK(best_diff == 2);
  CHECK(sinc_matrix_element(0.0, 0.0, 0, 2, L) == 0.0);
  CHECK(sinc_matrix_element(0.3, pi / 2, 1, 2, L) == 0.0);
  CHECK(sinc_matrix_element(0.0, pi, 0, 1, L) == sinc_matrix_element(0.0, 0.0, 0, 1, L));
  CHECK_THROWS_AS(sinc_matrix_element(0.0, 0.3, 0, 1, L), DomainError);
  CHECK_THROWS_AS(sinc_matrix_element(0.0, 0.0, 1, 1, L), ValidationError);
}

TEST_CASE("structure factor shapes") {
  const double v = 3.0;
  CHECK(dsf_prediction(DsfField::epsilon, 0.0, 0.5, v) == dsf_prediction(DsfField::epsilon, 0.0, 1.7, v));
  CHECK(dsf_prediction(DsfField::epsilon, 1.0, 2.0, v) == 0.0);
  const double r = dsf_prediction(DsfField::sigma, 0.0, 2.4, v) / dsf_prediction(DsfField::sigma, 0.0, 1.2, v);
  CHECK(r == doctest::Approx(std::pow(2.0, -7.0 / 4.0)).epsilon(1e-12));
  CHECK(dsf_prediction(DsfField::sigma, 1.0, 2.0, v) == 0.0);
  CHECK_THROWS_AS(dsf_prediction(DsfField::sigma, 0.0, 1.0, 0.0), DomainError);

  const int L = 21;
  auto obc = dsf_comb(false, v, L, 4);
  auto pbc = dsf_comb(true, v, L, 3);
  const double unit = std::numbers::pi * v / L;
  for (int m = 0; m < 4; ++m) {
    CHECK(obc[m].omega / unit == doctest::Approx(2.0 * (m + 1)));
    CHECK(obc[m].weight == doctest::Approx(2 * std::numbers::pi * std::numbers::pi / v));
  }
  for (int m = 0; m < 3; ++m) CHECK(pbc[m].omega / unit == doctest::Approx(2.0 * m + 1));
}

TEST_CASE("light-cone velocity") {
  const double v = 7.3;
  std::vector<double> k{0.0, 0.1, 0.2, 0.35}, f;
  for (double x : k) f.push_back(v * x / (2 * std::numbers::pi));
  auto fit = light_cone_velocity(k, f);
  CHECK(fit.v == doctest::Approx(v).epsilon(1e-12));
  CHECK(fit.sigma < 1e-12);

  // noisy synthetic line: recovered within the fit sigma
  std::vector<double> kn, fn;
  const double noise[] = {0.02, -0.015, 0.01, -0.025, 0.005, 0.018, -0.01, 0.0};
  for (int i = 0; i < 8; ++i) {
    kn.push_back(0.05 * i);
    fn.push_back(0.4 + v * kn.back() / (2 * std::numbers::pi) + noise[i]);
  }
  auto nf = light_cone_velocity(kn, fn);
  CHECK(std::abs(nf.v - v) < 2 * nf.sigma);
  CHECK(nf.intercept == doctest::Approx(0.4).epsilon(0.1));
  CHECK_THROWS_AS(light_cone_velocity({1.0}, {1.0}), ValidationError);
}
