#include <Eigen/Eigenvalues>
#include <cmath>

#include "doctest.h"
#include "rydcft/errors.hpp"
#include "rydcft/hamiltonian.hpp"

using namespace rydcft;

namespace {

// Unconstrained 2^L Hamiltonian with a finite nearest-neighbour penalty.
Eigen::MatrixXd full_space_hamiltonian(int L, double omega, double delta, double v1, double v2) {
  const int dim = 1 << L;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  for (int s = 0; s < dim; ++s) {
    double e = 0.0;
    for (int i = 0; i < L; ++i) {
      if (!((s >> i) & 1)) continue;
      e -= delta;
      for (int j = i + 1; j < L; ++j) {
        if (!((s >> j) & 1)) continue;
        const int r = j - i;
        e += r == 1 ? v1 : 64.0 * v2 / std::pow(r, 6);
      }
    }
    H(s, s) = e;
    for (int i = 0; i < L; ++i) H(s ^ (1 << i), s) += omega / 2;
  }
  return H;
}

Eigen::VectorXd dense_eigenvalues(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Eigen::MatrixXd permutation_matrix(const Permutation& r) {
  const auto n = static_cast<Eigen::Index>(r.size());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) P(static_cast<Eigen::Index>(r[k]), k) = 1.0;
  return P;
}

}  // namespace

TEST_CASE("two-site blockade matrix") {
  auto basis = enumerate_basis(2);
  ChainParams p;
  p.L = 2;
  p.omega = 1.0;
  Eigen::MatrixXd H = build_hamiltonian(basis, p).to_dense();
  Eigen::MatrixXd expect(3, 3);
  expect << 0, 0.5, 0.5, 0.5, 0, 0, 0.5, 0, 0;
  CHECK((H - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("van der Waals tail at distance three") {
  auto basis = enumerate_basis(4);
  ChainParams p;
  p.L = 4;
  p.v2 = 1.0;
  auto H = build_hamiltonian(basis, p);
  const auto k = *basis.index_of(0b1001u);
  CHECK(H.entry(k, k) == doctest::Approx(64.0 / 729.0).epsilon(1e-14));
  // tail_range = 2 drops it
  p.tail_range = 2;
  CHECK(build_hamiltonian(basis, p).entry(k, k) == 0.0);
}

TEST_CASE("second-order correction vanishes at zero Rabi frequency and needs v1") {
  auto basis = enumerate_basis(6);
  ChainParams p;
  p.L = 6;
  p.omega = 0.0;
  p.v1 = 100.0;
  p.include_h2 = true;
  CHECK(build_h2_correction(basis, p).max_abs() == 0.0);
  p.v1 = 0.0;
  CHECK_THROWS_AS(build_h2_correction(basis, p), DomainError);
}

TEST_CASE("boundary detuning profile") {
  auto bd = boundary_detuning_profile(40, 1.0);
  CHECK(bd[0] == doctest::Approx(-1.0 - 64.0 / std::pow(41.0, 6)).epsilon(1e-14));
  CHECK(bd[0] == doctest::Approx(-1.0).epsilon(1e-8));
  for (double x : boundary_detuning_profile(9, 0.0)) CHECK(x == 0.0);
  auto sym = boundary_detuning_profile(9, 2.5);
  for (int i = 0; i < 9; ++i) CHECK(sym[i] == sym[8 - i]);
}

TEST_CASE("eta interpolation") {
  auto basis = enumerate_basis(9);
  ChainParams p;
  p.L = 9;
  p.omega = 5.5;
  p.delta = -8.3;
  p.v2 = -8.965;
  p.v1 = -573.44;
  p.include_h2 = true;
  auto H0 = build_hamiltonian(basis, p).to_dense();
  CHECK((build_h_eta(basis, p, 0.0).to_dense() - H0).cwiseAbs().maxCoeff() == 0.0);

  auto H1 = build_h_eta(basis, p, 1.0).to_dense();
  const auto bd = boundary_detuning_profile(9, p.v2);
  const auto k = *basis.index_of(0b000000001u);
  CHECK(H1(k, k) - H0(k, k) == doctest::Approx(-bd[0]).epsilon(1e-12));
  CHECK_THROWS_AS(build_h_eta(basis, p, 1.5), DomainError);
  CHECK_THROWS_AS(build_h_eta(basis, p, -0.1), DomainError);
}

TEST_CASE("hermiticity and reflection symmetry") {
  for (int L : {5, 8, 11}) {
    auto basis = enumerate_basis(L);
    ChainParams p;
    p.L = L;
    p.omega = 6.0;
    p.delta = 8.8;
    p.v2 = 3.06;
    p.v1 = 164.6;
    p.include_h2 = true;
    p.eta = 0.3;
    p.local_detunings.assign(static_cast<std::size_t>(L), 0.0);
    for (int i = 0; i < L; ++i) p.local_detunings[i] = 0.1 * std::min(i, L - 1 - i);
    auto H = build_hamiltonian(basis, p);
    CHECK(H.is_symmetric());
    Eigen::MatrixXd Hd = H.to_dense();
    CHECK((Hd - Hd.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::MatrixXd R = permutation_matrix(reflection_permutation(basis));
    CHECK((Hd * R - R * Hd).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("sparse product equals dense product") {
  for (int L = 2; L <= 10; ++L) {
    auto basis = enumerate_basis(L);
    ChainParams p;
    p.L = L;
    p.omega = 1.3;
    p.delta = 0.7;
    p.v2 = 0.4;
    p.v1 = 20.0;
    p.include_h2 = true;
    auto H = build_hamiltonian(basis, p);
    Eigen::MatrixXd D = H.to_dense();
    Eigen::VectorXd x(D.rows());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::sin(1.0 + 0.37 * static_cast<double>(i));
    Eigen::VectorXd y = H * x;
    for (Eigen::Index r = 0; r < D.rows(); ++r) {
      double acc = 0.0;
      for (Eigen::Index c = 0; c < D.cols(); ++c)
        if (D(r, c) != 0.0) acc += D(r, c) * x[c];
      CHECK(y[r] == acc);
    }
  }
}

TEST_CASE("constrained space equals the large-penalty limit of the full space") {
  for (int L = 3; L <= 8; ++L) {
    const double omega = 1.0, delta = 0.8, v2 = 0.3;
    auto basis = enumerate_basis(L);
    ChainParams p;
    p.L = L;
    p.omega = omega;
    p.delta = delta;
    p.v2 = v2;
    Eigen::VectorXd constrained = dense_eigenvalues(build_hamiltonian(basis, p).to_dense());
    Eigen::VectorXd full = dense_eigenvalues(full_space_hamiltonian(L, omega, delta, 1e6 * omega, v2));
    double worst = 0.0;
    for (Eigen::Index k = 0; k < constrained.size(); ++k)
      worst = std::max(worst, std::abs(full[k] - constrained[k]) / std::max(1.0, std::abs(constrained[k])));
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("second-order correction captures the finite-penalty shift") {
  // Full-space spectrum at a moderate penalty against the constrained model with and without H2.
  for (int L : {5, 6, 7}) {
    const double omega = 1.0, delta = 0.5, v2 = 0.2, v1 = 60.0;
    auto basis = enumerate_basis(L);
    ChainParams p;
    p.L = L;
    p.omega = omega;
    p.delta = delta;
    p.v2 = v2;
    p.v1 = v1;
    Eigen::VectorXd full = dense_eigenvalues(full_space_hamiltonian(L, omega, delta, v1, v2));
    Eigen::VectorXd bare = dense_eigenvalues(build_hamiltonian(basis, p).to_dense());
    p.include_h2 = true;
    Eigen::MatrixXd Hc = build_hamiltonian(basis, p).to_dense();
    // The correction keeps two virtual neighbours at the chain ends; a true end site has one.
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const auto s = basis.state(k);
      const double ends = static_cast<double>((s & 1u) + ((s >> (L - 1)) & 1u));
      Hc(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) += omega * omega / (4 * v1) * ends;
    }
    Eigen::VectorXd corrected = dense_eigenvalues(Hc);
    double err_bare = 0.0, err_corr = 0.0;
    for (Eigen::Index k = 0; k < 6; ++k) {
      err_bare = std::max(err_bare, std::abs(full[k] - bare[k]));
      err_corr = std::max(err_corr, std::abs(full[k] - corrected[k]));
    }
    CHECK(err_bare > 1e-3);
    CHECK(err_corr < 0.05 * err_bare);
  }
}

TEST_CASE("staggered bond order") {
  auto basis = enumerate_basis(6);
  auto s1 = cdw_operator(basis, 1);
  CHECK(s1.entry(*basis.index_of(0b010101u), *basis.index_of(0b010101u)) == 1.0);
  CHECK(s1.entry(*basis.index_of(0b101010u), *basis.index_of(0b101010u)) == -1.0);
  for (int b = 1; b <= 5; ++b) CHECK(cdw_operator(basis, b).entry(0, 0) == 0.0);
  CHECK_THROWS_AS(cdw_operator(basis, 0), DomainError);
  CHECK_THROWS_AS(cdw_operator(basis, 6), DomainError);

  auto edge = edge_cdw_observable(basis);
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
  psi[static_cast<Eigen::Index>(*basis.index_of(0b010101u))] = 1.0;
  CHECK(edge.value(psi) == doctest::Approx(1.0));
}

TEST_CASE("drive profiles") {
  auto w = wavevector_profile(5, 0.0, 0.0);
  for (double x : w) CHECK(x == doctest::Approx(1.0));
  auto odd = odd_parity_profile(7);
  CHECK(odd.front() == doctest::Approx(1.0));
  CHECK(odd.back() == doctest::Approx(-1.0));
  CHECK(odd[3] == doctest::Approx(0.0).epsilon(1e-15));
  auto basis = enumerate_basis(4);
  auto K = weighted_number_operator(basis, {1.0, 2.0, 3.0, 4.0});
  const auto k = *basis.index_of(0b1001u);
  CHECK(K.entry(k, k) == 5.0);
  CHECK_THROWS_AS(weighted_number_operator(basis, {1.0}), ValidationError);
}
