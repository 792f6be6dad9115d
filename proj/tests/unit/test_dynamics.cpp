#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "rydcft/dynamics.hpp"
#include "rydcft/errors.hpp"
#include "rydcft/fitting.hpp"
#include "rydcft/krylov.hpp"

using namespace rydcft;
using cplx = std::complex<double>;

namespace {

ChainParams l7_params(double delta = 8.8) {
  ChainParams p;
  p.L = 7;
  p.omega = 6.0;
  p.v2 = 3.06;
  p.v1 = 164.6;
  p.delta = delta;
  p.include_h2 = true;
  return p;
}

ModulationPulse gaussian_pulse(double A, double f, double w, double T) {
  ModulationPulse m;
  m.amplitude = A;
  m.freq = f;
  m.width = w;
  m.duration = T;
  m.envelope = Envelope::gaussian;
  return m;
}

}  // namespace

TEST_CASE("krylov step matches dense exponential") {
  const int n = 40;
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = std::sin(1.0 + i * 0.7 + j * 1.3) + std::sin(1.0 + j * 0.7 + i * 1.3);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  Eigen::VectorXcd v0(n);
  for (int i = 0; i < n; ++i) v0[i] = cplx(std::cos(0.3 * i), std::sin(0.11 * i));
  v0.normalize();
  const double tau = 0.8;
  Eigen::VectorXcd phase = (es.eigenvalues().cast<cplx>() * cplx(0, -tau)).array().exp();
  Eigen::MatrixXcd U = es.eigenvectors().cast<cplx>();
  Eigen::VectorXcd exact = U * phase.asDiagonal() * U.adjoint() * v0;

  ComplexApply apply = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y = A.cast<cplx>() * x; };
  Eigen::VectorXcd v = v0;
  krylov_expm(apply, tau, v, 20, 1e-12);
  CHECK((v - exact).norm() < 1e-9);
}

TEST_CASE("zero Hamiltonian is the identity") {
  auto basis = enumerate_basis(5);
  ChainParams p;
  p.L = 5;
  Propagator prop(basis, p);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  psi[3] = cplx(0.6, 0.0);
  psi[7] = cplx(0.0, 0.8);
  Eigen::VectorXcd before = psi;
  prop.evolve_static(psi, 2.0, 0.0);
  CHECK((psi - before).norm() < 1e-14);
}

TEST_CASE("norm and energy conservation") {
  auto basis = enumerate_basis(9);
  ChainParams p = l7_params();
  p.L = 9;
  Propagator prop(basis, p);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  psi[0] = 1.0;
  const auto H = build_hamiltonian(basis, p);
  const double e0 = H.expectation(psi);
  prop.evolve_static(psi, 3.0, p.delta);
  CHECK(std::abs(psi.norm() - 1.0) < 1e-8);
  CHECK(std::abs(H.expectation(psi) - e0) < 1e-7 * H.max_abs());

  // time-dependent schedule: tangent sweep then a modulation pulse
  SweepSpec sweep;
  Schedule s;
  s.segments.push_back(sweep_in_segment(p, sweep));
  s.segments.push_back(pulse_segment(p, gaussian_pulse(0.3, 2.0, 0.5, 3.0)));
  PropagationStats stats;
  Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  phi[0] = 1.0;
  phi = propagate(phi, basis, p, s, {}, &stats);
  CHECK(std::abs(phi.norm() - 1.0) < 1e-8);
  CHECK(stats.steps > 0);
}

TEST_CASE("slow sweep prepares the ground state") {
  auto basis = enumerate_basis(7);
  SweepSpec sweep;
  sweep.duration = 12.0;
  sweep.start_from_ground = false;
  auto prep = adiabatic_prepare(basis, l7_params(), sweep);
  // all-|0> is not exactly the ground state at the start detuning; adiabaticity keeps that overlap
  ChainParams start = l7_params();
  start.delta = prep.start_delta;
  const double overlap = std::norm(ground_state(basis, start)[0]);
  CHECK(overlap < 1.0);
  CHECK(prep.fidelity > 0.99 * overlap);
  sweep.start_from_ground = true;
  CHECK(adiabatic_prepare(basis, l7_params(), sweep).fidelity > 0.99);
  sweep.start_from_ground = false;
  sweep.duration = 0.05;
  CHECK(adiabatic_prepare(basis, l7_params(), sweep).fidelity < prep.fidelity);
}

TEST_CASE("zero drive gives zero signal") {
  auto basis = enumerate_basis(7);
  auto p = l7_params();
  RampOut ramp;
  auto r = modulation_ramp_probe(basis, p, gaussian_pulse(0.0, 2.8, 0.5, 3.0), ramp, Readout::z2);
  CHECK(r.delta_n == 0.0);
  auto K = weighted_number_operator(basis, std::vector<double>(7, 1.0));
  CHECK(modulation_probe(basis, p, gaussian_pulse(0.0, 2.8, 0.5, 3.0), K, true) == 0.0);
  CHECK(modulation_probe(basis, p, gaussian_pulse(0.0, 2.8, 0.5, 3.0), K, false) == 0.0);
}

TEST_CASE("even chains reject the ordered readout") {
  auto basis = enumerate_basis(8);
  auto p = l7_params();
  p.L = 8;
  CHECK_THROWS_AS(RampProbe(basis, p, RampOut{}, Readout::z2), ValidationError);
}

TEST_CASE("ramp readout equals the population leaving the ground state") {
  auto basis = enumerate_basis(7);
  auto p = l7_params(1.70 * 6.0);
  EigenOptions eo;
  auto spec = eigensolve_lowest(build_hamiltonian(basis, p), 3, eo);
  const double E1 = spec.energies[1] - spec.energies[0];
  RampOut ramp;
  RampProbeOptions opt;
  opt.phase_average = false;
  RampProbe probe(basis, p, ramp, Readout::z2, opt);
  auto pulse = gaussian_pulse(0.1 * p.omega, E1, 1.0, 6.0);
  const double dn = probe.run(pulse).delta_n;
  const double dep = probe.depletion_after_pulse(pulse);
  CHECK(dep > 1e-3);
  CHECK(std::abs(dn - dep) < 0.02 * dep);
}

TEST_CASE("weak drive response is quadratic in the amplitude") {
  auto basis = enumerate_basis(7);
  auto p = l7_params(1.70 * 6.0);
  RampProbe probe(basis, p, RampOut{}, Readout::z2);
  auto pulse = gaussian_pulse(0.02 * p.omega, 2.6, 0.5, 3.0);
  const double a = probe.run(pulse).delta_n;
  const double b = probe.run(pulse.with_amplitude(pulse.amplitude / 2)).delta_n;
  const double c = probe.run(pulse.with_amplitude(pulse.amplitude / 4)).delta_n;
  CHECK(a / b == doctest::Approx(4.0).epsilon(0.02));
  CHECK(b / c == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("quench with zero amplitude is stationary") {
  auto basis = enumerate_basis(7);
  auto p = l7_params(10.0);
  std::vector<double> t{0.0, 0.5, 1.0, 2.0};
  auto s = quench_evolve(basis, p, p.delta, t);
  for (double v : s.value) CHECK(v == doctest::Approx(s.value[0]).epsilon(1e-9));
}

TEST_CASE("two-level quench oscillates at the gap") {
  // With only the two lowest eigenstates populated the series is a single cosine at E1.
  auto basis = enumerate_basis(9);
  ChainParams p = l7_params(9.5);
  p.L = 9;
  auto spec = eigensolve_lowest(build_hamiltonian(basis, p), 2);
  const double E1 = spec.energies[1] - spec.energies[0];
  std::vector<double> t;
  for (int i = 0; i <= 120; ++i) t.push_back(0.05 * i);
  auto s = quench_evolve(basis, p, p.delta + 0.02 * p.omega, t);
  auto fit = damped_cosine_fit(s.t, s.value);
  CHECK(fit.frequency_mhz() == doctest::Approx(E1).epsilon(0.01));
}

TEST_CASE("resonant drive produces a many-body Rabi oscillation") {
  // Rotating-wave estimate: the excited population oscillates at A |K_ge| (MHz, stored units).
  auto basis = enumerate_basis(7);
  auto p = l7_params();
  auto spec = eigensolve_lowest(build_hamiltonian(basis, p), 4);
  auto K = weighted_number_operator(basis, std::vector<double>(7, 1.0));
  const double E1 = spec.energies[1] - spec.energies[0];
  const double kge = std::abs(K.matrix_element(spec.vector(0), spec.vector(1)));
  const double target = 0.506;
  Propagator prop(basis, p);
  ModulationPulse m;
  m.amplitude = target / kge;
  m.freq = E1;
  m.envelope = Envelope::square;
  Eigen::VectorXcd e1 = spec.vector(1).cast<cplx>();
  std::vector<double> t, pop;
  for (int i = 1; i <= 80; ++i) {
    m.duration = 0.075 * i;
    Eigen::VectorXcd psi = spec.vector(0).cast<cplx>();
    prop.evolve(psi, pulse_segment(p, m));
    t.push_back(m.duration);
    pop.push_back(std::norm(e1.dot(psi)));
  }
  auto fit = damped_cosine_fit(t, pop);
  CHECK(fit.frequency_mhz() == doctest::Approx(target).epsilon(0.03));
  CHECK(*std::max_element(pop.begin(), pop.end()) > 0.8);
}
