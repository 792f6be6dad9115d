#pragma once

#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <vector>

#include "rydcft/hamiltonian.hpp"
#include "rydcft/schedule.hpp"
#include "rydcft/spectral.hpp"

namespace rydcft {

struct PropagationOptions {
  enum class Integrator { midpoint, magnus4 };
  Integrator integrator = Integrator::magnus4;
  double tol = 1e-9;          // local error per accepted step
  double dt_initial = 1e-3;   // us
  double dt_min = 1e-10;      // us; smaller steps are an underflow error
  double dt_max = 0.05;       // us
  int krylov_max = 20;
  double norm_tol = 1e-8;
};

struct PropagationStats {
  long steps = 0;
  long rejected = 0;
  long matvecs = 0;
  double norm_drift = 0.0;
};

// H(t) for one segment: omega(t) * kinetic + omega(t)^2 * h2_unit + diag(t).
class Propagator {
 public:
  Propagator(const ConstrainedBasis& basis, const ChainParams& params, PropagationOptions opt = {});

  // Evolves psi through every segment; throws on step underflow or norm drift.
  void evolve(Eigen::VectorXcd& psi, const Schedule& s, PropagationStats* stats = nullptr) const;
  void evolve(Eigen::VectorXcd& psi, const Segment& seg, PropagationStats* stats = nullptr) const;
  // Time-independent evolution under the params Hamiltonian (possibly at another detuning).
  void evolve_static(Eigen::VectorXcd& psi, double duration, double delta, PropagationStats* stats = nullptr) const;

  const HamiltonianTerms& terms() const { return terms_; }
  const ChainParams& params() const { return params_; }
  const ConstrainedBasis& basis() const { return basis_; }
  const PropagationOptions& options() const { return opt_; }

 private:
  struct Generator {
    double c_kin = 0.0;
    double c_h2 = 0.0;
    Eigen::VectorXd diag;
  };
  Generator generator_at(const Segment& seg, const std::vector<Eigen::VectorXd>& drive_diags, double t) const;
  static Generator blend(const Generator& x, double wx, const Generator& y, double wy);
  void apply(const Generator& g, const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const;
  void exp_step(const Generator& g, double dt, Eigen::VectorXcd& psi, long* matvecs, double* hint) const;
  void scheme_step(const Segment& seg, const std::vector<Eigen::VectorXd>& dd, double t, double dt,
                   Eigen::VectorXcd& psi, long* matvecs) const;

  const ConstrainedBasis& basis_;
  ChainParams params_;
  PropagationOptions opt_;
  HamiltonianTerms terms_;
  Eigen::VectorXd number_diag_;
  Eigen::VectorXd fixed_diag_;
};

Eigen::VectorXcd propagate(const Eigen::VectorXcd& psi0, const ConstrainedBasis& basis, const ChainParams& params,
                           const Schedule& schedule, const PropagationOptions& opt = {},
                           PropagationStats* stats = nullptr);

// Exact ground state of the params Hamiltonian (optionally at a different detuning).
Eigen::VectorXd ground_state(const ConstrainedBasis& basis, const ChainParams& params, double* energy = nullptr);

// Tangent sweep Delta(t) = target + a tan(theta0 (1 - t/T)). A NaN scale means -omega, so the
// sweep starts deep in the disordered phase.
struct SweepSpec {
  double duration = 1.5;
  double scale = std::numeric_limits<double>::quiet_NaN();
  double theta0 = 1.45;
  bool start_from_ground = true;  // exact ground state at the start detuning, else all-|0>
};

Segment sweep_in_segment(const ChainParams& params, const SweepSpec& sweep);

struct PreparedState {
  Eigen::VectorXcd psi;
  double fidelity = 0.0;  // |<g(target)|psi>|^2
  double start_delta = 0.0;
};

PreparedState adiabatic_prepare(const ConstrainedBasis& basis, const ChainParams& params, const SweepSpec& sweep,
                                const PropagationOptions& opt = {});

enum class Readout { z2, disordered };

struct RampOut {
  double duration = 1.5;
  double scale = std::numeric_limits<double>::quiet_NaN();  // magnitude; NaN = omega
  double theta0 = 1.45;
};

struct RampProbeOptions {
  bool adiabatic_start = false;  // false: start from the exact critical ground state
  SweepSpec sweep;
  bool phase_average = true;     // average phi and phi + pi
  PropagationOptions propagation;
};

struct RampProbeResult {
  double delta_n = 0.0;
  double final_value = 0.0;
  double reference_value = 0.0;
};

// Drive at the critical point, ramp into a gapped phase, count atoms.
class RampProbe {
 public:
  RampProbe(const ConstrainedBasis& basis, const ChainParams& params, RampOut ramp, Readout readout,
            RampProbeOptions opt = {});
  RampProbeResult run(const ModulationPulse& pulse) const;
  // Population leaving the ground state right after the pulse (diagnostic).
  double depletion_after_pulse(const ModulationPulse& pulse) const;
  const Eigen::VectorXcd& initial_state() const { return psi0_; }

 private:
  double readout_value(const Eigen::VectorXcd& psi) const;
  double final_value(const ModulationPulse& pulse) const;
  double reference(double duration) const;

  const ConstrainedBasis& basis_;
  ChainParams params_;
  RampOut ramp_;
  Readout readout_;
  RampProbeOptions opt_;
  Propagator prop_;
  Eigen::VectorXcd psi0_;
  Eigen::VectorXd ground_;
  Eigen::VectorXd number_diag_;
  mutable std::vector<std::pair<double, double>> ref_cache_;
  mutable std::mutex ref_mutex_;
};

RampProbeResult modulation_ramp_probe(const ConstrainedBasis& basis, const ChainParams& params,
                                      const ModulationPulse& pulse, const RampOut& ramp, Readout readout,
                                      const RampProbeOptions& opt = {});

Segment pulse_segment(const ChainParams& params, const ModulationPulse& pulse);

// Drive from the exact ground state and measure K right after the pulse.
class ModulationProbe {
 public:
  ModulationProbe(const ConstrainedBasis& basis, const ChainParams& params, const SparseOperator& K,
                  PropagationOptions opt = {});
  double delta_K(const ModulationPulse& pulse, PropagationStats* stats = nullptr) const;
  // (dK(phi) - dK(phi + pi)) / 2
  double phase_cycled(const ModulationPulse& pulse, PropagationStats* stats = nullptr) const;
  const Eigen::VectorXd& ground() const { return ground_; }

 private:
  const ConstrainedBasis& basis_;
  ChainParams params_;
  const SparseOperator& K_;
  Propagator prop_;
  Eigen::VectorXd ground_;
  double k0_ = 0.0;
};

double modulation_probe(const ConstrainedBasis& basis, const ChainParams& params, const ModulationPulse& pulse,
                        const SparseOperator& K, bool phase_cycle, const PropagationOptions& opt = {});

struct TimeSeries {
  std::vector<double> t;
  std::vector<double> value;
};

// Ground state at prepare_near, then hold at params.delta; samples sum_i <sigma_{i+1/2}>.
TimeSeries quench_evolve(const ConstrainedBasis& basis, const ChainParams& params, double prepare_near,
                         const std::vector<double>& times, const PropagationOptions& opt = {});

}  // namespace rydcft
