#include "rydcft/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rydcft/errors.hpp"
#include "rydcft/krylov.hpp"

namespace rydcft {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double norm_drift(const Eigen::VectorXcd& psi) { return std::abs(psi.norm() - 1.0); }
}  // namespace

Propagator::Propagator(const ConstrainedBasis& basis, const ChainParams& params, PropagationOptions opt)
    : basis_(basis), params_(params), opt_(opt), terms_(build_hamiltonian_terms(basis, params)) {
  number_diag_ = terms_.number.diagonal_values();
  fixed_diag_ = terms_.fixed.diagonal_values();
}

Propagator::Generator Propagator::generator_at(const Segment& seg, const std::vector<Eigen::VectorXd>& dd,
                                               double t) const {
  Generator g;
  const double om = seg.omega(t, seg.duration);
  g.c_kin = om;
  g.c_h2 = terms_.has_h2 ? om * om : 0.0;
  g.diag = fixed_diag_ - seg.delta(t, seg.duration) * number_diag_;
  for (std::size_t k = 0; k < dd.size(); ++k) {
    const double a = seg.drives[k].amplitude(t, seg.duration);
    if (a != 0.0) g.diag += a * dd[k];
  }
  return g;
}

Propagator::Generator Propagator::blend(const Generator& x, double wx, const Generator& y, double wy) {
  Generator g;
  g.c_kin = wx * x.c_kin + wy * y.c_kin;
  g.c_h2 = wx * x.c_h2 + wy * y.c_h2;
  g.diag = wx * x.diag + wy * y.diag;
  return g;
}

void Propagator::apply(const Generator& g, const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
  terms_.kinetic.apply(x, y);
  y *= g.c_kin;
  if (g.c_h2 != 0.0) terms_.h2_unit.apply_add(g.c_h2, x, y);
  y.array() += g.diag.array() * x.array();
}

void Propagator::exp_step(const Generator& g, double dt, Eigen::VectorXcd& psi, long* matvecs, double* hint) const {
  const ComplexApply A = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { apply(g, x, y); };
  krylov_expm(A, kTwoPi * dt, psi, opt_.krylov_max, 0.01 * opt_.tol, hint, matvecs);
}

void Propagator::scheme_step(const Segment& seg, const std::vector<Eigen::VectorXd>& dd, double t, double dt,
                             Eigen::VectorXcd& psi, long* matvecs) const {
  if (opt_.integrator == PropagationOptions::Integrator::midpoint) {
    exp_step(generator_at(seg, dd, t + 0.5 * dt), dt, psi, matvecs, nullptr);
    return;
  }
  // Fourth-order commutator-free exponential: two exponentials built from H at the
  // Gauss-Legendre nodes.
  static const double s3 = std::sqrt(3.0);
  const double a1 = (3.0 - 2.0 * s3) / 12.0, a2 = (3.0 + 2.0 * s3) / 12.0;
  const Generator g1 = generator_at(seg, dd, t + (0.5 - s3 / 6.0) * dt);
  const Generator g2 = generator_at(seg, dd, t + (0.5 + s3 / 6.0) * dt);
  exp_step(blend(g1, 2.0 * a2, g2, 2.0 * a1), 0.5 * dt, psi, matvecs, nullptr);
  exp_step(blend(g1, 2.0 * a1, g2, 2.0 * a2), 0.5 * dt, psi, matvecs, nullptr);
}

void Propagator::evolve(Eigen::VectorXcd& psi, const Segment& seg, PropagationStats* stats) const {
  if (psi.size() != static_cast<Eigen::Index>(basis_.size())) throw ValidationError("state dimension mismatch");
  std::vector<Eigen::VectorXd> dd;
  for (const auto& d : seg.drives) dd.push_back(weighted_number_operator(basis_, d.weights).diagonal_values());
  PropagationStats local;
  PropagationStats& st = stats ? *stats : local;
  const double T = seg.duration;
  if (!seg.time_dependent()) {
    const Generator g = generator_at(seg, dd, 0.0);
    exp_step(g, T, psi, &st.matvecs, nullptr);
    ++st.steps;
  } else {
    const int order = opt_.integrator == PropagationOptions::Integrator::midpoint ? 2 : 4;
    const double denom = std::pow(2.0, order) - 1.0;
    double t = 0.0, dt = std::min(opt_.dt_initial, T);
    Eigen::VectorXcd big, half;
    while (t < T) {
      const double h = std::min(dt, T - t);
      big = psi;
      scheme_step(seg, dd, t, h, big, &st.matvecs);
      half = psi;
      scheme_step(seg, dd, t, 0.5 * h, half, &st.matvecs);
      scheme_step(seg, dd, t + 0.5 * h, 0.5 * h, half, &st.matvecs);
      const double err = (big - half).norm() / denom;
      const double factor = err > 0 ? 0.9 * std::pow(opt_.tol / err, 1.0 / (order + 1)) : 2.0;
      if (err <= opt_.tol) {
        psi.swap(half);
        t = (T - t <= h) ? T : t + h;
        ++st.steps;
        dt = std::min(opt_.dt_max, h * std::clamp(factor, 0.2, 2.0));
      } else {
        ++st.rejected;
        dt = h * std::clamp(factor, 0.1, 0.9);
        if (dt < opt_.dt_min) throw NumericalError("time step underflow in segment '" + seg.label + "'");
      }
    }
  }
  st.norm_drift = std::max(st.norm_drift, norm_drift(psi));
  if (norm_drift(psi) > opt_.norm_tol)
    throw NumericalError("norm drift " + std::to_string(norm_drift(psi)) + " exceeds tolerance");
}

void Propagator::evolve(Eigen::VectorXcd& psi, const Schedule& s, PropagationStats* stats) const {
  s.validate(basis_.length());
  for (const auto& seg : s.segments) evolve(psi, seg, stats);
}

void Propagator::evolve_static(Eigen::VectorXcd& psi, double duration, double delta, PropagationStats* stats) const {
  if (duration < 0) throw ValidationError("negative evolution time");
  if (duration == 0) return;
  Segment seg;
  seg.duration = duration;
  seg.delta = Profile::constant(delta);
  seg.omega = Profile::constant(params_.omega);
  evolve(psi, seg, stats);
}

Eigen::VectorXcd propagate(const Eigen::VectorXcd& psi0, const ConstrainedBasis& basis, const ChainParams& params,
                           const Schedule& schedule, const PropagationOptions& opt, PropagationStats* stats) {
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw ValidationError("initial state must be normalized");
  Propagator prop(basis, params, opt);
  Eigen::VectorXcd psi = psi0;
  prop.evolve(psi, schedule, stats);
  return psi;
}

Eigen::VectorXd ground_state(const ConstrainedBasis& basis, const ChainParams& params, double* energy) {
  const SparseOperator H = build_hamiltonian(basis, params);
  const Spectrum s = eigensolve_lowest(H, 1);
  if (energy) *energy = s.energies[0];
  return s.vector(0);
}

Segment sweep_in_segment(const ChainParams& params, const SweepSpec& sweep) {
  if (!(sweep.duration > 0)) throw ValidationError("sweep duration must be > 0");
  const double a = std::isnan(sweep.scale) ? -params.omega : sweep.scale;
  Segment seg;
  seg.label = "sweep";
  seg.duration = sweep.duration;
  seg.delta = Profile::tangent_in(params.delta, a, sweep.theta0);
  seg.omega = Profile::constant(params.omega);
  return seg;
}

PreparedState adiabatic_prepare(const ConstrainedBasis& basis, const ChainParams& params, const SweepSpec& sweep,
                                const PropagationOptions& opt) {
  const Segment seg = sweep_in_segment(params, sweep);
  PreparedState out;
  out.start_delta = seg.delta(0.0, seg.duration);
  Eigen::VectorXcd psi;
  if (sweep.start_from_ground) {
    ChainParams p0 = params;
    p0.delta = out.start_delta;
    psi = ground_state(basis, p0).cast<cplx>();
  } else {
    psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
    psi[0] = 1.0;  // all atoms in |0>
  }
  Propagator prop(basis, params, opt);
  prop.evolve(psi, seg);
  const Eigen::VectorXd g = ground_state(basis, params);
  out.fidelity = std::norm(g.cast<cplx>().dot(psi));
  out.psi = std::move(psi);
  return out;
}

Segment pulse_segment(const ChainParams& params, const ModulationPulse& pulse) {
  pulse.validate(params.L);
  Segment seg;
  seg.label = "pulse";
  seg.duration = pulse.duration;
  seg.delta = Profile::constant(params.delta);
  seg.omega = Profile::constant(params.omega);
  LocalDrive d;
  d.weights = pulse.weights.empty() ? std::vector<double>(static_cast<std::size_t>(params.L), 1.0) : pulse.weights;
  d.amplitude = pulse.amplitude_profile();
  seg.drives.push_back(std::move(d));
  return seg;
}

RampProbe::RampProbe(const ConstrainedBasis& basis, const ChainParams& params, RampOut ramp, Readout readout,
                     RampProbeOptions opt)
    : basis_(basis), params_(params), ramp_(ramp), readout_(readout), opt_(opt), prop_(basis, params, opt.propagation) {
  if (params.L % 2 == 0 && readout == Readout::z2)
    throw ValidationError("even L requires the disordered readout (degenerate Z2 ground states)");
  ground_ = ground_state(basis, params);
  psi0_ = opt.adiabatic_start ? adiabatic_prepare(basis, params, opt.sweep, opt.propagation).psi
                              : Eigen::VectorXcd(ground_.cast<cplx>());
  number_diag_ = prop_.terms().number.diagonal_values();
}

double RampProbe::readout_value(const Eigen::VectorXcd& psi) const {
  const double n = (psi.cwiseAbs2().array() * number_diag_.array()).sum();
  return readout_ == Readout::z2 ? params_.L - n : n;
}

double RampProbe::final_value(const ModulationPulse& pulse) const {
  Eigen::VectorXcd psi = psi0_;
  prop_.evolve(psi, pulse_segment(params_, pulse));
  Segment out;
  out.label = "ramp_out";
  out.duration = ramp_.duration;
  const double s = std::isnan(ramp_.scale) ? std::abs(params_.omega) : std::abs(ramp_.scale);
  out.delta = Profile::tangent_out(params_.delta, readout_ == Readout::z2 ? s : -s, ramp_.theta0);
  out.omega = Profile::constant(params_.omega);
  prop_.evolve(psi, out);
  return readout_value(psi);
}

double RampProbe::reference(double duration) const {
  const std::lock_guard<std::mutex> lock(ref_mutex_);
  for (const auto& [T, v] : ref_cache_)
    if (T == duration) return v;
  ModulationPulse zero;
  zero.envelope = Envelope::square;
  zero.duration = duration;
  const double v = final_value(zero);
  ref_cache_.emplace_back(duration, v);
  return v;
}

RampProbeResult RampProbe::run(const ModulationPulse& pulse) const {
  RampProbeResult r;
  r.reference_value = reference(pulse.duration);
  if (pulse.amplitude == 0.0) {
    r.final_value = r.reference_value;
    return r;
  }
  r.final_value = final_value(pulse);
  if (opt_.phase_average)
    r.final_value = 0.5 * (r.final_value + final_value(pulse.with_phase(pulse.phase + std::numbers::pi)));
  r.delta_n = r.final_value - r.reference_value;
  return r;
}

double RampProbe::depletion_after_pulse(const ModulationPulse& pulse) const {
  Eigen::VectorXcd psi = psi0_;
  prop_.evolve(psi, pulse_segment(params_, pulse));
  return 1.0 - std::norm(ground_.cast<cplx>().dot(psi));
}

RampProbeResult modulation_ramp_probe(const ConstrainedBasis& basis, const ChainParams& params,
                                      const ModulationPulse& pulse, const RampOut& ramp, Readout readout,
                                      const RampProbeOptions& opt) {
  return RampProbe(basis, params, ramp, readout, opt).run(pulse);
}

ModulationProbe::ModulationProbe(const ConstrainedBasis& basis, const ChainParams& params, const SparseOperator& K,
                                 PropagationOptions opt)
    : basis_(basis), params_(params), K_(K), prop_(basis, params, opt) {
  ground_ = ground_state(basis, params);
  k0_ = K.expectation(ground_);
}

double ModulationProbe::delta_K(const ModulationPulse& pulse, PropagationStats* stats) const {
  if (pulse.amplitude == 0.0) return 0.0;
  Eigen::VectorXcd psi = ground_.cast<cplx>();
  prop_.evolve(psi, pulse_segment(params_, pulse), stats);
  return K_.expectation(psi) - k0_;
}

double ModulationProbe::phase_cycled(const ModulationPulse& pulse, PropagationStats* stats) const {
  return 0.5 * (delta_K(pulse, stats) - delta_K(pulse.with_phase(pulse.phase + std::numbers::pi), stats));
}

double modulation_probe(const ConstrainedBasis& basis, const ChainParams& params, const ModulationPulse& pulse,
                        const SparseOperator& K, bool phase_cycle, const PropagationOptions& opt) {
  ModulationProbe probe(basis, params, K, opt);
  return phase_cycle ? probe.phase_cycled(pulse) : probe.delta_K(pulse);
}

TimeSeries quench_evolve(const ConstrainedBasis& basis, const ChainParams& params, double prepare_near,
                         const std::vector<double>& times, const PropagationOptions& opt) {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] < 0 || (i && times[i] < times[i - 1])) throw ValidationError("quench times must be ascending and >= 0");
  ChainParams p0 = params;
  p0.delta = prepare_near;
  Eigen::VectorXcd psi = ground_state(basis, p0).cast<cplx>();
  const Propagator prop(basis, params, opt);
  const SparseOperator sigma = total_cdw_operator(basis);
  const Eigen::VectorXd sd = sigma.diagonal_values();
  TimeSeries out;
  double now = 0.0;
  for (double t : times) {
    prop.evolve_static(psi, t - now, params.delta);
    now = t;
    out.t.push_back(t);
    out.value.push_back((psi.cwiseAbs2().array() * sd.array()).sum());
  }
  return out;
}

}  // namespace rydcft
