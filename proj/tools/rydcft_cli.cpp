#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "rydcft/cft_oracle.hpp"
#include "rydcft/config.hpp"
#include "rydcft/criticality.hpp"
#include "rydcft/dynamics.hpp"
#include "rydcft/errors.hpp"
#include "rydcft/experiments.hpp"
#include "rydcft/fitting.hpp"
#include "rydcft/io.hpp"
#include "rydcft/spectral.hpp"

using namespace rydcft;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::string out = "out";
  int threads = 0;
  std::string seed;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Common& c, bool needs_config = true) {
  auto* opt = sub->add_option("--config,-c", c.config, "configuration file");
  if (needs_config) opt->check(CLI::ExistingFile);
  sub->add_option("--out,-o", c.out, "output directory");
  sub->add_option("--threads,-j", c.threads, "worker threads (default: RYDCFT_THREADS or 1)");
  sub->add_option("--seed", c.seed, "random seed (recorded in reports)");
  sub->add_option("overrides", c.overrides, "key=value overrides");
}

Config load(const Common& c) {
  Config cfg = c.config.empty() ? Config() : Config::load(c.config);
  for (const auto& o : c.overrides) cfg.apply_override(o);
  if (!c.seed.empty()) cfg.set("experiment.seed", c.seed);
  return cfg;
}

int threads_of(const Common& c) { return c.threads > 0 ? c.threads : default_thread_count(); }

void stderr_line(const std::string& s) { std::cerr << s << '\n'; }

void write(const Common& c, const std::string& file, const std::string& text) {
  fs::create_directories(c.out);
  write_text_file(fs::path(c.out) / file, text);
}

SparseOperator drive_operator(const ConstrainedBasis& basis, const std::string& kind, const Config& cfg,
                              const std::string& key) {
  const int L = basis.length();
  if (kind == "uniform") return weighted_number_operator(basis, std::vector<double>(static_cast<std::size_t>(L), 1.0));
  if (kind == "odd") return weighted_number_operator(basis, odd_parity_profile(L));
  if (kind == "wavevector")
    return weighted_number_operator(basis, wavevector_profile(L, cfg.get_double(key + ".k"), cfg.get_double(key + ".alpha", 0.0)));
  if (kind == "custom") return weighted_number_operator(basis, cfg.get_doubles(key + ".weights"));
  throw ValidationError(key + ": expected uniform, odd, wavevector or custom");
}

int cmd_basis(int L, bool list, const Common& c) {
  const ConstrainedBasis b(L);
  std::cout << "dimension " << b.size() << '\n';
  if (list) {
    std::ostringstream os;
    os << "index,state,pattern\n";
    for (std::size_t k = 0; k < b.size(); ++k) {
      std::string pat;
      for (int i = 1; i <= L; ++i) pat += occupation(b.state(k), i) ? '1' : '0';
      os << k << ',' << b.state(k) << ',' << pat << '\n';
    }
    write(c, "basis.csv", os.str());
  }
  return 0;
}

int cmd_spectrum(const Common& c, bool transitions_only) {
  Config cfg = load(c);
  const ChainParams p = chain_params_from_config(cfg);
  const auto n = static_cast<std::size_t>(cfg.get_int("spectrum.n_states", 10));
  const bool label = cfg.get_bool("spectrum.parity", true);
  const std::string drive = cfg.get_string("spectrum.drive", transitions_only ? "uniform" : "none");
  EigenOptions eo;
  eo.tol = cfg.get_double("spectrum.tol", eo.tol);
  const ConstrainedBasis basis(p.L);
  std::optional<SparseOperator> K;
  if (drive != "none") K = drive_operator(basis, drive, cfg, "spectrum.drive");
  cfg.require_consumed();
  const Permutation R = reflection_permutation(basis);
  if (label) eo.reflection = &R;
  const Spectrum s = eigensolve_lowest(build_hamiltonian(basis, p), std::min(n, basis.size()), eo);
  std::optional<TransitionTable> t;
  if (K) t = transition_strengths(s, *K);
  std::ostringstream os;
  write_spectrum_csv(os, s, t ? &*t : nullptr);
  write(c, transitions_only ? "transitions.csv" : "spectrum.csv", os.str());
  std::cout << os.str();
  stderr_line("L=" + std::to_string(p.L) + " states=" + std::to_string(s.size()) + " E1-E0=" +
              fmt_num(s.size() > 1 ? s.energies[1] - s.energies[0] : 0.0) + " MHz method=" + s.method);
  return 0;
}

int cmd_sweep(const Common& c) {
  Config cfg = load(c);
  const ChainParams p = chain_params_from_config(cfg);
  SweepSpec sw;
  sw.duration = cfg.get_double("sweep.duration", sw.duration);
  sw.theta0 = cfg.get_double("sweep.theta0", sw.theta0);
  if (cfg.has("sweep.scale")) sw.scale = cfg.get_double("sweep.scale");
  sw.start_from_ground = cfg.get_bool("sweep.start_from_ground", sw.start_from_ground);
  PropagationOptions po;
  po.tol = cfg.get_double("propagation.tol", po.tol);
  cfg.require_consumed();
  const ConstrainedBasis basis(p.L);
  const PreparedState st = adiabatic_prepare(basis, p, sw, po);
  const json j = {{"L", p.L}, {"start_delta", st.start_delta}, {"target_delta", p.delta}, {"fidelity", st.fidelity}};
  write(c, "sweep.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << '\n';
  stderr_line("L=" + std::to_string(p.L) + " fidelity=" + fmt_num(st.fidelity));
  return 0;
}

int cmd_modulate(const Common& c) {
  Config cfg = load(c);
  const ChainParams p = chain_params_from_config(cfg);
  const std::string seq = cfg.get_string("probe.sequence", "ramp_probe");
  const std::vector<double> freqs = frequency_grid(cfg);
  const ModulationPulse pulse = pulse_from_config(cfg, p);
  const ConstrainedBasis basis(p.L);
  ExperimentContext ctx{threads_of(c), stderr_line};
  ResponseCurve curve;
  if (seq == "ramp_probe") {
    const Simulator sim = simulator_from_string(cfg.get_string("scan.simulator", "dynamics"));
    RampOut ramp;
    ramp.duration = cfg.get_double("ramp.duration", ramp.duration);
    ramp.theta0 = cfg.get_double("ramp.theta0", ramp.theta0);
    const std::string ro = cfg.get_string("probe.readout", "auto");
    const Readout readout = ro == "auto" ? (p.L % 2 ? Readout::z2 : Readout::disordered)
                            : ro == "z2" ? Readout::z2
                            : ro == "disordered" ? Readout::disordered
                                                 : throw ValidationError("probe.readout: expected auto, z2 or disordered");
    RampProbeOptions o;
    o.adiabatic_start = cfg.get_bool("probe.adiabatic_start", false);
    o.phase_average = cfg.get_bool("probe.phase_average", true);
    const auto n_states = static_cast<std::size_t>(cfg.get_int("analysis.n_states", 40));
    cfg.require_consumed();
    if (std::isnan(pulse.phase)) throw ValidationError("pulse.phase = max applies to the probe sequence only");
    curve = simulate_ramp_spectrum(basis, p, pulse, freqs, sim, ramp, readout, o, n_states, ctx);
  } else if (seq == "probe") {
    const bool cycle = cfg.get_bool("probe.phase_cycle", true);
    const SparseOperator K = weighted_number_operator(
        basis, pulse.weights.empty() ? std::vector<double>(static_cast<std::size_t>(p.L), 1.0) : pulse.weights);
    cfg.require_consumed();
    const ModulationProbe probe(basis, p, K);
    std::vector<double> v(freqs.size());
    parallel_for(freqs.size(), ctx.threads, [&](std::size_t i) {
      ModulationPulse pu = pulse.with_frequency(freqs[i]);
      if (std::isnan(pu.phase)) pu.phase = maximizing_phase(freqs[i], pu.duration);
      v[i] = cycle ? probe.phase_cycled(pu) : probe.delta_K(pu);
    });
    curve.kind = ResponseCurve::Kind::linear_response;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      curve.points.push_back({freqs[i], v[i], 0.0, false});
      stderr_line("L=" + std::to_string(p.L) + " f=" + fmt_num(freqs[i]) + " MHz dK=" + fmt_num(v[i]));
    }
  } else {
    throw ValidationError("probe.sequence: expected ramp_probe or probe");
  }
  std::ostringstream os;
  write_response_csv(os, curve);
  write(c, "response.csv", os.str());
  return 0;
}

int cmd_dsf(const Common& c) {
  Config cfg = load(c);
  if (!cfg.has("experiment.name")) cfg.set("experiment.name", "dsf");
  if (cfg.get_string("experiment.name") != "dsf") throw ValidationError("dsf: experiment.name must be dsf");
  ExperimentReport r = run_experiment(cfg, {threads_of(c), stderr_line});
  write_report(r, c.out);
  for (const auto& ch : r.checks) std::cout << (ch.pass ? "PASS " : "FAIL ") << ch.rule << " = " << fmt_num(ch.value) << '\n';
  return 0;
}

int cmd_locate_ising(const Common& c) {
  Config cfg = load(c);
  const ChainParams base = chain_params_from_config(cfg);
  const std::vector<int> Ls = cfg.get_ints("scan.L_list", {7, 11});
  const int gap = cfg.get_int("scan.pair_gap", 4);
  const double guess = cfg.get_double("scan.guess_over_omega", base.delta_over_omega());
  CrossingOptions o;
  o.step = cfg.get_double("scan.step_over_omega", o.step);
  o.tol = cfg.get_double("scan.tol_over_omega", o.tol);
  o.lo = cfg.get_double("scan.lo_over_omega", o.lo);
  o.hi = cfg.get_double("scan.hi_over_omega", o.hi);
  const int order = cfg.get_int("scan.fit_order", 2);
  cfg.require_consumed();
  const CrossingScan s = ising_crossing_scan(base, Ls, gap, guess, o, order, stderr_line);
  std::ostringstream os;
  os << "L_small,L_large,delta_x_over_omega,value_x\n";
  for (const auto& p : s.points)
    os << p.L_small << ',' << p.L_large << ',' << fmt_num(p.delta_x / base.omega) << ',' << fmt_num(p.value_x) << '\n';
  write(c, "crossings.csv", os.str());
  const json j = {{"delta_c_over_omega", s.delta_fit.value}, {"sigma", s.delta_fit.sigma}, {"order", s.delta_fit.order}};
  write(c, "extrapolation.json", j.dump(2) + "\n");
  std::cout << os.str() << j.dump(2) << '\n';
  return 0;
}

int cmd_locate_tci(const Common& c) {
  Config cfg = load(c);
  const ChainParams base = chain_params_from_config(cfg);
  const std::vector<int> Ls = cfg.get_ints("scan.L_list", {11, 13, 15});
  const std::vector<int> levels = cfg.get_ints("scan.levels", {2, 3});
  const double guess = cfg.get_double("scan.guess_over_omega", base.delta_over_omega());
  CrossingOptions o;
  o.step = cfg.get_double("scan.step_over_omega", o.step);
  o.tol = cfg.get_double("scan.tol_over_omega", o.tol);
  o.lo = cfg.get_double("scan.lo_over_omega", o.lo);
  o.hi = cfg.get_double("scan.hi_over_omega", o.hi);
  const int ratio_order = cfg.get_int("scan.ratio_order", 1);
  const int delta_order = cfg.get_int("scan.delta_order", 2);
  cfg.require_consumed();
  const RatioScan s = tci_ratio_scan(base, Ls, levels, guess, o, ratio_order, delta_order, stderr_line);
  std::ostringstream os;
  os << "level,L_small,L_large,delta_x_over_omega,value_x\n";
  json j = json::object();
  for (int lv : s.levels) {
    for (const auto& p : s.crossings.at(lv))
      os << lv << ',' << p.L_small << ',' << p.L_large << ',' << fmt_num(p.delta_x / base.omega) << ','
         << fmt_num(p.value_x) << '\n';
    json e;
    if (s.ratio_fit.count(lv)) e["ratio"] = {{"value", s.ratio_fit.at(lv).value}, {"sigma", s.ratio_fit.at(lv).sigma}};
    if (s.delta_fit.count(lv))
      e["delta_c_over_omega"] = {{"value", s.delta_fit.at(lv).value}, {"sigma", s.delta_fit.at(lv).sigma}};
    j["E" + std::to_string(lv) + "/E1"] = e;
  }
  write(c, "crossings.csv", os.str());
  write(c, "extrapolation.json", j.dump(2) + "\n");
  std::cout << os.str() << j.dump(2) << '\n';
  return 0;
}

int cmd_quench(const Common& c) {
  Config cfg = load(c);
  const ChainParams p = chain_params_from_config(cfg);
  double prepare = p.delta;
  if (cfg.has("quench.prepare_offset_over_omega")) prepare += cfg.get_double("quench.prepare_offset_over_omega") * p.omega;
  else prepare = cfg.get_double("quench.prepare_delta");
  const double t_max = cfg.get_double("quench.t_max", 8.0);
  const int samples = cfg.get_int("quench.samples", 121);
  const bool fit = cfg.get_bool("quench.fit", true);
  PropagationOptions po;
  po.tol = cfg.get_double("propagation.tol", po.tol);
  cfg.require_consumed();
  if (samples < 2) throw ValidationError("quench.samples must be >= 2");
  std::vector<double> ts;
  for (int i = 0; i < samples; ++i) ts.push_back(t_max * i / (samples - 1));
  const ConstrainedBasis basis(p.L);
  const TimeSeries s = quench_evolve(basis, p, prepare, ts, po);
  std::ostringstream os;
  os << "t_us,sigma_sum\n";
  for (std::size_t i = 0; i < s.t.size(); ++i) os << fmt_num(s.t[i]) << ',' << fmt_num(s.value[i]) << '\n';
  write(c, "series.csv", os.str());
  if (fit) {
    const OscFit f = damped_cosine_fit(s.t, s.value);
    write(c, "fit.json", to_json(f).dump(2) + "\n");
    std::cout << to_json(f).dump(2) << '\n';
    stderr_line("L=" + std::to_string(p.L) + " eta=" + fmt_num(p.eta) + " fit f=" + fmt_num(f.frequency_mhz()) + " MHz");
  }
  return 0;
}

int cmd_oracle(const std::string& model, const std::string& bc, const std::string& parity, int count,
               const Common& c) {
  if (count < 1) throw ValidationError("--count must be >= 1");
  ChainParity cp;
  if (parity == "odd") cp = ChainParity::odd_L;
  else if (parity == "even") cp = ChainParity::even_L;
  else throw ValidationError("--parity: expected odd or even");
  std::vector<CftLevel> lv;
  if (model == "ising") {
    FermionSector sec = cp == ChainParity::odd_L ? FermionSector::even_fermion : FermionSector::odd_fermion;
    if (bc == "odd_fermion") sec = FermionSector::odd_fermion;
    else if (bc == "even_fermion") sec = FermionSector::even_fermion;
    else if (!bc.empty() && bc != "fixed") throw ValidationError("--bc for ising: fixed, even_fermion or odd_fermion");
    lv = ising_levels(cp, sec, static_cast<std::size_t>(count));
  } else if (model == "tci") {
    lv = tci_levels(boundary_condition_from_string(bc.empty() ? "free" : bc), cp, static_cast<std::size_t>(count));
  } else {
    throw ValidationError("--model: expected ising or tci");
  }
  std::ostringstream os;
  write_levels_csv(os, lv);
  std::cout << os.str();
  if (!c.out.empty() && c.out != "-") write(c, "levels.csv", os.str());
  return 0;
}

int cmd_experiment(const Common& c) {
  Config cfg = load(c);
  ExperimentReport r = run_experiment(cfg, {threads_of(c), stderr_line});
  write_report(r, c.out);
  for (const auto& ch : r.checks)
    std::cout << (ch.pass ? "PASS" : "FAIL") << " [criterion " << ch.criterion << "] " << ch.rule << ": "
              << fmt_num(ch.value) << " (target " << ch.target << ")\n";
  for (const auto& s : r.substitutions) std::cout << "substitution: " << s << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rydberg-chain critical spectroscopy toolkit"};
  app.require_subcommand(1);
  Common c;

  auto* basis = app.add_subcommand("basis", "constrained Hilbert-space dimension");
  int L = 0;
  bool list = false;
  basis->add_option("--L", L, "chain length")->required();
  basis->add_flag("--list", list, "write basis.csv");
  basis->add_option("--out,-o", c.out, "output directory");

  std::map<std::string, CLI::App*> subs;
  const std::vector<std::pair<std::string, std::string>> cfg_cmds = {
      {"spectrum", "lowest eigenpairs with parity labels"},
      {"transitions", "transition strengths from the ground state"},
      {"sweep", "adiabatic preparation fidelity"},
      {"modulate", "modulation spectroscopy scan"},
      {"dsf", "structure factor from phase-cycled modulation"},
      {"locate-ising", "sigma_RS crossing scan"},
      {"locate-tci", "energy-ratio crossing scan"},
      {"quench", "quench time series and damped-cosine fit"},
      {"experiment", "named experiment pipeline"}};
  for (const auto& [name, help] : cfg_cmds) {
    subs[name] = app.add_subcommand(name, help);
    add_common(subs[name], c);
  }

  auto* oracle = app.add_subcommand("oracle", "boundary CFT level tables");
  std::string model, bc, parity = "odd";
  int count = 4;
  oracle->add_option("--model", model, "ising or tci")->required();
  oracle->add_option("--bc", bc, "boundary condition");
  oracle->add_option("--parity", parity, "chain length parity: odd or even");
  oracle->add_option("--count", count, "number of levels");
  oracle->add_option("--out,-o", c.out, "output directory");
  c.out = "";

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (c.out.empty() && !oracle->parsed()) c.out = "out";

  try {
    if (basis->parsed()) return cmd_basis(L, list, c);
    if (oracle->parsed()) return cmd_oracle(model, bc, parity, count, c);
    if (subs["spectrum"]->parsed()) return cmd_spectrum(c, false);
    if (subs["transitions"]->parsed()) return cmd_spectrum(c, true);
    if (subs["sweep"]->parsed()) return cmd_sweep(c);
    if (subs["modulate"]->parsed()) return cmd_modulate(c);
    if (subs["dsf"]->parsed()) return cmd_dsf(c);
    if (subs["locate-ising"]->parsed()) return cmd_locate_ising(c);
    if (subs["locate-tci"]->parsed()) return cmd_locate_tci(c);
    if (subs["quench"]->parsed()) return cmd_quench(c);
    if (subs["experiment"]->parsed()) return cmd_experiment(c);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
