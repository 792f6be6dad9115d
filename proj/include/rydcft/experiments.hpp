#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rydcft/config.hpp"
#include "rydcft/criticality.hpp"
#include "rydcft/dynamics.hpp"
#include "rydcft/response.hpp"

namespace rydcft {

struct Check {
  int criterion = 0;
  std::string rule;
  bool pass = false;
  double value = 0.0;
  std::string target;
};

struct ExperimentReport {
  std::string name;
  std::uint64_t seed = 0;
  std::string config;  // canonical dump of the resolved configuration
  nlohmann::json results = nlohmann::json::object();
  std::vector<Check> checks;
  std::vector<std::pair<std::string, std::string>> tables;  // file name, CSV text
  std::vector<std::string> substitutions;
  double runtime_s = 0.0;  // kept out of report.json so reruns compare bit-identically

  nlohmann::json to_json() const;
  bool all_pass() const;
};

struct ExperimentContext {
  int threads = 1;
  ScanLog log;
};

// Reads pulse.* keys; amplitude may be given as pulse.amplitude (2 pi MHz) or
// pulse.amplitude_over_omega.
ModulationPulse pulse_from_config(const Config& cfg, const ChainParams& chain, const std::string& prefix = "pulse");
// scan.freqs, or scan.f_min / scan.f_max / scan.f_step (MHz).
std::vector<double> frequency_grid(const Config& cfg, const std::string& prefix = "scan");

enum class Simulator { dynamics, perturbative };
Simulator simulator_from_string(const std::string& s);

// Ramp-probe spectrum for one drive pattern: full dynamics or the peak-resolved second-order formula.
ResponseCurve simulate_ramp_spectrum(const ConstrainedBasis& basis, const ChainParams& params,
                                     const ModulationPulse& pulse, const std::vector<double>& freqs, Simulator sim,
                                     const RampOut& ramp, Readout readout, const RampProbeOptions& opt,
                                     std::size_t n_states, const ExperimentContext& ctx);

// Adds Normal(0, (noise * max|value|)^2) per point and records that sigma.
void add_noise(ResponseCurve& c, double noise, std::uint64_t seed, std::uint64_t stream);

ExperimentReport run_ising_spectroscopy(const Config& cfg, const ExperimentContext& ctx = {});
ExperimentReport run_parity_resolved(const Config& cfg, const ExperimentContext& ctx = {});
ExperimentReport run_tci_boundary(const Config& cfg, const ExperimentContext& ctx = {});
ExperimentReport run_dsf(const Config& cfg, const ExperimentContext& ctx = {});

// Dispatches on experiment.name and rejects unread keys.
ExperimentReport run_experiment(Config cfg, const ExperimentContext& ctx = {});

// report.json, config.txt (rerunnable), one CSV per table, runtime.json.
void write_report(const ExperimentReport& r, const std::filesystem::path& dir);

}  // namespace rydcft
