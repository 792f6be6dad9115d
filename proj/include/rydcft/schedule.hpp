#pragma once

#include <string>
#include <vector>

namespace rydcft {

class Config;

// Named control waveform on a segment of length T; t runs from 0 to T.
struct Profile {
  enum class Kind {
    constant,         // value
    linear,           // start -> end
    tangent_in,       // center + scale * tan(theta0 * (1 - t/T))
    tangent_out,      // center + scale * tan(theta0 * t/T)
    gaussian_cosine,  // offset + amplitude * exp(-((t - T/2)/width)^2) * cos(2 pi freq t + phase)
    square_cosine,    // offset + amplitude * cos(2 pi freq t + phase)
    raised_cosine,    // offset + amplitude * [1 + cos(2 pi freq t + phase)]
  };
  Kind kind = Kind::constant;
  double value = 0.0;
  double start = 0.0, end = 0.0;
  double center = 0.0, scale = 0.0, theta0 = 1.45;
  double amplitude = 0.0, freq = 0.0, phase = 0.0, width = 0.0, offset = 0.0;

  double operator()(double t, double T) const;
  bool time_dependent() const;

  static Profile constant(double v);
  static Profile linear(double a, double b);
  static Profile tangent_in(double center, double scale, double theta0);
  static Profile tangent_out(double center, double scale, double theta0);
};

std::string to_string(Profile::Kind k);
Profile::Kind profile_kind_from_string(const std::string& s);

// delta H(t) = amplitude(t) * sum_i weights_i n_i
struct LocalDrive {
  std::vector<double> weights;
  Profile amplitude;
};

struct Segment {
  double duration = 0.0;  // microseconds
  Profile delta;
  Profile omega;
  std::vector<LocalDrive> drives;
  std::string label;

  bool time_dependent() const;
};

struct Schedule {
  std::vector<Segment> segments;
  void validate(int L) const;
  double total_duration() const;
};

void schedule_to_config(const Schedule& s, Config& cfg, const std::string& prefix = "schedule");
Schedule schedule_from_config(const Config& cfg, int L, const std::string& prefix = "schedule");

enum class Envelope { gaussian, square };

// A(t) = A f(t) cos(2 pi f t + phi) on [0, T]; the gaussian envelope is centred at T/2.
// With raised = true the temporal factor is [1 + cos(...)] instead (no envelope offset is
// added for the square case).
struct ModulationPulse {
  double amplitude = 0.0;  // 2 pi MHz units
  double freq = 0.0;       // MHz
  double phase = 0.0;      // rad
  Envelope envelope = Envelope::gaussian;
  double width = 0.0;      // gaussian width w (us)
  double duration = 0.0;   // total T (us)
  std::vector<double> weights;  // per-site pattern; empty = uniform (global detuning modulation)
  bool raised = false;

  void validate(int L) const;
  double envelope_at(double t) const;
  double envelope_tail() const { return envelope_at(duration); }  // f(T^-)
  Profile amplitude_profile() const;
  ModulationPulse with_frequency(double f) const;
  ModulationPulse with_phase(double p) const;
  ModulationPulse with_amplitude(double a) const;
};

// phi = -pi/2 - omega T maximizes the linear response of K to itself.
double maximizing_phase(double freq_mhz, double duration);

}  // namespace rydcft
