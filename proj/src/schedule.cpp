#include "rydcft/schedule.hpp"

#include <cmath>
#include <numbers>

#include "rydcft/config.hpp"
#include "rydcft/errors.hpp"
#include "rydcft/io.hpp"

namespace rydcft {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double Profile::operator()(double t, double T) const {
  switch (kind) {
    case Kind::constant:
      return value;
    case Kind::linear:
      return start + (end - start) * (t / T);
    case Kind::tangent_in:
      return center + scale * std::tan(theta0 * (1.0 - t / T));
    case Kind::tangent_out:
      return center + scale * std::tan(theta0 * t / T);
    case Kind::gaussian_cosine: {
      const double x = (t - 0.5 * T) / width;
      return offset + amplitude * std::exp(-x * x) * std::cos(kTwoPi * freq * t + phase);
    }
    case Kind::square_cosine:
      return offset + amplitude * std::cos(kTwoPi * freq * t + phase);
    case Kind::raised_cosine:
      return offset + amplitude * (1.0 + std::cos(kTwoPi * freq * t + phase));
  }
  return 0.0;
}

bool Profile::time_dependent() const {
  switch (kind) {
    case Kind::constant:
      return false;
    case Kind::linear:
      return start != end;
    case Kind::tangent_in:
    case Kind::tangent_out:
      return scale != 0.0;
    default:
      return amplitude != 0.0;
  }
}

Profile Profile::constant(double v) {
  Profile p;
  p.value = v;
  return p;
}
Profile Profile::linear(double a, double b) {
  Profile p;
  p.kind = Kind::linear;
  p.start = a;
  p.end = b;
  return p;
}
Profile Profile::tangent_in(double center, double scale, double theta0) {
  Profile p;
  p.kind = Kind::tangent_in;
  p.center = center;
  p.scale = scale;
  p.theta0 = theta0;
  return p;
}
Profile Profile::tangent_out(double center, double scale, double theta0) {
  Profile p = tangent_in(center, scale, theta0);
  p.kind = Kind::tangent_out;
  return p;
}

std::string to_string(Profile::Kind k) {
  switch (k) {
    case Profile::Kind::constant: return "constant";
    case Profile::Kind::linear: return "linear";
    case Profile::Kind::tangent_in: return "tangent_in";
    case Profile::Kind::tangent_out: return "tangent_out";
    case Profile::Kind::gaussian_cosine: return "gaussian_cosine";
    case Profile::Kind::square_cosine: return "square_cosine";
    case Profile::Kind::raised_cosine: return "raised_cosine";
  }
  return "constant";
}

Profile::Kind profile_kind_from_string(const std::string& s) {
  for (auto k : {Profile::Kind::constant, Profile::Kind::linear, Profile::Kind::tangent_in,
                 Profile::Kind::tangent_out, Profile::Kind::gaussian_cosine, Profile::Kind::square_cosine,
                 Profile::Kind::raised_cosine})
    if (to_string(k) == s) return k;
  throw ValidationError("unknown profile kind '" + s + "'");
}

bool Segment::time_dependent() const {
  if (delta.time_dependent() || omega.time_dependent()) return true;
  for (const auto& d : drives)
    if (d.amplitude.time_dependent()) return true;
  return false;
}

void Schedule::validate(int L) const {
  if (segments.empty()) throw ValidationError("schedule has no segments");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    const std::string tag = "segment " + std::to_string(i);
    if (!(s.duration > 0.0) || !std::isfinite(s.duration)) throw ValidationError(tag + ": duration must be > 0");
    for (const Profile* p : {&s.delta, &s.omega}) {
      if ((p->kind == Profile::Kind::tangent_in || p->kind == Profile::Kind::tangent_out) &&
          !(std::abs(p->theta0) < std::numbers::pi / 2))
        throw ValidationError(tag + ": |theta0| must be < pi/2 for a continuous tangent sweep");
      if (p->kind == Profile::Kind::gaussian_cosine && !(p->width > 0))
        throw ValidationError(tag + ": gaussian width must be > 0");
    }
    for (const auto& d : s.drives) {
      if (static_cast<int>(d.weights.size()) != L) throw ValidationError(tag + ": drive weights need L entries");
      if (d.amplitude.kind == Profile::Kind::gaussian_cosine && !(d.amplitude.width > 0))
        throw ValidationError(tag + ": gaussian width must be > 0");
    }
  }
}

double Schedule::total_duration() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.duration;
  return t;
}

namespace {

void profile_to_config(const Profile& p, Config& cfg, const std::string& k) {
  cfg.set(k + ".kind", to_string(p.kind));
  switch (p.kind) {
    case Profile::Kind::constant:
      cfg.set(k + ".value", fmt_num(p.value));
      break;
    case Profile::Kind::linear:
      cfg.set(k + ".start", fmt_num(p.start));
      cfg.set(k + ".end", fmt_num(p.end));
      break;
    case Profile::Kind::tangent_in:
    case Profile::Kind::tangent_out:
      cfg.set(k + ".center", fmt_num(p.center));
      cfg.set(k + ".scale", fmt_num(p.scale));
      cfg.set(k + ".theta0", fmt_num(p.theta0));
      break;
    default:
      cfg.set(k + ".amplitude", fmt_num(p.amplitude));
      cfg.set(k + ".freq", fmt_num(p.freq));
      cfg.set(k + ".phase", fmt_num(p.phase));
      cfg.set(k + ".offset", fmt_num(p.offset));
      if (p.kind == Profile::Kind::gaussian_cosine) cfg.set(k + ".width", fmt_num(p.width));
  }
}

Profile profile_from_config(const Config& cfg, const std::string& k) {
  Profile p;
  p.kind = profile_kind_from_string(cfg.get_string(k + ".kind", "constant"));
  switch (p.kind) {
    case Profile::Kind::constant:
      p.value = cfg.get_double(k + ".value");
      break;
    case Profile::Kind::linear:
      p.start = cfg.get_double(k + ".start");
      p.end = cfg.get_double(k + ".end");
      break;
    case Profile::Kind::tangent_in:
    case Profile::Kind::tangent_out:
      p.center = cfg.get_double(k + ".center");
      p.scale = cfg.get_double(k + ".scale");
      p.theta0 = cfg.get_double(k + ".theta0", 1.45);
      break;
    default:
      p.amplitude = cfg.get_double(k + ".amplitude");
      p.freq = cfg.get_double(k + ".freq");
      p.phase = cfg.get_double(k + ".phase", 0.0);
      p.offset = cfg.get_double(k + ".offset", 0.0);
      if (p.kind == Profile::Kind::gaussian_cosine) p.width = cfg.get_double(k + ".width");
  }
  return p;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt_num(v[i]);
  return s;
}

}  // namespace

void schedule_to_config(const Schedule& s, Config& cfg, const std::string& prefix) {
  cfg.set(prefix + ".segments", std::to_string(s.segments.size()));
  for (std::size_t i = 0; i < s.segments.size(); ++i) {
    const auto& seg = s.segments[i];
    const std::string k = prefix + "." + std::to_string(i);
    cfg.set(k + ".duration", fmt_num(seg.duration));
    if (!seg.label.empty()) cfg.set(k + ".label", seg.label);
    profile_to_config(seg.delta, cfg, k + ".delta");
    profile_to_config(seg.omega, cfg, k + ".omega");
    cfg.set(k + ".drives", std::to_string(seg.drives.size()));
    for (std::size_t d = 0; d < seg.drives.size(); ++d) {
      const std::string dk = k + ".drive" + std::to_string(d);
      cfg.set(dk + ".weights", join(seg.drives[d].weights));
      profile_to_config(seg.drives[d].amplitude, cfg, dk + ".amp");
    }
  }
}

Schedule schedule_from_config(const Config& cfg, int L, const std::string& prefix) {
  Schedule s;
  const int n = cfg.get_int(prefix + ".segments");
  if (n < 1) throw ValidationError(prefix + ".segments must be >= 1");
  for (int i = 0; i < n; ++i) {
    const std::string k = prefix + "." + std::to_string(i);
    Segment seg;
    seg.duration = cfg.get_double(k + ".duration");
    seg.label = cfg.get_string(k + ".label", "");
    seg.delta = profile_from_config(cfg, k + ".delta");
    seg.omega = profile_from_config(cfg, k + ".omega");
    const int nd = cfg.get_int(k + ".drives", 0);
    for (int d = 0; d < nd; ++d) {
      const std::string dk = k + ".drive" + std::to_string(d);
      LocalDrive drive;
      drive.weights = cfg.get_doubles(dk + ".weights");
      drive.amplitude = profile_from_config(cfg, dk + ".amp");
      seg.drives.push_back(std::move(drive));
    }
    s.segments.push_back(std::move(seg));
  }
  s.validate(L);
  return s;
}

void ModulationPulse::validate(int L) const {
  if (!(duration > 0.0)) throw ValidationError("pulse duration must be > 0");
  if (envelope == Envelope::gaussian && !(width > 0.0)) throw ValidationError("gaussian pulse width must be > 0");
  if (!weights.empty() && static_cast<int>(weights.size()) != L)
    throw ValidationError("pulse weights need L entries");
  if (!std::isfinite(amplitude) || !std::isfinite(freq) || !std::isfinite(phase))
    throw ValidationError("non-finite pulse parameter");
}

double ModulationPulse::envelope_at(double t) const {
  if (envelope == Envelope::square) return 1.0;
  const double x = (t - 0.5 * duration) / width;
  return std::exp(-x * x);
}

Profile ModulationPulse::amplitude_profile() const {
  Profile p;
  p.amplitude = amplitude;
  p.freq = freq;
  p.phase = phase;
  if (raised) {
    p.kind = Profile::Kind::raised_cosine;
    if (envelope == Envelope::gaussian)
      throw ValidationError("raised temporal factor is only supported with a square envelope");
  } else if (envelope == Envelope::gaussian) {
    p.kind = Profile::Kind::gaussian_cosine;
    p.width = width;
  } else {
    p.kind = Profile::Kind::square_cosine;
  }
  return p;
}

ModulationPulse ModulationPulse::with_frequency(double f) const {
  ModulationPulse p = *this;
  p.freq = f;
  return p;
}
ModulationPulse ModulationPulse::with_phase(double ph) const {
  ModulationPulse p = *this;
  p.phase = ph;
  return p;
}
ModulationPulse ModulationPulse::with_amplitude(double a) const {
  ModulationPulse p = *this;
  p.amplitude = a;
  return p;
}

double maximizing_phase(double freq_mhz, double duration) {
  return -0.5 * std::numbers::pi - kTwoPi * freq_mhz * duration;
}

}  // namespace rydcft
