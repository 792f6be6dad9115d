#include "rydcft/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "rydcft/errors.hpp"
#include "rydcft/io.hpp"

namespace rydcft {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-')) return false;
  return true;
}

}  // namespace

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* b = t.data();
  if (!t.empty() && t[0] == '+') ++b;
  const auto r = std::from_chars(b, t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw ValidationError(what + ": expected a number, got '" + text + "'");
  return v;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_double(item, what));
  }
  return out;
}

Config Config::parse(std::istream& is, const std::string& source) {
  Config c;
  c.source_ = source;
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ValidationError(where + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!section.empty() && !valid_key(section)) throw ValidationError(where + ": bad section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError(where + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    if (!valid_key(key)) throw ValidationError(where + ": bad key '" + key + "'");
    if (c.values_.count(key)) throw ValidationError(where + ": duplicate key '" + key + "'");
    c.values_[key] = trim(line.substr(eq + 1));
  }
  return c;
}

Config Config::parse_string(const std::string& text, const std::string& source) {
  std::istringstream is(text);
  return parse(is, source);
}

Config Config::load(const std::filesystem::path& path) {
  std::istringstream is(read_text_file(path));
  return parse(is, path.string());
}

void Config::set(const std::string& key, const std::string& value) {
  if (!valid_key(key)) throw ValidationError("bad key '" + key + "'");
  values_[key] = trim(value);
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ValidationError("override '" + assignment + "' is not key=value");
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

const std::string& Config::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError(key + ": required field missing");
  used_.insert(key);
  return it->second;
}

std::string Config::get_string(const std::string& key) const { return raw(key); }
std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? raw(key) : fallback;
}
double Config::get_double(const std::string& key) const { return parse_double(raw(key), key); }
double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}
int Config::get_int(const std::string& key) const {
  const std::string& s = raw(key);
  int v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ValidationError(key + ": expected an integer, got '" + s + "'");
  return v;
}
int Config::get_int(const std::string& key, int fallback) const { return has(key) ? get_int(key) : fallback; }
bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& s = raw(key);
  if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "off" || s == "no") return false;
  throw ValidationError(key + ": expected a boolean, got '" + s + "'");
}
std::vector<double> Config::get_doubles(const std::string& key) const { return parse_double_list(raw(key), key); }
std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  return has(key) ? get_doubles(key) : fallback;
}
std::vector<int> Config::get_ints(const std::string& key, const std::vector<int>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<int> out;
  for (double v : get_doubles(key)) {
    if (v != static_cast<int>(v)) throw ValidationError(key + ": expected integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<std::string> Config::keys_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  const std::string p = prefix + ".";
  for (const auto& [k, v] : values_)
    if (k.rfind(p, 0) == 0) out.push_back(k.substr(p.size()));
  return out;
}

void Config::require_consumed() const {
  std::string unknown;
  for (const auto& [k, v] : values_)
    if (!used_.count(k)) unknown += (unknown.empty() ? "" : ", ") + k;
  if (!unknown.empty()) throw ValidationError(source_ + ": unknown key(s): " + unknown);
}

std::string Config::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

ChainParams chain_params_from_config(const Config& cfg, const std::string& prefix) {
  const auto key = [&](const char* k) { return prefix + "." + k; };
  ChainParams p;
  p.L = cfg.get_int(key("L"));
  p.omega = cfg.get_double(key("omega"));
  if (cfg.has(key("delta_over_omega"))) {
    if (cfg.has(key("delta"))) throw ValidationError(prefix + ": give delta or delta_over_omega, not both");
    p.delta = cfg.get_double(key("delta_over_omega")) * p.omega;
  } else {
    p.delta = cfg.get_double(key("delta"), 0.0);
  }
  p.v1 = cfg.get_double(key("v1"), 0.0);
  p.v2 = cfg.get_double(key("v2"), 0.0);
  p.eta = cfg.get_double(key("eta"), 0.0);
  p.include_h2 = cfg.get_bool(key("include_h2"), false);
  const std::string tails = cfg.get_string(key("tail_range"), "all");
  if (tails == "all") {
    p.tail_range = 0;
  } else {
    const double t = parse_double(tails, key("tail_range"));
    if (t < 1 || t != static_cast<int>(t)) throw ValidationError(key("tail_range") + ": expected 'all' or integer >= 1");
    p.tail_range = static_cast<int>(t);
  }
  p.local_detunings = cfg.get_doubles(key("local_detunings"), {});
  if (cfg.get_bool(key("fss"), false)) {
    p.tail_range = 2;
    p.include_h2 = false;
  }
  try {
    p.validate();
  } catch (const SizeError& e) {
    throw SizeError(prefix + ": " + e.what());
  } catch (const DomainError& e) {
    throw DomainError(prefix + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(prefix + ": " + e.what());
  }
  return p;
}

void chain_params_to_config(const ChainParams& p, Config& cfg, const std::string& prefix) {
  const auto key = [&](const char* k) { return prefix + "." + k; };
  cfg.set(key("L"), std::to_string(p.L));
  cfg.set(key("omega"), fmt_num(p.omega));
  cfg.set(key("delta"), fmt_num(p.delta));
  cfg.set(key("v1"), fmt_num(p.v1));
  cfg.set(key("v2"), fmt_num(p.v2));
  cfg.set(key("eta"), fmt_num(p.eta));
  cfg.set(key("include_h2"), p.include_h2 ? "true" : "false");
  cfg.set(key("tail_range"), p.tail_range == 0 ? "all" : std::to_string(p.tail_range));
  if (!p.local_detunings.empty()) {
    std::string s;
    for (std::size_t i = 0; i < p.local_detunings.size(); ++i)
      s += (i ? ", " : "") + fmt_num(p.local_detunings[i]);
    cfg.set(key("local_detunings"), s);
  }
}

}  // namespace rydcft
