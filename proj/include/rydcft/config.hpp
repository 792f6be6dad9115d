#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rydcft/hamiltonian.hpp"

namespace rydcft {

// Plain-text nested key-value configuration.
//
//   # comment
//   [chain]            -> following keys are prefixed "chain."
//   omega = 6.0
//   drive.freqs = 1.0, 1.2, 1.4
//
// Keys are dotted paths; values are scalars or comma-separated lists. Every key that is
// set must be read by the consumer, otherwise require_consumed() rejects the file.
class Config {
 public:
  static Config parse(std::istream& is, const std::string& source = "<input>");
  static Config parse_string(const std::string& text, const std::string& source = "<string>");
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  void apply_override(const std::string& assignment);  // "key=value"
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void erase(const std::string& key) { values_.erase(key); }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<int> get_ints(const std::string& key, const std::vector<int>& fallback) const;

  // Keys under prefix (without the prefix), useful for sections with open key sets.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  void require_consumed() const;
  std::string dump() const;  // canonical sorted form, parseable by parse()
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
  std::string source_ = "<config>";

  const std::string& raw(const std::string& key) const;
};

// Reads chain.* keys. Required: chain.L, chain.omega.
ChainParams chain_params_from_config(const Config& cfg, const std::string& prefix = "chain");
void chain_params_to_config(const ChainParams& p, Config& cfg, const std::string& prefix = "chain");

double parse_double(const std::string& text, const std::string& what);
std::vector<double> parse_double_list(const std::string& text, const std::string& what);

}  // namespace rydcft
