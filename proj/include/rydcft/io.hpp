#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace rydcft {

// Shortest round-trip decimal, '.' separator regardless of locale.
std::string fmt_num(double x);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

// Minimal CSV reader for numeric tables with a header line.
struct NumericTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  int column(const std::string& name) const;  // -1 if absent
};
NumericTable read_numeric_csv(const std::filesystem::path& path);

// Runs fn(0..n-1) on a pool of `threads` workers. Results land by index, so the
// outcome does not depend on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

int default_thread_count();

}  // namespace rydcft
