#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace landau::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

enum ExitCode { ok = 0, failure = 1, config_error = 2, numerical_abort = 3 };

struct Options {
  std::string command;  // simulate | oracle | certify | verify | diagnose
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  std::optional<std::string> out;
  std::optional<int> threads;
};

int run(const Options& options, std::ostream& out, std::ostream& err);

/// Config keys and output file layouts, as printed by --schema.
std::string schema_text();

/// A header-prefixed table file as written by the tool.
struct Table {
  std::vector<std::string> header;  // lines after the leading '# '
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(const std::string& name) const;
};

Table read_table(const std::string& path);

}  // namespace landau::cli
