#pragma once

#include "landau/types.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace landau {

struct ConfigKey {
  std::string path;  // section.key
  std::string type;  // int, real, bool, string, vector, list
  std::string default_value;
  std::string doc;
};

/// Every accepted key with its default and description.
const std::vector<ConfigKey>& config_schema();

/// Sectioned key = value configuration validated against config_schema().
/// Environment variables LANDAU_<SECTION>_<KEY> override file values.
class Config {
 public:
  Config();  // all defaults
  static Config from_file(const std::string& path, const std::map<std::string, std::string>& env = current_env());
  static Config from_string(const std::string& text, const std::map<std::string, std::string>& env = {});
  static std::map<std::string, std::string> current_env();

  void set(const std::string& path, const std::string& value);
  const std::string& raw(const std::string& path) const;
  bool is_auto(const std::string& path) const { return raw(path) == "auto"; }

  double real(const std::string& path) const;
  long integer(const std::string& path) const;
  std::uint64_t u64(const std::string& path) const;
  bool boolean(const std::string& path) const;
  std::string string(const std::string& path) const { return raw(path); }
  Vec vector(const std::string& path) const;

  /// Records a value derived at run time (e.g. an "auto" bandwidth).
  void resolve(const std::string& name, const std::string& value) { resolved_[name] = value; }
  const std::map<std::string, std::string>& resolved() const { return resolved_; }

  /// Canonical "section.key = value" lines in schema order. run.output is left
  /// out so that results do not depend on where they were written.
  std::vector<std::string> lines() const;
  /// 64-bit FNV-1a hash of the canonical lines.
  std::uint64_t hash() const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> resolved_;
};

std::uint64_t fnv1a(const std::string& text, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// "w mx,my,mz var; ..." component lists for Gaussian mixtures.
std::vector<GaussianComponent> parse_components(const std::string& text, int dim);

}  // namespace landau
