#include "landau/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

extern char** environ;

namespace landau {

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = {
      {"run.seed", "int", "0", "seed for particle sampling (overridden by --seed)"},
      {"run.deterministic", "bool", "false", "fixed-order compensated reductions"},
      {"run.threads", "int", "1", "worker threads for pair sums"},
      {"run.output", "string", "out", "output directory (overridden by --out)"},

      {"initial.kind", "string", "gaussian", "gaussian | mixture | anisotropic"},
      {"initial.dim", "int", "3", "velocity dimension, 2 or 3"},
      {"initial.mean", "vector", "0,0,0", "gaussian mean"},
      {"initial.variance", "real", "1", "gaussian variance (isotropic)"},
      {"initial.variances", "vector", "1,1,1", "anisotropic per-axis variances"},
      {"initial.components", "list", "", "mixture: 'w mx,my,mz var; ...'"},

      {"kernel.gamma", "real", "-3", "kernel exponent, <= 0"},
      {"kernel.epsilon", "real", "auto", "regularization length; auto = factor * N^(-1/d) * spread"},
      {"kernel.epsilon_factor", "real", "0.1", "factor in the auto epsilon rule"},

      {"particles.count", "int", "4096", "number of particles (lattice rounds to a perfect power)"},
      {"particles.sampling", "string", "qmc", "random | qmc | lattice"},

      {"integrator.scheme", "string", "heun", "euler | heun"},
      {"integrator.dt", "real", "1e-3", "time step"},
      {"integrator.t_end", "real", "1", "final time"},
      {"integrator.stride", "int", "10", "steps between trajectory rows"},
      {"integrator.snapshot_stride", "int", "0", "steps between particle snapshots; 0 disables"},

      {"score.kind", "string", "blob", "blob | analytic | perturbed"},
      {"score.base", "string", "blob", "base field of a perturbed score: blob | analytic"},
      {"score.bandwidth", "real", "auto", "blob bandwidth; auto = constant * spread * N^(-1/(d+4))"},
      {"score.bandwidth_constant", "real", "1", "constant in the auto bandwidth rule"},
      {"score.offset_kind", "string", "constant", "constant | linear"},
      {"score.offset", "real", "0", "offset magnitude"},
      {"score.offset_direction", "vector", "1,0,0", "offset direction"},

      {"diagnostics.kde_bandwidth", "real", "auto", "mollifier for entropy, sup norm and I_s; auto = score bandwidth"},
      {"diagnostics.grid_points", "int", "32", "points per axis of the entropy grid"},
      {"diagnostics.half_width", "real", "auto", "entropy grid half width; auto = 6 * extent"},
      {"diagnostics.weight_exponent", "real", "3", "s in I_s and the moment column"},
      {"diagnostics.entropy", "bool", "true", "compute the mollified entropy column"},

      {"oracle.grid_points", "int", "auto", "points per axis; auto = 48 (d=3) or 128 (d=2)"},
      {"oracle.half_width", "real", "auto", "box half width; auto = 6 * extent"},
      {"oracle.dt", "real", "0", "grid time step; 0 picks a stable one"},
      {"oracle.t_end", "real", "1", "final time"},
      {"oracle.output_interval", "real", "0.1", "time between trajectory rows"},
      {"oracle.c_stab", "real", "0.15", "parabolic stability constant"},

      {"certificate.mode", "string", "twin", "twin | self | assumed_ratio"},
      {"certificate.c_abs", "real", "auto", "KL-form constant; auto = calibrated value"},
      {"certificate.kl0", "real", "0", "KL(f_0 | g_0); 0 when both start from the same density"},
      {"certificate.assumed_ratio", "real", "1", "R for assumed_ratio mode"},
      {"certificate.mollifier", "real", "0.5", "twin mode: Gaussian width applied to f and g before KL"},
      {"certificate.reference", "string", "auto", "grad log g surrogate: auto | base | analytic | blob; auto = base (twin) or blob at half bandwidth"},
      {"certificate.reference_bandwidth", "real", "auto", "blob reference bandwidth; auto = half the score bandwidth"},
      {"certificate.truncation_budget", "real", "1e-3", "max f-mass outside the ratio support set"},
      {"certificate.stride", "int", "5", "particle steps between certificate rows"},
      {"certificate.trajectory", "string", "", "self/assumed_ratio: post-process this trajectory file"},

      {"verify.pairs", "int", "20", "seeded mixture pairs when no manifest is given"},
      {"verify.seed", "int", "7", "seed of the pair suite"},
      {"verify.manifest", "string", "", "file with one 'f components | g components' pair per line"},
      {"verify.grid_points", "int", "48", "quadrature points per axis"},
      {"verify.half_width", "real", "8", "quadrature box half width"},
      {"verify.refine_points", "int", "64", "second resolution for the refinement column; 0 skips"},

      {"diagnose.input", "string", "", "particle snapshot file (JSONL) to analyze"},
  };
  return schema;
}

namespace {

const ConfigKey* find_key(const std::string& path) {
  for (const auto& k : config_schema())
    if (k.path == path) return &k;
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string env_name(const std::string& path) {
  std::string out = "LANDAU_";
  for (char c : path) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

Config load(std::istream& in, const std::string& origin, const std::map<std::string, std::string>& env) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}: {}", origin, e.message()));
  }
  Config c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError(fmt::format("{}: key '{}' is outside any section", origin, section));
    for (const auto& [key, value] : body) c.set(section + "." + key, value.data());
  }
  for (const auto& [name, value] : env) {
    const ConfigKey* key = nullptr;
    bool section_known = false;
    for (const auto& k : config_schema()) {
      if (env_name(k.path) == name) key = &k;
      const std::string section = env_name(k.path.substr(0, k.path.find('.'))) + "_";
      if (name.rfind(section, 0) == 0) section_known = true;
    }
    if (key) {
      c.set(key->path, value);
    } else if (section_known) {
      // LANDAU_INTEGRATOR_DTT and the like are typos, not foreign variables
      throw ConfigError(fmt::format("{}: environment override names no configuration key", name));
    }
  }
  return c;
}

}  // namespace

Config::Config() {
  for (const auto& k : config_schema()) values_[k.path] = k.default_value;
}

std::map<std::string, std::string> Config::current_env() {
  std::map<std::string, std::string> env;
  for (char** e = environ; e && *e; ++e) {
    const std::string kv(*e);
    if (kv.rfind("LANDAU_", 0) != 0) continue;
    const auto eq = kv.find('=');
    if (eq != std::string::npos) env[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return env;
}

Config Config::from_file(const std::string& path, const std::map<std::string, std::string>& env) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  return load(in, path, env);
}

Config Config::from_string(const std::string& text, const std::map<std::string, std::string>& env) {
  std::istringstream in(text);
  return load(in, "<string>", env);
}

void Config::set(const std::string& path, const std::string& value) {
  if (!find_key(path)) throw ConfigError(fmt::format("{}: unknown configuration key", path));
  values_[path] = trim(value);
}

const std::string& Config::raw(const std::string& path) const {
  const auto it = values_.find(path);
  if (it == values_.end()) throw ConfigError(fmt::format("{}: unknown configuration key", path));
  return it->second;
}

double Config::real(const std::string& path) const {
  const std::string& s = raw(path);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw ConfigError(fmt::format("{}: expected a real number, got '{}'", path, s));
  return v;
}

long Config::integer(const std::string& path) const {
  const std::string& s = raw(path);
  long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw ConfigError(fmt::format("{}: expected an integer, got '{}'", path, s));
  return v;
}

std::uint64_t Config::u64(const std::string& path) const {
  const std::string& s = raw(path);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw ConfigError(fmt::format("{}: expected an unsigned integer, got '{}'", path, s));
  return v;
}

bool Config::boolean(const std::string& path) const {
  const std::string& s = raw(path);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(fmt::format("{}: expected true or false, got '{}'", path, s));
}

Vec Config::vector(const std::string& path) const {
  const std::string& s = raw(path);
  Vec v = Vec::Zero();
  std::istringstream in(s);
  std::string item;
  int k = 0;
  while (std::getline(in, item, ',')) {
    if (k == 3) throw ConfigError(fmt::format("{}: more than 3 components in '{}'", path, s));
    item = trim(item);
    const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v[k]);
    if (ec != std::errc() || p != item.data() + item.size() || item.empty())
      throw ConfigError(fmt::format("{}: component {} of '{}' is not a number", path, k, s));
    ++k;
  }
  if (k == 0) throw ConfigError(fmt::format("{}: empty vector", path));
  return v;
}

std::vector<std::string> Config::lines() const {
  std::vector<std::string> out;
  for (const auto& k : config_schema())
    if (k.path != "run.output") out.push_back(fmt::format("{} = {}", k.path, values_.at(k.path)));
  return out;
}

std::uint64_t fnv1a(const std::string& text, std::uint64_t h) {
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t Config::hash() const {
  std::string all;
  for (const auto& l : lines()) all += l + "\n";
  return fnv1a(all);
}

std::vector<GaussianComponent> parse_components(const std::string& text, int dim) {
  std::vector<GaussianComponent> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    std::istringstream parts(item);
    std::string w, mean, var, extra;
    if (!(parts >> w >> mean >> var) || (parts >> extra))
      throw ConfigError(fmt::format("initial.components: '{}' is not 'weight mx,my,mz variance'", item));
    Config tmp;
    tmp.set("initial.mean", mean);
    GaussianComponent c;
    try {
      c.weight = std::stod(w);
      c.variance = std::stod(var);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("initial.components: bad number in '{}'", item));
    }
    c.mean = tmp.vector("initial.mean");
    const auto given = static_cast<int>(std::count(mean.begin(), mean.end(), ',')) + 1;
    if (given != dim)
      throw ConfigError(fmt::format("initial.components: mean '{}' has {} entries, expected {}", mean, given, dim));
    if (dim == 2) c.mean[2] = 0.0;
    out.push_back(c);
  }
  if (out.empty()) throw ConfigError("initial.components: no components given");
  return out;
}

}  // namespace landau
