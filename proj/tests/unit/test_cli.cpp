#include <doctest.h>

#include "landau/cli.hpp"
#include "landau/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace landau;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("landau-test-cli-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Result {
  int code;
  std::string out, err;
};

Result run(const std::string& command, const fs::path& config, const fs::path& out, bool deterministic = false,
           std::optional<std::uint64_t> seed = {}) {
  cli::Options o;
  o.command = command;
  o.config_path = config.string();
  o.out = out.string();
  o.deterministic = deterministic;
  o.seed = seed;
  std::ostringstream os, es;
  const int code = cli::run(o, os, es);
  return {code, os.str(), es.str()};
}

const fs::path kConfigs = fs::path(LANDAU_SOURCE_DIR) / "configs";

}  // namespace

TEST_CASE("config parsing, defaults and environment overrides") {
  const Config c = Config::from_string("[integrator]\ndt = 5e-3\n[score]\nkind = analytic\n",
                                       {{"LANDAU_INTEGRATOR_T_END", "0.25"}, {"UNRELATED", "x"}});
  CHECK(c.real("integrator.dt") == 5e-3);
  CHECK(c.real("integrator.t_end") == 0.25);
  CHECK(c.string("score.kind") == "analytic");
  CHECK(c.integer("particles.count") == 4096);
  CHECK(c.is_auto("kernel.epsilon"));

  // the output directory does not enter the hash
  Config a = c, b = c;
  b.set("run.output", "elsewhere");
  CHECK(a.hash() == b.hash());
  b.set("integrator.dt", "1e-3");
  CHECK(a.hash() != b.hash());

  CHECK_THROWS_WITH_AS(Config::from_string("[integrator]\nstep = 1\n"), doctest::Contains("integrator.step"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(Config::from_string("[integrator]\ndt = fast\n").real("integrator.dt"),
                       doctest::Contains("integrator.dt"), ConfigError);
  CHECK_THROWS_AS(Config::from_string("", {{"LANDAU_KERNEL_BOGUS", "1"}}), ConfigError);

  const auto comps = parse_components("0.5 -1,0,0 0.8; 0.5 1,0,0 0.8", 3);
  REQUIRE(comps.size() == 2);
  CHECK(comps[1].mean.x() == 1.0);
  CHECK_THROWS_AS(parse_components("0.5 -1,0 0.8", 3), ConfigError);
}

TEST_CASE("config errors exit with code 2 and name the field") {
  const fs::path dir = scratch("bad");
  const Result r = run("simulate", write_file(dir / "bad.ini", "[particles]\ncont = 10\n"), dir / "out");
  CHECK(r.code == cli::config_error);
  CHECK(r.err.find("particles.cont") != std::string::npos);

  const Result w = run("simulate", write_file(dir / "neg.ini", "[integrator]\ndt = -1\n"), dir / "out");
  CHECK(w.code == cli::config_error);
  CHECK(w.err.find("integrator.dt") != std::string::npos);

  const Result missing = run("simulate", dir / "absent.ini", dir / "out");
  CHECK(missing.code == cli::config_error);

  const Result sub = run("frobnicate", write_file(dir / "empty.ini", ""), dir / "out");
  CHECK(sub.code == cli::config_error);
}

TEST_CASE("Maxwellian preset stays put") {
  const fs::path dir = scratch("maxwellian");
  const fs::path cfg = write_file(dir / "m.ini", "[initial]\nkind = gaussian\n[particles]\ncount = 512\n"
                                                     "[score]\nkind = analytic\n[integrator]\ndt = 0.01\n"
                                                     "t_end = 0.2\nstride = 5\n");
  const Result r = run("simulate", cfg, dir / "out");
  INFO(r.err);
  REQUIRE(r.code == cli::ok);
  const cli::Table t = cli::read_table((dir / "out" / "trajectory.csv").string());
  const auto speed = t.column("max_speed");
  REQUIRE(!speed.empty());
  for (double s : speed) CHECK(s <= 1e-12);
  const auto energy = t.column("energy");
  CHECK(std::abs(energy.back() - energy.front()) < 1e-13);
  CHECK(t.header.front().rfind("landau-cert trajectory schema 1", 0) == 0);
}

TEST_CASE("deterministic runs are byte-identical, seeds matter") {
  const fs::path dir = scratch("det");
  const fs::path cfg =
      write_file(dir / "b.ini", "[initial]\nvariance = 1.5\n[particles]\ncount = 300\nsampling = random\n"
                                "[integrator]\nt_end = 0.05\ndt = 0.01\nstride = 1\nsnapshot_stride = 5\n");
  REQUIRE(run("simulate", cfg, dir / "a", true, 3).code == cli::ok);
  REQUIRE(run("simulate", cfg, dir / "b", true, 3).code == cli::ok);
  REQUIRE(run("simulate", cfg, dir / "c", true, 4).code == cli::ok);
  CHECK(slurp(dir / "a" / "trajectory.csv") == slurp(dir / "b" / "trajectory.csv"));
  CHECK(slurp(dir / "a" / "snapshots.jsonl") == slurp(dir / "b" / "snapshots.jsonl"));
  CHECK(slurp(dir / "a" / "trajectory.csv") != slurp(dir / "c" / "trajectory.csv"));

  // snapshots feed the diagnose command
  const fs::path dcfg =
      write_file(dir / "d.ini", "[diagnose]\ninput = " + (dir / "a" / "snapshots.jsonl").string() + "\n");
  const Result d = run("diagnose", dcfg, dir / "diag");
  INFO(d.err);
  REQUIRE(d.code == cli::ok);
  const cli::Table t = cli::read_table((dir / "diag" / "diagnose.csv").string());
  CHECK(t.rows.size() == 2);
  for (double m : t.column("mass")) CHECK(m == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(t.column("nonexistent"), ConfigError);
}

TEST_CASE("loss-free twin certificate is zero") {
  const fs::path dir = scratch("twin");
  const fs::path cfg = write_file(dir / "t.ini",
                                  "[particles]\ncount = 512\nsampling = lattice\n"
                                  "[score]\nkind = perturbed\nbase = blob\nbandwidth = 0.5\noffset = 0\n"
                                  "[integrator]\ndt = 0.02\nt_end = 0.1\n[oracle]\ngrid_points = 24\n"
                                  "[certificate]\nmode = twin\nstride = 5\n");
  const Result r = run("certify", cfg, dir / "out");
  INFO(r.err);
  REQUIRE(r.code == cli::ok);
  const cli::Table t = cli::read_table((dir / "out" / "certificate.csv").string());
  REQUIRE(t.rows.size() >= 2);
  for (double b : t.column("bound")) CHECK(b == 0.0);
  for (double l : t.column("loss")) CHECK(l == 0.0);
  CHECK(fs::exists(dir / "out" / "twin_oracle.csv"));
  const std::string text = slurp(dir / "out" / "certificate.csv");
  CHECK(text.find("certificate.status: VALID") != std::string::npos);
}

TEST_CASE("self certificate post-processes a trajectory") {
  const fs::path dir = scratch("self");
  const fs::path cfg = write_file(dir / "s.ini", "[particles]\ncount = 256\n[integrator]\ndt = 0.02\nt_end = 0.1\n"
                                                 "stride = 1\n[certificate]\nmode = self\n");
  REQUIRE(run("certify", cfg, dir / "a").code == cli::ok);
  const cli::Table direct = cli::read_table((dir / "a" / "certificate.csv").string());
  const fs::path cfg2 = write_file(dir / "s2.ini", slurp(cfg) + "trajectory = " +
                                                       (dir / "a" / "trajectory.csv").string() + "\n");
  const Result r = run("certify", cfg2, dir / "b");
  INFO(r.err);
  REQUIRE(r.code == cli::ok);
  const cli::Table post = cli::read_table((dir / "b" / "certificate.csv").string());
  REQUIRE(post.rows.size() == direct.rows.size());
  const auto b1 = direct.column("bound"), b2 = post.column("bound");
  for (std::size_t k = 0; k < b1.size(); ++k) CHECK(b2[k] == doctest::Approx(b1[k]).epsilon(1e-14));
  CHECK(b1.back() > 0.0);
}

TEST_CASE("verify reads a manifest") {
  const fs::path dir = scratch("verify");
  write_file(dir / "pairs.txt", "# f | g\n1 0,0,0 1 | 1 0.2,0,0 1.1\n0.5 -1,0,0 0.8; 0.5 1,0,0 0.8 | 1 0,0,0 1.2\n");
  const fs::path cfg = write_file(dir / "v.ini", "[verify]\nmanifest = " + (dir / "pairs.txt").string() +
                                                     "\ngrid_points = 24\nhalf_width = 7\nrefine_points = 0\n");
  const Result r = run("verify", cfg, dir / "out");
  INFO(r.err);
  REQUIRE(r.code == cli::ok);
  const cli::Table t = cli::read_table((dir / "out" / "verify.csv").string());
  REQUIRE(t.rows.size() == 2);
  for (double m : t.column("pinsker_l1_margin")) CHECK(m >= 0.0);
  for (double k : t.column("kl")) CHECK(k > 0.0);
}

TEST_CASE("schema text lists every key and file") {
  const std::string s = cli::schema_text();
  for (const auto& key : config_schema()) CHECK(s.find(key.path) != std::string::npos);
  for (const char* f : {"trajectory.csv", "certificate.csv", "verify.csv", "diagnose.csv", "snapshots.jsonl"})
    CHECK(s.find(f) != std::string::npos);
}

TEST_CASE("shipped configs parse") {
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    INFO(entry.path().string());
    CHECK_NOTHROW(Config::from_file(entry.path().string(), {}));
  }
}
