#include "landau/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Deterministic-particle Landau simulator with KL error certificates"};
  app.set_version_flag("--version", landau::cli::kVersion);
  app.require_subcommand(0, 1);

  landau::cli::Options opt;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
  bool schema = false;
  app.add_flag("--schema", schema, "print configuration keys and output file layouts");

  for (const char* name : {"simulate", "oracle", "certify", "verify", "diagnose"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config_path, "INI configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override run.seed");
    sub->add_flag("--deterministic", opt.deterministic, "fixed-order compensated reductions");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : landau::cli::config_error;
  }

  if (schema) {
    std::cout << landau::cli::schema_text();
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return landau::cli::config_error;
  }
  auto* sub = app.get_subcommands().front();
  opt.command = sub->get_name();
  if (sub->count("--seed")) opt.seed = seed;
  if (sub->count("--threads")) opt.threads = threads;
  if (sub->count("--out")) opt.out = out;
  return landau::cli::run(opt, std::cout, std::cerr);
}
