#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "congame/errors.hpp"
#include "congame/experiment.hpp"

namespace {

void print_error_json(const std::string& kind, const std::string& message) {
  nlohmann::json j = {{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << j.dump() << "\n";
}

std::pair<std::string, std::vector<double>> parse_sweep(const std::string& arg) {
  const size_t eq = arg.find('=');
  if (eq == std::string::npos)
    throw congame::InvalidArgument("--sweep expects name=v1,v2,... got '" + arg + "'");
  const std::string name = arg.substr(0, eq);
  std::vector<double> values;
  std::string rest = arg.substr(eq + 1);
  size_t start = 0;
  while (start <= rest.size()) {
    const size_t comma = rest.find(',', start);
    const std::string tok =
        rest.substr(start, comma == std::string::npos ? comma : comma - start);
    if (tok.empty()) throw congame::InvalidArgument("empty value in --sweep list");
    size_t used = 0;
    values.push_back(std::stod(tok, &used));
    if (used != tok.size())
      throw congame::InvalidArgument("bad number '" + tok + "' in --sweep list");
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (values.empty()) throw congame::InvalidArgument("--sweep needs at least one value");
  return {name, values};
}

int run_command(const std::string& config_path, std::uint64_t seed, bool seed_set,
                congame::Index n_seeds, bool seeds_set, const std::string& sweep,
                const std::string& out, const std::string& format,
                congame::Index horizon) {
  std::ifstream f(config_path);
  if (!f) throw congame::IoError("cannot read config file " + config_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw congame::InvalidArgument("config is not valid JSON: " + std::string(e.what()));
  }
  congame::ExperimentConfig cfg;
  try {
    cfg = congame::experiment_config_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw congame::InvalidArgument("bad config: " + std::string(e.what()));
  }

  if (seed_set) cfg.base_seed = seed;
  if (seeds_set) cfg.n_seeds = n_seeds;
  if (!sweep.empty()) {
    auto [name, values] = parse_sweep(sweep);
    cfg.sweep = congame::sweep_param_from_name(name);
    cfg.sweep_values = values;
  }
  if (!out.empty()) cfg.out_dir = out;
  if (!format.empty()) {
    if (format == "csv")
      cfg.format = congame::OutputFormat::csv;
    else if (format == "json")
      cfg.format = congame::OutputFormat::json;
    else if (format == "both")
      cfg.format = congame::OutputFormat::both;
    else
      throw congame::InvalidArgument("--format must be csv, json or both");
  }
  if (horizon > 0) cfg.horizons = {horizon};

  const congame::ExperimentReport report = congame::run_experiment(cfg);

  std::cout << "cells: " << report.cells.size() << "  files: " << report.files_written.size()
            << "  out: " << cfg.out_dir << "\n";
  std::cout << "constants: C1=" << report.constants.C1 << " C2=" << report.constants.C2
            << " C3=" << report.constants.C3 << " K=" << report.constants.K
            << " delta_psi=" << report.constants.delta_psi << "\n";
  for (const auto& s : report.slopes)
    std::cout << "slope[" << congame::sweep_param_name(cfg.sweep) << "="
              << congame::fmt_double(s.value) << "] = " << congame::fmt_double(s.slope) << "\n";
  return 0;
}

int summarize_command(const std::string& dir) {
  const auto rows = congame::summarize_directory(dir);
  std::cout << "sweep_param,value,horizon,mean_terminal_anccvc,std_terminal_anccvc,n_seeds\n";
  for (const auto& r : rows)
    std::cout << r.sweep_param << ',' << congame::fmt_double(r.value) << ',' << r.horizon
              << ',' << congame::fmt_double(r.mean_terminal) << ','
              << congame::fmt_double(r.std_terminal) << ',' << r.n_seeds << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"resource-pricing simulation toolkit"};
  app.require_subcommand(1);

  std::string config_path, sweep, out, format;
  std::uint64_t seed = 0;
  congame::Index n_seeds = 0, horizon = 0;

  CLI::App* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  CLI::Option* seed_opt = run->add_option("--seed", seed, "base seed (overrides config)");
  CLI::Option* seeds_opt = run->add_option("--seeds", n_seeds, "number of seeds (overrides config)");
  run->add_option("--sweep", sweep, "sweep override, e.g. beta=0,1,2,3,4");
  run->add_option("--out", out, "output directory (overrides config)");
  run->add_option("--format", format, "csv | json | both");
  run->add_option("--horizon", horizon, "single horizon override");

  std::string dir;
  CLI::App* summ = app.add_subcommand("summarize", "aggregate summaries of a finished run");
  summ->add_option("--dir", dir, "experiment output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed())
      return run_command(config_path, seed, seed_opt->count() > 0, n_seeds,
                         seeds_opt->count() > 0, sweep, out, format, horizon);
    return summarize_command(dir);
  } catch (const congame::Error& e) {
    print_error_json(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error_json("internal_error", e.what());
    return 1;
  }
}
