#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sentinel/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Turbofan degradation onset detection with an LSTM autoencoder"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", sentinel::kToolkitVersion);

  std::string config_path;
  std::string subset;
  int unit = 0;
  double lambda = 0.0;
  std::size_t k = 0;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "pipeline config (JSON)")->required();
    cmd->add_option("--subset", subset, "FD001..FD004, overrides the config");
    cmd->add_option("--seed", seed, "rng seed, overrides the config");
    cmd->add_option("--lambda", lambda, "threshold multiplier, overrides the config");
    cmd->add_option("--k", k, "consecutive windows required for an alert, overrides the config");
  };
  auto* ingest = app.add_subcommand("ingest", "parse the raw files and write a dataset summary");
  auto* train = app.add_subcommand("train", "fit normalizer, autoencoder and threshold");
  auto* detect = app.add_subcommand("detect", "write per-unit reconstruction error curves");
  auto* evaluate = app.add_subcommand("evaluate", "score every window and write the detection report");
  for (auto* cmd : {ingest, train, detect, evaluate}) add_common(cmd);
  detect->add_option("--unit", unit, "only this unit");

  CLI11_PARSE(app, argc, argv);

  auto given = [](CLI::App* cmd, const char* name) {
    auto* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  CLI::App* cmd = app.get_subcommands().front();
  sentinel::CliOverrides overrides;
  if (given(cmd, "--subset")) overrides.subset = subset;
  if (given(cmd, "--lambda")) overrides.lambda = lambda;
  if (given(cmd, "--k")) overrides.k = k;
  if (given(cmd, "--seed")) overrides.seed = seed;
  std::optional<int> unit_filter;
  if (given(cmd, "--unit")) unit_filter = unit;

  return sentinel::run_guarded(
      [&] {
        const auto config = sentinel::load_config(config_path, overrides);
        if (cmd == ingest) return sentinel::cmd_ingest(config, std::cout);
        if (cmd == train) return sentinel::cmd_train(config, std::cout);
        if (cmd == detect) return sentinel::cmd_detect(config, unit_filter, std::cout);
        return sentinel::cmd_evaluate(config, std::cout);
      },
      std::cerr);
}
