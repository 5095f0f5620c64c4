// amlkit command-line driver: ingest | synth | split | train | ensemble |
// evaluate | report over a single JSON run configuration.
//
// Exit codes: 0 ok, 2 format error, 3 integrity failure, 4 training error,
// 5 ensemble error, 6 evaluation error.

#include "amlkit/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace amlkit;

struct Cli {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> split;
};

pipeline::RunConfig load(const Cli& cli) {
  io::json user = io::json::object();
  if (!cli.config_path.empty()) user = io::read_json(cli.config_path);
  if (cli.seed) user["rng"]["seed"] = *cli.seed;
  if (cli.out) user["out"] = *cli.out;
  if (cli.split) user["split"]["mode"] = *cli.split;
  return pipeline::parse_run_config(user);
}

int classify_error(const std::exception& e, const std::string& stage) {
  if (dynamic_cast<const FormatError*>(&e) || dynamic_cast<const InvalidSpec*>(&e))
    return 2;
  if (dynamic_cast<const ConflictingLabel*>(&e) ||
      dynamic_cast<const EmptyGraph*>(&e) ||
      dynamic_cast<const DimensionMismatch*>(&e) ||
      dynamic_cast<const ClassTooSmall*>(&e) ||
      dynamic_cast<const DegenerateWindow*>(&e))
    return 3;
  if (dynamic_cast<const DegenerateValidation*>(&e) ||
      dynamic_cast<const InvalidWeights*>(&e))
    return 5;
  if (dynamic_cast<const MissingArtifact*>(&e)) return 6;
  if (stage == "train") return 4;
  if (stage == "ensemble") return 5;
  if (stage == "evaluate" || stage == "report") return 6;
  return 1;
}

int run_stage(const Cli& cli, const std::string& stage) {
  try {
    const pipeline::RunConfig cfg = load(cli);
    if (stage == "ingest") pipeline::cmd_ingest(cfg);
    else if (stage == "synth") pipeline::cmd_synth(cfg);
    else if (stage == "split") pipeline::cmd_split(cfg);
    else if (stage == "train") pipeline::cmd_train(cfg);
    else if (stage == "ensemble") pipeline::cmd_ensemble(cfg);
    else if (stage == "evaluate") pipeline::cmd_evaluate(cfg);
    else if (stage == "report") std::cout << pipeline::cmd_report(cfg);
    return 0;
  } catch (const std::exception& e) {
    const int code = classify_error(e, stage);
    std::cerr << "amlkit " << stage << ": " << e.what() << "\n";
    return code;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transaction-graph fraud detection toolkit"};
  app.require_subcommand(1);

  Cli cli;
  app.add_option("--config", cli.config_path, "run configuration JSON");
  std::uint64_t seed_val = 0;
  auto* seed_opt = app.add_option("--seed", seed_val, "override rng seed");
  std::string out_val;
  auto* out_opt = app.add_option("--out", out_val, "override output directory");
  std::string split_val;
  app.add_option("--split", split_val, "override split mode")
      ->check(CLI::IsMember({"stratified", "chronological", "both"}))
      ->each([&](const std::string& v) { cli.split = v; });

  const char* stages[] = {"ingest", "synth",    "split", "train",
                          "ensemble", "evaluate", "report"};
  const char* help[] = {
      "build the graph bundle from feature/edge/class files",
      "build the graph bundle from the synthetic generator",
      "write train/val/test assignments",
      "train the three backbones",
      "tune soft-voting weights and fit the stacker",
      "score all systems on the test split and write the report",
      "print a text summary of the report"};
  for (std::size_t i = 0; i < std::size(stages); ++i)
    app.add_subcommand(stages[i], help[i])->fallthrough();

  CLI11_PARSE(app, argc, argv);
  if (seed_opt->count()) cli.seed = seed_val;
  if (out_opt->count()) cli.out = out_val;

  for (const auto* sub : app.get_subcommands())
    return run_stage(cli, sub->get_name());
  return 1;
}
