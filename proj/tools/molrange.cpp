//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "molrange/error.hpp"
#include "molrange/pipeline/pipeline.hpp"

namespace mp = molrange::pipeline;

namespace {

struct Args {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> count;
  std::vector<std::string> sets;
  bool force = false;
  bool quiet = false;
};

mp::PipelineConfig resolve(const Args &a) {
  std::string path = a.config;
  if (path.empty())
    if (const char *env = std::getenv(mp::kConfigEnvVar))
      path = env;
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const std::string &s: a.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw molrange::Error(molrange::ErrorKind::kConfigInvalid,
                            "--set expects key=value, got '" + s + "'");
    overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (a.seed)
    overrides.emplace_back("seed", std::to_string(*a.seed));
  if (a.count)
    overrides.emplace_back("generate.count", std::to_string(*a.count));
  const std::filesystem::path p = path;
  return mp::load_config(path.empty() ? nullptr : &p, a.preset, overrides);
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app { "molrange: range-constrained molecule generation" };
  app.require_subcommand(1);
  Args args;

  using Stage = void (*)(const mp::PipelineConfig &, const mp::StageOptions &);
  struct Command {
    const char *name;
    const char *help;
    Stage fn;
  };
  const std::vector<Command> stages {
    { "train-embedder", "ingest the corpus and train the encoder-decoder",
      mp::train_embedder_stage },
    { "embed", "encode corpus and labeled molecules", mp::embed_stage },
    { "train-classifier", "train the property classifier on labeled embeddings",
      mp::train_classifier_stage },
    { "train-gan", "train the range-loss WGAN against the frozen classifier",
      mp::train_gan_stage },
    { "generate", "sample, decode and score new molecules", mp::generate_stage },
    { "evaluate", "compute the generation report",
      [](const mp::PipelineConfig &c, const mp::StageOptions &o) { mp::evaluate_stage(c, o); } },
    { "export-descriptors", "write per-molecule descriptors as CSV",
      mp::export_descriptors_stage },
    { "run-all", "run every stage in order",
      [](const mp::PipelineConfig &c, const mp::StageOptions &o) { mp::run_all(c, o); } },
    { "show-config", "print the resolved configuration", nullptr },
  };

  Stage chosen = nullptr;
  bool show = false;
  for (const Command &cmd: stages) {
    CLI::App *sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", args.config, "config file (default: $MOLRANGE_CONFIG)");
    sub->add_option("--preset", args.preset, "desk or paper")
        ->check(CLI::IsMember({ "desk", "paper" }));
    sub->add_option("--seed", args.seed, "master seed");
    sub->add_option("--count", args.count, "molecules to generate");
    sub->add_option("--set", args.sets, "override a config key (key=value)");
    sub->add_flag("--force", args.force, "overwrite existing outputs");
    sub->add_flag("--quiet", args.quiet, "suppress progress output");
    sub->callback([&chosen, &show, fn = cmd.fn] {
      chosen = fn;
      show = fn == nullptr;
    });
  }

  CLI11_PARSE(app, argc, argv);
  try {
    const mp::PipelineConfig cfg = resolve(args);
    if (show) {
      for (const auto &[k, v]: cfg.entries())
        std::cout << k << " = " << v << '\n';
      return 0;
    }
    mp::StageOptions opt;
    opt.force = args.force;
    opt.log = args.quiet ? nullptr : &std::cerr;
    chosen(cfg, opt);
  } catch (const molrange::Error &e) {
    std::cerr << "molrange: error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "molrange: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
