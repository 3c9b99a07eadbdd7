#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "deasel/config.hpp"
#include "deasel/error.hpp"
#include "deasel/pipeline.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string seed;
  std::string model;
  std::string classifier;
  std::string out;
  std::map<std::string, std::string> dotted;  // raw values by config key
  std::vector<std::pair<CLI::Option*, std::string>> dotted_opts;
};

void add_common_options(CLI::App* cmd, CliOptions& opts) {
  cmd->add_option("--config", opts.config_path, "flat key=value config file");
  cmd->add_option("--seed", opts.seed, "override split.seed and synth.seed");
  cmd->add_option("--model", opts.model,
                  "DEA model: ccr, iobcc, oobcc, additive or all");
  cmd->add_option("--classifier", opts.classifier, "classifier: knn, gnb, svm or all");
  cmd->add_option("--out", opts.out, "output directory");
  for (const auto& key : deasel::PipelineConfig::known_keys()) {
    auto* opt = cmd->add_option("--" + key, opts.dotted[key], "config key " + key);
    opts.dotted_opts.emplace_back(opt, key);
  }
}

deasel::PipelineConfig resolve_config(const CliOptions& opts) {
  deasel::PipelineConfig cfg;
  if (!opts.config_path.empty()) cfg.apply(deasel::parse_config_file(opts.config_path));
  if (!opts.out.empty()) cfg.set("paths.out", opts.out);
  if (!opts.model.empty()) cfg.set("dea.model", opts.model);
  if (!opts.classifier.empty()) cfg.set("classify.kind", opts.classifier);
  if (!opts.seed.empty()) {
    cfg.set("split.seed", opts.seed);
    cfg.set("synth.seed", opts.seed);
  }
  for (const auto& [opt, key] : opts.dotted_opts)
    if (opt->count() > 0) cfg.set(key, opts.dotted.at(key));
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"signal quality scoring, DEA channel selection and fault "
               "classification toolchain"};
  app.require_subcommand(1);

  CliOptions opts;
  auto* synth = app.add_subcommand(
      "synth", "generate a deterministic synthetic signals+costs fixture");
  auto* characterize = app.add_subcommand(
      "characterize", "compute the six per-channel quality metrics");
  auto* dea = app.add_subcommand(
      "dea", "score channels with the configured DEA models and select");
  auto* select = app.add_subcommand(
      "select", "re-threshold existing efficiency scores into selections");
  auto* train = app.add_subcommand(
      "train", "cross-validate and fit classifiers on selected channels");
  auto* evaluate = app.add_subcommand(
      "evaluate", "score stored models on the held-out half");
  auto* pipeline = app.add_subcommand(
      "pipeline", "run the whole chain and emit one report row per pair");
  for (auto* cmd : {synth, characterize, dea, select, train, evaluate, pipeline})
    add_common_options(cmd, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    auto cfg = resolve_config(opts);
    if (synth->parsed()) {
      deasel::run_synth(cfg, &std::cout);
    } else if (characterize->parsed()) {
      deasel::run_characterize(cfg, &std::cout);
    } else if (dea->parsed()) {
      auto outcome = deasel::run_dea(cfg, &std::cout);
      if (!outcome.failures.empty()) return 1;
    } else if (select->parsed()) {
      deasel::run_select(cfg, &std::cout);
    } else if (train->parsed()) {
      deasel::run_train(cfg, &std::cout);
    } else if (evaluate->parsed()) {
      deasel::run_evaluate(cfg, &std::cout);
    } else if (pipeline->parsed()) {
      auto report = deasel::run_pipeline(cfg, &std::cout);
      return report.exit_code;
    }
    return 0;
  } catch (const deasel::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
