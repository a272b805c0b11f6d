#include <CLI11.hpp>

#include "accessmfs/types.hpp"
#include "commands.hpp"

#include <iostream>
#include <nlohmann/json.hpp>

namespace {

using accessmfs::cli::CliConfig;
using accessmfs::cli::SynthConfig;

void add_common_options(CLI::App* cmd, CliConfig& cfg, std::string& lambdas, std::string& thetas,
                        std::string& mus, std::string& ratios, std::string& features,
                        std::string& seeds) {
  cmd->add_option("--dataset", cfg.dataset_path, "Path to the dataset file")->required();
  cmd->add_option("--format", cfg.format, "dense_csv or sparse_multilabel");
  cmd->add_option("--lambda", lambdas, "l2,1 weight (scalar or comma list)");
  cmd->add_option("--theta", thetas, "instance-graph weight (scalar or comma list)");
  cmd->add_option("--mu", mus, "label-graph weight (scalar or comma list)");
  cmd->add_option("--ks", cfg.k_s, "instance-graph neighbor count");
  cmd->add_option("--kp", cfg.k_p, "label-graph neighbor count");
  cmd->add_option("--labeled-ratio,--labeled-ratios", ratios,
                  "labeled/training fraction(s), comma list");
  cmd->add_option("--features", features, "selected feature count(s): list or start:stop:step");
  cmd->add_option("--seeds,--seed", seeds, "random seed(s), comma list");
  cmd->add_option("--variant", cfg.variant,
                  "full | instance_graph_only | label_graph_only | no_graphs");
  cmd->add_option("--mlknn-k", cfg.mlknn_k, "ML-KNN neighbor count");
  cmd->add_option("--mlknn-smoothing", cfg.mlknn_smoothing, "ML-KNN Laplace smoothing");
  cmd->add_flag("--standardize,!--no-standardize", cfg.standardize,
                "z-score features at load (default on)");
  cmd->add_option("--out", cfg.out_dir, "output directory for report.csv / report.json");
  cmd->add_option("--max-iters", cfg.max_iters, "outer iteration cap");
  cmd->add_option("--max-w-iters", cfg.max_w_iters, "projection inner-loop cap");
  cmd->add_option("--tol", cfg.tol, "relative objective tolerance");
  cmd->add_flag("-v,--verbose", cfg.verbosity, "more progress output");
}

void finalize_lists(CliConfig& cfg, const std::string& lambdas, const std::string& thetas,
                    const std::string& mus, const std::string& ratios,
                    const std::string& features, const std::string& seeds) {
  using namespace accessmfs::cli;
  if (!lambdas.empty()) cfg.lambdas = parse_double_list(lambdas);
  if (!thetas.empty()) cfg.thetas = parse_double_list(thetas);
  if (!mus.empty()) cfg.mus = parse_double_list(mus);
  if (!ratios.empty()) cfg.ratios = parse_double_list(ratios);
  if (!features.empty()) cfg.feature_counts = parse_int_list(features);
  if (!seeds.empty()) cfg.seeds = parse_seed_list(seeds);
}

int error_json(const char* type, const std::exception& e, int code) {
  nlohmann::json err{{"error", {{"type", type}, {"message", e.what()}}}};
  std::cerr << err.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Access-MFS: semi-supervised multi-label feature selection"};
  app.require_subcommand(1);

  CliConfig cfg;
  std::string lambdas, thetas, mus, ratios, features, seeds;

  CLI::App* fit = app.add_subcommand("fit", "Run one fit + ML-KNN evaluation cell");
  add_common_options(fit, cfg, lambdas, thetas, mus, ratios, features, seeds);

  CLI::App* sweep = app.add_subcommand("sweep", "Grid sweep over parameters, ratios and seeds");
  add_common_options(sweep, cfg, lambdas, thetas, mus, ratios, features, seeds);

  CLI::App* ablation = app.add_subcommand("ablation", "Compare all solver variants");
  add_common_options(ablation, cfg, lambdas, thetas, mus, ratios, features, seeds);

  SynthConfig synth_cfg;
  CLI::App* synth = app.add_subcommand("synth", "Generate a planted-structure dataset");
  synth->add_option("--d", synth_cfg.d, "feature count");
  synth->add_option("--informative", synth_cfg.informative, "informative feature count");
  synth->add_option("--n", synth_cfg.n, "instance count");
  synth->add_option("--c", synth_cfg.c, "label count");
  synth->add_option("--noise", synth_cfg.noise, "logit noise level");
  synth->add_option("--positive-rate", synth_cfg.positive_rate, "positive label rate");
  synth->add_option("--seed", synth_cfg.seed, "random seed");
  synth->add_option("--format", synth_cfg.format, "output format");
  synth->add_option("--out", synth_cfg.out_dir, "output directory");

  std::string report_path;
  CLI::App* validate = app.add_subcommand("validate", "Check a saved run against the invariants");
  validate->add_option("--report", report_path, "path to report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    finalize_lists(cfg, lambdas, thetas, mus, ratios, features, seeds);
    if (fit->parsed()) return accessmfs::cli::cmd_fit(cfg);
    if (sweep->parsed()) return accessmfs::cli::cmd_sweep(cfg);
    if (ablation->parsed()) return accessmfs::cli::cmd_ablation(cfg);
    if (synth->parsed()) return accessmfs::cli::cmd_synth(synth_cfg);
    if (validate->parsed()) return accessmfs::cli::cmd_validate(report_path);
  } catch (const accessmfs::ConfigError& e) {
    return error_json("config", e, 2);
  } catch (const accessmfs::ParseError& e) {
    return error_json("parse", e, 1);
  } catch (const accessmfs::NumericalError& e) {
    return error_json("numerical", e, 1);
  } catch (const std::exception& e) {
    return error_json("internal", e, 1);
  }
  return 2;
}
