#pragma once

#include "accessmfs/data_io.hpp"
#include "accessmfs/solver.hpp"

#include <string>
#include <vector>

namespace accessmfs::cli {

struct CliConfig {
  std::string dataset_path;
  std::string format = "dense_csv";
  std::vector<double> lambdas{0.1};
  std::vector<double> thetas{1.0};
  std::vector<double> mus{1.0};
  int k_s = 5;
  int k_p = 3;
  std::vector<double> ratios{0.3};
  std::vector<int> feature_counts;  // empty: pick min(15, d)
  std::vector<long long> seeds{1, 2, 3, 4, 5};
  std::string variant = "full";
  int mlknn_k = 10;
  double mlknn_smoothing = 1.0;
  bool standardize = true;
  std::string out_dir = ".";
  int max_iters = 50;
  int max_w_iters = 20;
  double tol = 1e-5;
  double epsilon = 1e-8;
  int verbosity = 0;
};

struct SynthConfig {
  long long d = 50;
  long long informative = 10;
  long long n = 300;
  long long c = 5;
  double noise = 0.05;
  double positive_rate = 0.3;
  long long seed = 1;
  std::string format = "dense_csv";
  std::string out_dir = ".";
};

// "0.5", "0.1,1,10"
std::vector<double> parse_double_list(const std::string& text);
// "100,110" or "100:200:10" (inclusive stop)
std::vector<int> parse_int_list(const std::string& text);
std::vector<long long> parse_seed_list(const std::string& text);

int cmd_fit(const CliConfig& cfg);
int cmd_sweep(const CliConfig& cfg);
int cmd_ablation(const CliConfig& cfg);
int cmd_synth(const SynthConfig& cfg);
int cmd_validate(const std::string& report_json_path);

/// One end-to-end evaluation cell: split, fit, select, ML-KNN, metrics.
/// When select_all is true the feature-selection step is bypassed (the
/// all-features baseline).
CellRecord run_cell(const Dataset& full, const std::string& dataset_name, SolverVariant variant,
                    Hyperparameters hp, double labeled_ratio, int n_features, long long seed,
                    int mlknn_k, double mlknn_smoothing, bool select_all = false);

}  // namespace accessmfs::cli
