#include "commands.hpp"

#include "accessmfs/evaluation.hpp"
#include "accessmfs/synth.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <thread>
#include <tuple>

namespace accessmfs::cli {

namespace {

namespace fs = std::filesystem;

double parse_one_double(const std::string& tok) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ConfigError("cannot parse number '" + tok + "'");
  return v;
}

long long parse_one_int(const std::string& tok) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ConfigError("cannot parse integer '" + tok + "'");
  return v;
}

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = text.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(text.substr(pos));
      return out;
    }
    out.push_back(text.substr(pos, next - pos));
    pos = next + 1;
  }
}

int thread_budget(std::size_t cells) {
  unsigned hw = std::thread::hardware_concurrency();
  int budget = hw == 0 ? 1 : static_cast<int>(hw);
  if (const char* env = std::getenv("ACCESSMFS_THREADS")) {
    const int cap = static_cast<int>(parse_one_int(env));
    if (cap >= 1) budget = std::min(budget, cap);
  }
  return std::max(1, std::min<int>(budget, static_cast<int>(cells)));
}

Hyperparameters make_hp(const CliConfig& cfg, double lambda, double theta, double mu) {
  Hyperparameters hp;
  hp.lambda = lambda;
  hp.theta = theta;
  hp.mu = mu;
  hp.k_s = cfg.k_s;
  hp.k_p = cfg.k_p;
  hp.epsilon = cfg.epsilon;
  hp.max_outer_iters = cfg.max_iters;
  hp.max_w_iters = cfg.max_w_iters;
  hp.tol_rel_obj = cfg.tol;
  return hp;
}

nlohmann::json config_json(const CliConfig& cfg, const std::string& command) {
  return nlohmann::json{{"command", command},
                        {"dataset", cfg.dataset_path},
                        {"format", cfg.format},
                        {"lambda", cfg.lambdas},
                        {"theta", cfg.thetas},
                        {"mu", cfg.mus},
                        {"k_s", cfg.k_s},
                        {"k_p", cfg.k_p},
                        {"labeled_ratios", cfg.ratios},
                        {"feature_counts", cfg.feature_counts},
                        {"seeds", cfg.seeds},
                        {"variant", cfg.variant},
                        {"mlknn_k", cfg.mlknn_k},
                        {"mlknn_smoothing", cfg.mlknn_smoothing},
                        {"standardize", cfg.standardize},
                        {"max_iters", cfg.max_iters},
                        {"max_w_iters", cfg.max_w_iters},
                        {"tol", cfg.tol},
                        {"epsilon", cfg.epsilon}};
}

std::string dataset_name(const std::string& path) {
  return fs::path(path).stem().string();
}

Dataset load_for_run(const CliConfig& cfg) {
  Dataset data = load_dataset(cfg.dataset_path, format_from_string(cfg.format));
  return cfg.standardize ? standardize_features(data) : std::move(data);
}

struct CellSpec {
  SolverVariant variant;
  double lambda, theta, mu, ratio;
  int n_features;
  long long seed;
};

// Runs every cell (possibly in parallel), collecting records and failures in
// canonical positions so the outcome does not depend on scheduling.
void run_cells(const Dataset& data, const std::string& name, const CliConfig& cfg,
               const std::vector<CellSpec>& specs, std::vector<CellRecord>& cells,
               std::vector<CellFailure>& failures) {
  std::vector<std::optional<CellRecord>> results(specs.size());
  std::vector<std::optional<CellFailure>> errors(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= specs.size()) return;
      const CellSpec& s = specs[i];
      try {
        results[i] = run_cell(data, name, s.variant, make_hp(cfg, s.lambda, s.theta, s.mu),
                              s.ratio, s.n_features, s.seed, cfg.mlknn_k, cfg.mlknn_smoothing);
      } catch (const std::exception& e) {
        errors[i] = CellFailure{name,    to_string(s.variant), s.lambda, s.theta, s.mu,
                                s.ratio, s.n_features,         s.seed,   e.what()};
      }
    }
  };
  const int threads = thread_budget(specs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (results[i]) cells.push_back(std::move(*results[i]));
    if (errors[i]) failures.push_back(std::move(*errors[i]));
  }
}

// Mean-over-seeds rows, keyed by everything except the seed. Aggregates use
// seed = -1 and carry no diagnostics.
void append_seed_means(std::vector<CellRecord>& cells) {
  using Key = std::tuple<std::string, std::string, double, double, double, double, int>;
  std::map<Key, std::vector<const CellRecord*>> groups;
  for (const CellRecord& c : cells) {
    if (c.is_aggregate) continue;
    groups[{c.dataset, c.variant, c.lambda, c.theta, c.mu, c.labeled_ratio, c.n_features}]
        .push_back(&c);
  }
  std::vector<CellRecord> means;
  for (const auto& [key, members] : groups) {
    CellRecord m;
    std::tie(m.dataset, m.variant, m.lambda, m.theta, m.mu, m.labeled_ratio, m.n_features) = key;
    m.seed = -1;
    m.is_aggregate = true;
    const double k = static_cast<double>(members.size());
    double iters = 0.0;
    for (const CellRecord* c : members) {
      m.ap += c->ap / k;
      m.maf += c->maf / k;
      m.rl += c->rl / k;
      m.oe += c->oe / k;
      m.runtime_ms += c->runtime_ms / k;
      iters += static_cast<double>(c->iterations) / k;
    }
    m.iterations = static_cast<int>(iters + 0.5);
    means.push_back(std::move(m));
  }
  for (CellRecord& m : means) cells.push_back(std::move(m));
}

void write_outputs(const CliConfig& cfg, const std::string& command,
                   std::vector<CellRecord> cells, const std::vector<CellFailure>& failures) {
  fs::create_directories(cfg.out_dir);
  const std::string csv = (fs::path(cfg.out_dir) / "report.csv").string();
  const std::string json = (fs::path(cfg.out_dir) / "report.json").string();
  write_report(std::move(cells), failures, config_json(cfg, command), csv, json);
  std::cout << "wrote " << csv << " and " << json << "\n";
}

int default_feature_count(const Dataset& data) {
  return static_cast<int>(std::min<Index>(15, data.num_features()));
}

}  // namespace

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const std::string& tok : split_on(text, ',')) out.push_back(parse_one_double(tok));
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts = split_on(text, ':');
    if (parts.size() != 3) throw ConfigError("range must be start:stop:step");
    const long long start = parse_one_int(parts[0]);
    const long long stop = parse_one_int(parts[1]);
    const long long step = parse_one_int(parts[2]);
    if (step <= 0 || stop < start) throw ConfigError("range must satisfy start <= stop, step > 0");
    for (long long v = start; v <= stop; v += step) out.push_back(static_cast<int>(v));
    return out;
  }
  for (const std::string& tok : split_on(text, ','))
    out.push_back(static_cast<int>(parse_one_int(tok)));
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::vector<long long> parse_seed_list(const std::string& text) {
  std::vector<long long> out;
  for (const std::string& tok : split_on(text, ',')) out.push_back(parse_one_int(tok));
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

CellRecord run_cell(const Dataset& full, const std::string& name, SolverVariant variant,
                    Hyperparameters hp, double labeled_ratio, int n_features, long long seed,
                    int mlknn_k, double mlknn_smoothing, bool select_all) {
  const auto start = std::chrono::steady_clock::now();

  Split split = make_split(full, SplitSpec{labeled_ratio, 1.0, static_cast<std::uint64_t>(seed)});
  Dataset working = full.with_mask(full.labels(), split.mask);
  hp.seed = static_cast<std::uint64_t>(seed);
  FitResult res = fit(working, hp, variant);

  std::vector<Index> selected;
  if (select_all) {
    for (Index i = 0; i < full.num_features(); ++i) selected.push_back(i);
  } else {
    selected = select_features(res.ranking, n_features);
  }

  auto gather = [&](const std::vector<Index>& instances) {
    Matrix feats(static_cast<Index>(selected.size()), static_cast<Index>(instances.size()));
    Matrix labels(static_cast<Index>(instances.size()), full.num_labels());
    for (std::size_t col = 0; col < instances.size(); ++col) {
      for (std::size_t row = 0; row < selected.size(); ++row)
        feats(static_cast<Index>(row), static_cast<Index>(col)) =
            full.features()(selected[row], instances[col]);
      labels.row(static_cast<Index>(col)) = full.labels().row(instances[col]);
    }
    return std::make_pair(std::move(feats), std::move(labels));
  };
  auto [train_x, train_y] = gather(split.labeled);
  auto [test_x, test_y] = gather(split.test);

  MlknnModel model = mlknn_train(train_x, train_y, mlknn_k, mlknn_smoothing);
  MlknnPrediction pred = mlknn_predict(model, test_x);
  EvaluationReport metrics = evaluate_all(pred.scores, pred.predictions, test_y);

  const auto end = std::chrono::steady_clock::now();

  CellRecord cell;
  cell.dataset = name;
  cell.variant = to_string(variant);
  cell.lambda = hp.lambda;
  cell.theta = hp.theta;
  cell.mu = hp.mu;
  cell.labeled_ratio = labeled_ratio;
  cell.n_features = select_all ? static_cast<int>(full.num_features()) : n_features;
  cell.seed = seed;
  cell.ap = metrics.ap;
  cell.maf = metrics.maf;
  cell.rl = metrics.rl;
  cell.oe = metrics.oe;
  cell.iterations = res.trace.iterations_run;
  cell.runtime_ms =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(end - start).count();

  cell.converged = res.trace.converged;
  cell.initial_objective = res.trace.initial_objective;
  cell.objective_trace = res.trace.objective_values;
  cell.constraint_residuals = res.trace.constraint_residuals;
  const Matrix& s = res.state.instance_graph;
  const Matrix& p = res.state.label_graph;
  for (Index i = 0; i < s.rows(); ++i) cell.s_row_sums.push_back(s.row(i).sum());
  for (Index i = 0; i < p.rows(); ++i) cell.p_row_sums.push_back(p.row(i).sum());
  auto max_nnz = [](const Matrix& g) {
    int best = 0;
    for (Index i = 0; i < g.rows(); ++i) {
      int nnz = 0;
      for (Index j = 0; j < g.cols(); ++j)
        if (g(i, j) != 0.0) ++nnz;
      best = std::max(best, nnz);
    }
    return best;
  };
  cell.s_max_nnz = max_nnz(s);
  cell.p_max_nnz = max_nnz(p);
  cell.s_min_entry = s.minCoeff();
  cell.p_min_entry = p.minCoeff();
  cell.s_diag_absmax = s.diagonal().cwiseAbs().maxCoeff();
  cell.p_diag_absmax = p.diagonal().cwiseAbs().maxCoeff();
  cell.s_updates = res.trace.s_updates;
  cell.p_updates = res.trace.p_updates;
  cell.split_hash = split_hash(split);
  cell.ap_skipped = metrics.ap_skipped;
  cell.rl_skipped = metrics.rl_skipped;
  cell.oe_skipped = metrics.oe_skipped;
  return cell;
}

int cmd_fit(const CliConfig& cfg) {
  if (cfg.lambdas.size() != 1 || cfg.thetas.size() != 1 || cfg.mus.size() != 1 ||
      cfg.ratios.size() != 1 || cfg.feature_counts.size() > 1)
    throw ConfigError("fit takes scalar values; use sweep for grids");

  Dataset data = load_for_run(cfg);
  DatasetSummary sum = summarize(data);
  std::cout << "dataset " << dataset_name(cfg.dataset_path) << ": " << sum.instances
            << " instances, " << sum.features << " features, " << sum.labels
            << " labels, cardinality " << format_double(sum.cardinality) << ", density "
            << format_double(sum.density) << "\n";

  const int n_features =
      cfg.feature_counts.empty() ? default_feature_count(data) : cfg.feature_counts[0];
  CellRecord cell = run_cell(data, dataset_name(cfg.dataset_path),
                             variant_from_string(cfg.variant),
                             make_hp(cfg, cfg.lambdas[0], cfg.thetas[0], cfg.mus[0]),
                             cfg.ratios[0], n_features, cfg.seeds[0], cfg.mlknn_k,
                             cfg.mlknn_smoothing);
  std::cout << "AP " << format_double(cell.ap) << "  MaF " << format_double(cell.maf) << "  RL "
            << format_double(cell.rl) << "  OE " << format_double(cell.oe) << "  ("
            << cell.iterations << " iterations)\n";
  write_outputs(cfg, "fit", {std::move(cell)}, {});
  return 0;
}

int cmd_sweep(const CliConfig& cfg) {
  Dataset data = load_for_run(cfg);
  const std::string name = dataset_name(cfg.dataset_path);
  std::vector<int> feature_counts =
      cfg.feature_counts.empty() ? std::vector<int>{default_feature_count(data)}
                                 : cfg.feature_counts;
  for (int k : feature_counts)
    if (k < 1 || k > data.num_features())
      throw ConfigError("feature count " + std::to_string(k) + " outside [1, d]");

  std::vector<CellSpec> specs;
  const SolverVariant variant = variant_from_string(cfg.variant);
  for (double lambda : cfg.lambdas)
    for (double theta : cfg.thetas)
      for (double mu : cfg.mus)
        for (double ratio : cfg.ratios)
          for (int k : feature_counts)
            for (long long seed : cfg.seeds)
              specs.push_back(CellSpec{variant, lambda, theta, mu, ratio, k, seed});

  std::vector<CellRecord> cells;
  std::vector<CellFailure> failures;
  run_cells(data, name, cfg, specs, cells, failures);
  append_seed_means(cells);
  write_outputs(cfg, "sweep", std::move(cells), failures);
  std::cout << specs.size() - failures.size() << "/" << specs.size() << " cells succeeded\n";
  for (const CellFailure& f : failures)
    std::cerr << "cell failed (lambda=" << f.lambda << " theta=" << f.theta << " mu=" << f.mu
              << " ratio=" << f.labeled_ratio << " k=" << f.n_features << " seed=" << f.seed
              << "): " << f.error << "\n";
  return failures.empty() ? 0 : 1;
}

int cmd_ablation(const CliConfig& cfg) {
  if (cfg.lambdas.size() != 1 || cfg.thetas.size() != 1 || cfg.mus.size() != 1 ||
      cfg.ratios.size() != 1 || cfg.feature_counts.size() > 1)
    throw ConfigError("ablation takes scalar hyperparameters; only seeds vary");

  Dataset data = load_for_run(cfg);
  const std::string name = dataset_name(cfg.dataset_path);
  const int n_features =
      cfg.feature_counts.empty() ? default_feature_count(data) : cfg.feature_counts[0];

  std::vector<CellSpec> specs;
  for (SolverVariant v : {SolverVariant::full, SolverVariant::instance_graph_only,
                          SolverVariant::label_graph_only, SolverVariant::no_graphs})
    for (long long seed : cfg.seeds)
      specs.push_back(CellSpec{v, cfg.lambdas[0], cfg.thetas[0], cfg.mus[0], cfg.ratios[0],
                               n_features, seed});

  std::vector<CellRecord> cells;
  std::vector<CellFailure> failures;
  run_cells(data, name, cfg, specs, cells, failures);
  append_seed_means(cells);

  for (const CellRecord& c : cells)
    if (c.is_aggregate)
      std::cout << c.variant << ": mean AP " << format_double(c.ap) << "  MaF "
                << format_double(c.maf) << "  RL " << format_double(c.rl) << "  OE "
                << format_double(c.oe) << "\n";
  write_outputs(cfg, "ablation", std::move(cells), failures);
  return failures.empty() ? 0 : 1;
}

int cmd_synth(const SynthConfig& cfg) {
  PlantedConfig pc;
  pc.num_features = cfg.d;
  pc.num_informative = cfg.informative;
  pc.num_instances = cfg.n;
  pc.num_labels = cfg.c;
  pc.noise = cfg.noise;
  pc.positive_rate = cfg.positive_rate;
  pc.seed = static_cast<std::uint64_t>(cfg.seed);
  PlantedDataset planted = generate_planted(pc);

  fs::create_directories(cfg.out_dir);
  const DatasetFormat fmt = format_from_string(cfg.format);
  const std::string ext = fmt == DatasetFormat::dense_csv ? ".csv" : ".sparse";
  const std::string data_path = (fs::path(cfg.out_dir) / ("planted" + ext)).string();
  write_dataset(planted.data, data_path, fmt);

  nlohmann::json truth;
  truth["schema"] = 1;
  truth["config"] = {{"d", cfg.d},         {"informative", cfg.informative},
                     {"n", cfg.n},         {"c", cfg.c},
                     {"noise", cfg.noise}, {"positive_rate", cfg.positive_rate},
                     {"seed", cfg.seed},   {"format", cfg.format}};
  truth["informative_features"] = planted.informative;
  truth["thresholds"] = std::vector<double>(planted.thresholds.data(),
                                            planted.thresholds.data() + planted.thresholds.size());
  std::vector<std::vector<double>> map_rows;
  for (Index i = 0; i < planted.label_map.rows(); ++i) {
    std::vector<double> row;
    for (Index j = 0; j < planted.label_map.cols(); ++j) row.push_back(planted.label_map(i, j));
    map_rows.push_back(std::move(row));
  }
  truth["label_map"] = map_rows;
  const std::string truth_path = (fs::path(cfg.out_dir) / "planted_truth.json").string();
  std::ofstream out(truth_path, std::ios::binary);
  if (!out) throw ParseError(truth_path + ": cannot open for writing");
  out << truth.dump(2) << "\n";

  std::cout << "wrote " << data_path << " and " << truth_path << "\n";
  return 0;
}

int cmd_validate(const std::string& report_json_path) {
  std::ifstream in(report_json_path, std::ios::binary);
  if (!in) throw ParseError(report_json_path + ": cannot open file");
  nlohmann::json side;
  try {
    in >> side;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(report_json_path + ": " + e.what());
  }
  if (!side.contains("schema") || side["schema"].get<int>() != 1)
    throw ParseError(report_json_path + ": unsupported schema");

  const int k_s = side["config"].value("k_s", 0);
  const int k_p = side["config"].value("k_p", 0);
  int problems = 0;
  auto complain = [&](const nlohmann::json& cell, const std::string& what) {
    std::cerr << "cell (variant=" << cell.value("variant", "?")
              << " seed=" << cell.value("seed", -1) << "): " << what << "\n";
    ++problems;
  };

  for (const auto& cell : side["cells"]) {
    if (cell.value("aggregate", false)) continue;
    const auto trace = cell["objective_trace"].get<std::vector<double>>();
    for (std::size_t t = 1; t < trace.size(); ++t)
      if (trace[t] > trace[t - 1] + 1e-9 * std::max(1.0, std::abs(trace[t - 1]))) {
        complain(cell, "objective increased at iteration " + std::to_string(t + 1));
        break;
      }
    for (double r : cell["constraint_residuals"].get<std::vector<double>>())
      if (!(r <= kConstraintTol)) {
        complain(cell, "constraint residual " + format_double(r) + " above tolerance");
        break;
      }
    const auto s_sums = cell["s_row_sums"].get<std::vector<double>>();
    for (std::size_t i = 0; i < s_sums.size(); ++i)
      if (std::abs(s_sums[i] - 1.0) > kSimplexTol) {
        complain(cell, "instance-graph row " + std::to_string(i) + " sums to " +
                           format_double(s_sums[i]));
        break;
      }
    const auto p_sums = cell["p_row_sums"].get<std::vector<double>>();
    for (std::size_t i = 0; i < p_sums.size(); ++i)
      if (std::abs(p_sums[i] - 1.0) > kSimplexTol) {
        complain(cell,
                 "label-graph row " + std::to_string(i) + " sums to " + format_double(p_sums[i]));
        break;
      }
    if (k_s > 0 && cell.value("s_max_nnz", 0) > k_s) complain(cell, "instance graph too dense");
    if (k_p > 0 && cell.value("p_max_nnz", 0) > k_p) complain(cell, "label graph too dense");
    if (cell.value("s_min_entry", 0.0) < 0.0) complain(cell, "negative instance-graph entry");
    if (cell.value("p_min_entry", 0.0) < 0.0) complain(cell, "negative label-graph entry");
    if (cell.value("s_diag_absmax", 0.0) != 0.0) complain(cell, "nonzero instance-graph diagonal");
    if (cell.value("p_diag_absmax", 0.0) != 0.0) complain(cell, "nonzero label-graph diagonal");
  }
  if (problems == 0) {
    std::cout << "report OK: " << side["cells"].size() << " cells checked\n";
    return 0;
  }
  std::cerr << problems << " problem(s) found\n";
  return 1;
}

}  // namespace accessmfs::cli
