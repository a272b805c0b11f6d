#pragma once

#include "accessmfs/types.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace accessmfs {

enum class DatasetFormat { dense_csv, sparse_multilabel };

DatasetFormat format_from_string(const std::string& name);
std::string to_string(DatasetFormat fmt);

/// Loads a fully labeled dataset.
///
/// dense_csv: RFC-4180 CSV. The header row names every column; the first
/// column whose name starts with "label_" marks the feature/label boundary
/// and every later column must be a label. Label fields must parse to 0 or 1.
///
/// sparse_multilabel: first line "n d c"; each following line holds a
/// comma-separated list of 0-based label indices (possibly empty), a space,
/// then "index:value" feature pairs. Parse failures report the line number.
Dataset load_dataset(const std::string& path, DatasetFormat format);

void write_dataset(const Dataset& data, const std::string& path, DatasetFormat format);

struct DatasetSummary {
  Index instances = 0;
  Index features = 0;
  Index labels = 0;
  double cardinality = 0.0;  // mean labels per instance
  double density = 0.0;      // cardinality / labels
};

DatasetSummary summarize(const Dataset& data);

/// Per-feature z-scoring over all instances. Constant features are centered
/// and left unscaled. Whether this ran is recorded in every report sidecar.
Dataset standardize_features(const Dataset& data);

/// The evaluation protocol: a seeded train/test split where the training
/// instances are the labeled pool and the test instances double as the
/// unlabeled data. labeled_ratio < 1 additionally hides labels inside the
/// training pool (the default 1.0 keeps the standard protocol).
struct SplitSpec {
  double train_fraction = 0.4;
  double labeled_ratio = 1.0;
  std::uint64_t seed = 1;
};

struct Split {
  std::vector<Index> labeled;    // ascending
  std::vector<Index> unlabeled;  // ascending, complement of labeled
  std::vector<Index> train;      // ascending, sampled training pool
  std::vector<Index> test;       // ascending, complement of train
  std::vector<bool> mask;        // mask[i] == true iff i is labeled
};

Split make_split(const Dataset& data, const SplitSpec& spec);

/// FNV-1a hash of the labeled index list, used to compare splits across runs.
std::string split_hash(const Split& split);

/// One row of the experiment report. The first block feeds the CSV; the rest
/// goes to the JSON sidecar for validation and plotting.
struct CellRecord {
  std::string dataset;
  std::string variant;
  double lambda = 0.0;
  double theta = 0.0;
  double mu = 0.0;
  double labeled_ratio = 0.0;
  int n_features = 0;
  long long seed = 0;
  double ap = 0.0;
  double maf = 0.0;
  double rl = 0.0;
  double oe = 0.0;
  int iterations = 0;
  double runtime_ms = 0.0;

  bool is_aggregate = false;  // mean-over-seeds rows carry no diagnostics
  bool converged = false;
  double initial_objective = 0.0;
  std::vector<double> objective_trace;
  std::vector<double> constraint_residuals;
  std::vector<double> s_row_sums;
  std::vector<double> p_row_sums;
  int s_max_nnz = 0;
  int p_max_nnz = 0;
  double s_min_entry = 0.0;
  double p_min_entry = 0.0;
  double s_diag_absmax = 0.0;
  double p_diag_absmax = 0.0;
  int s_updates = 0;
  int p_updates = 0;
  std::string split_hash;
  int ap_skipped = 0;
  int rl_skipped = 0;
  int oe_skipped = 0;
};

struct CellFailure {
  std::string dataset;
  std::string variant;
  double lambda = 0.0;
  double theta = 0.0;
  double mu = 0.0;
  double labeled_ratio = 0.0;
  int n_features = 0;
  long long seed = 0;
  std::string error;
};

/// Writes the CSV report plus the JSON sidecar ("schema": 1). Rows are sorted
/// by every key column, so the output bytes do not depend on input order.
void write_report(std::vector<CellRecord> cells, const std::vector<CellFailure>& failures,
                  const nlohmann::json& config, const std::string& csv_path,
                  const std::string& json_path);

/// Minimal RFC-4180 reader used by tests and the validate command.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

/// Shortest round-trip decimal form of a double (std::to_chars).
std::string format_double(double value);

}  // namespace accessmfs
