#include "accessmfs/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <tuple>

namespace accessmfs {

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t line, const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& field, const std::string& path, std::size_t line) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    parse_fail(path, line, "cannot parse number '" + field + "'");
  return value;
}

long parse_integer(const std::string& field, const std::string& path, std::size_t line) {
  long value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    parse_fail(path, line, "cannot parse integer '" + field + "'");
  return value;
}

// Splits one CSV record, handling RFC-4180 quoting. Records never span lines
// in the files we write (no embedded newlines in numeric data).
std::vector<std::string> split_csv_line(const std::string& line, const std::string& path,
                                        std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted) parse_fail(path, line_no, "unterminated quote");
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += "\"\"";
    else out.push_back(ch);
  }
  out += "\"";
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

Dataset load_dense_csv(const std::string& path) {
  std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw ParseError(path + ": empty file");

  std::vector<std::string> header = split_csv_line(lines[0], path, 1);
  Index first_label = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const bool is_label = header[j].rfind("label_", 0) == 0;
    if (is_label && first_label < 0) first_label = static_cast<Index>(j);
    if (!is_label && first_label >= 0)
      parse_fail(path, 1, "feature column '" + header[j] + "' appears after the first label column");
  }
  if (first_label < 0) parse_fail(path, 1, "no column named label_* in the header");
  if (first_label == 0) parse_fail(path, 1, "no feature columns before the labels");
  const Index d = first_label;
  const Index c = static_cast<Index>(header.size()) - d;
  const Index n = static_cast<Index>(lines.size()) - 1;
  if (n < 1) throw ParseError(path + ": no data rows");

  Matrix features(d, n);
  Matrix labels(n, c);
  for (Index i = 0; i < n; ++i) {
    const std::size_t line_no = static_cast<std::size_t>(i) + 2;
    std::vector<std::string> fields = split_csv_line(lines[static_cast<std::size_t>(i) + 1], path,
                                                     line_no);
    if (static_cast<Index>(fields.size()) != d + c)
      parse_fail(path, line_no, "expected " + std::to_string(d + c) + " fields, got " +
                                    std::to_string(fields.size()));
    for (Index j = 0; j < d; ++j)
      features(j, i) = parse_number(fields[static_cast<std::size_t>(j)], path, line_no);
    for (Index j = 0; j < c; ++j) {
      const double y = parse_number(fields[static_cast<std::size_t>(d + j)], path, line_no);
      if (y != 0.0 && y != 1.0)
        parse_fail(path, line_no, "label value " + fields[static_cast<std::size_t>(d + j)] +
                                      " is not 0 or 1");
      labels(i, j) = y;
    }
  }
  return Dataset::make_labeled(std::move(features), std::move(labels));
}

Dataset load_sparse(const std::string& path) {
  std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw ParseError(path + ": empty file");

  std::istringstream head(lines[0]);
  long n = 0, d = 0, c = 0;
  if (!(head >> n >> d >> c) || n < 1 || d < 1 || c < 1)
    parse_fail(path, 1, "header must be '<instances> <features> <labels>'");
  if (static_cast<long>(lines.size()) - 1 < n)
    throw ParseError(path + ": header declares " + std::to_string(n) + " instances but only " +
                     std::to_string(lines.size() - 1) + " data lines follow");

  Matrix features = Matrix::Zero(d, n);
  Matrix labels = Matrix::Zero(n, c);
  for (long i = 0; i < n; ++i) {
    const std::size_t line_no = static_cast<std::size_t>(i) + 2;
    const std::string& line = lines[static_cast<std::size_t>(i) + 1];
    const std::size_t sep = line.find(' ');
    const std::string label_part = sep == std::string::npos ? line : line.substr(0, sep);

    if (!label_part.empty()) {
      std::size_t pos = 0;
      while (pos <= label_part.size()) {
        std::size_t comma = label_part.find(',', pos);
        if (comma == std::string::npos) comma = label_part.size();
        const std::string tok = label_part.substr(pos, comma - pos);
        if (tok.empty()) parse_fail(path, line_no, "empty label index");
        const long idx = parse_integer(tok, path, line_no);
        if (idx < 0 || idx >= c)
          parse_fail(path, line_no, "label index " + tok + " outside [0, " + std::to_string(c - 1) +
                                        "]");
        labels(i, idx) = 1.0;
        pos = comma + 1;
        if (comma == label_part.size()) break;
      }
    }

    std::size_t pos = sep == std::string::npos ? line.size() : sep + 1;
    while (pos < line.size()) {
      std::size_t next = line.find(' ', pos);
      if (next == std::string::npos) next = line.size();
      const std::string tok = line.substr(pos, next - pos);
      if (!tok.empty()) {
        const std::size_t colon = tok.find(':');
        if (colon == std::string::npos)
          parse_fail(path, line_no, "feature entry '" + tok + "' is not index:value");
        const long idx = parse_integer(tok.substr(0, colon), path, line_no);
        if (idx < 0 || idx >= d)
          parse_fail(path, line_no, "feature index " + std::to_string(idx) + " outside [0, " +
                                        std::to_string(d - 1) + "]");
        features(idx, i) = parse_number(tok.substr(colon + 1), path, line_no);
      }
      pos = next + 1;
    }
  }
  return Dataset::make_labeled(std::move(features), std::move(labels));
}

}  // namespace

DatasetFormat format_from_string(const std::string& name) {
  if (name == "dense_csv" || name == "csv") return DatasetFormat::dense_csv;
  if (name == "sparse_multilabel" || name == "sparse") return DatasetFormat::sparse_multilabel;
  throw ConfigError("unknown dataset format '" + name + "'");
}

std::string to_string(DatasetFormat fmt) {
  return fmt == DatasetFormat::dense_csv ? "dense_csv" : "sparse_multilabel";
}

Dataset load_dataset(const std::string& path, DatasetFormat format) {
  return format == DatasetFormat::dense_csv ? load_dense_csv(path) : load_sparse(path);
}

void write_dataset(const Dataset& data, const std::string& path, DatasetFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  const Index d = data.num_features();
  const Index n = data.num_instances();
  const Index c = data.num_labels();

  if (format == DatasetFormat::dense_csv) {
    for (Index j = 0; j < d; ++j) out << "f" << j << ",";
    for (Index j = 0; j < c; ++j) out << "label_" << j << (j + 1 < c ? "," : "");
    out << "\n";
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < d; ++j) out << format_double(data.features()(j, i)) << ",";
      for (Index j = 0; j < c; ++j)
        out << (data.labels()(i, j) == 1.0 ? "1" : "0") << (j + 1 < c ? "," : "");
      out << "\n";
    }
  } else {
    out << n << " " << d << " " << c << "\n";
    for (Index i = 0; i < n; ++i) {
      bool first = true;
      for (Index j = 0; j < c; ++j)
        if (data.labels()(i, j) == 1.0) {
          if (!first) out << ",";
          out << j;
          first = false;
        }
      for (Index j = 0; j < d; ++j)
        if (data.features()(j, i) != 0.0)
          out << " " << j << ":" << format_double(data.features()(j, i));
      out << "\n";
    }
  }
  if (!out) throw ParseError(path + ": write failed");
}

DatasetSummary summarize(const Dataset& data) {
  DatasetSummary s;
  s.instances = data.num_instances();
  s.features = data.num_features();
  s.labels = data.num_labels();
  s.cardinality = data.labels().sum() / static_cast<double>(s.instances);
  s.density = s.cardinality / static_cast<double>(s.labels);
  return s;
}

Dataset standardize_features(const Dataset& data) {
  Matrix x = data.features();
  const double n = static_cast<double>(x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).mean();
    x.row(i).array() -= mean;
    const double sd = std::sqrt(x.row(i).squaredNorm() / n);
    if (sd > 1e-12) x.row(i) /= sd;
  }
  return Dataset::make(std::move(x), data.labels(), data.labeled_mask());
}

Split make_split(const Dataset& data, const SplitSpec& spec) {
  const Index n = data.num_instances();
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw ConfigError("make_split: train fraction must be in (0,1)");
  if (!(spec.labeled_ratio > 0.0 && spec.labeled_ratio <= 1.0))
    throw ConfigError("make_split: labeled ratio must be in (0,1]");

  const Index train_count = static_cast<Index>(std::llround(spec.train_fraction * static_cast<double>(n)));
  const Index labeled_count =
      static_cast<Index>(std::llround(spec.labeled_ratio * static_cast<double>(train_count)));
  if (train_count < 1 || train_count > n - 1)
    throw ConfigError("make_split: split leaves no training or no test instances");
  if (labeled_count < 1) throw ConfigError("make_split: split leaves no labeled instances");

  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(spec.seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  Split split;
  split.train.assign(perm.begin(), perm.begin() + train_count);
  split.test.assign(perm.begin() + train_count, perm.end());
  split.labeled.assign(perm.begin(), perm.begin() + labeled_count);
  split.mask.assign(static_cast<std::size_t>(n), false);
  for (Index i : split.labeled) split.mask[static_cast<std::size_t>(i)] = true;
  for (Index i = 0; i < n; ++i)
    if (!split.mask[static_cast<std::size_t>(i)]) split.unlabeled.push_back(i);
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.labeled.begin(), split.labeled.end());
  return split;
}

std::string split_hash(const Split& split) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffull;
      h *= 1099511628211ull;
    }
  };
  for (Index i : split.labeled) mix(static_cast<std::uint64_t>(i));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw NumericalError("format_double failed");
  return std::string(buf, ptr);
}

namespace {

nlohmann::json cell_to_json(const CellRecord& cell) {
  nlohmann::json j{
      {"dataset", cell.dataset},
      {"variant", cell.variant},
      {"lambda", cell.lambda},
      {"theta", cell.theta},
      {"mu", cell.mu},
      {"labeled_ratio", cell.labeled_ratio},
      {"n_features", cell.n_features},
      {"seed", cell.seed},
      {"ap", cell.ap},
      {"maf", cell.maf},
      {"rl", cell.rl},
      {"oe", cell.oe},
      {"iterations", cell.iterations},
      {"runtime_ms", cell.runtime_ms},
      {"aggregate", cell.is_aggregate},
  };
  if (!cell.is_aggregate) {
    j["converged"] = cell.converged;
    j["initial_objective"] = cell.initial_objective;
    j["objective_trace"] = cell.objective_trace;
    j["constraint_residuals"] = cell.constraint_residuals;
    j["s_row_sums"] = cell.s_row_sums;
    j["p_row_sums"] = cell.p_row_sums;
    j["s_max_nnz"] = cell.s_max_nnz;
    j["p_max_nnz"] = cell.p_max_nnz;
    j["s_min_entry"] = cell.s_min_entry;
    j["p_min_entry"] = cell.p_min_entry;
    j["s_diag_absmax"] = cell.s_diag_absmax;
    j["p_diag_absmax"] = cell.p_diag_absmax;
    j["s_updates"] = cell.s_updates;
    j["p_updates"] = cell.p_updates;
    j["split_hash"] = cell.split_hash;
    j["skipped"] = {{"ap", cell.ap_skipped}, {"rl", cell.rl_skipped}, {"oe", cell.oe_skipped}};
  }
  return j;
}

auto cell_key(const CellRecord& c) {
  return std::make_tuple(c.dataset, c.variant, c.lambda, c.theta, c.mu, c.labeled_ratio,
                         c.n_features, c.seed);
}

}  // namespace

void write_report(std::vector<CellRecord> cells, const std::vector<CellFailure>& failures,
                  const nlohmann::json& config, const std::string& csv_path,
                  const std::string& json_path) {
  std::sort(cells.begin(), cells.end(),
            [](const CellRecord& a, const CellRecord& b) { return cell_key(a) < cell_key(b); });

  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw ParseError(csv_path + ": cannot open for writing");
  csv << "dataset,variant,lambda,theta,mu,labeled_ratio,n_features,seed,AP,MaF,RL,OE,iterations,"
         "runtime_ms\n";
  for (const CellRecord& c : cells) {
    csv << csv_escape(c.dataset) << "," << csv_escape(c.variant) << "," << format_double(c.lambda)
        << "," << format_double(c.theta) << "," << format_double(c.mu) << ","
        << format_double(c.labeled_ratio) << "," << c.n_features << "," << c.seed << ","
        << format_double(c.ap) << "," << format_double(c.maf) << "," << format_double(c.rl) << ","
        << format_double(c.oe) << "," << c.iterations << "," << format_double(c.runtime_ms)
        << "\n";
  }
  if (!csv) throw ParseError(csv_path + ": write failed");
  csv.close();

  nlohmann::json side;
  side["schema"] = 1;
  side["config"] = config;
  side["cells"] = nlohmann::json::array();
  for (const CellRecord& c : cells) side["cells"].push_back(cell_to_json(c));
  side["failures"] = nlohmann::json::array();
  for (const CellFailure& f : failures)
    side["failures"].push_back({{"dataset", f.dataset},
                                {"variant", f.variant},
                                {"lambda", f.lambda},
                                {"theta", f.theta},
                                {"mu", f.mu},
                                {"labeled_ratio", f.labeled_ratio},
                                {"n_features", f.n_features},
                                {"seed", f.seed},
                                {"error", f.error}});
  std::ofstream js(json_path, std::ios::binary);
  if (!js) throw ParseError(json_path + ": cannot open for writing");
  js << side.dump(2) << "\n";
  if (!js) throw ParseError(json_path + ": write failed");
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::vector<std::string> lines = read_lines(path);
  std::vector<std::vector<std::string>> rows;
  rows.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i)
    rows.push_back(split_csv_line(lines[i], path, i + 1));
  return rows;
}

}  // namespace accessmfs
