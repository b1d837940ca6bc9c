#include "aksvd/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "aksvd/error.hpp"
#include "aksvd/matrix_io.hpp"

namespace aksvd {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

// Calls fn(line_number, tokens) for each non-comment, non-blank line.
template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::vector<std::string> tok = split_ws(line);
    if (!tok.empty()) fn(line_no, tok);
  }
}

}  // namespace

GraphDataset load_edge_list(const std::filesystem::path& path, const EdgeListOptions& opts) {
  std::unordered_map<std::string, std::size_t> index;
  GraphDataset g;
  g.name = path.stem().string();
  auto id_of = [&](const std::string& id) {
    const auto [it, inserted] = index.try_emplace(id, g.node_ids.size());
    if (inserted) g.node_ids.push_back(id);
    return it->second;
  };

  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for_each_record(path, [&](std::size_t line_no, const std::vector<std::string>& tok) {
    if (tok.size() != 2) {
      fail(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) +
                                      ": expected 'src dst', got " + std::to_string(tok.size()) +
                                      " fields");
    }
    const std::size_t s = id_of(tok[0]);
    const std::size_t d = id_of(tok[1]);
    edges.emplace_back(s, d);
  });

  std::vector<std::pair<std::size_t, std::string>> node_labels;
  if (opts.labels_path) {
    for_each_record(*opts.labels_path, [&](std::size_t line_no, const std::vector<std::string>& tok) {
      if (tok.size() != 2) {
        fail(ErrorCode::ParseError, opts.labels_path->string() + ":" + std::to_string(line_no) +
                                        ": expected 'id label'");
      }
      node_labels.emplace_back(id_of(tok[0]), tok[1]);
    });
  }

  std::size_t n = g.node_ids.size();
  if (opts.node_count) {
    if (*opts.node_count < n) {
      fail(ErrorCode::ParseError, path.string() + ": found " + std::to_string(n) +
                                      " nodes, more than the declared " +
                                      std::to_string(*opts.node_count));
    }
    for (std::size_t k = n; k < *opts.node_count; ++k) g.node_ids.push_back("#pad" + std::to_string(k));
    n = *opts.node_count;
  }
  g.adjacency = DenseMatrix(n, n);
  for (const auto& [s, d] : edges) {
    if (s == d && !opts.allow_self_loops) continue;
    g.adjacency(s, d) = 1.0;
    if (!opts.directed) g.adjacency(d, s) = 1.0;
  }

  if (opts.labels_path) {
    std::set<std::string> names;
    for (const auto& [node, name] : node_labels) names.insert(name);
    g.class_names.assign(names.begin(), names.end());
    g.labels.assign(n, -1);
    for (const auto& [node, name] : node_labels) {
      g.labels[node] = static_cast<int>(
          std::lower_bound(g.class_names.begin(), g.class_names.end(), name) - g.class_names.begin());
    }
  }
  return g;
}

std::vector<std::vector<std::string>> parse_csv_records(std::string_view text, char delimiter) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = record.size() == 1 && record[0].empty();
    if (!blank) records.push_back(std::move(record));
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (ch == delimiter) {
      end_field();
    } else if (ch == '\n') {
      end_record();
    } else if (ch == '\r') {
      // CRLF line ends
    } else {
      field += ch;
      field_started = true;
    }
  }
  if (quoted) fail(ErrorCode::ParseError, "unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

void zscore_columns(DenseMatrix& a) {
  const double n = static_cast<double>(a.rows());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) mean += a(i, j);
    mean /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) var += (a(i, j) - mean) * (a(i, j) - mean);
    double sd = std::sqrt(var / n);
    if (sd == 0.0) sd = 1.0;
    for (std::size_t i = 0; i < a.rows(); ++i) a(i, j) = (a(i, j) - mean) / sd;
  }
}

TabularDataset load_csv(const std::filesystem::path& path, const CsvOptions& opts) {
  const auto records = parse_csv_records(read_file(path), opts.delimiter);
  if (records.size() < 2) fail(ErrorCode::ParseError, path.string() + ": need a header and data rows");
  const std::vector<std::string>& header = records.front();
  const std::size_t width = header.size();
  std::size_t target = width - 1;
  if (!opts.target_column.empty()) {
    const auto it = std::find(header.begin(), header.end(), opts.target_column);
    if (it == header.end()) {
      fail(ErrorCode::ConfigError, path.string() + ": no column named '" + opts.target_column + "'");
    }
    target = static_cast<std::size_t>(it - header.begin());
  }
  if (width < 2) fail(ErrorCode::ParseError, path.string() + ": need at least one feature column");

  TabularDataset ds;
  ds.task = opts.task;
  for (std::size_t j = 0; j < width; ++j) {
    if (j != target) ds.feature_names.push_back(header[j]);
  }
  const std::size_t rows = records.size() - 1;
  std::vector<double> data;
  data.reserve(rows * (width - 1));
  std::vector<std::string> raw_targets;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::string where = path.string() + ": record " + std::to_string(r + 1);
    if (rec.size() != width) {
      fail(ErrorCode::ParseError, where + " has " + std::to_string(rec.size()) + " fields, expected " +
                                      std::to_string(width));
    }
    for (std::size_t j = 0; j < width; ++j) {
      if (j == target) {
        raw_targets.push_back(rec[j]);
        continue;
      }
      try {
        data.push_back(parse_double(rec[j], where));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::NonFinite) throw;
        fail(ErrorCode::NonNumericFeature, where + ", column '" + header[j] + "': '" + rec[j] + "'");
      }
    }
  }
  ds.features = DenseMatrix(rows, width - 1, std::move(data));
  if (opts.task == Task::Classification) {
    std::set<std::string> names(raw_targets.begin(), raw_targets.end());
    ds.class_names.assign(names.begin(), names.end());
    for (const std::string& t : raw_targets) {
      const int id = static_cast<int>(
          std::lower_bound(ds.class_names.begin(), ds.class_names.end(), t) - ds.class_names.begin());
      ds.labels.push_back(id);
      ds.targets.push_back(id);
    }
  } else {
    for (std::size_t r = 0; r < raw_targets.size(); ++r) {
      ds.targets.push_back(parse_double(raw_targets[r], path.string() + ": target of record " +
                                                            std::to_string(r + 2)));
    }
  }
  if (opts.zscore) zscore_columns(ds.features);
  return ds;
}

SynthKind parse_synth_kind(const std::string& name) {
  if (name == "cycle") return SynthKind::Cycle;
  if (name == "two_block") return SynthKind::TwoBlock;
  if (name == "random_dag") return SynthKind::RandomDag;
  fail(ErrorCode::ConfigError, "unknown synthetic graph '" + name + "'");
}

GraphDataset synth_directed_graph(SynthKind kind, std::size_t n, std::uint64_t seed,
                                  const SynthOptions& opts) {
  if (n < 3) fail(ErrorCode::ConfigError, "synthetic graphs need at least 3 nodes");
  GraphDataset g;
  g.adjacency = DenseMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i) g.node_ids.push_back(std::to_string(i));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  switch (kind) {
    case SynthKind::Cycle:
      g.name = "cycle";
      for (std::size_t i = 0; i < n; ++i) g.adjacency(i, (i + 1) % n) = 1.0;
      break;
    case SynthKind::TwoBlock: {
      g.name = "two_block";
      const std::size_t half = n / 2;
      g.class_names = {"0", "1"};
      g.labels.resize(n);
      for (std::size_t i = 0; i < n; ++i) g.labels[i] = i < half ? 0 : 1;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          const bool bi = i < half;
          const bool bj = j < half;
          const double p = bi == bj ? opts.p_in : (bi ? opts.p_ab : opts.p_ba);
          if (unit(rng) < p) g.adjacency(i, j) = 1.0;
        }
      }
      break;
    }
    case SynthKind::RandomDag:
      g.name = "random_dag";
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (unit(rng) < opts.p_dag) g.adjacency(i, j) = 1.0;
        }
      }
      break;
  }
  return g;
}

std::vector<std::size_t> out_degrees(const DenseMatrix& adjacency) {
  std::vector<std::size_t> out(adjacency.rows());
  for (std::size_t i = 0; i < adjacency.rows(); ++i) {
    std::size_t k = 0;
    for (double v : adjacency.row(i)) k += v != 0.0;
    out[i] = k;
  }
  return out;
}

}  // namespace aksvd
