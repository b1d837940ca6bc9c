#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aksvd/matrix.hpp"

namespace aksvd {

struct GraphDataset {
  DenseMatrix adjacency;    ///< N × N, 0/1, A[i, j] = 1 for edge i → j
  std::vector<int> labels;  ///< empty, or one class id per node (-1 when unknown)
  std::vector<std::string> class_names;
  std::vector<std::string> node_ids;  ///< original id per dense index
  std::string name;
};

struct EdgeListOptions {
  std::optional<std::size_t> node_count;  ///< pad with isolated nodes up to this size
  bool directed = true;
  bool allow_self_loops = false;  ///< self-loops are dropped otherwise
  std::optional<std::filesystem::path> labels_path;  ///< "id<TAB>label" lines
};

/// Whitespace-separated "src dst" lines, '#' comments. Ids map to dense
/// indices in order of first appearance; label-file ids not seen in the edge
/// list become isolated nodes. Class ids follow the sorted label names.
GraphDataset load_edge_list(const std::filesystem::path& path, const EdgeListOptions& opts = {});

enum class Task { Classification, Regression };

struct TabularDataset {
  DenseMatrix features;
  std::vector<double> targets;  ///< regression targets, or class ids as reals
  std::vector<int> labels;      ///< classification only
  std::vector<std::string> class_names;
  std::vector<std::string> feature_names;
  Task task = Task::Classification;
};

struct CsvOptions {
  std::string target_column;  ///< header name; empty means the last column
  Task task = Task::Classification;
  bool zscore = false;
  char delimiter = ',';
};

/// RFC-4180 records: quoted fields may contain delimiters, newlines and "" escapes.
std::vector<std::vector<std::string>> parse_csv_records(std::string_view text, char delimiter = ',');

TabularDataset load_csv(const std::filesystem::path& path, const CsvOptions& opts);

/// Column-wise (x − mean)/σ with population σ; constant columns only lose their mean.
void zscore_columns(DenseMatrix& a);

enum class SynthKind { Cycle, TwoBlock, RandomDag };
SynthKind parse_synth_kind(const std::string& name);

struct SynthOptions {
  double p_in = 0.5;    ///< two_block: edge probability inside a block
  double p_ab = 0.3;    ///< two_block: first block → second block
  double p_ba = 0.05;   ///< two_block: second block → first block
  double p_dag = 0.1;   ///< random_dag: probability of each i → j with i < j
};

/// cycle: i → i+1 mod N. two_block: nodes [0, N/2) form block 0, the rest
/// block 1, and labels hold the block ids. random_dag: strictly upper triangular.
GraphDataset synth_directed_graph(SynthKind kind, std::size_t n, std::uint64_t seed,
                                  const SynthOptions& opts = {});

std::vector<std::size_t> out_degrees(const DenseMatrix& adjacency);

}  // namespace aksvd
