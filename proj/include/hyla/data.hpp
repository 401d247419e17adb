#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hyla/sparse.hpp"

namespace hyla::data {

enum class Task { kTransductive, kInductive };

std::string to_string(Task t);
Task parse_task(const std::string& s);

struct Splits {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
  friend bool operator==(const Splits&, const Splits&) = default;
};

/// A node-classification dataset. `edges` keeps the undirected pairs in file
/// order (used for saving); `graph` is their symmetrized binary adjacency.
struct Dataset {
  std::string name;
  std::size_t num_nodes = 0;
  std::size_t num_classes = 0;
  Task task = Task::kTransductive;
  std::vector<sparse::Edge> edges;
  std::optional<sparse::CsrMatrix> graph;
  std::optional<sparse::CsrMatrix> features;  // num_nodes × num_features
  std::vector<std::int64_t> labels;           // −1 = unlabeled
  Splits splits;

  std::size_t num_features() const { return features ? features->cols() : 0; }

  // Disjoint splits, labeled split members, label range, graph/feature shapes.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Reads meta.json, edges.tsv, labels.tsv, train/val/test.txt and the optional
/// features.tsv. edges.tsv may be omitted for inductive datasets. Throws
/// IngestError ("file:line: ...") on malformed input and ValidationError on
/// inconsistent splits/labels.
Dataset load_dataset(const std::filesystem::path& dir);

// Writes the same layout; load_dataset(dir) reproduces `ds`.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);

struct SynthTreeParams {
  std::size_t depth = 7;
  std::size_t branching = 2;
  double infect_prob = 0.8;
  std::size_t feature_dim = 16;
  std::uint64_t seed = 0;
};

/// Complete `branching`-ary tree with nodes numbered breadth-first (children
/// of i are i·b+1 … i·b+b). The root is infected; each child of an infected
/// node is infected with probability infect_prob (one draw per child, in node
/// order). Label 1 = infected. Every feature column holds the label plus
/// N(0, 1) noise. Splits are a seeded 30/10/60 % permutation.
Dataset generate_synthetic_tree(const SynthTreeParams& p);

// Seeded Fisher-Yates split of [0, n) into fractions (train, val, rest).
Splits random_split(std::size_t n, double train_frac, double val_frac, std::uint64_t seed);

/// Token → column map plus the inverse document frequencies of the corpus it
/// was built from, so test documents reuse the training idf.
struct TfidfVocabulary {
  std::map<std::string, std::size_t> index;
  std::vector<double> idf;
};

struct TfidfResult {
  sparse::CsrMatrix matrix;
  TfidfVocabulary vocab;
  std::size_t empty_rows = 0;
};

/// Rows are tf(d, w) · ln(N / df(w)), L2-normalized. When `vocab` is given,
/// its columns and idf are reused and unknown tokens ignored; otherwise the
/// vocabulary is built from `docs` (columns in first-occurrence order).
/// Documents with no weighted token become zero rows and are counted in
/// `empty_rows` with a warning on stderr.
TfidfResult tfidf_features(const std::vector<std::vector<std::string>>& docs,
                           const std::optional<TfidfVocabulary>& vocab = std::nullopt);

/// Training-phase view of an inductive dataset: the graph keeps only edges
/// whose endpoints are both training nodes.
Dataset inductive_subgraph(const Dataset& ds);

}  // namespace hyla::data
