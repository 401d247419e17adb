#include "hyla/data.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "hyla/errors.hpp"
#include "hyla/io_util.hpp"
#include "hyla/random.hpp"

namespace hyla::data {

namespace fs = std::filesystem;
using sparse::CsrMatrix;
using sparse::Edge;
using sparse::Triplet;

std::string to_string(Task t) { return t == Task::kTransductive ? "transductive" : "inductive"; }

Task parse_task(const std::string& s) {
  if (s == "transductive") return Task::kTransductive;
  if (s == "inductive") return Task::kInductive;
  throw ValidationError("unknown task '" + s + "' (expected transductive or inductive)");
}

void Dataset::validate() const {
  if (num_nodes == 0) throw ValidationError(name + ": dataset has no nodes");
  if (num_classes == 0) throw ValidationError(name + ": num_classes must be positive");
  if (labels.size() != num_nodes) throw ValidationError(name + ": label count != num_nodes");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < -1 || labels[i] >= static_cast<std::int64_t>(num_classes)) {
      throw ValidationError(name + ": node " + std::to_string(i) + " has class " +
                            std::to_string(labels[i]) + " outside [0, num_classes)");
    }
  }
  if (graph) {
    if (graph->rows() != num_nodes || graph->cols() != num_nodes) {
      throw ValidationError(name + ": graph shape does not match num_nodes");
    }
  } else if (task == Task::kTransductive) {
    throw ValidationError(name + ": transductive datasets require a graph");
  }
  if (features && features->rows() != num_nodes) {
    throw ValidationError(name + ": feature rows do not match num_nodes");
  }
  std::vector<char> seen(num_nodes, 0);
  const auto check = [&](const std::vector<std::size_t>& split, const char* which) {
    for (auto v : split) {
      if (v >= num_nodes) {
        throw ValidationError(name + ": " + which + " split index " + std::to_string(v) +
                              " out of range");
      }
      if (seen[v]) {
        throw ValidationError(name + ": node " + std::to_string(v) +
                              " appears in more than one split (or twice)");
      }
      seen[v] = 1;
      if (labels[v] < 0) {
        throw ValidationError(name + ": " + which + " node " + std::to_string(v) + " is unlabeled");
      }
    }
  };
  check(splits.train, "train");
  check(splits.val, "val");
  check(splits.test, "test");
}

namespace {

std::vector<std::string_view> lines_of(const std::string& text) {
  std::vector<std::string_view> out;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto pos = rest.find('\n');
    if (pos == std::string_view::npos) {
      out.push_back(rest);
      break;
    }
    out.push_back(rest.substr(0, pos));
    rest.remove_prefix(pos + 1);
  }
  return out;
}

std::size_t parse_node(std::string_view field, std::size_t limit, const std::string& file,
                       std::size_t line) {
  std::int64_t v = 0;
  if (!parse_index(field, v)) {
    throw IngestError(file, line, "expected an integer, got '" + std::string(field) + "'");
  }
  if (v < 0 || static_cast<std::size_t>(v) >= limit) {
    throw IngestError(file, line, "index " + std::to_string(v) + " out of range [0, " +
                                      std::to_string(limit) + ")");
  }
  return static_cast<std::size_t>(v);
}

std::vector<std::size_t> load_split(const fs::path& path, std::size_t n) {
  const auto file = path.filename().string();
  std::vector<std::size_t> out;
  const auto text = read_file(path);
  std::size_t line_no = 0;
  for (auto line : lines_of(text)) {
    ++line_no;
    if (line.empty()) continue;
    out.push_back(parse_node(line, n, file, line_no));
  }
  return out;
}

std::string join_lines(const std::vector<std::size_t>& ids) {
  std::string s;
  for (auto v : ids) {
    s += std::to_string(v);
    s += '\n';
  }
  return s;
}

}  // namespace

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IngestError("dataset directory not found: " + dir.string());
  Dataset ds;
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(dir / "meta.json"));
    ds.name = meta.at("name").get<std::string>();
    ds.num_nodes = meta.at("num_nodes").get<std::size_t>();
    ds.num_classes = meta.at("num_classes").get<std::size_t>();
    ds.task = parse_task(meta.at("task").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw IngestError("meta.json: " + std::string(e.what()));
  }
  const auto num_features = meta.value("num_features", std::size_t{0});
  const std::size_t n = ds.num_nodes;

  if (fs::exists(dir / "edges.tsv")) {
    const auto text = read_file(dir / "edges.tsv");
    std::size_t line_no = 0;
    for (auto line : lines_of(text)) {
      ++line_no;
      if (line.empty()) continue;
      const auto parts = split_tabs(line);
      if (parts.size() != 2) throw IngestError("edges.tsv", line_no, "expected 'u<TAB>v'");
      ds.edges.emplace_back(parse_node(parts[0], n, "edges.tsv", line_no),
                            parse_node(parts[1], n, "edges.tsv", line_no));
    }
    ds.graph = sparse::csr_from_edges(n, ds.edges, /*symmetrize=*/true);
  } else if (ds.task == Task::kTransductive) {
    throw IngestError("edges.tsv: required for transductive datasets");
  }

  if (fs::exists(dir / "features.tsv")) {
    const auto text = read_file(dir / "features.tsv");
    std::vector<Triplet> triplets;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    std::size_t line_no = 0;
    for (auto line : lines_of(text)) {
      ++line_no;
      if (line.empty()) continue;
      const auto parts = split_tabs(line);
      if (parts.size() != 3) {
        throw IngestError("features.tsv", line_no, "expected 'node<TAB>feature<TAB>value'");
      }
      const auto row = parse_node(parts[0], n, "features.tsv", line_no);
      const auto col = parse_node(parts[1], num_features, "features.tsv", line_no);
      double value = 0.0;
      if (!parse_double(parts[2], value) || !std::isfinite(value)) {
        throw IngestError("features.tsv", line_no, "bad value '" + std::string(parts[2]) + "'");
      }
      if (!seen.emplace(row, col).second) {
        throw IngestError("features.tsv", line_no, "duplicate (node, feature) entry");
      }
      if (value != 0.0) triplets.push_back({row, col, value});
    }
    ds.features = CsrMatrix::from_triplets(n, num_features, std::move(triplets));
  }

  ds.labels.assign(n, -1);
  {
    const auto text = read_file(dir / "labels.tsv");
    std::vector<char> labeled(n, 0);
    std::size_t line_no = 0;
    for (auto line : lines_of(text)) {
      ++line_no;
      if (line.empty()) continue;
      const auto parts = split_tabs(line);
      if (parts.size() != 2) throw IngestError("labels.tsv", line_no, "expected 'node<TAB>class'");
      const auto node = parse_node(parts[0], n, "labels.tsv", line_no);
      const auto cls = parse_node(parts[1], ds.num_classes, "labels.tsv", line_no);
      if (labeled[node]) throw IngestError("labels.tsv", line_no, "node labeled twice");
      labeled[node] = 1;
      ds.labels[node] = static_cast<std::int64_t>(cls);
    }
  }

  ds.splits.train = load_split(dir / "train.txt", n);
  ds.splits.val = load_split(dir / "val.txt", n);
  ds.splits.test = load_split(dir / "test.txt", n);
  ds.validate();
  return ds;
}

void save_dataset(const Dataset& ds, const fs::path& dir) {
  ds.validate();
  fs::create_directories(dir);
  nlohmann::ordered_json meta;
  meta["name"] = ds.name;
  meta["num_nodes"] = ds.num_nodes;
  meta["num_features"] = ds.num_features();
  meta["num_classes"] = ds.num_classes;
  meta["task"] = to_string(ds.task);
  write_file(dir / "meta.json", meta.dump(2) + "\n");

  if (ds.graph) {
    std::string s;
    for (const auto& [u, v] : ds.edges) {
      s += std::to_string(u) + '\t' + std::to_string(v) + '\n';
    }
    write_file(dir / "edges.tsv", s);
  } else {
    fs::remove(dir / "edges.tsv");
  }
  if (ds.features) {
    std::string s;
    for (const auto& t : ds.features->triplets()) {
      s += std::to_string(t.row) + '\t' + std::to_string(t.col) + '\t' + format_double(t.value) +
           '\n';
    }
    write_file(dir / "features.tsv", s);
  } else {
    fs::remove(dir / "features.tsv");
  }
  {
    std::string s;
    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
      if (ds.labels[i] >= 0) s += std::to_string(i) + '\t' + std::to_string(ds.labels[i]) + '\n';
    }
    write_file(dir / "labels.tsv", s);
  }
  write_file(dir / "train.txt", join_lines(ds.splits.train));
  write_file(dir / "val.txt", join_lines(ds.splits.val));
  write_file(dir / "test.txt", join_lines(ds.splits.test));
}

Splits random_split(std::size_t n, double train_frac, double val_frac, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  RandomStream rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  const auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::llround(val_frac * static_cast<double>(n)));
  Splits s;
  s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
               perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
  return s;
}

Dataset generate_synthetic_tree(const SynthTreeParams& p) {
  if (p.depth < 2) throw ValidationError("synthetic tree: depth must be at least 2");
  if (p.branching < 2) throw ValidationError("synthetic tree: branching must be at least 2");
  if (!(p.infect_prob >= 0.0 && p.infect_prob <= 1.0)) {
    throw ValidationError("synthetic tree: infect_prob must lie in [0, 1]");
  }
  if (p.feature_dim == 0) throw ValidationError("synthetic tree: feature_dim must be positive");

  std::size_t n = 0;
  std::size_t level = 1;
  for (std::size_t d = 0; d <= p.depth; ++d) {
    n += level;
    level *= p.branching;
  }

  Dataset ds;
  ds.name = "synthetic_tree";
  ds.num_nodes = n;
  ds.num_classes = 2;
  ds.task = Task::kTransductive;

  RandomStream infection(derive_seed(p.seed, 11));
  ds.labels.assign(n, 0);
  ds.labels[0] = 1;
  for (std::size_t child = 1; child < n; ++child) {
    const std::size_t parent = (child - 1) / p.branching;
    const double u = infection.uniform();
    if (ds.labels[parent] == 1 && u < p.infect_prob) ds.labels[child] = 1;
  }
  for (std::size_t child = 1; child < n; ++child) {
    ds.edges.emplace_back((child - 1) / p.branching, child);
  }
  ds.graph = sparse::csr_from_edges(n, ds.edges, /*symmetrize=*/true);

  RandomStream noise(derive_seed(p.seed, 12));
  std::vector<Triplet> triplets;
  triplets.reserve(n * p.feature_dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < p.feature_dim; ++f) {
      const double v = static_cast<double>(ds.labels[i]) + noise.normal();
      if (v != 0.0) triplets.push_back({i, f, v});
    }
  }
  ds.features = CsrMatrix::from_triplets(n, p.feature_dim, std::move(triplets));
  ds.splits = random_split(n, 0.3, 0.1, derive_seed(p.seed, seed_tag::kSplits));
  ds.validate();
  return ds;
}

TfidfResult tfidf_features(const std::vector<std::vector<std::string>>& docs,
                           const std::optional<TfidfVocabulary>& vocab) {
  if (docs.empty()) throw ValidationError("tfidf_features: empty corpus");
  TfidfResult result;
  if (vocab) {
    result.vocab = *vocab;
    if (result.vocab.idf.size() != result.vocab.index.size()) {
      throw ValidationError("tfidf_features: vocabulary idf size mismatch");
    }
  } else {
    std::vector<std::size_t> df;
    for (const auto& doc : docs) {
      std::set<std::size_t> in_doc;
      for (const auto& tok : doc) {
        const auto [it, inserted] = result.vocab.index.emplace(tok, df.size());
        if (inserted) df.push_back(0);
        in_doc.insert(it->second);
      }
      for (auto w : in_doc) ++df[w];
    }
    const auto n_docs = static_cast<double>(docs.size());
    result.vocab.idf.resize(df.size());
    for (std::size_t w = 0; w < df.size(); ++w) {
      result.vocab.idf[w] = std::log(n_docs / static_cast<double>(df[w]));
    }
  }

  const std::size_t n_cols = result.vocab.index.size();
  std::vector<Triplet> triplets;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    std::map<std::size_t, double> counts;
    for (const auto& tok : docs[d]) {
      const auto it = result.vocab.index.find(tok);
      if (it != result.vocab.index.end()) counts[it->second] += 1.0;
    }
    double norm2 = 0.0;
    for (auto& [w, c] : counts) {
      c *= result.vocab.idf[w];
      norm2 += c * c;
    }
    if (norm2 == 0.0) {
      ++result.empty_rows;
      std::cerr << "warning: tfidf document " << d << " has no weighted in-vocabulary token\n";
      continue;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (const auto& [w, c] : counts) {
      if (c != 0.0) triplets.push_back({d, w, c * inv});
    }
  }
  result.matrix = CsrMatrix::from_triplets(docs.size(), n_cols, std::move(triplets));
  return result;
}

Dataset inductive_subgraph(const Dataset& ds) {
  if (ds.task != Task::kInductive) {
    throw ContractError("inductive_subgraph: dataset '" + ds.name + "' is transductive");
  }
  if (!ds.graph) throw ContractError("inductive_subgraph: dataset has no graph");
  if (ds.splits.train.empty()) throw ValidationError("inductive_subgraph: empty training split");
  std::vector<char> in_train(ds.num_nodes, 0);
  for (auto v : ds.splits.train) in_train[v] = 1;
  Dataset sub = ds;
  sub.edges.clear();
  for (const auto& [u, v] : ds.edges) {
    if (in_train[u] && in_train[v]) sub.edges.emplace_back(u, v);
  }
  sub.graph = sparse::csr_from_edges(ds.num_nodes, sub.edges, /*symmetrize=*/true);
  return sub;
}

}  // namespace hyla::data
