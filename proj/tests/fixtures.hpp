#pragma once

#include <filesystem>
#include <string>

#include "hyla/data.hpp"
#include "hyla/random.hpp"

namespace fixture {

// Small random graph dataset: ring plus random chords, sparse non-negative
// features, random labels and a 50/25/25 split.
inline hyla::data::Dataset random_dataset(std::size_t n, std::size_t classes,
                                          std::size_t n_features, std::uint64_t seed,
                                          hyla::data::Task task = hyla::data::Task::kTransductive) {
  using namespace hyla;
  RandomStream rng(seed);
  data::Dataset ds;
  ds.name = "random";
  ds.num_nodes = n;
  ds.num_classes = classes;
  ds.task = task;
  for (std::size_t i = 0; i < n; ++i) ds.edges.emplace_back(i, (i + 1) % n);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const auto u = rng.below(n);
    const auto v = rng.below(n);
    if (u != v) ds.edges.emplace_back(u, v);
  }
  ds.graph = sparse::csr_from_edges(n, ds.edges, true);
  std::vector<sparse::Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back({i, rng.below(n_features), 1.0});
    t.push_back({i, rng.below(n_features), rng.uniform(0.1, 1.0)});
  }
  if (n_features > 0) ds.features = sparse::CsrMatrix::from_triplets(n, n_features, t);
  ds.labels.resize(n);
  for (auto& y : ds.labels) y = static_cast<std::int64_t>(rng.below(classes));
  ds.splits = data::random_split(n, 0.5, 0.25, seed + 1);
  ds.validate();
  return ds;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("hyla_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixture
