#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "fixtures.hpp"
#include "hyla/data.hpp"
#include "hyla/errors.hpp"
#include "hyla/io_util.hpp"
#include "hyla/models.hpp"

using namespace hyla;
using data::Dataset;
namespace fs = std::filesystem;

namespace {

Dataset tiny(data::Task task = data::Task::kTransductive) {
  Dataset ds;
  ds.name = "tiny";
  ds.num_nodes = 4;
  ds.num_classes = 2;
  ds.task = task;
  ds.edges = {{0, 1}, {1, 2}, {2, 3}};
  ds.graph = sparse::csr_from_edges(4, ds.edges, true);
  ds.features = sparse::CsrMatrix::from_triplets(4, 3, {{0, 0, 1.0}, {1, 2, 0.5}, {3, 1, 2.25}});
  ds.labels = {0, 1, 1, 0};
  ds.splits = {{0, 1}, {2}, {3}};
  return ds;
}

void write_tiny_files(const fs::path& dir) {
  write_file(dir / "meta.json",
                 R"({"name": "t", "num_nodes": 3, "num_features": 2, "num_classes": 2, "task": "transductive"})");
  write_file(dir / "edges.tsv", "0\t1\n1\t2\n");
  write_file(dir / "features.tsv", "0\t0\t1.5\n2\t1\t1\n");
  write_file(dir / "labels.tsv", "0\t0\n1\t1\n2\t1\n");
  write_file(dir / "train.txt", "0\n1\n");
  write_file(dir / "val.txt", "2\n");
  write_file(dir / "test.txt", "");
}

std::string error_of(const fs::path& dir) {
  try {
    data::load_dataset(dir);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("synthetic tree shape and cascade") {
  data::SynthTreeParams p;
  p.depth = 2;
  p.branching = 2;
  const auto ds = data::generate_synthetic_tree(p);
  CHECK(ds.num_nodes == 7);
  CHECK(ds.edges.size() == 6);
  CHECK(ds.graph->nnz() == 12);
  CHECK(ds.num_classes == 2);
  CHECK(ds.features->rows() == 7);
  CHECK(ds.features->cols() == p.feature_dim);

  p.depth = 7;
  p.infect_prob = 1.0;
  const auto all = data::generate_synthetic_tree(p);
  CHECK(all.num_nodes == 255);
  for (auto y : all.labels) CHECK(y == 1);

  p.infect_prob = 0.0;
  const auto none = data::generate_synthetic_tree(p);
  CHECK(none.labels[0] == 1);
  for (std::size_t i = 1; i < none.num_nodes; ++i) CHECK(none.labels[i] == 0);

  p.branching = 3;
  p.depth = 3;
  CHECK(data::generate_synthetic_tree(p).num_nodes == 40);
}

TEST_CASE("synthetic tree: infected children have infected parents") {
  data::SynthTreeParams p;
  p.seed = 5;
  const auto ds = data::generate_synthetic_tree(p);
  for (std::size_t i = 1; i < ds.num_nodes; ++i)
    if (ds.labels[i] == 1) CHECK(ds.labels[(i - 1) / 2] == 1);
}

TEST_CASE("synthetic tree split sizes and determinism") {
  data::SynthTreeParams p;
  p.seed = 3;
  const auto a = data::generate_synthetic_tree(p);
  const auto b = data::generate_synthetic_tree(p);
  CHECK(a == b);
  CHECK(a.splits.train.size() == 77);
  CHECK(a.splits.val.size() == 26);
  CHECK(a.splits.test.size() == 152);
  std::set<std::size_t> all(a.splits.train.begin(), a.splits.train.end());
  all.insert(a.splits.val.begin(), a.splits.val.end());
  all.insert(a.splits.test.begin(), a.splits.test.end());
  CHECK(all.size() == 255);

  p.seed = 4;
  CHECK_FALSE(data::generate_synthetic_tree(p) == a);
}

TEST_CASE("synthetic tree rejects bad parameters") {
  data::SynthTreeParams p;
  p.depth = 1;
  CHECK_THROWS_AS(data::generate_synthetic_tree(p), ValidationError);
  p.depth = 3;
  p.branching = 1;
  CHECK_THROWS_AS(data::generate_synthetic_tree(p), ValidationError);
  p.branching = 2;
  p.infect_prob = 1.5;
  CHECK_THROWS_AS(data::generate_synthetic_tree(p), ValidationError);
}

TEST_CASE("random_split") {
  const auto s = data::random_split(10, 0.3, 0.1, 9);
  CHECK(s.train.size() == 3);
  CHECK(s.val.size() == 1);
  CHECK(s.test.size() == 6);
  CHECK(s == data::random_split(10, 0.3, 0.1, 9));
  CHECK_FALSE(s == data::random_split(10, 0.3, 0.1, 10));
}

TEST_CASE("save then load round-trips") {
  const auto dir = fixture::temp_dir("data_roundtrip");
  const auto ds = tiny();
  data::save_dataset(ds, dir);
  const auto back = data::load_dataset(dir);
  CHECK(back == ds);

  const auto dir2 = fixture::temp_dir("data_roundtrip2");
  data::save_dataset(back, dir2);
  for (const char* f : {"meta.json", "edges.tsv", "features.tsv", "labels.tsv", "train.txt",
                        "val.txt", "test.txt"})
    CHECK(read_file(dir / f) == read_file(dir2 / f));
}

TEST_CASE("round-trip keeps exact feature values and random datasets") {
  auto ds = fixture::random_dataset(30, 3, 8, 17);
  const auto dir = fixture::temp_dir("data_roundtrip_random");
  data::save_dataset(ds, dir);
  const auto back = data::load_dataset(dir);
  CHECK(back.features == ds.features);
  CHECK(back.graph == ds.graph);
  CHECK(back.labels == ds.labels);
  CHECK(back.splits == ds.splits);
}

TEST_CASE("load reports file and line for malformed input") {
  const auto dir = fixture::temp_dir("data_malformed");
  write_tiny_files(dir);
  CHECK_NOTHROW(data::load_dataset(dir));

  write_file(dir / "edges.tsv", "0\t1\n1\tx\n");
  CHECK(error_of(dir).find("edges.tsv:2") != std::string::npos);
  write_file(dir / "edges.tsv", "0\t1\n1\t7\n");
  CHECK(error_of(dir).find("edges.tsv:2") != std::string::npos);
  write_file(dir / "edges.tsv", "0\t1\n1\t2\n");

  write_file(dir / "features.tsv", "0\t0\t1.5\n2\t1\tabc\n");
  CHECK(error_of(dir).find("features.tsv:2") != std::string::npos);
  write_file(dir / "features.tsv", "0\t0\t1.5\n0\t0\t1\n");
  CHECK(error_of(dir).find("features.tsv:2") != std::string::npos);
  write_file(dir / "features.tsv", "0\t0\t1.5\n2\t1\t1\n");

  write_file(dir / "labels.tsv", "0\t0\n1\n2\t1\n");
  CHECK(error_of(dir).find("labels.tsv:2") != std::string::npos);
  write_file(dir / "labels.tsv", "0\t0\n1\t5\n2\t1\n");
  CHECK_THROWS_AS(data::load_dataset(dir), ValidationError);
  write_file(dir / "labels.tsv", "0\t0\n1\t1\n2\t1\n");

  write_file(dir / "val.txt", "1\n");
  CHECK(error_of(dir).find("more than one split") != std::string::npos);
  write_file(dir / "labels.tsv", "0\t0\n1\t1\n");
  write_file(dir / "val.txt", "2\n");
  CHECK(error_of(dir).find("unlabeled") != std::string::npos);
}

TEST_CASE("load: missing pieces") {
  const auto dir = fixture::temp_dir("data_missing");
  CHECK_THROWS_AS(data::load_dataset(dir / "nope"), ValidationError);
  write_tiny_files(dir);
  fs::remove(dir / "edges.tsv");
  CHECK_THROWS_AS(data::load_dataset(dir), ValidationError);

  write_file(dir / "meta.json",
                 R"({"name": "t", "num_nodes": 3, "num_features": 2, "num_classes": 2, "task": "inductive"})");
  const auto ds = data::load_dataset(dir);
  CHECK_FALSE(ds.graph.has_value());
  CHECK(ds.task == data::Task::kInductive);

  write_file(dir / "meta.json", "{\"name\": ");
  CHECK_THROWS_AS(data::load_dataset(dir), ValidationError);
}

TEST_CASE("empty features with feature-level config is a validation error") {
  const auto dir = fixture::temp_dir("data_nofeat");
  write_tiny_files(dir);
  write_file(dir / "features.tsv", "");
  const auto ds = data::load_dataset(dir);
  model::ModelConfig cfg;
  cfg.level = model::Level::kFeature;
  CHECK_THROWS_AS(cfg.validate_against(ds), ValidationError);
  cfg.level = model::Level::kNode;
  CHECK_NOTHROW(cfg.validate_against(ds));
}

TEST_CASE("tfidf") {
  const auto one = data::tfidf_features({{"w"}});
  CHECK(one.matrix.nnz() == 0);
  CHECK(one.empty_rows == 1);

  const auto two = data::tfidf_features({{"a", "b"}, {"a"}});
  REQUIRE(two.matrix.cols() == 2);
  CHECK(two.vocab.index.at("a") == 0);
  CHECK(two.vocab.index.at("b") == 1);
  CHECK(two.vocab.idf[0] == 0.0);
  CHECK(two.vocab.idf[1] == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(two.matrix.at(0, 0) == 0.0);
  CHECK(two.matrix.at(0, 1) == 1.0);
  CHECK(two.empty_rows == 1);

  const auto test = data::tfidf_features({{"b", "zzz", "b"}, {"zzz"}}, two.vocab);
  CHECK(test.matrix.cols() == 2);
  CHECK(test.matrix.at(0, 1) == 1.0);
  CHECK(test.matrix.at(1, 0) == 0.0);
  CHECK(test.matrix.at(1, 1) == 0.0);

  CHECK_THROWS_AS(data::tfidf_features({}), ValidationError);
}

TEST_CASE("tfidf rows have unit or zero norm") {
  RandomStream rng(8);
  std::vector<std::vector<std::string>> docs(40);
  for (auto& d : docs) {
    const auto len = rng.below(12);
    for (std::size_t k = 0; k < len; ++k) d.push_back("t" + std::to_string(rng.below(15)));
  }
  const auto r = data::tfidf_features(docs);
  const auto dense = r.matrix.to_dense();
  std::size_t zero = 0;
  for (std::size_t i = 0; i < dense.rows(); ++i) {
    const double n2 = squared_norm(dense.row(i));
    if (n2 == 0.0) {
      ++zero;
    } else {
      CHECK(n2 == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  CHECK(zero == r.empty_rows);
}

TEST_CASE("inductive_subgraph") {
  auto ds = tiny(data::Task::kInductive);
  ds.splits = {{0, 1, 3}, {}, {2}};
  const auto sub = data::inductive_subgraph(ds);
  CHECK(sub.graph->at(0, 1) == 1.0);
  CHECK(sub.graph->at(1, 2) == 0.0);
  CHECK(sub.graph->at(2, 3) == 0.0);
  CHECK(sub.graph->nnz() == 2);
  CHECK(ds.graph->at(1, 2) == 1.0);

  ds.splits = {{0, 1, 2, 3}, {}, {}};
  CHECK(data::inductive_subgraph(ds).graph == ds.graph);

  ds.splits = {{}, {}, {0}};
  CHECK_THROWS_AS(data::inductive_subgraph(ds), ValidationError);

  CHECK_THROWS_AS(data::inductive_subgraph(tiny()), ContractError);
  auto no_graph = tiny(data::Task::kInductive);
  no_graph.graph.reset();
  CHECK_THROWS_AS(data::inductive_subgraph(no_graph), ContractError);
}

TEST_CASE("validate catches inconsistencies") {
  auto ds = tiny();
  CHECK_NOTHROW(ds.validate());
  ds.splits.test = {1};
  CHECK_THROWS_AS(ds.validate(), ValidationError);
  ds = tiny();
  ds.labels[3] = -1;
  CHECK_THROWS_AS(ds.validate(), ValidationError);
  ds = tiny();
  ds.graph.reset();
  CHECK_THROWS_AS(ds.validate(), ValidationError);
  ds.task = data::Task::kInductive;
  CHECK_NOTHROW(ds.validate());
}

TEST_CASE("converted Cora counts" * doctest::skip(!fs::exists("data/cora/meta.json"))) {
  const auto ds = data::load_dataset("data/cora");
  CHECK(ds.num_nodes == 2708);
  CHECK(ds.edges.size() == 5429);
  CHECK(ds.num_classes == 7);
  CHECK(ds.num_features() == 1433);
  CHECK(ds.splits.train.size() == 140);
  CHECK(ds.splits.val.size() == 500);
  CHECK(ds.splits.test.size() == 1000);
}
