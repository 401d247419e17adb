#include "hyla/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "hyla/errors.hpp"
#include "hyla/io_util.hpp"

namespace hyla {

namespace {

constexpr std::array<char, 8> kMagic = {'H', 'Y', 'L', 'A', 'C', 'K', 'P', 'T'};

void write_matrix(std::ostream& out, const Matrix& m) {
  write_u64(out, m.rows());
  write_u64(out, m.cols());
  for (double v : m.values()) write_f64(out, v);
}

void write_vector(std::ostream& out, std::span<const double> v) {
  write_u64(out, v.size());
  for (double x : v) write_f64(out, x);
}

std::uint64_t read_length(std::istream& in) {
  const auto n = read_u64(in);
  if (n > (std::uint64_t{1} << 34)) throw IngestError("checkpoint: implausible length field");
  return n;
}

Matrix read_matrix(std::istream& in) {
  const auto rows = read_length(in);
  const auto cols = read_length(in);
  std::vector<double> data(rows * cols);
  for (double& v : data) v = read_f64(in);
  return Matrix(rows, cols, std::move(data));
}

std::vector<double> read_vector(std::istream& in) {
  std::vector<double> v(read_length(in));
  for (double& x : v) x = read_f64(in);
  return v;
}

nlohmann::ordered_json config_to_json(const model::ModelConfig& c) {
  nlohmann::ordered_json j;
  j["level"] = model::to_string(c.level);
  j["head"] = model::to_string(c.head);
  j["K"] = c.K;
  j["d0"] = c.d0;
  j["d1"] = c.d1;
  j["s"] = c.s;
  j["concat_original"] = c.concat_original;
  j["feature_map"] = model::to_string(c.feature_map);
  j["ball_eps"] = c.ball_eps;
  j["init_range"] = c.init_range;
  j["clamp_min"] = c.clamp_min;
  return j;
}

model::ModelConfig config_from_json(const nlohmann::json& j) {
  model::ModelConfig c;
  c.level = model::parse_level(j.at("level").get<std::string>());
  c.head = model::parse_head(j.at("head").get<std::string>());
  c.K = j.at("K").get<std::size_t>();
  c.d0 = j.at("d0").get<std::size_t>();
  c.d1 = j.at("d1").get<std::size_t>();
  c.s = j.at("s").get<double>();
  c.concat_original = j.at("concat_original").get<bool>();
  c.feature_map = model::parse_feature_map(j.at("feature_map").get<std::string>());
  c.ball_eps = j.at("ball_eps").get<double>();
  c.init_range = j.at("init_range").get<double>();
  c.clamp_min = j.at("clamp_min").get<double>();
  c.validate();
  return c;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write checkpoint " + path.string());
  nlohmann::ordered_json header;
  header["config"] = config_to_json(ckpt.config);
  header["dataset"] = ckpt.dataset_name;
  header["num_classes"] = ckpt.num_classes;
  header["seed"] = ckpt.seed;
  const std::string text = header.dump();

  out.write(kMagic.data(), kMagic.size());
  write_u32(out, kCheckpointVersion);
  write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  const auto& c = ckpt.state.constants;
  write_matrix(out, ckpt.state.W);
  write_matrix(out, ckpt.state.Z);
  write_matrix(out, c.omegas());
  write_vector(out, c.lambdas());
  write_vector(out, c.biases());
  write_f64(out, c.scale_s());
  if (!out) throw ValidationError("checkpoint write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open checkpoint " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IngestError(path.string() + ": not a checkpoint file");
  const auto version = read_u32(in);
  if (version != kCheckpointVersion) {
    throw IngestError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  std::string text(read_length(in), '\0');
  in.read(text.data(), static_cast<std::streamsize>(text.size()));
  if (!in) throw IngestError(path.string() + ": truncated header");

  Checkpoint ckpt;
  try {
    const auto header = nlohmann::json::parse(text);
    ckpt.config = config_from_json(header.at("config"));
    ckpt.dataset_name = header.at("dataset").get<std::string>();
    ckpt.num_classes = header.at("num_classes").get<std::size_t>();
    ckpt.seed = header.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw IngestError(path.string() + ": bad header: " + e.what());
  }
  ckpt.state.W = read_matrix(in);
  ckpt.state.Z = read_matrix(in);
  Matrix omegas = read_matrix(in);
  auto lambdas = read_vector(in);
  auto biases = read_vector(in);
  const double scale = read_f64(in);
  ckpt.state.constants =
      features::HyLaConstants(std::move(omegas), std::move(lambdas), std::move(biases), scale);
  if (ckpt.state.constants.d0() != ckpt.config.d0 || ckpt.state.constants.d1() != ckpt.config.d1 ||
      ckpt.state.Z.cols() != ckpt.config.d0 || ckpt.state.W.cols() != ckpt.num_classes) {
    throw IngestError(path.string() + ": tensor shapes disagree with the stored config");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IngestError(path.string() + ": trailing bytes after checkpoint payload");
  }
  return ckpt;
}

}  // namespace hyla
