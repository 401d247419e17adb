#pragma once

// Checkpoint bundle, version 1, all integers and floats little-endian:
//
//   bytes 0-7   magic "HYLACKPT"
//   u32         format version (1)
//   u64 n, n bytes   UTF-8 JSON header: {"config": {...}, "dataset": str,
//                    "num_classes": int, "seed": int}
//   matrix W    u64 rows, u64 cols, rows·cols f64 row-major
//   matrix Z    same layout
//   matrix Ω    same layout (d1 × d0)
//   vector Λ    u64 len, len f64
//   vector B    u64 len, len f64
//   f64         scale s

#include <cstdint>
#include <filesystem>
#include <string>

#include "hyla/models.hpp"

namespace hyla {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  model::ModelConfig config;
  model::ModelState state;
  std::string dataset_name;
  std::size_t num_classes = 0;
  std::uint64_t seed = 0;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hyla
