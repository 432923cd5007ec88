#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cotgan/tensor.hpp"

namespace cotgan {

// Single-tensor binary format, fixed little-endian layout regardless of host:
//   bytes 0..3   magic "COTT"
//   byte  4      format version (1)
//   int64        rank
//   int64 x rank extents
//   float64 x n  row-major payload
void write_tensor_file(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor_file(const std::filesystem::path& path);

// Ordered name -> tensor collection persisted as one .cott file per entry plus
// an index file, so a checkpoint directory stays human-inspectable.
using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

void save_tensor_map(const std::filesystem::path& dir, const NamedTensors& tensors);
NamedTensors load_tensor_map(const std::filesystem::path& dir);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace cotgan
