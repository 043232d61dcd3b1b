#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "taco/codec.hpp"

namespace taco {

// Archive layout, little-endian: "TACOCMP1", u8 codec kind, u8 format id
// (0=E4M3, 1=E5M2, 2=INT8, 3=identity), u32 block size, u64 element count,
// then per block: payload bytes, alpha f32, scale f32.
std::vector<uint8_t> archive_bytes(const CompressedTensor& ct);
CompressedTensor archive_parse(std::span<const uint8_t> bytes);
void write_archive(const std::string& path, const CompressedTensor& ct);
CompressedTensor read_archive(const std::string& path);

// size the layout produces for N elements under cfg
uint64_t archive_size_bytes(const CodecConfig& cfg, uint64_t n);

// Tensor file: "TACOTNSR", u32 version (=1), u64 element count, f32 payload.
void write_tensor_file(const std::string& path, std::span<const float> x);
TensorBuffer read_tensor_file(const std::string& path);

// bare f32 array, no header
TensorBuffer read_raw_floats(const std::string& path);

}  // namespace taco
