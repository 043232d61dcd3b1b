#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace taco {

using TensorBuffer = std::vector<float>;

constexpr size_t kMinBlockSize = 2;
constexpr size_t kMaxBlockSize = size_t{1} << 15;

bool is_valid_block_size(size_t b);
void validate_block_size(size_t b);  // throws Error(Config) otherwise

struct Block {
    std::vector<float> values;  // length = block size, zero-padded past valid_length
    size_t block_index;
    size_t valid_length;
};

// ceil(N/B) contiguous blocks; concatenating valid prefixes reproduces x.
std::vector<Block> partition(std::span<const float> x, size_t block_size);

// (1/sqrt(B)) * H_B * v, Sylvester ordering. Butterflies run in double with a
// single normalization pass; involutory, so the inverse is the same map.
std::vector<float> fwht_orthonormal(std::span<const float> v);
std::vector<float> fwht_inverse(std::span<const float> v);

// in-place double-precision core used by the codec
void fwht_orthonormal_inplace(std::span<double> v);

}  // namespace taco
