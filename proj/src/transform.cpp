#include "taco/transform.hpp"

#include <cmath>

#include "taco/error.hpp"

namespace taco {

bool is_valid_block_size(size_t b) {
    return b >= kMinBlockSize && b <= kMaxBlockSize && (b & (b - 1)) == 0;
}

void validate_block_size(size_t b) {
    if ((b & (b - 1)) != 0 || b == 0) {
        fail(ErrorCode::Config, "block size must be a power of two");
    }
    if (b < kMinBlockSize || b > kMaxBlockSize) {
        fail(ErrorCode::Config, "block size must be between 2 and 32768");
    }
}

std::vector<Block> partition(std::span<const float> x, size_t block_size) {
    validate_block_size(block_size);
    if (x.empty()) fail(ErrorCode::Input, "input tensor is empty");
    const size_t blocks = (x.size() + block_size - 1) / block_size;
    std::vector<Block> out;
    out.reserve(blocks);
    for (size_t k = 0; k < blocks; ++k) {
        const size_t begin = k * block_size;
        const size_t valid = std::min(block_size, x.size() - begin);
        Block b;
        b.values.assign(block_size, 0.0f);
        std::copy(x.begin() + begin, x.begin() + begin + valid, b.values.begin());
        b.block_index = k;
        b.valid_length = valid;
        out.push_back(std::move(b));
    }
    return out;
}

void fwht_orthonormal_inplace(std::span<double> v) {
    const size_t n = v.size();
    if (n == 0 || (n & (n - 1)) != 0) {
        fail(ErrorCode::Config, "transform length must be a power of two");
    }
    for (size_t h = 1; h < n; h <<= 1) {
        for (size_t i = 0; i < n; i += h << 1) {
            for (size_t j = i; j < i + h; ++j) {
                const double a = v[j];
                const double b = v[j + h];
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& e : v) e *= scale;
}

std::vector<float> fwht_orthonormal(std::span<const float> v) {
    std::vector<double> work(v.begin(), v.end());
    fwht_orthonormal_inplace(work);
    std::vector<float> out(work.size());
    for (size_t i = 0; i < work.size(); ++i) out[i] = static_cast<float>(work[i]);
    return out;
}

std::vector<float> fwht_inverse(std::span<const float> v) {
    return fwht_orthonormal(v);  // orthonormal symmetric, hence involutory
}

}  // namespace taco
