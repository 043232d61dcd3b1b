#pragma once

#include <cstdint>
#include <vector>

#include "taco/fp8.hpp"
#include "taco/transform.hpp"

namespace taco {

enum class CodecKind : uint8_t {
    Taco = 0,        // adaptive rescale + rotation + dual-scale fp8
    DirectFp8 = 1,   // fp8 conversion, no rotation
    Int8Uniform = 2, // global uniform int8 grid
    Identity = 3,    // raw floats, lossless
    AshInt8 = 4,     // rescale + rotation with an int8 payload; analysis-only
};

// How DirectFp8 picks its scale. The wire default is one max-derived scale for
// the whole tensor; Unit feeds raw values to the converter; PerBlockMax mirrors
// the dual-scale layout without the rotation.
enum class DirectScaleScope : uint8_t { GlobalMax = 0, Unit = 1, PerBlockMax = 2 };

struct CodecConfig {
    size_t block_size = 256;
    float target_energy = 1.0f;        // tau, the per-block RMS target
    float stability_epsilon = 1e-12f;  // added under the RMS square root
    Fp8Variant format = Fp8Variant::E4M3;
    CodecKind kind = CodecKind::Taco;
    DirectScaleScope direct_scale = DirectScaleScope::GlobalMax;

    const Fp8Format& fp8() const { return Fp8Format::from_variant(format); }
};

void validate_config(const CodecConfig& cfg);

struct CompressedBlock {
    std::vector<uint8_t> payload;  // B codes (4B raw bytes for Identity)
    float alpha;                   // per-block rescale, 1 when unused
    float scale;                   // dequantization scale, never 0
};

struct CompressedTensor {
    CodecKind kind;
    Fp8Variant format;
    uint32_t block_size;
    uint64_t original_length;
    std::vector<CompressedBlock> blocks;
};

// sigma_k = sqrt(mean(g^2) + eps), accumulated in double; pad zeros count.
float block_rms(std::span<const float> g, float eps);

// alpha_k = tau / sigma_k
float adaptive_scale(float sigma, float tau);

CompressedTensor compress(std::span<const float> x, const CodecConfig& cfg);

// Reconstruction runs the compress stages strictly in reverse. The two-arg
// form cross-checks cfg against the tensor's config echo.
TensorBuffer decompress(const CompressedTensor& ct);
TensorBuffer decompress(const CompressedTensor& ct, const CodecConfig& cfg);

// Elements-per-byte gain of the wire layout: 4N / (ceil(N/B) * (B + 8)).
// Identity is exactly 1.
double compressed_ratio(const CodecConfig& cfg, uint64_t n);

// The values fed to the quantizer (Z_k / s_k concatenated over blocks,
// including tail padding); exposed for distribution studies.
TensorBuffer scaled_spectrum(std::span<const float> x, const CodecConfig& cfg);

const char* codec_kind_name(CodecKind k);

}  // namespace taco
