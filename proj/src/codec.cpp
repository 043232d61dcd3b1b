#include "taco/codec.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "taco/error.hpp"
#include "taco/parallel.hpp"

namespace taco {

namespace {

void check_finite(std::span<const float> x) {
    for (float v : x) {
        if (!std::isfinite(v)) fail(ErrorCode::Input, "input tensor contains NaN or Inf");
    }
}

size_t block_count(size_t n, size_t b) { return (n + b - 1) / b; }

// Copies block k of x into a double scratch, zero-padding the tail.
void load_block(std::span<const float> x, size_t k, size_t b, std::vector<double>& scratch) {
    const size_t begin = k * b;
    const size_t valid = std::min(b, x.size() - begin);
    for (size_t i = 0; i < valid; ++i) scratch[i] = x[begin + i];
    for (size_t i = valid; i < b; ++i) scratch[i] = 0.0;
}

float global_abs_max(std::span<const float> x) {
    float m = 0.0f;
    for (float v : x) m = std::max(m, std::fabs(v));
    return m;
}

int8_t quantize_int8(double v) {
    double r = std::nearbyint(v);
    if (r > 127.0) r = 127.0;
    if (r < -127.0) r = -127.0;
    return static_cast<int8_t>(r);
}

// Shared rescale+rotate front end of the Taco and AshInt8 paths. Returns the
// rotated block in scratch and the scalars through the out-params.
void rotate_block(std::span<const float> x, size_t k, const CodecConfig& cfg,
                  std::vector<double>& scratch, float& alpha_out, float& scale_out,
                  double q_top) {
    const size_t b = cfg.block_size;
    load_block(x, k, b, scratch);
    double acc = 0.0;
    for (double v : scratch) acc += v * v;
    const double sigma = std::sqrt(acc / static_cast<double>(b) +
                                   static_cast<double>(cfg.stability_epsilon));
    const float alpha = adaptive_scale(static_cast<float>(sigma), cfg.target_energy);
    for (auto& v : scratch) v *= static_cast<double>(alpha);
    fwht_orthonormal_inplace(scratch);
    double zmax = 0.0;
    for (double v : scratch) zmax = std::max(zmax, std::fabs(v));
    const float s = zmax == 0.0 ? 1.0f : static_cast<float>(zmax / q_top);
    alpha_out = alpha;
    scale_out = s;
}

void compress_block_taco(std::span<const float> x, size_t k, const CodecConfig& cfg,
                         std::vector<double>& scratch, CompressedBlock& out) {
    const size_t b = cfg.block_size;
    const Fp8Format& fmt = cfg.fp8();
    float alpha, s;
    rotate_block(x, k, cfg, scratch, alpha, s, static_cast<double>(fmt.q_max));
    out.payload.resize(b);
    for (size_t i = 0; i < b; ++i) {
        out.payload[i] = fp8_encode(static_cast<float>(scratch[i] / static_cast<double>(s)), fmt);
    }
    out.alpha = alpha;
    out.scale = s;
}

void compress_block_ash_int8(std::span<const float> x, size_t k, const CodecConfig& cfg,
                             std::vector<double>& scratch, CompressedBlock& out) {
    const size_t b = cfg.block_size;
    float alpha, s;
    rotate_block(x, k, cfg, scratch, alpha, s, 127.0);
    out.payload.resize(b);
    for (size_t i = 0; i < b; ++i) {
        out.payload[i] = static_cast<uint8_t>(
            quantize_int8(scratch[i] / static_cast<double>(s)));
    }
    out.alpha = alpha;
    out.scale = s;
}

void compress_block_direct(std::span<const float> x, size_t k, const CodecConfig& cfg,
                           float global_scale, CompressedBlock& out) {
    const size_t b = cfg.block_size;
    const Fp8Format& fmt = cfg.fp8();
    const size_t begin = k * b;
    const size_t valid = std::min(b, x.size() - begin);
    float s = global_scale;
    if (cfg.direct_scale == DirectScaleScope::PerBlockMax) {
        float m = 0.0f;
        for (size_t i = 0; i < valid; ++i) m = std::max(m, std::fabs(x[begin + i]));
        s = m == 0.0f ? 1.0f : m / fmt.q_max;
    }
    out.payload.assign(b, 0);
    for (size_t i = 0; i < valid; ++i) {
        out.payload[i] = fp8_encode(x[begin + i] / s, fmt);
    }
    // pad slots stay zero codes
    out.alpha = 1.0f;
    out.scale = s;
}

void compress_block_int8(std::span<const float> x, size_t k, const CodecConfig& cfg,
                         float delta, CompressedBlock& out) {
    const size_t b = cfg.block_size;
    const size_t begin = k * b;
    const size_t valid = std::min(b, x.size() - begin);
    out.payload.assign(b, 0);
    if (delta > 0.0f) {
        for (size_t i = 0; i < valid; ++i) {
            out.payload[i] = static_cast<uint8_t>(
                quantize_int8(static_cast<double>(x[begin + i]) / delta));
        }
    }
    out.alpha = 1.0f;
    out.scale = delta > 0.0f ? delta : 1.0f;
}

void compress_block_identity(std::span<const float> x, size_t k, const CodecConfig& cfg,
                             CompressedBlock& out) {
    const size_t b = cfg.block_size;
    const size_t begin = k * b;
    const size_t valid = std::min(b, x.size() - begin);
    out.payload.assign(4 * b, 0);
    std::memcpy(out.payload.data(), x.data() + begin, valid * sizeof(float));
    out.alpha = 1.0f;
    out.scale = 1.0f;
}

void decompress_block(const CompressedBlock& blk, const CodecConfig& cfg, size_t valid,
                      std::vector<double>& scratch, float* out) {
    const size_t b = cfg.block_size;
    switch (cfg.kind) {
        case CodecKind::Taco: {
            const auto& table = fp8_decode_table(cfg.fp8());
            for (size_t i = 0; i < b; ++i) {
                scratch[i] = static_cast<double>(table[blk.payload[i]]) *
                             static_cast<double>(blk.scale);
            }
            fwht_orthonormal_inplace(scratch);
            for (size_t i = 0; i < valid; ++i) {
                out[i] = static_cast<float>(scratch[i] / static_cast<double>(blk.alpha));
            }
            break;
        }
        case CodecKind::AshInt8: {
            for (size_t i = 0; i < b; ++i) {
                scratch[i] = static_cast<double>(static_cast<int8_t>(blk.payload[i])) *
                             static_cast<double>(blk.scale);
            }
            fwht_orthonormal_inplace(scratch);
            for (size_t i = 0; i < valid; ++i) {
                out[i] = static_cast<float>(scratch[i] / static_cast<double>(blk.alpha));
            }
            break;
        }
        case CodecKind::DirectFp8: {
            const auto& table = fp8_decode_table(cfg.fp8());
            for (size_t i = 0; i < valid; ++i) {
                out[i] = table[blk.payload[i]] * blk.scale;
            }
            break;
        }
        case CodecKind::Int8Uniform: {
            for (size_t i = 0; i < valid; ++i) {
                out[i] = static_cast<float>(static_cast<int8_t>(blk.payload[i])) * blk.scale;
            }
            break;
        }
        case CodecKind::Identity: {
            std::memcpy(out, blk.payload.data(), valid * sizeof(float));
            break;
        }
    }
}

}  // namespace

void validate_config(const CodecConfig& cfg) {
    validate_block_size(cfg.block_size);
    if (!(cfg.target_energy > 0.0f) || !std::isfinite(cfg.target_energy)) {
        fail(ErrorCode::Config, "target energy must be positive and finite");
    }
    if (!(cfg.stability_epsilon > 0.0f) || !std::isfinite(cfg.stability_epsilon)) {
        fail(ErrorCode::Config, "stability epsilon must be positive and finite");
    }
}

float block_rms(std::span<const float> g, float eps) {
    double acc = 0.0;
    for (float v : g) acc += static_cast<double>(v) * static_cast<double>(v);
    return static_cast<float>(
        std::sqrt(acc / static_cast<double>(g.size()) + static_cast<double>(eps)));
}

float adaptive_scale(float sigma, float tau) { return tau / sigma; }

CompressedTensor compress(std::span<const float> x, const CodecConfig& cfg) {
    validate_config(cfg);
    if (x.empty()) fail(ErrorCode::Input, "input tensor is empty");
    check_finite(x);

    const size_t b = cfg.block_size;
    const size_t blocks = block_count(x.size(), b);

    CompressedTensor ct;
    ct.kind = cfg.kind;
    ct.format = cfg.format;
    ct.block_size = static_cast<uint32_t>(b);
    ct.original_length = x.size();
    ct.blocks.resize(blocks);

    float tensor_scale = 1.0f;  // DirectFp8 global scale or Int8 delta
    if (cfg.kind == CodecKind::DirectFp8 && cfg.direct_scale == DirectScaleScope::GlobalMax) {
        float m = global_abs_max(x);
        tensor_scale = m == 0.0f ? 1.0f : m / cfg.fp8().q_max;
    } else if (cfg.kind == CodecKind::Int8Uniform) {
        tensor_scale = global_abs_max(x) / 127.0f;
    }

    parallel_for(0, blocks, [&](size_t lo, size_t hi) {
        std::vector<double> scratch(b);
        for (size_t k = lo; k < hi; ++k) {
            switch (cfg.kind) {
                case CodecKind::Taco:
                    compress_block_taco(x, k, cfg, scratch, ct.blocks[k]);
                    break;
                case CodecKind::AshInt8:
                    compress_block_ash_int8(x, k, cfg, scratch, ct.blocks[k]);
                    break;
                case CodecKind::DirectFp8:
                    compress_block_direct(x, k, cfg, tensor_scale, ct.blocks[k]);
                    break;
                case CodecKind::Int8Uniform:
                    compress_block_int8(x, k, cfg, tensor_scale, ct.blocks[k]);
                    break;
                case CodecKind::Identity:
                    compress_block_identity(x, k, cfg, ct.blocks[k]);
                    break;
            }
        }
    });
    return ct;
}

TensorBuffer decompress(const CompressedTensor& ct) {
    CodecConfig cfg;
    cfg.kind = ct.kind;
    cfg.format = ct.format;
    cfg.block_size = ct.block_size;
    return decompress(ct, cfg);
}

TensorBuffer decompress(const CompressedTensor& ct, const CodecConfig& cfg) {
    if (cfg.kind != ct.kind || cfg.format != ct.format || cfg.block_size != ct.block_size) {
        fail(ErrorCode::Corrupt, "codec config does not match the compressed tensor");
    }
    const size_t b = ct.block_size;
    validate_block_size(b);
    const size_t n = ct.original_length;
    if (n == 0) fail(ErrorCode::Corrupt, "compressed tensor declares zero elements");
    if (ct.blocks.size() != block_count(n, b)) {
        fail(ErrorCode::Corrupt, "block count does not match the declared length");
    }
    const size_t payload_bytes = ct.kind == CodecKind::Identity ? 4 * b : b;
    for (const auto& blk : ct.blocks) {
        if (blk.payload.size() != payload_bytes) {
            fail(ErrorCode::Corrupt, "block payload has the wrong size");
        }
        if (!std::isfinite(blk.alpha) || !std::isfinite(blk.scale) || blk.scale == 0.0f ||
            blk.alpha == 0.0f) {
            fail(ErrorCode::Corrupt, "block scalars must be finite and nonzero");
        }
    }

    TensorBuffer out(n);
    parallel_for(0, ct.blocks.size(), [&](size_t lo, size_t hi) {
        std::vector<double> scratch(b);
        for (size_t k = lo; k < hi; ++k) {
            const size_t begin = k * b;
            const size_t valid = std::min(b, n - begin);
            decompress_block(ct.blocks[k], cfg, valid, scratch, out.data() + begin);
        }
    });
    return out;
}

double compressed_ratio(const CodecConfig& cfg, uint64_t n) {
    if (n == 0) fail(ErrorCode::Input, "element count must be positive");
    if (cfg.kind == CodecKind::Identity) return 1.0;
    const uint64_t blocks = (n + cfg.block_size - 1) / cfg.block_size;
    return 4.0 * static_cast<double>(n) /
           (static_cast<double>(blocks) * (static_cast<double>(cfg.block_size) + 8.0));
}

TensorBuffer scaled_spectrum(std::span<const float> x, const CodecConfig& cfg) {
    validate_config(cfg);
    if (x.empty()) fail(ErrorCode::Input, "input tensor is empty");
    const size_t b = cfg.block_size;
    const size_t blocks = block_count(x.size(), b);
    const double q_top = cfg.kind == CodecKind::AshInt8
                             ? 127.0
                             : static_cast<double>(cfg.fp8().q_max);
    TensorBuffer out(blocks * b);
    parallel_for(0, blocks, [&](size_t lo, size_t hi) {
        std::vector<double> scratch(b);
        for (size_t k = lo; k < hi; ++k) {
            float alpha, s;
            rotate_block(x, k, cfg, scratch, alpha, s, q_top);
            for (size_t i = 0; i < b; ++i) {
                out[k * b + i] = static_cast<float>(scratch[i] / static_cast<double>(s));
            }
        }
    });
    return out;
}

const char* codec_kind_name(CodecKind k) {
    switch (k) {
        case CodecKind::Taco: return "taco";
        case CodecKind::DirectFp8: return "direct_fp8";
        case CodecKind::Int8Uniform: return "int8";
        case CodecKind::Identity: return "identity";
        case CodecKind::AshInt8: return "ash_int8";
    }
    return "unknown";
}

}  // namespace taco
