#pragma once

#include <array>
#include <cstdint>

namespace taco {

enum class Fp8Variant : uint8_t { E4M3 = 0, E5M2 = 1 };

using Fp8Code = uint8_t;

// E4M3 is the saturating no-infinity flavor: max finite 448, NaN is the single
// pattern sign.1111.111. E5M2 is IEEE-like with infinities, but encode always
// saturates to q_max.
struct Fp8Format {
    Fp8Variant variant;
    int exponent_bits;
    int mantissa_bits;
    int bias;
    float q_max;
    bool has_infinity;

    static const Fp8Format& e4m3();
    static const Fp8Format& e5m2();
    static const Fp8Format& from_variant(Fp8Variant v);
};

const std::array<float, 256>& fp8_decode_table(const Fp8Format& fmt);

float fp8_decode(Fp8Code code, const Fp8Format& fmt);

// Nearest representable value, ties to even mantissa; |x| > q_max saturates,
// NaN maps to the canonical NaN code, zero sign is preserved.
Fp8Code fp8_encode(float x, const Fp8Format& fmt);

// Spacing of representable values at |x|: 2^(floor(log2|x|) - m). Zero and
// subnormal inputs return the subnormal spacing 2^(1 - bias - m).
float fp8_ulp(float x, const Fp8Format& fmt);

}  // namespace taco
