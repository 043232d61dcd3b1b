#include "taco/fp8.hpp"

#include <bit>
#include <cmath>
#include <limits>

namespace taco {

namespace {

constexpr Fp8Format kE4M3{Fp8Variant::E4M3, 4, 3, 7, 448.0f, false};
constexpr Fp8Format kE5M2{Fp8Variant::E5M2, 5, 2, 15, 57344.0f, true};

static_assert(4 + 3 + 1 == 8 && 5 + 2 + 1 == 8);

std::array<float, 256> build_table(const Fp8Format& fmt) {
    std::array<float, 256> t{};
    const int m = fmt.mantissa_bits;
    const int emax = (1 << fmt.exponent_bits) - 1;
    const int fmask = (1 << m) - 1;
    for (int code = 0; code < 256; ++code) {
        int sign = code >> 7;
        int e = (code >> m) & emax;
        int f = code & fmask;
        float v;
        if (e == 0) {
            v = std::ldexp(static_cast<float>(f), 1 - fmt.bias - m);
        } else if (e == emax && fmt.has_infinity) {
            v = (f == 0) ? std::numeric_limits<float>::infinity()
                         : std::numeric_limits<float>::quiet_NaN();
        } else if (e == emax && !fmt.has_infinity && f == fmask) {
            v = std::numeric_limits<float>::quiet_NaN();
        } else {
            v = std::ldexp(1.0f + static_cast<float>(f) / static_cast<float>(1 << m),
                           e - fmt.bias);
        }
        t[static_cast<size_t>(code)] = sign ? -v : v;
    }
    return t;
}

// largest finite magnitude code (sign bit clear)
constexpr Fp8Code top_code(const Fp8Format& fmt) {
    return fmt.has_infinity ? 0x7B : 0x7E;
}

}  // namespace

const Fp8Format& Fp8Format::e4m3() { return kE4M3; }
const Fp8Format& Fp8Format::e5m2() { return kE5M2; }

const Fp8Format& Fp8Format::from_variant(Fp8Variant v) {
    return v == Fp8Variant::E4M3 ? kE4M3 : kE5M2;
}

const std::array<float, 256>& fp8_decode_table(const Fp8Format& fmt) {
    static const std::array<float, 256> e4m3 = build_table(kE4M3);
    static const std::array<float, 256> e5m2 = build_table(kE5M2);
    return fmt.variant == Fp8Variant::E4M3 ? e4m3 : e5m2;
}

float fp8_decode(Fp8Code code, const Fp8Format& fmt) {
    return fp8_decode_table(fmt)[code];
}

Fp8Code fp8_encode(float x, const Fp8Format& fmt) {
    if (std::isnan(x)) return 0x7F;
    const uint32_t bits = std::bit_cast<uint32_t>(x);
    const Fp8Code sign = static_cast<Fp8Code>((bits >> 24) & 0x80u);
    const float ax = std::fabs(x);

    if (ax > fmt.q_max) return sign | top_code(fmt);

    const int m = fmt.mantissa_bits;
    const float min_normal = std::ldexp(1.0f, 1 - fmt.bias);
    if (ax < min_normal) {
        // subnormal range: the ratio is exact in double, nearbyint rounds half
        // to even under the default mode
        const double step = std::ldexp(1.0, 1 - fmt.bias - m);
        const int q = static_cast<int>(std::nearbyint(static_cast<double>(ax) / step));
        return sign | static_cast<Fp8Code>(q);  // q == 2^m lands on the first normal code
    }

    // normal range: rebias the fp32 exponent, then round the mantissa down to
    // m bits with carry into the exponent field
    uint32_t a = std::bit_cast<uint32_t>(ax);
    a -= static_cast<uint32_t>(127 - fmt.bias) << 23;
    const int shift = 23 - m;
    a += ((1u << (shift - 1)) - 1) + ((a >> shift) & 1u);
    return sign | static_cast<Fp8Code>(a >> shift);
}

float fp8_ulp(float x, const Fp8Format& fmt) {
    const float ax = std::fabs(x);
    const float min_normal = std::ldexp(1.0f, 1 - fmt.bias);
    if (!(ax >= min_normal)) return std::ldexp(1.0f, 1 - fmt.bias - fmt.mantissa_bits);
    return std::ldexp(1.0f, std::ilogb(ax) - fmt.mantissa_bits);
}

}  // namespace taco
