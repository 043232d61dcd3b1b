#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>

#include "doctest.h"
#include "json.hpp"
#include "taco/analysis.hpp"
#include "taco/error.hpp"
#include "taco/fp8.hpp"
#include "taco/serialize.hpp"

using namespace taco;

namespace {

SyntheticSpec mixture_spec(size_t n, uint64_t seed, double tail_fraction = 0.01) {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::NearZeroMixture;
    spec.n = n;
    spec.seed = seed;
    spec.dense_sigma = 1e-3;
    spec.tail_sigma = 1.0;
    spec.tail_fraction = tail_fraction;
    return spec;
}

SyntheticSpec gaussian_spec(size_t n, uint64_t seed) {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::Gaussian;
    spec.n = n;
    spec.seed = seed;
    return spec;
}

uint64_t total_count(const Histogram& h) {
    return std::accumulate(h.counts.begin(), h.counts.end(), uint64_t{0});
}

CodecConfig kind_cfg(CodecKind kind) {
    CodecConfig cfg;
    cfg.kind = kind;
    return cfg;
}

}  // namespace

TEST_CASE("generators are deterministic") {
    const TensorBuffer a = generate(gaussian_spec(100000, 7));
    const TensorBuffer b = generate(gaussian_spec(100000, 7));
    CHECK(a == b);
    const TensorBuffer c = generate(gaussian_spec(100000, 8));
    CHECK(a != c);

    const TensorBuffer m1 = generate(mixture_spec(100000, 7));
    const TensorBuffer m2 = generate(mixture_spec(100000, 7));
    CHECK(m1 == m2);
}

TEST_CASE("file generator parses the tensor file exactly") {
    auto dir = std::filesystem::temp_directory_path() / "taco_analysis_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "gen.tnsr").string();
    const TensorBuffer x = generate(gaussian_spec(5000, 3));
    write_tensor_file(path, x);

    SyntheticSpec spec;
    spec.kind = SyntheticKind::File;
    spec.path = path;
    CHECK(generate(spec) == x);

    spec.path = (dir / "missing.tnsr").string();
    CHECK_THROWS_AS(generate(spec), Error);
}

TEST_CASE("generator parameter validation") {
    SyntheticSpec spec = gaussian_spec(0, 1);
    CHECK_THROWS_WITH_AS(generate(spec), "synthetic tensor length must be positive",
                         Error);
    spec = mixture_spec(100, 1);
    spec.tail_fraction = 1.5;
    CHECK_THROWS_WITH_AS(generate(spec), "tail fraction must be in [0, 1]", Error);
    spec = mixture_spec(100, 1);
    spec.dense_sigma = 0.0;
    CHECK_THROWS_WITH_AS(generate(spec), "mixture sigmas must be positive", Error);
}

TEST_CASE("mixture mass concentrates near zero") {
    const TensorBuffer x = generate(mixture_spec(1000000, 7));
    const std::array<double, 1> thresholds{3e-3};
    auto stats = distribution_stats(x, 64, thresholds);
    REQUIRE(stats.fraction_within.size() == 1);
    CHECK(stats.fraction_within[0] >= 0.985);
    CHECK(stats.fraction_within[0] <= 0.995);
}

TEST_CASE("error report on identical buffers") {
    const TensorBuffer x = generate(gaussian_spec(1000, 11));
    ErrorReport r = error_report(x, x, 16);
    CHECK(r.mse == 0.0);
    CHECK(r.relative_l2 == 0.0);
    CHECK(r.max_abs_error == 0.0);
    CHECK(r.zero_collapse_fraction == 0.0);
    CHECK_FALSE(r.kurtosis_defined);
    CHECK(std::isnan(r.kurtosis));
    CHECK(total_count(r.histogram) == x.size());
}

TEST_CASE("error report hand example") {
    const TensorBuffer x{1.0f, 1.0f};
    const TensorBuffer y{0.0f, 2.0f};
    ErrorReport r = error_report(x, y, 2);
    CHECK(r.mse == 1.0);
    CHECK(r.relative_l2 == 1.0);
    CHECK(r.max_abs_error == 1.0);
    // one of the two nonzero inputs landed on exactly 0
    CHECK(r.zero_collapse_fraction == 0.5);
    CHECK(total_count(r.histogram) == 2);
    CHECK(r.kurtosis_defined);
    CHECK(r.kurtosis == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("error report flags a zero-norm reference") {
    const TensorBuffer zeros(8, 0.0f);
    TensorBuffer recon(8, 0.0f);
    ErrorReport both_zero = error_report(zeros, recon, 4);
    CHECK(both_zero.relative_l2 == 0.0);
    recon[3] = 0.25f;
    ErrorReport flagged = error_report(zeros, recon, 4);
    CHECK(std::isinf(flagged.relative_l2));
    CHECK(flagged.relative_l2 > 0.0);
}

TEST_CASE("error report rejects mismatched lengths") {
    CHECK_THROWS_WITH_AS(error_report(TensorBuffer(3, 1.0f), TensorBuffer(4, 1.0f), 4),
                         "original and reconstructed lengths differ", Error);
}

TEST_CASE("taco zero-collapse on the canonical mixture stays in its measured band") {
    const TensorBuffer x = generate(mixture_spec(1000000, 7));
    CodecConfig cfg;  // taco defaults
    TensorBuffer recon = decompress(compress(x, cfg), cfg);
    ErrorReport r = error_report(x, recon, 64);
    CHECK(r.zero_collapse_fraction >= 0.01);
    CHECK(r.zero_collapse_fraction <= 0.1);
}

TEST_CASE("compare_codecs echoes configs in order") {
    const TensorBuffer x = generate(mixture_spec(100000, 13));
    std::vector<CodecConfig> cfgs{kind_cfg(CodecKind::Int8Uniform),
                                  kind_cfg(CodecKind::Identity), kind_cfg(CodecKind::Taco)};
    auto rows = compare_codecs(x, cfgs, 32);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].config.kind == CodecKind::Int8Uniform);
    CHECK(rows[1].config.kind == CodecKind::Identity);
    CHECK(rows[2].config.kind == CodecKind::Taco);
    CHECK(rows[1].report.mse == 0.0);
    CHECK(rows[1].report.relative_l2 == 0.0);
    CHECK(rows[0].report.mse > 0.0);
    CHECK(rows[2].report.mse > 0.0);
    CHECK_THROWS_WITH_AS(compare_codecs(x, {}, 32), "need at least one codec config",
                         Error);
}

TEST_CASE("codec error ordering on the sparse-tail mixture") {
    const TensorBuffer x = generate(mixture_spec(1000000, 11, 1e-4));
    CodecConfig unit = kind_cfg(CodecKind::DirectFp8);
    unit.direct_scale = DirectScaleScope::Unit;
    auto rows = compare_codecs(
        x, {kind_cfg(CodecKind::Int8Uniform), unit, kind_cfg(CodecKind::Taco)}, 16);
    const double int8 = rows[0].report.mse;
    const double fp8 = rows[1].report.mse;
    const double ash = rows[2].report.mse;
    CHECK(int8 > 2.0 * fp8);
    CHECK(fp8 > 2.0 * ash);
}

TEST_CASE("e4m3 beats e5m2 through the full pipeline") {
    const TensorBuffer x = generate(gaussian_spec(1 << 19, 17));
    CodecConfig e4 = kind_cfg(CodecKind::Taco);
    CodecConfig e5 = kind_cfg(CodecKind::Taco);
    e5.format = Fp8Variant::E5M2;
    auto rows = compare_codecs(x, {e4, e5}, 16);
    CHECK(rows[0].report.relative_l2 < rows[1].report.relative_l2);
}

TEST_CASE("distribution stats on a standard normal sample") {
    const TensorBuffer x = generate(gaussian_spec(1000000, 7));
    auto stats = distribution_stats(x, 64);
    CHECK(stats.kurtosis_defined);
    CHECK(std::fabs(stats.kurtosis) <= 0.05);
    CHECK(total_count(stats.histogram) == x.size());
    REQUIRE(stats.histogram.bin_edges.size() == 65);
    REQUIRE(stats.histogram.counts.size() == 64);
    float lo = x[0], hi = x[0];
    for (float v : x) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(stats.histogram.bin_edges.front() == doctest::Approx(lo).epsilon(1e-12));
    CHECK(stats.histogram.bin_edges.back() == doctest::Approx(hi).epsilon(1e-12));
}

TEST_CASE("rotation reduces the mixture's kurtosis") {
    const TensorBuffer x = generate(mixture_spec(1 << 20, 19));
    auto raw = distribution_stats(x, 32);
    CHECK(raw.kurtosis > 50.0);
    TensorBuffer z = scaled_spectrum(x, kind_cfg(CodecKind::Taco));
    auto post = distribution_stats(z, 32);
    CHECK(post.kurtosis < raw.kurtosis);
}

TEST_CASE("constant input has no defined kurtosis") {
    const TensorBuffer x(100, 2.5f);
    auto stats = distribution_stats(x, 8);
    CHECK_FALSE(stats.kurtosis_defined);
    CHECK(std::isnan(stats.kurtosis));
    CHECK(total_count(stats.histogram) == 100);
    CHECK_THROWS_WITH_AS(distribution_stats(TensorBuffer{1.0f}, 8),
                         "distribution stats need at least 2 elements", Error);
}

TEST_CASE("block size sweep") {
    const TensorBuffer x = generate(mixture_spec(1000000, 7));
    const std::vector<size_t> sizes{32, 64, 128, 256, 512};
    auto rows = block_size_sweep(x, sizes, CodecConfig{});
    REQUIRE(rows.size() == 5);
    for (size_t i = 0; i < 5; ++i) {
        CHECK(rows[i].block_size == sizes[i]);
        CHECK(rows[i].ratio ==
              doctest::Approx(compressed_ratio(
                                  [&] {
                                      CodecConfig c;
                                      c.block_size = sizes[i];
                                      return c;
                                  }(),
                                  x.size()))
                  .epsilon(1e-12));
        if (i > 0) {
            CHECK(rows[i].ratio > rows[i - 1].ratio);
            // on heavy-tailed data, error grows with block size
            CHECK(rows[i].report.relative_l2 > rows[i - 1].report.relative_l2);
        }
        CHECK(rows[i].ratio < 4.0);
    }
    double best = rows[0].report.relative_l2;
    for (const auto& row : rows) best = std::min(best, row.report.relative_l2);
    const double at_256 = rows[3].report.relative_l2;
    CHECK(at_256 / best >= 1.2);  // mixture favors small blocks
    CHECK(at_256 / best <= 2.2);

    const TensorBuffer g = generate(gaussian_spec(1000000, 7));
    auto grows = block_size_sweep(g, sizes, CodecConfig{});
    double gbest = grows[0].report.relative_l2;
    for (const auto& row : grows) gbest = std::min(gbest, row.report.relative_l2);
    CHECK(grows[3].report.relative_l2 / gbest <= 1.2);

    auto single = block_size_sweep(x, {256}, CodecConfig{});
    CHECK(single.size() == 1);

    CHECK_THROWS_WITH_AS(block_size_sweep(x, {100}, CodecConfig{}),
                         "block size must be a power of two", Error);
    CHECK_THROWS_WITH_AS(block_size_sweep(x, {}, CodecConfig{}),
                         "sweep needs at least one block size", Error);
}

TEST_CASE("per-block direct fp8 errors respect the ulp bound") {
    const TensorBuffer x = generate(mixture_spec(1 << 16, 23));
    CodecConfig cfg = kind_cfg(CodecKind::DirectFp8);
    cfg.direct_scale = DirectScaleScope::PerBlockMax;
    CompressedTensor ct = compress(x, cfg);
    TensorBuffer recon = decompress(ct, cfg);
    const Fp8Format& fmt = Fp8Format::e4m3();
    size_t violations = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        const float s = ct.blocks[i / cfg.block_size].scale;
        const double bound =
            static_cast<double>(s) * fp8_ulp(x[i] / s, fmt) / 2.0 + 1e-7;
        if (std::fabs(static_cast<double>(x[i]) - recon[i]) > bound) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("csv quoting") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_field("line\nbreak") == "\"line\nbreak\"");
}

TEST_CASE("doubles render round-trippable or as named sentinels") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("codec table emission") {
    const TensorBuffer x = generate(mixture_spec(10000, 29));
    auto rows = compare_codecs(x, {kind_cfg(CodecKind::Int8Uniform), kind_cfg(CodecKind::Taco)}, 8);

    const std::string csv = codec_table_csv(rows);
    CHECK(csv.rfind("codec,format,block_size,mse,relative_l2,max_abs_error,"
                    "zero_collapse_fraction,kurtosis\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(csv.find("\nint8,int8,256,") != std::string::npos);
    CHECK(csv.find("\ntaco,e4m3,256,") != std::string::npos);

    auto parsed = nlohmann::json::parse(codec_table_json(rows));
    REQUIRE(parsed.is_array());
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0]["codec"] == "int8");
    CHECK(parsed[1]["codec"] == "taco");
    CHECK(parsed[1]["mse"].get<double>() == doctest::Approx(rows[1].report.mse).epsilon(1e-15));
    CHECK(parsed[1]["histogram"]["counts"].size() == 8);
    CHECK(parsed[1]["histogram"]["bin_edges"].size() == 9);
}

TEST_CASE("sweep and algorithm table emission") {
    const TensorBuffer x = generate(mixture_spec(10000, 31));
    auto rows = block_size_sweep(x, {64, 256}, CodecConfig{});
    const std::string csv = sweep_table_csv(rows);
    CHECK(csv.rfind("block_size,ratio,mse,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    auto parsed = nlohmann::json::parse(sweep_table_json(rows));
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0]["block_size"] == 64);
    CHECK(parsed[0]["ratio"].get<double>() == doctest::Approx(rows[0].ratio).epsilon(1e-15));

    std::vector<AlgorithmRow> algo_rows{{Algorithm::TwoShot, 0.25, 2, 1000},
                                        {Algorithm::Ring, 0.5, 14, 2000}};
    const std::string acsv = algorithm_table_csv(algo_rows);
    CHECK(acsv == "algorithm,relative_l2,compress_invocations,bytes_on_wire\n"
                  "twoshot,0.25,2,1000\n"
                  "ring,0.5,14,2000\n");
    auto aparsed = nlohmann::json::parse(algorithm_table_json(algo_rows));
    CHECK(aparsed[0]["algorithm"] == "twoshot");
    CHECK(aparsed[1]["compress_invocations"] == 14);
}

TEST_CASE("histogram csv emission") {
    const TensorBuffer x = generate(gaussian_spec(10000, 37));
    auto stats = distribution_stats(x, 64);
    const std::string csv = histogram_csv(stats.histogram);
    CHECK(csv.rfind("bin_left_edge,count\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 65);

    uint64_t mass = 0;
    size_t at = csv.find('\n') + 1;
    while (at < csv.size()) {
        const size_t comma = csv.find(',', at);
        const size_t end = csv.find('\n', at);
        mass += std::stoull(csv.substr(comma + 1, end - comma - 1));
        at = end + 1;
    }
    CHECK(mass == x.size());
}
