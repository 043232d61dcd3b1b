#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "taco/codec.hpp"
#include "taco/collective.hpp"

namespace taco {

struct Histogram {
    std::vector<double> bin_edges;  // bins + 1 edges, equal width
    std::vector<uint64_t> counts;   // counts sum to the element count
};

struct ErrorReport {
    double mse = 0.0;
    double relative_l2 = 0.0;  // +inf when the reference has zero norm but errors exist
    double max_abs_error = 0.0;
    double zero_collapse_fraction = 0.0;  // nonzero inputs reconstructed as exactly 0.0
    Histogram histogram;                  // of the elementwise error
    double kurtosis = 0.0;                // excess kurtosis of the error; NaN when undefined
    bool kurtosis_defined = false;
};

enum class SyntheticKind : uint8_t { Gaussian = 0, NearZeroMixture = 1, File = 2 };

struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::Gaussian;
    size_t n = 0;
    double dense_sigma = 1e-3;
    double tail_sigma = 1.0;
    double tail_fraction = 0.01;
    uint64_t seed = 0;
    std::string path;  // kind == File
};

TensorBuffer generate(const SyntheticSpec& spec);

ErrorReport error_report(std::span<const float> original,
                         std::span<const float> reconstructed, size_t bins);

struct CodecRow {
    CodecConfig config;
    ErrorReport report;
};

std::vector<CodecRow> compare_codecs(std::span<const float> x,
                                     const std::vector<CodecConfig>& configs,
                                     size_t bins = 64);

struct DistributionStats {
    Histogram histogram;
    double kurtosis = 0.0;  // NaN sentinel when undefined (constant input)
    bool kurtosis_defined = false;
    std::vector<double> thresholds;
    std::vector<double> fraction_within;  // share with |x| <= threshold
};

DistributionStats distribution_stats(std::span<const float> x, size_t bins,
                                     std::span<const double> thresholds = {});

struct SweepRow {
    size_t block_size;
    ErrorReport report;
    double ratio;
};

std::vector<SweepRow> block_size_sweep(std::span<const float> x,
                                       const std::vector<size_t>& sizes,
                                       CodecConfig cfg_base);

// report emission; doubles rendered with %.17g, non-finite as inf/-inf/nan
std::string format_double(double v);
std::string csv_field(const std::string& s);  // RFC-4180 quoting
std::string format_label(const CodecConfig& cfg);

std::string codec_table_csv(const std::vector<CodecRow>& rows);
std::string codec_table_json(const std::vector<CodecRow>& rows);
std::string sweep_table_csv(const std::vector<SweepRow>& rows);
std::string sweep_table_json(const std::vector<SweepRow>& rows);
std::string algorithm_table_csv(const std::vector<AlgorithmRow>& rows);
std::string algorithm_table_json(const std::vector<AlgorithmRow>& rows);
std::string histogram_csv(const Histogram& h);

}  // namespace taco
