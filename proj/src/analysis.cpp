#include "taco/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "json.hpp"
#include "taco/error.hpp"
#include "taco/rng.hpp"
#include "taco/serialize.hpp"

namespace taco {

namespace {

Histogram build_histogram(std::span<const double> v, size_t bins) {
    if (bins == 0) fail(ErrorCode::Config, "histogram needs at least one bin");
    double lo = v.empty() ? 0.0 : v[0];
    double hi = lo;
    for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    Histogram h;
    h.bin_edges.resize(bins + 1);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (size_t i = 0; i <= bins; ++i)
        h.bin_edges[i] = lo + width * static_cast<double>(i);
    h.bin_edges[bins] = hi;
    h.counts.assign(bins, 0);
    for (double x : v) {
        double t = (x - lo) / (hi - lo) * static_cast<double>(bins);
        auto idx = static_cast<size_t>(std::min(std::max(t, 0.0),
                                                static_cast<double>(bins) - 1.0));
        h.counts[idx] += 1;
    }
    return h;
}

// excess kurtosis, m4/m2^2 - 3; undefined for constant input
bool excess_kurtosis(std::span<const double> v, double& out) {
    const auto n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double d = x - mean;
        const double d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    if (m2 <= 0.0) {
        out = std::numeric_limits<double>::quiet_NaN();
        return false;
    }
    out = m4 / (m2 * m2) - 3.0;
    return true;
}

}  // namespace

TensorBuffer generate(const SyntheticSpec& spec) {
    if (spec.kind == SyntheticKind::File) {
        if (spec.path.empty()) fail(ErrorCode::Config, "synthetic file spec needs a path");
        return read_tensor_file(spec.path);
    }
    if (spec.n == 0) fail(ErrorCode::Config, "synthetic tensor length must be positive");
    Rng rng(spec.seed);
    TensorBuffer x(spec.n);
    if (spec.kind == SyntheticKind::Gaussian) {
        for (auto& v : x) v = static_cast<float>(rng.next_normal());
        return x;
    }
    if (!(spec.tail_fraction >= 0.0 && spec.tail_fraction <= 1.0))
        fail(ErrorCode::Config, "tail fraction must be in [0, 1]");
    if (!(spec.dense_sigma > 0.0) || !(spec.tail_sigma > 0.0))
        fail(ErrorCode::Config, "mixture sigmas must be positive");
    const auto n_tail = static_cast<size_t>(
        std::llround(spec.tail_fraction * static_cast<double>(spec.n)));
    const size_t n_dense = spec.n - n_tail;
    for (size_t i = 0; i < n_dense; ++i)
        x[i] = static_cast<float>(spec.dense_sigma * rng.next_normal());
    for (size_t i = n_dense; i < spec.n; ++i)
        x[i] = static_cast<float>(spec.tail_sigma * rng.next_normal());
    rng.shuffle(x);
    return x;
}

ErrorReport error_report(std::span<const float> original,
                         std::span<const float> reconstructed, size_t bins) {
    if (original.size() != reconstructed.size())
        fail(ErrorCode::Input, "original and reconstructed lengths differ");
    if (original.empty()) fail(ErrorCode::Input, "input tensor is empty");

    const size_t n = original.size();
    std::vector<double> err(n);
    double sq_err = 0.0, sq_ref = 0.0, max_abs = 0.0;
    size_t nonzero = 0, collapsed = 0;
    for (size_t i = 0; i < n; ++i) {
        const double e = static_cast<double>(original[i]) - reconstructed[i];
        err[i] = e;
        sq_err += e * e;
        sq_ref += static_cast<double>(original[i]) * original[i];
        max_abs = std::max(max_abs, std::fabs(e));
        if (original[i] != 0.0f) {
            ++nonzero;
            if (reconstructed[i] == 0.0f) ++collapsed;
        }
    }

    ErrorReport r;
    r.mse = sq_err / static_cast<double>(n);
    if (sq_ref > 0.0)
        r.relative_l2 = std::sqrt(sq_err / sq_ref);
    else
        r.relative_l2 = sq_err > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    r.max_abs_error = max_abs;
    r.zero_collapse_fraction =
        nonzero == 0 ? 0.0
                     : static_cast<double>(collapsed) / static_cast<double>(nonzero);
    r.histogram = build_histogram(err, bins);
    r.kurtosis_defined = excess_kurtosis(err, r.kurtosis);
    return r;
}

std::vector<CodecRow> compare_codecs(std::span<const float> x,
                                     const std::vector<CodecConfig>& configs,
                                     size_t bins) {
    if (configs.empty()) fail(ErrorCode::Config, "need at least one codec config");
    std::vector<CodecRow> rows;
    rows.reserve(configs.size());
    for (const auto& cfg : configs) {
        TensorBuffer recon = decompress(compress(x, cfg), cfg);
        rows.push_back({cfg, error_report(x, recon, bins)});
    }
    return rows;
}

DistributionStats distribution_stats(std::span<const float> x, size_t bins,
                                     std::span<const double> thresholds) {
    if (x.size() < 2) fail(ErrorCode::Input, "distribution stats need at least 2 elements");
    std::vector<double> v(x.begin(), x.end());
    DistributionStats s;
    s.histogram = build_histogram(v, bins);
    s.kurtosis_defined = excess_kurtosis(v, s.kurtosis);
    s.thresholds.assign(thresholds.begin(), thresholds.end());
    for (double t : thresholds) {
        size_t within = 0;
        for (double xv : v)
            if (std::fabs(xv) <= t) ++within;
        s.fraction_within.push_back(static_cast<double>(within) /
                                    static_cast<double>(v.size()));
    }
    return s;
}

std::vector<SweepRow> block_size_sweep(std::span<const float> x,
                                       const std::vector<size_t>& sizes,
                                       CodecConfig cfg_base) {
    if (sizes.empty()) fail(ErrorCode::Config, "sweep needs at least one block size");
    cfg_base.kind = CodecKind::Taco;
    std::vector<SweepRow> rows;
    rows.reserve(sizes.size());
    for (size_t b : sizes) {
        CodecConfig cfg = cfg_base;
        cfg.block_size = b;
        validate_config(cfg);
        TensorBuffer recon = decompress(compress(x, cfg), cfg);
        rows.push_back({b, error_report(x, recon, 64), compressed_ratio(cfg, x.size())});
    }
    return rows;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string format_label(const CodecConfig& cfg) {
    switch (cfg.kind) {
        case CodecKind::Int8Uniform:
        case CodecKind::AshInt8: return "int8";
        case CodecKind::Identity: return "f32";
        default: return cfg.format == Fp8Variant::E4M3 ? "e4m3" : "e5m2";
    }
}

namespace {

void append_report_csv(std::string& out, const ErrorReport& r) {
    out += format_double(r.mse);
    out += ',';
    out += format_double(r.relative_l2);
    out += ',';
    out += format_double(r.max_abs_error);
    out += ',';
    out += format_double(r.zero_collapse_fraction);
    out += ',';
    out += format_double(r.kurtosis);
}

nlohmann::json json_number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);  // non-finite values as strings, JSON has no inf
}

nlohmann::json report_json(const ErrorReport& r) {
    nlohmann::json j;
    j["mse"] = json_number(r.mse);
    j["relative_l2"] = json_number(r.relative_l2);
    j["max_abs_error"] = json_number(r.max_abs_error);
    j["zero_collapse_fraction"] = json_number(r.zero_collapse_fraction);
    j["kurtosis"] = json_number(r.kurtosis);
    j["histogram"] = {{"bin_edges", r.histogram.bin_edges},
                      {"counts", r.histogram.counts}};
    return j;
}

}  // namespace

std::string codec_table_csv(const std::vector<CodecRow>& rows) {
    std::string out =
        "codec,format,block_size,mse,relative_l2,max_abs_error,zero_collapse_fraction,kurtosis\n";
    for (const auto& row : rows) {
        out += csv_field(codec_kind_name(row.config.kind));
        out += ',';
        out += csv_field(format_label(row.config));
        out += ',';
        out += std::to_string(row.config.block_size);
        out += ',';
        append_report_csv(out, row.report);
        out += '\n';
    }
    return out;
}

std::string codec_table_json(const std::vector<CodecRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json j = report_json(row.report);
        j["codec"] = codec_kind_name(row.config.kind);
        j["format"] = format_label(row.config);
        j["block_size"] = row.config.block_size;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::string sweep_table_csv(const std::vector<SweepRow>& rows) {
    std::string out =
        "block_size,ratio,mse,relative_l2,max_abs_error,zero_collapse_fraction,kurtosis\n";
    for (const auto& row : rows) {
        out += std::to_string(row.block_size);
        out += ',';
        out += format_double(row.ratio);
        out += ',';
        append_report_csv(out, row.report);
        out += '\n';
    }
    return out;
}

std::string sweep_table_json(const std::vector<SweepRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json j = report_json(row.report);
        j["block_size"] = row.block_size;
        j["ratio"] = json_number(row.ratio);
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::string algorithm_table_csv(const std::vector<AlgorithmRow>& rows) {
    std::string out = "algorithm,relative_l2,compress_invocations,bytes_on_wire\n";
    for (const auto& row : rows) {
        out += csv_field(algorithm_name(row.algorithm));
        out += ',';
        out += format_double(row.relative_l2);
        out += ',';
        out += std::to_string(row.compress_invocations);
        out += ',';
        out += std::to_string(row.bytes_on_wire);
        out += '\n';
    }
    return out;
}

std::string algorithm_table_json(const std::vector<AlgorithmRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json j;
        j["algorithm"] = algorithm_name(row.algorithm);
        j["relative_l2"] = json_number(row.relative_l2);
        j["compress_invocations"] = row.compress_invocations;
        j["bytes_on_wire"] = row.bytes_on_wire;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::string histogram_csv(const Histogram& h) {
    std::string out = "bin_left_edge,count\n";
    for (size_t i = 0; i < h.counts.size(); ++i) {
        out += format_double(h.bin_edges[i]);
        out += ',';
        out += std::to_string(h.counts[i]);
        out += '\n';
    }
    return out;
}

}  // namespace taco
