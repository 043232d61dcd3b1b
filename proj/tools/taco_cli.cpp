#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "taco/analysis.hpp"
#include "taco/codec.hpp"
#include "taco/collective.hpp"
#include "taco/error.hpp"
#include "taco/serialize.hpp"

namespace {

using namespace taco;

struct CodecFlags {
    std::string codec = "taco";
    std::string format = "e4m3";
    size_t block_size = 256;
    double tau = 1.0;
    double epsilon = 1e-12;
    std::string scale_scope = "global";
};

void add_codec_flags(CLI::App* sub, CodecFlags& f) {
    sub->add_option("--codec", f.codec, "taco|direct_fp8|int8|identity|ash_int8");
    sub->add_option("--format", f.format, "fp8 format, e4m3|e5m2");
    sub->add_option("--block-size", f.block_size, "block size, power of two");
    sub->add_option("--tau", f.tau, "target rms after adaptive scaling");
    sub->add_option("--epsilon", f.epsilon, "rms stability epsilon");
    sub->add_option("--scale-scope", f.scale_scope,
                    "direct_fp8 scaling: global|unit|per-block");
}

CodecKind parse_kind(const std::string& name) {
    if (name == "taco") return CodecKind::Taco;
    if (name == "direct_fp8" || name == "fp8") return CodecKind::DirectFp8;
    if (name == "int8") return CodecKind::Int8Uniform;
    if (name == "identity") return CodecKind::Identity;
    if (name == "ash_int8") return CodecKind::AshInt8;
    fail(ErrorCode::Config, "unknown codec: " + name);
}

Fp8Variant parse_format(const std::string& name) {
    if (name == "e4m3") return Fp8Variant::E4M3;
    if (name == "e5m2") return Fp8Variant::E5M2;
    fail(ErrorCode::Config, "unknown fp8 format: " + name);
}

DirectScaleScope parse_scope(const std::string& name) {
    if (name == "global") return DirectScaleScope::GlobalMax;
    if (name == "unit") return DirectScaleScope::Unit;
    if (name == "per-block") return DirectScaleScope::PerBlockMax;
    fail(ErrorCode::Config, "unknown scale scope: " + name);
}

CodecConfig to_config(const CodecFlags& f, const std::string& kind_name) {
    CodecConfig cfg;
    cfg.kind = parse_kind(kind_name);
    cfg.format = parse_format(f.format);
    cfg.block_size = f.block_size;
    cfg.target_energy = static_cast<float>(f.tau);
    cfg.stability_epsilon = static_cast<float>(f.epsilon);
    cfg.direct_scale = parse_scope(f.scale_scope);
    validate_config(cfg);
    return cfg;
}

struct InputFlags {
    std::string input;
    std::string synthetic;
    size_t n = 1000000;
    uint64_t seed = 7;
    double dense_sigma = 1e-3;
    double tail_sigma = 1.0;
    double tail_fraction = 0.01;
};

void add_input_flags(CLI::App* sub, InputFlags& f) {
    sub->add_option("--input", f.input, "tensor file to analyze");
    sub->add_option("--synthetic", f.synthetic, "generate input: gaussian|mixture");
    sub->add_option("--n", f.n, "synthetic tensor length");
    sub->add_option("--seed", f.seed, "synthetic generator seed");
    sub->add_option("--dense-sigma", f.dense_sigma, "mixture dense component sigma");
    sub->add_option("--tail-sigma", f.tail_sigma, "mixture tail component sigma");
    sub->add_option("--tail-fraction", f.tail_fraction, "mixture tail share");
}

SyntheticSpec to_spec(const InputFlags& f) {
    SyntheticSpec spec;
    spec.n = f.n;
    spec.seed = f.seed;
    spec.dense_sigma = f.dense_sigma;
    spec.tail_sigma = f.tail_sigma;
    spec.tail_fraction = f.tail_fraction;
    if (f.synthetic == "gaussian") {
        spec.kind = SyntheticKind::Gaussian;
    } else if (f.synthetic == "mixture") {
        spec.kind = SyntheticKind::NearZeroMixture;
    } else {
        fail(ErrorCode::Config, "unknown synthetic distribution: " + f.synthetic);
    }
    return spec;
}

TensorBuffer load_input(const InputFlags& f) {
    if (!f.input.empty()) return read_tensor_file(f.input);
    if (f.synthetic.empty())
        fail(ErrorCode::Usage, "provide an input tensor file or --synthetic");
    return generate(to_spec(f));
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::Io, "cannot write file: " + path);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) fail(ErrorCode::Io, "cannot write file: " + path);
}

void emit_table(const std::string& table, const std::string& out_path) {
    if (out_path.empty())
        std::cout << table;
    else
        write_text_file(out_path, table);
}

class Stopwatch {
  public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        const auto d = std::chrono::steady_clock::now() - start_;
        return std::chrono::duration<double, std::milli>(d).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

bool g_deterministic = false;

void print_wall_time(const Stopwatch& sw) {
    if (g_deterministic) return;
    std::printf("wall time: %.3f ms\n", sw.ms());
}

// ---- compress ----

struct CompressArgs {
    std::string input, output;
    CodecFlags codec;
    bool raw = false;
};

void run_compress(const CompressArgs& a) {
    Stopwatch sw;
    TensorBuffer x = a.raw ? read_raw_floats(a.input) : read_tensor_file(a.input);
    CodecConfig cfg = to_config(a.codec, a.codec.codec);
    CompressedTensor ct = compress(x, cfg);
    write_archive(a.output, ct);
    std::printf("elements: %zu\n", x.size());
    std::printf("blocks: %zu\n", ct.blocks.size());
    std::printf("ratio: %s\n", format_double(compressed_ratio(cfg, x.size())).c_str());
    print_wall_time(sw);
}

// ---- decompress ----

struct DecompressArgs {
    std::string input, output, compare;
};

void run_decompress(const DecompressArgs& a) {
    Stopwatch sw;
    CompressedTensor ct = read_archive(a.input);
    TensorBuffer x = decompress(ct);
    write_tensor_file(a.output, x);
    std::printf("elements: %zu\n", x.size());
    if (!a.compare.empty()) {
        TensorBuffer ref = read_tensor_file(a.compare);
        ErrorReport r = error_report(ref, x, 1);
        std::printf("relative_l2: %s\n", format_double(r.relative_l2).c_str());
    }
    print_wall_time(sw);
}

// ---- analyze ----

struct AnalyzeArgs {
    InputFlags in;
    CodecFlags codec;
    std::vector<std::string> codecs;
    size_t bins = 64;
    std::vector<double> thresholds;
    std::string out, histogram_out;
    std::string emit = "csv";
};

void run_analyze(const AnalyzeArgs& a) {
    Stopwatch sw;
    TensorBuffer x = load_input(a.in);
    if (!a.codecs.empty()) {
        std::vector<CodecConfig> cfgs;
        cfgs.reserve(a.codecs.size());
        for (const auto& name : a.codecs) cfgs.push_back(to_config(a.codec, name));
        auto rows = compare_codecs(x, cfgs, a.bins);
        emit_table(a.emit == "json" ? codec_table_json(rows) : codec_table_csv(rows),
                   a.out);
        if (!a.histogram_out.empty())
            write_text_file(a.histogram_out, histogram_csv(rows[0].report.histogram));
    } else {
        auto stats = distribution_stats(x, a.bins, a.thresholds);
        std::printf("kurtosis: %s\n", format_double(stats.kurtosis).c_str());
        if (!stats.kurtosis_defined) std::printf("kurtosis undefined: constant input\n");
        for (size_t i = 0; i < stats.thresholds.size(); ++i)
            std::printf("fraction_within %s: %s\n",
                        format_double(stats.thresholds[i]).c_str(),
                        format_double(stats.fraction_within[i]).c_str());
        const std::string table = histogram_csv(stats.histogram);
        if (!a.out.empty()) write_text_file(a.out, table);
        if (!a.histogram_out.empty()) write_text_file(a.histogram_out, table);
    }
    print_wall_time(sw);
}

// ---- simulate ----

struct SimulateArgs {
    size_t ranks = 4;
    size_t length = 1u << 20;
    std::string algorithm = "all";
    CodecFlags codec;
    uint64_t seed = 7;
    std::string distribution = "gaussian";
    double dense_sigma = 1e-3;
    double tail_sigma = 1.0;
    double tail_fraction = 0.01;
    size_t chunk_elements = 0;
    std::string scenario;
    std::string out;
    std::string emit = "csv";
};

std::map<std::string, std::string, std::less<>> parse_scenario_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(ErrorCode::Io, "cannot open file: " + path);
    std::map<std::string, std::string, std::less<>> kv;
    std::string line;
    while (std::getline(f, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const auto trim = [](std::string s) {
            const char* ws = " \t\r";
            const auto a = s.find_first_not_of(ws);
            if (a == std::string::npos) return std::string();
            const auto b = s.find_last_not_of(ws);
            return s.substr(a, b - a + 1);
        };
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorCode::Config, "invalid scenario line: " + trim(line));
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            fail(ErrorCode::Config, "invalid scenario line: " + trim(line));
        kv[key] = val;
    }
    return kv;
}

uint64_t scenario_u64(const std::string& key, const std::string& val) {
    try {
        size_t pos = 0;
        const uint64_t v = std::stoull(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
        return v;
    } catch (const std::exception&) {
        fail(ErrorCode::Config, "invalid scenario value for " + key + ": " + val);
    }
}

double scenario_f64(const std::string& key, const std::string& val) {
    try {
        size_t pos = 0;
        const double v = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
        return v;
    } catch (const std::exception&) {
        fail(ErrorCode::Config, "invalid scenario value for " + key + ": " + val);
    }
}

// scenario supplies defaults; flags given on the command line win
void apply_scenario(SimulateArgs& a, const CLI::App* sub) {
    const auto kv = parse_scenario_file(a.scenario);
    const auto flag_set = [sub](const std::string& name) {
        return sub->count(name) > 0;
    };
    for (const auto& [key, val] : kv) {
        if (key == "world_size") {
            if (!flag_set("--ranks")) a.ranks = scenario_u64(key, val);
        } else if (key == "tensor_length") {
            if (!flag_set("--length")) a.length = scenario_u64(key, val);
        } else if (key == "distribution") {
            if (!flag_set("--distribution")) a.distribution = val;
        } else if (key == "seed") {
            if (!flag_set("--seed")) a.seed = scenario_u64(key, val);
        } else if (key == "algorithm") {
            if (!flag_set("--algorithm")) a.algorithm = val;
        } else if (key == "codec") {
            if (!flag_set("--codec")) a.codec.codec = val;
        } else if (key == "format") {
            if (!flag_set("--format")) a.codec.format = val;
        } else if (key == "block_size") {
            if (!flag_set("--block-size")) a.codec.block_size = scenario_u64(key, val);
        } else if (key == "tau") {
            if (!flag_set("--tau")) a.codec.tau = scenario_f64(key, val);
        } else if (key == "epsilon") {
            if (!flag_set("--epsilon")) a.codec.epsilon = scenario_f64(key, val);
        } else if (key == "dense_sigma") {
            if (!flag_set("--dense-sigma")) a.dense_sigma = scenario_f64(key, val);
        } else if (key == "tail_sigma") {
            if (!flag_set("--tail-sigma")) a.tail_sigma = scenario_f64(key, val);
        } else if (key == "tail_fraction") {
            if (!flag_set("--tail-fraction")) a.tail_fraction = scenario_f64(key, val);
        } else if (key == "chunk_elements") {
            if (!flag_set("--chunk-elements")) a.chunk_elements = scenario_u64(key, val);
        } else {
            fail(ErrorCode::Config, "unknown scenario key: " + key);
        }
    }
}

std::vector<TensorBuffer> make_rank_inputs(const SimulateArgs& a) {
    std::vector<TensorBuffer> inputs;
    inputs.reserve(a.ranks);
    if (a.distribution.rfind("file:", 0) == 0) {
        TensorBuffer x = read_tensor_file(a.distribution.substr(5));
        inputs.assign(a.ranks, x);  // every rank contributes the same tensor
        return inputs;
    }
    SyntheticSpec spec;
    if (a.distribution == "gaussian") {
        spec.kind = SyntheticKind::Gaussian;
    } else if (a.distribution == "mixture") {
        spec.kind = SyntheticKind::NearZeroMixture;
    } else {
        fail(ErrorCode::Config, "unknown distribution: " + a.distribution);
    }
    spec.n = a.length;
    spec.dense_sigma = a.dense_sigma;
    spec.tail_sigma = a.tail_sigma;
    spec.tail_fraction = a.tail_fraction;
    for (size_t r = 0; r < a.ranks; ++r) {
        spec.seed = a.seed + r;
        inputs.push_back(generate(spec));
    }
    return inputs;
}

Algorithm parse_algorithm(const std::string& name) {
    if (name == "twoshot") return Algorithm::TwoShot;
    if (name == "ring") return Algorithm::Ring;
    if (name == "tree") return Algorithm::Tree;
    fail(ErrorCode::Config, "unknown algorithm: " + name);
}

void run_simulate(SimulateArgs& a, const CLI::App* sub) {
    Stopwatch sw;
    if (!a.scenario.empty()) apply_scenario(a, sub);
    if (a.ranks < 2) fail(ErrorCode::Usage, "allreduce needs at least 2 ranks");

    RankSet rs;
    rs.inputs = make_rank_inputs(a);
    rs.codec = to_config(a.codec, a.codec.codec);
    rs.chunk_elements = a.chunk_elements;

    std::vector<AlgorithmRow> rows;
    if (a.algorithm == "all") {
        rows = error_vs_frequency(rs);
    } else {
        rs.algorithm = parse_algorithm(a.algorithm);
        AllReduceOutcome out = allreduce(rs);
        ErrorReport r = error_report(out.exact, out.result, 1);
        rows.push_back(
            {rs.algorithm, r.relative_l2, out.compress_invocations, out.bytes_on_wire});
    }
    emit_table(a.emit == "json" ? algorithm_table_json(rows) : algorithm_table_csv(rows),
               a.out);
    print_wall_time(sw);
}

// ---- sweep ----

struct SweepArgs {
    InputFlags in;
    CodecFlags codec;
    std::vector<size_t> sizes = {32, 64, 128, 256, 512};
    std::string out;
    std::string emit = "csv";
};

void run_sweep(const SweepArgs& a) {
    Stopwatch sw;
    TensorBuffer x = load_input(a.in);
    CodecConfig base = to_config(a.codec, "taco");
    auto rows = block_size_sweep(x, a.sizes, base);
    emit_table(a.emit == "json" ? sweep_table_json(rows) : sweep_table_csv(rows), a.out);
    print_wall_time(sw);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TACO tensor compression toolkit"};
    app.require_subcommand(1);
    app.add_flag("--deterministic", g_deterministic,
                 "suppress wall-time output for byte-identical reruns");

    CompressArgs ca;
    auto* compress_cmd = app.add_subcommand("compress", "compress a tensor file");
    compress_cmd->fallthrough();
    compress_cmd->add_option("input", ca.input, "input tensor file")->required();
    compress_cmd->add_option("output", ca.output, "output archive path")->required();
    add_codec_flags(compress_cmd, ca.codec);
    compress_cmd->add_flag("--raw", ca.raw, "input is raw little-endian float32");

    DecompressArgs da;
    auto* decompress_cmd = app.add_subcommand("decompress", "decompress an archive");
    decompress_cmd->fallthrough();
    decompress_cmd->add_option("input", da.input, "input archive")->required();
    decompress_cmd->add_option("output", da.output, "output tensor file")->required();
    decompress_cmd->add_option("--compare", da.compare,
                               "tensor file to compare against, prints relative_l2");

    AnalyzeArgs aa;
    auto* analyze_cmd = app.add_subcommand("analyze", "codec error and distribution reports");
    analyze_cmd->fallthrough();
    add_input_flags(analyze_cmd, aa.in);
    add_codec_flags(analyze_cmd, aa.codec);
    analyze_cmd->add_option("--codecs", aa.codecs, "comma-separated codec list")
        ->delimiter(',');
    analyze_cmd->add_option("--bins", aa.bins, "histogram bins");
    analyze_cmd->add_option("--thresholds", aa.thresholds,
                            "report fraction of |x| within these bounds")
        ->delimiter(',');
    analyze_cmd->add_option("--out", aa.out, "write report here instead of stdout");
    analyze_cmd->add_option("--histogram", aa.histogram_out, "write histogram CSV here");
    analyze_cmd->add_option("--emit", aa.emit, "report format")
        ->check(CLI::IsMember({"csv", "json"}));

    SimulateArgs sa;
    auto* simulate_cmd = app.add_subcommand("simulate", "multi-rank allreduce simulation");
    simulate_cmd->fallthrough();
    simulate_cmd->add_option("--ranks", sa.ranks, "world size");
    simulate_cmd->add_option("--length", sa.length, "tensor elements per rank");
    simulate_cmd->add_option("--algorithm", sa.algorithm, "twoshot|ring|tree|all");
    add_codec_flags(simulate_cmd, sa.codec);
    simulate_cmd->add_option("--seed", sa.seed, "base seed, rank r uses seed+r");
    simulate_cmd->add_option("--distribution", sa.distribution,
                             "gaussian|mixture|file:<path>");
    simulate_cmd->add_option("--dense-sigma", sa.dense_sigma, "mixture dense sigma");
    simulate_cmd->add_option("--tail-sigma", sa.tail_sigma, "mixture tail sigma");
    simulate_cmd->add_option("--tail-fraction", sa.tail_fraction, "mixture tail share");
    simulate_cmd->add_option("--chunk-elements", sa.chunk_elements,
                             "split wire messages into chunks of this many elements");
    simulate_cmd->add_option("--scenario", sa.scenario, "key=value scenario file");
    simulate_cmd->add_option("--out", sa.out, "write report here instead of stdout");
    simulate_cmd->add_option("--emit", sa.emit, "report format")
        ->check(CLI::IsMember({"csv", "json"}));

    SweepArgs wa;
    auto* sweep_cmd = app.add_subcommand("sweep", "block-size sweep");
    sweep_cmd->fallthrough();
    add_input_flags(sweep_cmd, wa.in);
    add_codec_flags(sweep_cmd, wa.codec);
    sweep_cmd->add_option("--sizes", wa.sizes, "comma-separated block sizes")
        ->delimiter(',');
    sweep_cmd->add_option("--out", wa.out, "write report here instead of stdout");
    sweep_cmd->add_option("--emit", wa.emit, "report format")
        ->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
        if (compress_cmd->parsed()) run_compress(ca);
        if (decompress_cmd->parsed()) run_decompress(da);
        if (analyze_cmd->parsed()) run_analyze(aa);
        if (simulate_cmd->parsed()) run_simulate(sa, simulate_cmd);
        if (sweep_cmd->parsed()) run_sweep(wa);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error[usage]: " << e.what() << "\n";
        return 2;
    } catch (const taco::Error& e) {
        std::cerr << "error[" << error_code_name(e.code()) << "]: " << e.what() << "\n";
        return (e.code() == ErrorCode::Usage || e.code() == ErrorCode::Config) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
