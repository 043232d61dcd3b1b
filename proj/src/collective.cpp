#include "taco/collective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "taco/error.hpp"
#include "taco/serialize.hpp"

namespace taco {

const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::TwoShot: return "twoshot";
        case Algorithm::Ring: return "ring";
        case Algorithm::Tree: return "tree";
    }
    return "?";
}

namespace {

void validate_rank_set(const RankSet& rs) {
    if (rs.inputs.size() < 2)
        fail(ErrorCode::Usage, "allreduce needs at least 2 ranks");
    const size_t n = rs.inputs[0].size();
    if (n == 0) fail(ErrorCode::Input, "input tensor is empty");
    for (const auto& in : rs.inputs)
        if (in.size() != n)
            fail(ErrorCode::Input, "all rank inputs must have the same length");
    validate_config(rs.codec);
}

// fp32 sum over ranks, ascending rank order per element
TensorBuffer exact_sum(const std::vector<TensorBuffer>& inputs) {
    TensorBuffer out = inputs[0];
    for (size_t r = 1; r < inputs.size(); ++r)
        for (size_t i = 0; i < out.size(); ++i) out[i] += inputs[r][i];
    return out;
}

TensorBuffer slice_of(const TensorBuffer& x, size_t at, size_t len) {
    return TensorBuffer(x.begin() + static_cast<ptrdiff_t>(at),
                        x.begin() + static_cast<ptrdiff_t>(at + len));
}

// Wire cost of one rank-to-rank transfer of n elements. Chunking splits the
// payload into independently framed archives; it never changes the numbers.
uint64_t message_bytes(const CodecConfig& cfg, uint64_t n, size_t chunk_elements) {
    if (chunk_elements == 0) return archive_size_bytes(cfg, n);
    const uint64_t b = cfg.block_size;
    uint64_t chunk = ((chunk_elements + b - 1) / b) * b;
    uint64_t total = 0;
    for (uint64_t at = 0; at < n; at += chunk)
        total += archive_size_bytes(cfg, std::min(chunk, n - at));
    return total;
}

struct Tally {
    uint64_t steps = 0;
    uint64_t bytes = 0;
};

// round-trip through the codec: what the receiving rank reconstructs
TensorBuffer through_codec(const TensorBuffer& x, const CodecConfig& cfg) {
    return decompress(compress(x, cfg));
}

// Phase 1: every rank compresses P shard slices and sends P-1 of them out
// (one batched transfer step). Shard owners reduce the decompressed copies in
// ascending rank order, passing their own shard through the codec as well so
// all contributions see the same distortion. Phase 2: owners compress the
// reduced shard and broadcast it; every rank decodes the same archive.
TensorBuffer run_twoshot(const RankSet& rs, Tally& t) {
    const size_t p = rs.inputs.size();
    const size_t n = rs.inputs[0].size();
    const size_t shard = (n + p - 1) / p;
    const size_t padded = shard * p;

    std::vector<std::vector<CompressedTensor>> sharded(p);
    for (size_t r = 0; r < p; ++r) {
        TensorBuffer in = rs.inputs[r];
        in.resize(padded, 0.0f);
        sharded[r].reserve(p);
        for (size_t s = 0; s < p; ++s)
            sharded[r].push_back(compress(slice_of(in, s * shard, shard), rs.codec));
    }
    t.steps += 1;
    t.bytes += static_cast<uint64_t>(p) * (p - 1) *
               message_bytes(rs.codec, shard, rs.chunk_elements);

    TensorBuffer result;
    result.reserve(padded);
    for (size_t s = 0; s < p; ++s) {
        TensorBuffer acc = decompress(sharded[0][s]);
        for (size_t r = 1; r < p; ++r) {
            TensorBuffer part = decompress(sharded[r][s]);
            for (size_t i = 0; i < shard; ++i) acc[i] += part[i];
        }
        CompressedTensor out = compress(acc, rs.codec);
        TensorBuffer reduced = decompress(out);
        result.insert(result.end(), reduced.begin(), reduced.end());
    }
    t.steps += 1;
    t.bytes += static_cast<uint64_t>(p) * (p - 1) *
               message_bytes(rs.codec, shard, rs.chunk_elements);

    result.resize(n);
    return result;
}

// Ascending chain over the whole tensor: rank 0 starts, each hop compresses
// the running partial, the next rank decompresses and adds its own input.
// The last rank compresses the total once; that archive is forwarded around
// the ring unchanged, so every rank decodes identical bytes.
TensorBuffer run_ring(const RankSet& rs, Tally& t) {
    const size_t p = rs.inputs.size();
    const size_t n = rs.inputs[0].size();
    const uint64_t hop = message_bytes(rs.codec, n, rs.chunk_elements);

    TensorBuffer partial = rs.inputs[0];
    for (size_t r = 1; r < p; ++r) {
        partial = through_codec(partial, rs.codec);
        t.steps += 1;
        t.bytes += hop;
        for (size_t i = 0; i < n; ++i) partial[i] += rs.inputs[r][i];
    }

    CompressedTensor final_ct = compress(partial, rs.codec);
    t.steps += p - 1;  // archive forwarded p-1 hops, compressed once
    t.bytes += static_cast<uint64_t>(p - 1) * hop;
    return decompress(final_ct);
}

struct Constituent {
    size_t origin;  // rank whose input this came from
    TensorBuffer values;
};

struct SliceArchive {
    size_t slice;
    CompressedTensor ct;
};

// Recursive halving that carries per-origin constituents instead of summing
// early: each round, ranks swap the half their partner keeps, compressing
// every constituent slice (one batched step per round). After log2(P') rounds
// each rank holds all P constituents over its slice and sums them in
// ascending origin order, so the lossless path matches the sequential sum
// bitwise. Recursive doubling then forwards slice archives compressed once at
// their origin. Non-power-of-two P folds the excess ranks in and out.
TensorBuffer run_tree(const RankSet& rs, Tally& t) {
    const size_t p = rs.inputs.size();
    const size_t n = rs.inputs[0].size();

    size_t p2 = 1;
    while (p2 * 2 <= p) p2 *= 2;
    const size_t excess = p - p2;

    const size_t padded = ((n + p2 - 1) / p2) * p2;
    const size_t slice_len = padded / p2;

    std::vector<std::vector<Constituent>> held(p2);
    for (size_t r = 0; r < p2; ++r) {
        TensorBuffer in = rs.inputs[r];
        in.resize(padded, 0.0f);
        held[r].push_back({r, std::move(in)});
    }

    if (excess > 0) {
        // fold: rank p2+j ships its whole input to rank j as one archive
        for (size_t j = 0; j < excess; ++j) {
            TensorBuffer in = rs.inputs[p2 + j];
            in.resize(padded, 0.0f);
            held[j].push_back({p2 + j, through_codec(in, rs.codec)});
            t.bytes += message_bytes(rs.codec, padded, rs.chunk_elements);
        }
        t.steps += 1;
    }

    size_t range_len = padded;
    for (size_t h = p2 / 2; h >= 1; h /= 2) {
        const size_t half = range_len / 2;
        std::vector<std::vector<Constituent>> incoming(p2);
        for (size_t r = 0; r < p2; ++r) {
            const size_t partner = r ^ h;
            const bool keep_low = (r & h) == 0;
            // partner keeps the opposite half of the shared range
            const size_t send_at = keep_low ? half : 0;
            for (const auto& c : held[r]) {
                TensorBuffer piece = slice_of(c.values, send_at, half);
                incoming[partner].push_back({c.origin, through_codec(piece, rs.codec)});
                t.bytes += message_bytes(rs.codec, half, rs.chunk_elements);
            }
        }
        t.steps += 1;
        for (size_t r = 0; r < p2; ++r) {
            const bool keep_low = (r & h) == 0;
            const size_t keep_at = keep_low ? 0 : half;
            for (auto& c : held[r]) c.values = slice_of(c.values, keep_at, half);
            for (auto& c : incoming[r]) held[r].push_back(std::move(c));
        }
        range_len = half;
        if (h == 1) break;
    }

    // every rank now holds all p origins over its slice [r*slice_len, ...)
    std::vector<SliceArchive> archives(p2);
    for (size_t r = 0; r < p2; ++r) {
        std::sort(held[r].begin(), held[r].end(),
                  [](const Constituent& a, const Constituent& b) { return a.origin < b.origin; });
        TensorBuffer acc = held[r][0].values;
        for (size_t c = 1; c < held[r].size(); ++c)
            for (size_t i = 0; i < slice_len; ++i) acc[i] += held[r][c].values[i];
        archives[r] = {r, compress(acc, rs.codec)};
    }

    // recursive doubling: swap accumulated slice archives, never re-encoding
    std::vector<std::vector<SliceArchive>> gathered(p2);
    for (size_t r = 0; r < p2; ++r) gathered[r].push_back(archives[r]);
    for (size_t h = 1; h < p2; h *= 2) {
        std::vector<std::vector<SliceArchive>> incoming(p2);
        for (size_t r = 0; r < p2; ++r) {
            const size_t partner = r ^ h;
            incoming[partner] = gathered[r];
            t.bytes += static_cast<uint64_t>(gathered[r].size()) *
                       message_bytes(rs.codec, slice_len, rs.chunk_elements);
        }
        t.steps += 1;
        for (size_t r = 0; r < p2; ++r)
            for (auto& a : incoming[r]) gathered[r].push_back(std::move(a));
    }

    if (excess > 0) {
        // unfold: assembled result forwarded to the ranks that folded in
        for (size_t j = 0; j < excess; ++j)
            t.bytes += static_cast<uint64_t>(p2) *
                       message_bytes(rs.codec, slice_len, rs.chunk_elements);
        t.steps += 1;
    }

    auto& mine = gathered[0];
    std::sort(mine.begin(), mine.end(),
              [](const SliceArchive& a, const SliceArchive& b) { return a.slice < b.slice; });
    TensorBuffer result;
    result.reserve(padded);
    for (auto& a : mine) {
        TensorBuffer part = decompress(a.ct);
        result.insert(result.end(), part.begin(), part.end());
    }
    result.resize(n);
    return result;
}

}  // namespace

AllReduceOutcome allreduce(const RankSet& rs) {
    validate_rank_set(rs);
    Tally t;
    TensorBuffer result;
    switch (rs.algorithm) {
        case Algorithm::TwoShot: result = run_twoshot(rs, t); break;
        case Algorithm::Ring: result = run_ring(rs, t); break;
        case Algorithm::Tree: result = run_tree(rs, t); break;
    }
    return {std::move(result), exact_sum(rs.inputs), t.steps, t.bytes};
}

std::vector<AlgorithmRow> error_vs_frequency(const RankSet& rs) {
    std::vector<AlgorithmRow> rows;
    for (Algorithm a : {Algorithm::TwoShot, Algorithm::Ring, Algorithm::Tree}) {
        RankSet run = rs;
        run.algorithm = a;
        AllReduceOutcome out = allreduce(run);
        double num = 0.0, den = 0.0;
        for (size_t i = 0; i < out.result.size(); ++i) {
            const double d = static_cast<double>(out.result[i]) - out.exact[i];
            num += d * d;
            den += static_cast<double>(out.exact[i]) * out.exact[i];
        }
        double rel;
        if (den > 0.0)
            rel = std::sqrt(num / den);
        else
            rel = num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        rows.push_back({a, rel, out.compress_invocations, out.bytes_on_wire});
    }
    // ties happen at p=2, where every schedule needs two steps
    if (rows[0].compress_invocations > rows[1].compress_invocations ||
        rows[0].compress_invocations > rows[2].compress_invocations)
        throw std::logic_error("twoshot must use the fewest compressed steps");
    return rows;
}

}  // namespace taco
