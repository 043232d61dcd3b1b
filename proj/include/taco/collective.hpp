#pragma once

#include <cstdint>
#include <vector>

#include "taco/codec.hpp"

namespace taco {

enum class Algorithm : uint8_t { TwoShot = 0, Ring = 1, Tree = 2 };

const char* algorithm_name(Algorithm a);

struct RankSet {
    std::vector<TensorBuffer> inputs;  // one per rank, equal lengths
    Algorithm algorithm = Algorithm::TwoShot;
    CodecConfig codec;
    size_t chunk_elements = 0;  // optional wire chunking; never affects numerics
};

struct AllReduceOutcome {
    TensorBuffer result;  // identical copy on every rank
    TensorBuffer exact;   // fp32 sum over ranks, ascending rank order
    uint64_t compress_invocations;  // compressed transfer steps in the schedule
    uint64_t bytes_on_wire;         // compressed bytes sent rank-to-rank
};

AllReduceOutcome allreduce(const RankSet& rs);

struct AlgorithmRow {
    Algorithm algorithm;
    double relative_l2;
    uint64_t compress_invocations;
    uint64_t bytes_on_wire;
};

// Same inputs and codec under all three algorithms.
std::vector<AlgorithmRow> error_vs_frequency(const RankSet& rs);

}  // namespace taco
