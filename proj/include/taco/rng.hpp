#pragma once

#include <cstdint>
#include <vector>

namespace taco {

// xoshiro256++ seeded through splitmix64. Self-contained so that generated
// tensors are identical across standard-library implementations.
class Rng {
  public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();
    uint64_t next_below(uint64_t n);  // uniform in [0, n), n > 0
    double next_double();             // uniform in [0, 1)
    double next_normal();             // standard normal, Marsaglia polar

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    uint64_t state_[4];
    bool has_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace taco
