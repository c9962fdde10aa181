#pragma once

#include <cstdint>
#include <random>

namespace anytime {

/// Independent random streams owned by one Monte-Carlo run. Every stream of
/// run r is seeded from (master_seed, r, stream) only, so controllers compared
/// under the same master seed see identical availability and disturbance
/// sequences (common random numbers).
enum class Stream : std::uint64_t {
    availability = 1,
    disturbance = 2,
    initial_state = 3,
};

/// SplitMix64 finalizer applied to the triple; used to decorrelate seeds.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t run_index, Stream stream);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal(double mean, double stddev) {
        return normal_(engine_, std::normal_distribution<double>::param_type(mean, stddev));
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

}  // namespace anytime
