#pragma once

#include <cstdint>
#include <random>

#include "rgi/tensor.hpp"

namespace rgi {

// Seeded generator with explicit normal/uniform implementations so streams
// are identical across standard libraries (std distributions are not pinned).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(engine_() % n);
    }

    // standard normal via Box-Muller, second draw cached
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    Tensor normal_tensor(Shape shape, double mean = 0.0, double stddev = 1.0);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Independent stream seeds derived from one base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace rgi
