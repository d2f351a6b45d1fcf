#pragma once

#include <cstdint>
#include <random>

namespace fleetobs {

// Seeded random stream. The generator is std::mt19937_64 (bit-exact output
// mandated by the standard) and Gaussian draws use the basic Box-Muller
// transform with a cached spare, so a given seed reproduces the same draw
// sequence on every build of this project.
//
// Streams are single-owner: never share one across concurrent tasks. Use
// child() to derive independent streams for parallel trials.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // N(mean, variance); variance 0 returns the mean exactly.
    // Throws std::domain_error on negative variance.
    double gaussian(double mean, double variance);

    double standard_normal();

    // Independent stream for a numbered subtask (splitmix64 of the pair).
    static RngStream child(std::uint64_t seed, std::uint64_t stream_id);

  private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace fleetobs
