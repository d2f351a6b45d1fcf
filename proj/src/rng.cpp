#include "fleetobs/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace fleetobs {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

double RngStream::standard_normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller. u1 in (0,1] so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

double RngStream::gaussian(double mean, double variance) {
    if (variance < 0.0) throw std::domain_error("gaussian: negative variance");
    if (variance == 0.0) return mean;
    return mean + std::sqrt(variance) * standard_normal();
}

RngStream RngStream::child(std::uint64_t seed, std::uint64_t stream_id) {
    return RngStream(splitmix64(seed ^ splitmix64(stream_id + 1)));
}

}  // namespace fleetobs
