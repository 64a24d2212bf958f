#include "lpsr/rng.hpp"

#include <cmath>
#include <numbers>

#include "lpsr/hash.hpp"

namespace lpsr {

double CounterRng::normal(std::uint64_t i) const noexcept {
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform(2 * i);
    const double u2 = uniform(2 * i + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

CounterRng CounterRng::split(std::string_view tag) const noexcept {
    return split(fnv1a64(tag));
}

}  // namespace lpsr
