#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "lpsr/image.hpp"

namespace support {

inline std::filesystem::path fixture(const std::string& rel) {
#ifdef LPSR_FIXTURES
    return std::filesystem::path(LPSR_FIXTURES) / rel;
#else
    return std::filesystem::path("tests/fixtures") / rel;
#endif
}

inline lpsr::img::Image random_image(std::mt19937_64& gen, int w, int h, int c, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    lpsr::img::Image img(w, h, c);
    for (double& v : img.samples()) v = u(gen);
    return img;
}

inline int random_int(std::mt19937_64& gen, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(gen);
}

inline double max_abs_diff(const lpsr::img::Image& a, const lpsr::img::Image& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.samples()[i] - b.samples()[i]));
    return m;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("lpsr-test-" + name + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace support
