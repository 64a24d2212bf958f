#include "lpsr/image.hpp"

#include <algorithm>
#include <cmath>

#include "lpsr/errors.hpp"

namespace lpsr::img {

namespace {

void check_geometry(int width, int height, int channels) {
    if (width < 1 || height < 1)
        throw InvalidArgument("image dimensions must be >= 1, got " + std::to_string(width) + "x" +
                              std::to_string(height));
    if (channels != 1 && channels != 3)
        throw InvalidArgument("image channels must be 1 or 3, got " + std::to_string(channels));
}

}  // namespace

Image::Image(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
    check_geometry(width, height, channels);
    if (!std::isfinite(fill)) throw InvalidArgument("image fill value is not finite");
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Image::Image(int width, int height, int channels, std::vector<double> samples)
    : width_(width), height_(height), channels_(channels), data_(std::move(samples)) {
    check_geometry(width, height, channels);
    if (data_.size() != static_cast<std::size_t>(width) * height * channels)
        throw InvalidArgument("image sample count " + std::to_string(data_.size()) + " does not match " +
                              std::to_string(width) + "x" + std::to_string(height) + "x" +
                              std::to_string(channels));
    check_finite();
}

void Image::check_finite() const {
    for (std::size_t i = 0; i < data_.size(); ++i)
        if (!std::isfinite(data_[i]))
            throw InvalidArgument("non-finite image sample at index " + std::to_string(i));
}

Image Image::clamped() const {
    Image out = *this;
    for (double& v : out.data_) v = std::clamp(v, 0.0, 1.0);
    return out;
}

Kernel2D::Kernel2D(int size, std::vector<double> taps) : size_(size), taps_(std::move(taps)) {
    if (size < 1 || size % 2 == 0)
        throw InvalidArgument("kernel size must be odd and >= 1, got " + std::to_string(size));
    if (taps_.size() != static_cast<std::size_t>(size) * size)
        throw InvalidArgument("kernel tap count does not match size " + std::to_string(size));
    for (double t : taps_)
        if (!std::isfinite(t)) throw InvalidArgument("non-finite kernel tap");
}

double Kernel2D::sum() const noexcept {
    double s = 0.0;
    for (double t : taps_) s += t;
    return s;
}

Kernel2D Kernel2D::normalized() const {
    const double s = sum();
    if (s == 0.0) throw DegenerateInput("kernel taps sum to zero");
    std::vector<double> taps = taps_;
    for (double& t : taps) t /= s;
    return Kernel2D(size_, std::move(taps));
}

Kernel2D Kernel2D::delta(int size) {
    std::vector<double> taps(static_cast<std::size_t>(size) * size, 0.0);
    taps[taps.size() / 2] = 1.0;
    return Kernel2D(size, std::move(taps));
}

Kernel2D Kernel2D::box(int size) {
    const double w = 1.0 / (static_cast<double>(size) * size);
    return Kernel2D(size, std::vector<double>(static_cast<std::size_t>(size) * size, w));
}

}  // namespace lpsr::img
