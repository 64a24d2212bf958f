#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lpsr::img {

/// Planar multi-channel image with double-precision samples, nominal range
/// [0,1]. Sample (c, y, x) lives at index (c * height + y) * width + x.
/// Constructors reject empty geometry, unsupported channel counts and
/// non-finite samples.
class Image {
public:
    Image(int width, int height, int channels, double fill = 0.0);
    Image(int width, int height, int channels, std::vector<double> samples);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
    std::size_t size() const noexcept { return data_.size(); }

    double at(int c, int y, int x) const noexcept { return data_[index(c, y, x)]; }
    double& at(int c, int y, int x) noexcept { return data_[index(c, y, x)]; }

    std::span<const double> samples() const noexcept { return data_; }
    std::span<double> samples() noexcept { return data_; }
    std::span<const double> plane(int c) const noexcept {
        return std::span<const double>(data_).subspan(static_cast<std::size_t>(c) * pixel_count(), pixel_count());
    }
    std::span<double> plane(int c) noexcept {
        return std::span<double>(data_).subspan(static_cast<std::size_t>(c) * pixel_count(), pixel_count());
    }

    bool same_shape(const Image& o) const noexcept {
        return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
    }

    /// Throws InvalidArgument if any sample is NaN or infinite.
    void check_finite() const;

    /// Copy with every sample clamped to [0,1].
    Image clamped() const;

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t index(int c, int y, int x) const noexcept {
        return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
    }

    int width_;
    int height_;
    int channels_;
    std::vector<double> data_;
};

/// Square odd-sized correlation kernel, taps in row-major order.
class Kernel2D {
public:
    Kernel2D(int size, std::vector<double> taps);

    int size() const noexcept { return size_; }
    int radius() const noexcept { return size_ / 2; }
    /// Tap at offset (dy, dx) from the center, both in [-radius, radius].
    double at(int dy, int dx) const noexcept {
        return taps_[static_cast<std::size_t>(dy + radius()) * size_ + (dx + radius())];
    }
    std::span<const double> taps() const noexcept { return taps_; }
    double sum() const noexcept;

    /// Divides every tap by the sum. Throws DegenerateInput on a zero sum.
    Kernel2D normalized() const;

    static Kernel2D delta(int size = 1);
    static Kernel2D box(int size);

private:
    int size_;
    std::vector<double> taps_;
};

}  // namespace lpsr::img
