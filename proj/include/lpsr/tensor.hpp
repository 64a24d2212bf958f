#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lpsr::srnet {

/// Dense NCHW float tensor; w is the fastest-varying axis.
class Tensor4 {
public:
    Tensor4(int n, int c, int h, int w, float fill = 0.0f);
    Tensor4(int n, int c, int h, int w, std::vector<float> data);

    int batch() const noexcept { return n_; }
    int channels() const noexcept { return c_; }
    int height() const noexcept { return h_; }
    int width() const noexcept { return w_; }
    std::size_t plane_size() const noexcept { return static_cast<std::size_t>(h_) * w_; }
    std::size_t size() const noexcept { return data_.size(); }

    float at(int n, int c, int y, int x) const noexcept { return data_[index(n, c, y, x)]; }
    float& at(int n, int c, int y, int x) noexcept { return data_[index(n, c, y, x)]; }

    std::span<const float> data() const noexcept { return data_; }
    std::span<float> data() noexcept { return data_; }
    /// One (n, c) plane.
    std::span<const float> plane(int n, int c) const noexcept {
        return std::span<const float>(data_).subspan(index(n, c, 0, 0), plane_size());
    }
    std::span<float> plane(int n, int c) noexcept {
        return std::span<float>(data_).subspan(index(n, c, 0, 0), plane_size());
    }

    bool all_finite() const noexcept;
    bool same_shape(const Tensor4& o) const noexcept {
        return n_ == o.n_ && c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
    }

    friend bool operator==(const Tensor4&, const Tensor4&) = default;

private:
    std::size_t index(int n, int c, int y, int x) const noexcept {
        return ((static_cast<std::size_t>(n) * c_ + c) * h_ + y) * w_ + x;
    }

    int n_, c_, h_, w_;
    std::vector<float> data_;
};

}  // namespace lpsr::srnet
