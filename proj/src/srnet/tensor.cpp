#include "lpsr/tensor.hpp"

#include <cmath>
#include <string>

#include "lpsr/errors.hpp"

namespace lpsr::srnet {

namespace {
void check_dims(int n, int c, int h, int w) {
    if (n < 1 || c < 1 || h < 1 || w < 1)
        throw InvalidArgument("tensor dims must be >= 1, got (" + std::to_string(n) + "," + std::to_string(c) + "," +
                              std::to_string(h) + "," + std::to_string(w) + ")");
}
}  // namespace

Tensor4::Tensor4(int n, int c, int h, int w, float fill) : n_(n), c_(c), h_(h), w_(w) {
    check_dims(n, c, h, w);
    data_.assign(static_cast<std::size_t>(n) * c * h * w, fill);
}

Tensor4::Tensor4(int n, int c, int h, int w, std::vector<float> data)
    : n_(n), c_(c), h_(h), w_(w), data_(std::move(data)) {
    check_dims(n, c, h, w);
    if (data_.size() != static_cast<std::size_t>(n) * c * h * w)
        throw InvalidArgument("tensor data length does not match dims");
}

bool Tensor4::all_finite() const noexcept {
    for (float v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace lpsr::srnet
