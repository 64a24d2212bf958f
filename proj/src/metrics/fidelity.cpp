#include <cmath>
#include <vector>

#include "lpsr/errors.hpp"
#include "lpsr/imgcore.hpp"
#include "lpsr/metrics.hpp"

namespace lpsr::metrics {

namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;

std::vector<double> window_taps() {
    std::vector<double> g(kWin);
    double s = 0;
    for (int i = 0; i < kWin; ++i) {
        const double d = i - kWin / 2;
        g[i] = std::exp(-d * d / (2 * kSigma * kSigma));
        s += g[i];
    }
    for (double& v : g) v /= s;
    return g;
}

// Gaussian-weighted sum over every valid window position, separably.
std::vector<double> window_filter(std::span<const double> src, int w, int h, const std::vector<double>& g) {
    const int ow = w - kWin + 1, oh = h - kWin + 1;
    std::vector<double> rows(static_cast<std::size_t>(ow) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            double acc = 0;
            for (int k = 0; k < kWin; ++k) acc += g[k] * src[static_cast<std::size_t>(y) * w + x + k];
            rows[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double acc = 0;
            for (int k = 0; k < kWin; ++k) acc += g[k] * rows[static_cast<std::size_t>(y + k) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    return out;
}

}  // namespace

std::optional<double> psnr(const img::Image& ref, const img::Image& test, double peak) {
    if (!ref.same_shape(test)) throw InvalidArgument("psnr: images differ in size or channel count");
    if (!(peak > 0.0)) throw InvalidArgument("psnr: peak must be positive");
    double se = 0;
    const auto a = ref.samples(), b = test.samples();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        se += d * d;
    }
    if (se == 0.0) return std::nullopt;
    const double mse = se / static_cast<double>(a.size());
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const img::Image& ref, const img::Image& test) {
    if (!ref.same_shape(test)) throw InvalidArgument("ssim: images differ in size or channel count");
    if (ref.width() < kWin || ref.height() < kWin)
        throw InvalidArgument("ssim: image smaller than the 11x11 window");
    const img::Image x = img::to_gray(ref), y = img::to_gray(test);
    const int w = x.width(), h = x.height();
    const std::size_t n = x.pixel_count();
    std::vector<double> xx(n), yy(n), xy(n);
    const auto px = x.plane(0), py = y.plane(0);
    for (std::size_t i = 0; i < n; ++i) {
        xx[i] = px[i] * px[i];
        yy[i] = py[i] * py[i];
        xy[i] = px[i] * py[i];
    }
    const auto g = window_taps();
    const auto mx = window_filter(px, w, h, g), my = window_filter(py, w, h, g);
    const auto sxx = window_filter(xx, w, h, g), syy = window_filter(yy, w, h, g), sxy = window_filter(xy, w, h, g);
    constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    double total = 0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
        const double vx = sxx[i] - mx[i] * mx[i], vy = syy[i] - my[i] * my[i], cxy = sxy[i] - mx[i] * my[i];
        total += ((2 * mx[i] * my[i] + c1) * (2 * cxy + c2)) /
                 ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    return total / static_cast<double>(mx.size());
}

}  // namespace lpsr::metrics
