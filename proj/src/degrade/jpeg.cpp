#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "lpsr/degrade.hpp"
#include "lpsr/errors.hpp"

namespace lpsr::degrade {

namespace {

constexpr std::array<int, 64> kLuminance = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99,
};

constexpr std::array<int, 64> kChrominance = {
    17, 18, 24, 47, 99, 99, 99, 99,  //
    18, 21, 26, 66, 99, 99, 99, 99,  //
    24, 26, 56, 99, 99, 99, 99, 99,  //
    47, 66, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,
};

using Block = std::array<double, 64>;

// basis[u][x] = alpha(u) cos((2x + 1) u pi / 16), orthonormal.
const std::array<std::array<double, 8>, 8>& dct_basis() {
    static const auto basis = [] {
        std::array<std::array<double, 8>, 8> b{};
        for (int u = 0; u < 8; ++u) {
            const double alpha = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            for (int x = 0; x < 8; ++x)
                b[static_cast<std::size_t>(u)][static_cast<std::size_t>(x)] =
                    alpha * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
        }
        return b;
    }();
    return basis;
}

Block forward_dct(const Block& in) {
    const auto& b = dct_basis();
    Block tmp{};
    Block out{};
    for (int y = 0; y < 8; ++y)
        for (int u = 0; u < 8; ++u) {
            double acc = 0.0;
            for (int x = 0; x < 8; ++x) acc += b[u][x] * in[static_cast<std::size_t>(y * 8 + x)];
            tmp[static_cast<std::size_t>(y * 8 + u)] = acc;
        }
    for (int v = 0; v < 8; ++v)
        for (int u = 0; u < 8; ++u) {
            double acc = 0.0;
            for (int y = 0; y < 8; ++y) acc += b[v][y] * tmp[static_cast<std::size_t>(y * 8 + u)];
            out[static_cast<std::size_t>(v * 8 + u)] = acc;
        }
    return out;
}

Block inverse_dct(const Block& in) {
    const auto& b = dct_basis();
    Block tmp{};
    Block out{};
    for (int v = 0; v < 8; ++v)
        for (int x = 0; x < 8; ++x) {
            double acc = 0.0;
            for (int u = 0; u < 8; ++u) acc += b[u][x] * in[static_cast<std::size_t>(v * 8 + u)];
            tmp[static_cast<std::size_t>(v * 8 + x)] = acc;
        }
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            double acc = 0.0;
            for (int v = 0; v < 8; ++v) acc += b[v][y] * tmp[static_cast<std::size_t>(v * 8 + x)];
            out[static_cast<std::size_t>(y * 8 + x)] = acc;
        }
    return out;
}

// Quantizes one plane (values on the 0..255 scale) in place, blocks padded by edge replication.
void cycle_plane(std::vector<double>& plane, int w, int h, const std::vector<int>& table) {
    Block blk{};
    for (int by = 0; by < h; by += 8) {
        for (int bx = 0; bx < w; bx += 8) {
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x) {
                    const int sy = std::min(by + y, h - 1);
                    const int sx = std::min(bx + x, w - 1);
                    blk[static_cast<std::size_t>(y * 8 + x)] = plane[static_cast<std::size_t>(sy) * w + sx] - 128.0;
                }
            Block coef = forward_dct(blk);
            for (std::size_t i = 0; i < 64; ++i) {
                const double q = table[i];
                coef[i] = std::round(coef[i] / q) * q;
            }
            const Block rec = inverse_dct(coef);
            for (int y = 0; y < 8 && by + y < h; ++y)
                for (int x = 0; x < 8 && bx + x < w; ++x)
                    plane[static_cast<std::size_t>(by + y) * w + bx + x] = rec[static_cast<std::size_t>(y * 8 + x)] + 128.0;
        }
    }
}

double to_byte(double v) { return std::clamp(std::round(v), 0.0, 255.0); }

}  // namespace

std::vector<int> quant_table(int quality, bool chroma) {
    if (quality < 1 || quality > 100) throw InvalidArgument("jpeg_quality must be in [1, 100]");
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    const auto& base = chroma ? kChrominance : kLuminance;
    std::vector<int> table(64);
    for (std::size_t i = 0; i < 64; ++i) table[i] = std::clamp(base[i] * scale / 100, 1, 255);
    return table;
}

img::Image jpeg_cycle(const img::Image& image, int quality) {
    const auto luma = quant_table(quality, false);
    const auto chroma = quant_table(quality, true);
    const int w = image.width();
    const int h = image.height();
    const std::size_t n = image.pixel_count();

    img::Image out(w, h, image.channels());
    if (image.channels() == 1) {
        std::vector<double> y(n);
        const auto src = image.plane(0);
        for (std::size_t i = 0; i < n; ++i) y[i] = to_byte(std::clamp(src[i], 0.0, 1.0) * 255.0);
        cycle_plane(y, w, h, luma);
        auto dst = out.plane(0);
        for (std::size_t i = 0; i < n; ++i) dst[i] = to_byte(y[i]) / 255.0;
        return out;
    }

    std::vector<double> yp(n), cb(n), cr(n);
    const auto rp = image.plane(0);
    const auto gp = image.plane(1);
    const auto bp = image.plane(2);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = to_byte(std::clamp(rp[i], 0.0, 1.0) * 255.0);
        const double g = to_byte(std::clamp(gp[i], 0.0, 1.0) * 255.0);
        const double b = to_byte(std::clamp(bp[i], 0.0, 1.0) * 255.0);
        yp[i] = 0.299 * r + 0.587 * g + 0.114 * b;
        cb[i] = -0.168736 * r - 0.331264 * g + 0.5 * b + 128.0;
        cr[i] = 0.5 * r - 0.418688 * g - 0.081312 * b + 128.0;
    }
    cycle_plane(yp, w, h, luma);
    cycle_plane(cb, w, h, chroma);
    cycle_plane(cr, w, h, chroma);
    auto ro = out.plane(0);
    auto go = out.plane(1);
    auto bo = out.plane(2);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = yp[i];
        const double u = cb[i] - 128.0;
        const double v = cr[i] - 128.0;
        ro[i] = to_byte(y + 1.402 * v) / 255.0;
        go[i] = to_byte(y - 0.344136 * u - 0.714136 * v) / 255.0;
        bo[i] = to_byte(y + 1.772 * u) / 255.0;
    }
    return out;
}

}  // namespace lpsr::degrade
