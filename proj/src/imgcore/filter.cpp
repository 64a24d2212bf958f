#include <algorithm>
#include <array>
#include <cmath>

#include "lpsr/errors.hpp"
#include "lpsr/imgcore.hpp"

namespace lpsr::img {

namespace {

// Reflect-101: ... 2 1 | 0 1 2 ... n-1 | n-2 ...
int reflect101(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

int luma_bin(double v) { return static_cast<int>(std::clamp(std::lround(v * 255.0), 0L, 255L)); }

}  // namespace

Image convolve2d(const Image& img, const Kernel2D& k, Border) {
    const int w = img.width();
    const int h = img.height();
    const int r = k.radius();
    std::vector<int> xs(static_cast<std::size_t>(w + 2 * r));
    std::vector<int> ys(static_cast<std::size_t>(h + 2 * r));
    for (int i = -r; i < w + r; ++i) xs[static_cast<std::size_t>(i + r)] = reflect101(i, w);
    for (int i = -r; i < h + r; ++i) ys[static_cast<std::size_t>(i + r)] = reflect101(i, h);

    Image out(w, h, img.channels());
    for (int c = 0; c < img.channels(); ++c) {
        const auto src = img.plane(c);
        auto dst = out.plane(c);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int dy = -r; dy <= r; ++dy) {
                    const double* row = src.data() + static_cast<std::size_t>(ys[static_cast<std::size_t>(y + dy + r)]) * w;
                    for (int dx = -r; dx <= r; ++dx)
                        acc += k.at(dy, dx) * row[xs[static_cast<std::size_t>(x + dx + r)]];
                }
                dst[static_cast<std::size_t>(y) * w + x] = acc;
            }
        }
    }
    return out;
}

Image to_gray(const Image& img) {
    if (img.channels() == 1) return img;
    Image out(img.width(), img.height(), 1);
    const auto r = img.plane(0);
    const auto g = img.plane(1);
    const auto b = img.plane(2);
    auto dst = out.plane(0);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
    return out;
}

Image to_rgb(const Image& img) {
    if (img.channels() == 3) return img;
    Image out(img.width(), img.height(), 3);
    for (int c = 0; c < 3; ++c) std::ranges::copy(img.plane(0), out.plane(c).begin());
    return out;
}

Binarization otsu_binarize(const Image& gray) {
    if (gray.channels() != 1) throw InvalidArgument("otsu_binarize expects a single-channel image");

    std::array<std::int64_t, 256> hist{};
    for (double v : gray.samples()) ++hist[static_cast<std::size_t>(luma_bin(v))];

    const double total = static_cast<double>(gray.size());
    double total_sum = 0.0;
    for (int i = 0; i < 256; ++i) total_sum += static_cast<double>(i) * hist[static_cast<std::size_t>(i)];

    // Between-class variance up to the constant factor 1/N^2, for the split {<= k} | {> k}.
    std::array<double, 255> var{};
    double n0 = 0.0;
    double s0 = 0.0;
    double best = 0.0;
    for (int k = 0; k < 255; ++k) {
        n0 += static_cast<double>(hist[static_cast<std::size_t>(k)]);
        s0 += static_cast<double>(k) * hist[static_cast<std::size_t>(k)];
        const double n1 = total - n0;
        if (n0 == 0.0 || n1 == 0.0) continue;
        const double num = total * s0 - n0 * total_sum;
        var[static_cast<std::size_t>(k)] = num * num / (n0 * n1);
        best = std::max(best, var[static_cast<std::size_t>(k)]);
    }
    if (best <= 0.0) throw DegenerateInput("otsu_binarize: image has a single intensity level");

    int first = -1;
    int last = -1;
    for (int k = 0; k < 255; ++k) {
        if (var[static_cast<std::size_t>(k)] >= best * (1.0 - 1e-12)) {
            if (first < 0) first = k;
            last = k;
        }
    }
    const double split = 0.5 * (first + last);

    Image binary(gray.width(), gray.height(), 1);
    auto dst = binary.plane(0);
    const auto src = gray.plane(0);
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = luma_bin(src[i]) > split ? 1.0 : 0.0;
    return {(split + 0.5) / 255.0, std::move(binary)};
}

Image median3x3(const Image& img) {
    const int w = img.width();
    const int h = img.height();
    Image out(w, h, img.channels());
    std::array<double, 9> win{};
    for (int c = 0; c < img.channels(); ++c) {
        const auto src = img.plane(c);
        auto dst = out.plane(c);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                std::size_t n = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx)
                        win[n++] = src[static_cast<std::size_t>(reflect101(y + dy, h)) * w + reflect101(x + dx, w)];
                std::nth_element(win.begin(), win.begin() + 4, win.end());
                dst[static_cast<std::size_t>(y) * w + x] = win[4];
            }
        }
    }
    return out;
}

Image crop(const Image& img, int x, int y, int w, int h) {
    if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > img.width() || y + h > img.height())
        throw InvalidArgument("crop box (" + std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(w) +
                              "," + std::to_string(h) + ") outside " + std::to_string(img.width()) + "x" +
                              std::to_string(img.height()) + " image");
    Image out(w, h, img.channels());
    for (int c = 0; c < img.channels(); ++c)
        for (int yy = 0; yy < h; ++yy)
            for (int xx = 0; xx < w; ++xx) out.at(c, yy, xx) = img.at(c, y + yy, x + xx);
    return out;
}

Image invert(const Image& img) {
    Image out = img;
    for (double& v : out.samples()) v = 1.0 - v;
    return out;
}

}  // namespace lpsr::img
