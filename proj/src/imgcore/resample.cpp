#include <algorithm>
#include <cmath>
#include <vector>

#include "lpsr/errors.hpp"
#include "lpsr/imgcore.hpp"

namespace lpsr::img {

namespace {

// One output position along an axis: source indices and their weights.
struct Taps {
    std::vector<int> index;
    std::vector<double> weight;
};

double keys_cubic(double t) {
    constexpr double a = -0.5;
    t = std::abs(t);
    if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
    if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
    return 0.0;
}

std::vector<Taps> axis_taps(int in, int out, Filter filter) {
    std::vector<Taps> taps(static_cast<std::size_t>(out));
    const double ratio = static_cast<double>(in) / out;
    auto clampi = [in](int i) { return std::clamp(i, 0, in - 1); };

    for (int d = 0; d < out; ++d) {
        Taps& t = taps[static_cast<std::size_t>(d)];
        switch (filter) {
        case Filter::nearest: {
            t.index.push_back(clampi(static_cast<int>(std::floor((d + 0.5) * ratio))));
            t.weight.push_back(1.0);
            break;
        }
        case Filter::bilinear: {
            const double src = (d + 0.5) * ratio - 0.5;
            const double f = std::floor(src);
            const double frac = src - f;
            const int i0 = static_cast<int>(f);
            t.index = {clampi(i0), clampi(i0 + 1)};
            t.weight = {1.0 - frac, frac};
            break;
        }
        case Filter::bicubic: {
            const double src = (d + 0.5) * ratio - 0.5;
            const double f = std::floor(src);
            const double frac = src - f;
            const int i0 = static_cast<int>(f);
            for (int k = -1; k <= 2; ++k) {
                t.index.push_back(clampi(i0 + k));
                t.weight.push_back(keys_cubic(frac - k));
            }
            break;
        }
        case Filter::box: {
            const double lo = d * ratio;
            const double hi = (d + 1) * ratio;
            double total = 0.0;
            for (int k = static_cast<int>(std::floor(lo)); k < static_cast<int>(std::ceil(hi)); ++k) {
                const double overlap = std::min(hi, k + 1.0) - std::max(lo, static_cast<double>(k));
                if (overlap <= 0.0) continue;
                t.index.push_back(clampi(k));
                t.weight.push_back(overlap);
                total += overlap;
            }
            for (double& w : t.weight) w /= total;
            break;
        }
        }
    }
    return taps;
}

}  // namespace

Filter parse_filter(std::string_view name) {
    if (name == "nearest") return Filter::nearest;
    if (name == "bilinear") return Filter::bilinear;
    if (name == "bicubic") return Filter::bicubic;
    if (name == "box") return Filter::box;
    throw InvalidArgument("unknown resampling filter '" + std::string(name) + "'");
}

std::string to_string(Filter f) {
    switch (f) {
    case Filter::nearest: return "nearest";
    case Filter::bilinear: return "bilinear";
    case Filter::bicubic: return "bicubic";
    case Filter::box: return "box";
    }
    return "?";
}

Image resize(const Image& img, int out_w, int out_h, Filter filter) {
    if (out_w < 1 || out_h < 1)
        throw InvalidArgument("resize target must be >= 1x1, got " + std::to_string(out_w) + "x" +
                              std::to_string(out_h));
    const int in_w = img.width();
    const int in_h = img.height();
    const auto xt = axis_taps(in_w, out_w, filter);
    const auto yt = axis_taps(in_h, out_h, filter);

    Image out(out_w, out_h, img.channels());
    std::vector<double> rows(static_cast<std::size_t>(out_w) * in_h);
    for (int c = 0; c < img.channels(); ++c) {
        const auto src = img.plane(c);
        for (int y = 0; y < in_h; ++y) {
            const double* row = src.data() + static_cast<std::size_t>(y) * in_w;
            for (int x = 0; x < out_w; ++x) {
                const Taps& t = xt[static_cast<std::size_t>(x)];
                double acc = 0.0;
                for (std::size_t k = 0; k < t.index.size(); ++k) acc += t.weight[k] * row[t.index[k]];
                rows[static_cast<std::size_t>(y) * out_w + x] = acc;
            }
        }
        auto dst = out.plane(c);
        for (int y = 0; y < out_h; ++y) {
            const Taps& t = yt[static_cast<std::size_t>(y)];
            for (int x = 0; x < out_w; ++x) {
                double acc = 0.0;
                for (std::size_t k = 0; k < t.index.size(); ++k)
                    acc += t.weight[k] * rows[static_cast<std::size_t>(t.index[k]) * out_w + x];
                dst[static_cast<std::size_t>(y) * out_w + x] = acc;
            }
        }
    }
    return out;
}

}  // namespace lpsr::img
