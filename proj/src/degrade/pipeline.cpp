#include <algorithm>
#include <cmath>
#include <numbers>

#include "lpsr/degrade.hpp"
#include "lpsr/errors.hpp"

namespace lpsr::degrade {

std::pair<int, int> output_size(int width, int height, double scale) {
    if (!(scale > 1.0)) throw InvalidArgument("scale_factor must be > 1");
    // The epsilon absorbs representation error for exact quotients such as 150 / 7.5.
    const int w = static_cast<int>(std::floor(width / scale + 1e-9));
    const int h = static_cast<int>(std::floor(height / scale + 1e-9));
    if (w < 1 || h < 1)
        throw InvalidArgument("degraded size of " + std::to_string(width) + "x" + std::to_string(height) +
                              " at scale " + std::to_string(scale) + " is below 1 pixel");
    return {w, h};
}

img::Image add_gaussian_noise(const img::Image& image, double sigma, const CounterRng& rng) {
    if (!(sigma >= 0.0)) throw InvalidArgument("noise sigma must be >= 0");
    if (sigma == 0.0) return image;
    img::Image out = image;
    auto s = out.samples();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::clamp(s[i] + sigma * rng.normal(i), 0.0, 1.0);
    return out;
}

CounterRng record_stream(const DegradationConfig& cfg, std::string_view record_id) {
    return CounterRng(cfg.seed).split(record_id);
}

namespace {

struct StageParams {
    BlurSpec blur;
    double noise_sigma;
    int jpeg_quality;
};

img::Image run_stage(const img::Image& in, int out_w, int out_h, const StageParams& p, img::Filter filter,
                     const CounterRng& noise_rng) {
    img::Image x = img::convolve2d(in, blur_kernel(p.blur));
    x = img::resize(x, out_w, out_h, filter);
    x = add_gaussian_noise(x, p.noise_sigma, noise_rng);
    if (p.jpeg_quality < 100) x = jpeg_cycle(x, p.jpeg_quality);
    return x;
}

StageParams draw_second_stage(const DegradationConfig& cfg, const CounterRng& rng) {
    const StageRanges& r = cfg.ranges;
    StageParams p;
    p.blur = cfg.blur;
    if (cfg.blur.kind == BlurKind::sinc) {
        p.blur.sinc_cutoff = rng.uniform(0, r.sinc_cutoff_min, r.sinc_cutoff_max);
    } else {
        p.blur.sigma_x = rng.uniform(1, r.sigma_min, r.sigma_max);
        p.blur.sigma_y = rng.uniform(2, r.sigma_min, r.sigma_max);
        p.blur.theta = rng.uniform(3, 0.0, std::numbers::pi);
    }
    p.noise_sigma = rng.uniform(4, 0.0, r.noise_max);
    const int span = r.jpeg_max - r.jpeg_min + 1;
    p.jpeg_quality = r.jpeg_min + std::min(span - 1, static_cast<int>(rng.uniform(5) * span));
    return p;
}

}  // namespace

img::Image degrade_pipeline(const img::Image& image, const DegradationConfig& cfg, const CounterRng& rng) {
    cfg.validate();
    const auto [out_w, out_h] = output_size(image.width(), image.height(), cfg.scale_factor);

    const StageParams first{cfg.blur, cfg.noise_sigma, cfg.jpeg_quality};
    img::Image x = image;
    if (!cfg.second_order) {
        x = run_stage(x, out_w, out_h, first, cfg.resize_filter, rng.split("stage1.noise"));
    } else {
        // The first stage covers sqrt(scale) of the reduction, the second the rest.
        const double mid = std::sqrt(cfg.scale_factor);
        const int mid_w = std::max(out_w, static_cast<int>(std::lround(image.width() / mid)));
        const int mid_h = std::max(out_h, static_cast<int>(std::lround(image.height() / mid)));
        x = run_stage(x, mid_w, mid_h, first, cfg.resize_filter, rng.split("stage1.noise"));
        const StageParams second = draw_second_stage(cfg, rng.split("stage2.params"));
        x = run_stage(x, out_w, out_h, second, cfg.resize_filter, rng.split("stage2.noise"));
    }

    const CounterRng sinc_rng = rng.split("final.sinc");
    if (cfg.final_sinc_prob > 0.0 && sinc_rng.uniform(0) < cfg.final_sinc_prob) {
        const double cutoff = sinc_rng.uniform(1, cfg.ranges.sinc_cutoff_min, cfg.ranges.sinc_cutoff_max);
        x = img::convolve2d(x, sinc_kernel(cutoff, cfg.ranges.sinc_size));
    }
    return x.clamped();
}

img::Image degrade_pipeline(const img::Image& image, const DegradationConfig& cfg) {
    return degrade_pipeline(image, cfg, CounterRng(cfg.seed));
}

}  // namespace lpsr::degrade
