#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lpsr/image.hpp"
#include "lpsr/imgcore.hpp"
#include "lpsr/rng.hpp"

namespace lpsr::degrade {

enum class BlurKind { gaussian_iso, gaussian_aniso, sinc };

std::string to_string(BlurKind k);
BlurKind parse_blur_kind(std::string_view s);

struct BlurSpec {
    BlurKind kind = BlurKind::gaussian_iso;
    double sigma_x = 1.0;  // pixels, > 0
    double sigma_y = 1.0;  // pixels, > 0 (ignored for gaussian_iso)
    double theta = 0.0;    // radians in [0, pi)
    double sinc_cutoff = 1.5707963267948966;  // radians/sample in (0, pi]
    int size = 7;          // odd

    void validate() const;
};

/// Parameter ranges sampled by the second degradation stage and the final sinc filter.
struct StageRanges {
    double sigma_min = 0.2;
    double sigma_max = 1.5;
    double noise_max = 0.02;
    int jpeg_min = 60;
    int jpeg_max = 95;
    double sinc_cutoff_min = 1.0471975511965976;  // pi / 3
    double sinc_cutoff_max = 3.141592653589793;
    int sinc_size = 11;

    void validate() const;
};

struct DegradationConfig {
    double scale_factor = 4.0;
    BlurSpec blur;
    double noise_sigma = 0.0;  // [0, 0.2]
    int jpeg_quality = 100;    // [1, 100]
    bool second_order = false;
    double final_sinc_prob = 0.0;
    std::uint64_t seed = 0;
    img::Filter resize_filter = img::Filter::box;
    StageRanges ranges;

    void validate() const;
};

nlohmann::json to_json(const DegradationConfig& cfg);
/// Missing keys keep their defaults; unknown keys and wrong types throw
/// InvalidArgument naming the key.
DegradationConfig config_from_json(const nlohmann::json& j);
/// Stable hex digest of the canonical JSON form.
std::string config_hash(const DegradationConfig& cfg);

/// "x4-paper" or "x7.5-star".
DegradationConfig preset(std::string_view name);
std::vector<std::string> preset_names();

/// Output geometry floor(w / scale) x floor(h / scale).
std::pair<int, int> output_size(int width, int height, double scale);

img::Kernel2D gaussian_kernel(const BlurSpec& spec);

/// Circular low-pass: tap(r) proportional to cutoff * J1(cutoff * r) / (2 pi r),
/// center cutoff^2 / (4 pi); normalized to unit sum.
img::Kernel2D sinc_kernel(double cutoff, int size);

/// Blur kernel for any BlurSpec kind.
img::Kernel2D blur_kernel(const BlurSpec& spec);

/// Adds i.i.d. N(0, sigma^2) noise; sample i uses draw i of `rng`. Clamps to [0,1].
/// sigma == 0 returns the input untouched.
img::Image add_gaussian_noise(const img::Image& image, double sigma, const CounterRng& rng);

/// Baseline-JPEG pixel damage without entropy coding: 8-bit quantization,
/// YCbCr 4:4:4, 8x8 DCT, Annex K tables scaled by quality, and back.
img::Image jpeg_cycle(const img::Image& image, int quality);

/// Quantization table for a quality setting (luminance when `chroma` is false).
std::vector<int> quant_table(int quality, bool chroma);

/// blur -> resize -> noise -> jpeg, optionally repeated with drawn parameters,
/// optionally followed by a final sinc. All draws come from `rng`.
img::Image degrade_pipeline(const img::Image& image, const DegradationConfig& cfg, const CounterRng& rng);

/// Same, with the stream rooted at cfg.seed.
img::Image degrade_pipeline(const img::Image& image, const DegradationConfig& cfg);

/// Stream for one record: depends only on (cfg.seed, record id).
CounterRng record_stream(const DegradationConfig& cfg, std::string_view record_id);

}  // namespace lpsr::degrade
