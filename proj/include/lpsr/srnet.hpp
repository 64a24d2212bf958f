#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpsr/image.hpp"
#include "lpsr/tensor.hpp"
#include "lpsr/weights.hpp"

namespace lpsr::srnet {

/// reference: scalar loops with double accumulation, single-threaded, ground truth.
/// optimized: im2col + blocked float GEMM, parallel over output channels.
enum class ExecMode { reference, optimized };

struct ExecOptions {
    ExecMode mode = ExecMode::optimized;
    unsigned threads = 1;
};

// ---- primitive ops --------------------------------------------------------

/// Cross-correlation with zero padding. weights is (out, in, kh, kw); bias has
/// `out` entries. Output size (h + 2 pad - kh) / stride + 1 must divide exactly.
Tensor4 conv2d(const Tensor4& x, const WeightTensor& weights, std::span<const float> bias, int stride, int pad,
               const ExecOptions& opts = {});

Tensor4 leaky_relu(Tensor4 x, float slope);
Tensor4 relu(Tensor4 x);
Tensor4 sigmoid(Tensor4 x);
Tensor4 add(Tensor4 a, const Tensor4& b);
Tensor4 upsample_nearest2x(const Tensor4& x);
/// Bilinear resampling with half-pixel centers and edge clamping.
Tensor4 resize_bilinear(const Tensor4& x, int out_h, int out_w);
Tensor4 avg_pool2x2(const Tensor4& x);

Tensor4 image_to_tensor(const img::Image& image);
img::Image tensor_to_image(const Tensor4& t, int batch_index = 0);

/// Convolution layer `name` with weights name.weight / name.bias from `store`.
Tensor4 conv_layer(const Tensor4& x, const WeightStore& store, const std::string& name, int stride, int pad,
                   const ExecOptions& opts);

// ---- generator --------------------------------------------------------------

struct GeneratorConfig {
    int in_ch = 3;
    int out_ch = 3;
    int num_feat = 64;
    int num_blocks = 23;
    int growth = 32;
    int scale = 4;
    double beta = 0.2;          // residual scaling
    double output_scale = 4.0;  // 7.5 resamples the 4x result (approximate path)

    void validate() const;
    nlohmann::json to_json() const;
    static GeneratorConfig from_json(const nlohmann::json& j);

    /// num_feat 8, num_blocks 2, growth 4.
    static GeneratorConfig tiny();
    /// Same trunk as the default, with the 7.5x output path.
    static GeneratorConfig star();
};

struct LayerSpec {
    std::string name;
    std::vector<std::int64_t> dims;
};

/// Every tensor a generator of this config owns, in forward order.
std::vector<LayerSpec> generator_layout(const GeneratorConfig& cfg);

/// Throws WeightSchemaError naming the first missing, mis-shaped or unexpected layer.
void validate_generator_weights(const WeightStore& store, const GeneratorConfig& cfg);

/// Residual dense block at `prefix` (prefix.conv1 .. prefix.conv5).
Tensor4 rdb_forward(const Tensor4& x, const WeightStore& store, const std::string& prefix, double beta,
                    const ExecOptions& opts = {});

/// prefix.rdb1 -> rdb2 -> rdb3, scaled by beta and added to x.
Tensor4 rrdb_forward(const Tensor4& x, const WeightStore& store, const std::string& prefix, double beta,
                     const ExecOptions& opts = {});

/// Raw network output (not clamped), spatial size exactly 4x.
Tensor4 generator_forward(const Tensor4& lr, const WeightStore& store, const GeneratorConfig& cfg,
                          const ExecOptions& opts = {});

/// Image front end: gray input is replicated to 3 channels, output clamped to [0,1].
img::Image generator_forward(const img::Image& lr, const WeightStore& store, const GeneratorConfig& cfg,
                             const ExecOptions& opts = {});

struct UpscaleResult {
    img::Image image;
    bool approximate;  // the result was resampled after 4x inference
};

/// Runs the generator and, when the target differs from 4x (7.5x path or odd
/// HR sizes), resamples the 4x output to target_w x target_h with bicubic.
UpscaleResult upscale_with_generator(const img::Image& lr, const WeightStore& store, const GeneratorConfig& cfg,
                                     int target_w, int target_h, const ExecOptions& opts = {});

// ---- discriminators ---------------------------------------------------------

enum class DiscVariant { plain, attention };

std::string to_string(DiscVariant v);
DiscVariant parse_disc_variant(const std::string& s);
std::string arch_tag(DiscVariant v);

struct DiscriminatorConfig {
    int in_ch = 3;
    int num_feat = 64;
    DiscVariant variant = DiscVariant::plain;

    nlohmann::json to_json() const;
    static DiscriminatorConfig from_json(const nlohmann::json& j, DiscVariant variant);
};

std::vector<LayerSpec> discriminator_layout(const DiscriminatorConfig& cfg);
void validate_discriminator_weights(const WeightStore& store, const DiscriminatorConfig& cfg);

/// psi = sigmoid(psi_conv(relu(theta(avgpool2(skip)) + phi(gate)))), resized to the
/// skip grid; returns skip * psi broadcast over channels. gate must be exactly half
/// the spatial size of skip.
Tensor4 attention_gate(const Tensor4& skip, const Tensor4& gate, const WeightStore& store, const std::string& prefix,
                       const ExecOptions& opts = {});

/// Per-pixel realness in (0,1), same size as the input. Dimensions must be
/// multiples of 8.
img::Image unet_discriminator_forward(const img::Image& image, const WeightStore& store, DiscVariant variant,
                                      const ExecOptions& opts = {});

struct MultiScaleScore {
    std::vector<double> per_scale;  // mean realness at 1, 1/2, 1/4, ...
    double mean;
};

/// Scores the image with one discriminator per scale (box-downscaled by 2^i)
/// and averages the per-scale means.
MultiScaleScore multiscale_discriminator_score(const img::Image& image, std::span<const WeightStore* const> stores,
                                               DiscVariant variant, const ExecOptions& opts = {});

}  // namespace lpsr::srnet
