#include <algorithm>
#include <cmath>

#include "lpsr/errors.hpp"
#include "lpsr/imgcore.hpp"
#include "lpsr/srnet.hpp"

namespace lpsr::srnet {

using nlohmann::json;

namespace {
constexpr float kSlope = 0.2f;
}

void GeneratorConfig::validate() const {
    if (in_ch < 1 || out_ch < 1 || num_feat < 1 || num_blocks < 1 || growth < 1)
        throw InvalidArgument("generator config counts must all be >= 1");
    if (scale != 4) throw InvalidArgument("generator scale must be 4, got " + std::to_string(scale));
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidArgument("generator beta must be finite and >= 0");
    if (!(output_scale >= 1.0)) throw InvalidArgument("generator output_scale must be >= 1");
}

json GeneratorConfig::to_json() const {
    return json{{"in_ch", in_ch},   {"out_ch", out_ch}, {"num_feat", num_feat},         {"num_blocks", num_blocks},
                {"growth", growth}, {"scale", scale},   {"beta", beta}, {"output_scale", output_scale}};
}

GeneratorConfig GeneratorConfig::from_json(const json& j) {
    GeneratorConfig c;
    if (!j.is_object()) throw WeightSchemaError("config", "generator config is not a JSON object");
    try {
        c.in_ch = j.value("in_ch", c.in_ch);
        c.out_ch = j.value("out_ch", c.out_ch);
        c.num_feat = j.value("num_feat", c.num_feat);
        c.num_blocks = j.value("num_blocks", c.num_blocks);
        c.growth = j.value("growth", c.growth);
        c.scale = j.value("scale", c.scale);
        c.beta = j.value("beta", c.beta);
        c.output_scale = j.value("output_scale", c.output_scale);
    } catch (const json::exception& e) {
        throw WeightSchemaError("config", std::string("generator config has a wrongly typed field: ") + e.what());
    }
    c.validate();
    return c;
}

GeneratorConfig GeneratorConfig::tiny() {
    GeneratorConfig c;
    c.num_feat = 8;
    c.num_blocks = 2;
    c.growth = 4;
    return c;
}

GeneratorConfig GeneratorConfig::star() {
    GeneratorConfig c;
    c.output_scale = 7.5;
    return c;
}

std::vector<LayerSpec> generator_layout(const GeneratorConfig& cfg) {
    std::vector<LayerSpec> layers;
    auto conv = [&](const std::string& name, int out, int in) {
        layers.push_back({name + ".weight", {out, in, 3, 3}});
        layers.push_back({name + ".bias", {out}});
    };
    const int f = cfg.num_feat;
    const int g = cfg.growth;
    conv("conv_first", f, cfg.in_ch);
    for (int b = 0; b < cfg.num_blocks; ++b)
        for (int r = 1; r <= 3; ++r) {
            const std::string prefix = "body." + std::to_string(b) + ".rdb" + std::to_string(r);
            for (int k = 1; k <= 4; ++k) conv(prefix + ".conv" + std::to_string(k), g, f + (k - 1) * g);
            conv(prefix + ".conv5", f, f + 4 * g);
        }
    conv("conv_body", f, f);
    conv("conv_up1", f, f);
    conv("conv_up2", f, f);
    conv("conv_hr", f, f);
    conv("conv_last", cfg.out_ch, f);
    return layers;
}

namespace {

void validate_layout(const WeightStore& store, const std::vector<LayerSpec>& layout) {
    for (const auto& l : layout) {
        const WeightTensor* t = store.find(l.name);
        if (!t) throw WeightSchemaError(l.name, "weight schema mismatch: missing layer '" + l.name + "'");
        if (t->dims != l.dims) {
            std::string got, want;
            for (auto d : t->dims) got += (got.empty() ? "" : "x") + std::to_string(d);
            for (auto d : l.dims) want += (want.empty() ? "" : "x") + std::to_string(d);
            throw WeightSchemaError(l.name, "weight schema mismatch: layer '" + l.name + "' has shape " + got +
                                                ", expected " + want);
        }
    }
    if (store.tensors().size() != layout.size()) {
        for (const auto& [name, _] : store.tensors())
            if (std::ranges::none_of(layout, [&](const LayerSpec& l) { return l.name == name; }))
                throw WeightSchemaError(name, "weight schema mismatch: unexpected layer '" + name + "'");
    }
}

Tensor4 concat_channels(const std::vector<const Tensor4*>& parts) {
    int c = 0;
    for (const auto* p : parts) c += p->channels();
    const Tensor4& first = *parts.front();
    Tensor4 out(first.batch(), c, first.height(), first.width());
    for (int n = 0; n < first.batch(); ++n) {
        int oc = 0;
        for (const auto* p : parts)
            for (int pc = 0; pc < p->channels(); ++pc, ++oc) std::ranges::copy(p->plane(n, pc), out.plane(n, oc).begin());
    }
    return out;
}

Tensor4 residual(const Tensor4& x, const Tensor4& branch, double beta) {
    Tensor4 out = x;
    auto dst = out.data();
    const auto b = branch.data();
    const float s = static_cast<float>(beta);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += s * b[i];
    return out;
}

}  // namespace

void validate_generator_weights(const WeightStore& store, const GeneratorConfig& cfg) {
    cfg.validate();
    validate_layout(store, generator_layout(cfg));
}

Tensor4 rdb_forward(const Tensor4& x, const WeightStore& store, const std::string& prefix, double beta,
                    const ExecOptions& opts) {
    const WeightTensor& w1 = store.get(prefix + ".conv1.weight");
    if (w1.dims.size() != 4 || w1.dims[1] != x.channels())
        throw WeightSchemaError(prefix + ".conv1.weight", "rdb '" + prefix + "' input channel count mismatch");
    if (beta == 0.0) return x;

    const Tensor4 x1 = leaky_relu(conv_layer(x, store, prefix + ".conv1", 1, 1, opts), kSlope);
    const Tensor4 x2 = leaky_relu(conv_layer(concat_channels({&x, &x1}), store, prefix + ".conv2", 1, 1, opts), kSlope);
    const Tensor4 x3 =
        leaky_relu(conv_layer(concat_channels({&x, &x1, &x2}), store, prefix + ".conv3", 1, 1, opts), kSlope);
    const Tensor4 x4 =
        leaky_relu(conv_layer(concat_channels({&x, &x1, &x2, &x3}), store, prefix + ".conv4", 1, 1, opts), kSlope);
    const Tensor4 x5 = conv_layer(concat_channels({&x, &x1, &x2, &x3, &x4}), store, prefix + ".conv5", 1, 1, opts);
    if (!x5.same_shape(x)) throw WeightSchemaError(prefix + ".conv5.weight", "rdb '" + prefix + "' output shape mismatch");
    return residual(x, x5, beta);
}

Tensor4 rrdb_forward(const Tensor4& x, const WeightStore& store, const std::string& prefix, double beta,
                     const ExecOptions& opts) {
    if (beta == 0.0) {
        // Still reject a store that does not fit the input.
        (void)store.get(prefix + ".rdb1.conv1.weight");
        return x;
    }
    Tensor4 out = rdb_forward(x, store, prefix + ".rdb1", beta, opts);
    out = rdb_forward(out, store, prefix + ".rdb2", beta, opts);
    out = rdb_forward(out, store, prefix + ".rdb3", beta, opts);
    return residual(x, out, beta);
}

Tensor4 generator_forward(const Tensor4& lr, const WeightStore& store, const GeneratorConfig& cfg,
                          const ExecOptions& opts) {
    validate_generator_weights(store, cfg);
    if (lr.channels() != cfg.in_ch)
        throw InvalidArgument("generator expects " + std::to_string(cfg.in_ch) + " input channels, got " +
                              std::to_string(lr.channels()));

    const Tensor4 feat = conv_layer(lr, store, "conv_first", 1, 1, opts);
    Tensor4 body = feat;
    for (int b = 0; b < cfg.num_blocks; ++b) body = rrdb_forward(body, store, "body." + std::to_string(b), cfg.beta, opts);
    body = conv_layer(body, store, "conv_body", 1, 1, opts);
    Tensor4 x = add(body, feat);

    x = leaky_relu(conv_layer(upsample_nearest2x(x), store, "conv_up1", 1, 1, opts), kSlope);
    x = leaky_relu(conv_layer(upsample_nearest2x(x), store, "conv_up2", 1, 1, opts), kSlope);
    x = leaky_relu(conv_layer(x, store, "conv_hr", 1, 1, opts), kSlope);
    x = conv_layer(x, store, "conv_last", 1, 1, opts);
    if (!x.all_finite()) throw InvalidArgument("generator produced non-finite activations");
    return x;
}

img::Image generator_forward(const img::Image& lr, const WeightStore& store, const GeneratorConfig& cfg,
                             const ExecOptions& opts) {
    const img::Image input = cfg.in_ch == 3 ? img::to_rgb(lr) : img::to_gray(lr);
    const Tensor4 out = generator_forward(image_to_tensor(input), store, cfg, opts);
    return tensor_to_image(out).clamped();
}

UpscaleResult upscale_with_generator(const img::Image& lr, const WeightStore& store, const GeneratorConfig& cfg,
                                     int target_w, int target_h, const ExecOptions& opts) {
    img::Image sr = generator_forward(lr, store, cfg, opts);
    if (sr.width() == target_w && sr.height() == target_h) return {std::move(sr), false};
    return {img::resize(sr, target_w, target_h, img::Filter::bicubic).clamped(), true};
}

}  // namespace lpsr::srnet
