#include <algorithm>
#include <numeric>

#include "lpsr/errors.hpp"
#include "lpsr/imgcore.hpp"
#include "lpsr/srnet.hpp"

namespace lpsr::srnet {

using nlohmann::json;

namespace {

constexpr float kSlope = 0.2f;

struct GateShape {
    std::string prefix;
    int skip_ch;
    int gate_ch;
};

// att1 gates x2 with x3, att2 gates x1 with the first decoder stage, att3 gates x0.
std::vector<GateShape> gate_shapes(int nf) {
    return {{"att1", 4 * nf, 8 * nf}, {"att2", 2 * nf, 4 * nf}, {"att3", nf, 2 * nf}};
}

int inter_channels(int skip_ch) { return std::max(1, skip_ch / 2); }

}  // namespace

std::string to_string(DiscVariant v) { return v == DiscVariant::plain ? "plain" : "attention"; }

DiscVariant parse_disc_variant(const std::string& s) {
    if (s == "plain") return DiscVariant::plain;
    if (s == "attention") return DiscVariant::attention;
    throw InvalidArgument("unknown discriminator variant '" + s + "'");
}

std::string arch_tag(DiscVariant v) { return v == DiscVariant::plain ? "unet_disc" : "attn_unet_disc"; }

json DiscriminatorConfig::to_json() const { return json{{"in_ch", in_ch}, {"num_feat", num_feat}}; }

DiscriminatorConfig DiscriminatorConfig::from_json(const json& j, DiscVariant variant) {
    DiscriminatorConfig c;
    c.variant = variant;
    try {
        c.in_ch = j.value("in_ch", c.in_ch);
        c.num_feat = j.value("num_feat", c.num_feat);
    } catch (const json::exception& e) {
        throw WeightSchemaError("config", std::string("discriminator config has a wrongly typed field: ") + e.what());
    }
    if (c.in_ch < 1 || c.num_feat < 1) throw WeightSchemaError("config", "discriminator counts must be >= 1");
    return c;
}

std::vector<LayerSpec> discriminator_layout(const DiscriminatorConfig& cfg) {
    std::vector<LayerSpec> layers;
    auto conv = [&](const std::string& name, int out, int in, int k) {
        layers.push_back({name + ".weight", {out, in, k, k}});
        layers.push_back({name + ".bias", {out}});
    };
    const int nf = cfg.num_feat;
    conv("conv0", nf, cfg.in_ch, 3);
    conv("conv1", 2 * nf, nf, 4);
    conv("conv2", 4 * nf, 2 * nf, 4);
    conv("conv3", 8 * nf, 4 * nf, 4);
    conv("conv4", 4 * nf, 8 * nf, 3);
    conv("conv5", 2 * nf, 4 * nf, 3);
    conv("conv6", nf, 2 * nf, 3);
    conv("conv7", nf, nf, 3);
    conv("conv8", nf, nf, 3);
    conv("conv9", 1, nf, 3);
    if (cfg.variant == DiscVariant::attention) {
        for (const auto& g : gate_shapes(nf)) {
            const int inter = inter_channels(g.skip_ch);
            conv(g.prefix + ".theta", inter, g.skip_ch, 1);
            conv(g.prefix + ".phi", inter, g.gate_ch, 1);
            conv(g.prefix + ".psi", 1, inter, 1);
        }
    }
    return layers;
}

void validate_discriminator_weights(const WeightStore& store, const DiscriminatorConfig& cfg) {
    const auto layout = discriminator_layout(cfg);
    for (const auto& l : layout) {
        const WeightTensor* t = store.find(l.name);
        if (!t) throw WeightSchemaError(l.name, "weight schema mismatch: missing layer '" + l.name + "'");
        if (t->dims != l.dims)
            throw WeightSchemaError(l.name, "weight schema mismatch: layer '" + l.name + "' has the wrong shape");
    }
    for (const auto& [name, _] : store.tensors())
        if (std::ranges::none_of(layout, [&](const LayerSpec& l) { return l.name == name; }))
            throw WeightSchemaError(name, "weight schema mismatch: unexpected layer '" + name + "'");
}

Tensor4 attention_gate(const Tensor4& skip, const Tensor4& gate, const WeightStore& store, const std::string& prefix,
                       const ExecOptions& opts) {
    if (gate.batch() != skip.batch() || 2 * gate.height() != skip.height() || 2 * gate.width() != skip.width())
        throw InvalidArgument("attention gate: gating signal must be half the spatial size of the skip tensor");
    const Tensor4 theta = conv_layer(avg_pool2x2(skip), store, prefix + ".theta", 1, 0, opts);
    const Tensor4 phi = conv_layer(gate, store, prefix + ".phi", 1, 0, opts);
    if (!theta.same_shape(phi))
        throw WeightSchemaError(prefix + ".phi.weight", "attention gate '" + prefix + "' branch shapes differ");
    const Tensor4 psi = sigmoid(conv_layer(relu(add(theta, phi)), store, prefix + ".psi", 1, 0, opts));
    if (psi.channels() != 1)
        throw WeightSchemaError(prefix + ".psi.weight", "attention gate '" + prefix + "' psi must have one channel");
    const Tensor4 mask = resize_bilinear(psi, skip.height(), skip.width());

    Tensor4 out = skip;
    for (int n = 0; n < skip.batch(); ++n) {
        const auto m = mask.plane(n, 0);
        for (int c = 0; c < skip.channels(); ++c) {
            auto p = out.plane(n, c);
            for (std::size_t i = 0; i < p.size(); ++i) p[i] *= m[i];
        }
    }
    return out;
}

img::Image unet_discriminator_forward(const img::Image& image, const WeightStore& store, DiscVariant variant,
                                      const ExecOptions& opts) {
    const WeightTensor& w0 = store.get("conv0.weight");
    DiscriminatorConfig cfg;
    cfg.variant = variant;
    cfg.in_ch = static_cast<int>(w0.dims.at(1));
    cfg.num_feat = static_cast<int>(w0.dims.at(0));
    validate_discriminator_weights(store, cfg);
    if (image.width() % 8 != 0 || image.height() % 8 != 0)
        throw InvalidArgument("discriminator input dims must be multiples of 8, got " + std::to_string(image.width()) +
                              "x" + std::to_string(image.height()));

    const img::Image input = cfg.in_ch == 3 ? img::to_rgb(image) : img::to_gray(image);
    const Tensor4 x = image_to_tensor(input);
    auto up = [](const Tensor4& t) { return resize_bilinear(t, 2 * t.height(), 2 * t.width()); };
    auto lconv = [&](const Tensor4& t, const char* name, int stride) {
        return leaky_relu(conv_layer(t, store, name, stride, 1, opts), kSlope);
    };
    const bool gated = variant == DiscVariant::attention;

    const Tensor4 x0 = lconv(x, "conv0", 1);
    const Tensor4 x1 = lconv(x0, "conv1", 2);
    const Tensor4 x2 = lconv(x1, "conv2", 2);
    const Tensor4 x3 = lconv(x2, "conv3", 2);

    const Tensor4 x4 = add(lconv(up(x3), "conv4", 1), gated ? attention_gate(x2, x3, store, "att1", opts) : x2);
    const Tensor4 x5 = add(lconv(up(x4), "conv5", 1), gated ? attention_gate(x1, x4, store, "att2", opts) : x1);
    const Tensor4 x6 = add(lconv(up(x5), "conv6", 1), gated ? attention_gate(x0, x5, store, "att3", opts) : x0);

    Tensor4 out = lconv(x6, "conv7", 1);
    out = lconv(out, "conv8", 1);
    out = sigmoid(conv_layer(out, store, "conv9", 1, 1, opts));
    return tensor_to_image(out);
}

MultiScaleScore multiscale_discriminator_score(const img::Image& image, std::span<const WeightStore* const> stores,
                                               DiscVariant variant, const ExecOptions& opts) {
    if (stores.empty()) throw InvalidArgument("multiscale scoring needs at least one discriminator");
    MultiScaleScore score{{}, 0.0};
    img::Image current = image;
    for (std::size_t s = 0; s < stores.size(); ++s) {
        if (s > 0) current = img::resize(current, current.width() / 2, current.height() / 2, img::Filter::box);
        const img::Image map = unet_discriminator_forward(current, *stores[s], variant, opts);
        const auto v = map.samples();
        score.per_scale.push_back(std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()));
    }
    score.mean = std::accumulate(score.per_scale.begin(), score.per_scale.end(), 0.0) /
                 static_cast<double>(score.per_scale.size());
    return score;
}

}  // namespace lpsr::srnet
