#include <doctest.h>

#include <cmath>
#include <random>

#include "lpsr/errors.hpp"
#include "lpsr/imgcore.hpp"
#include "lpsr/srnet.hpp"
#include "oracle/net_oracle.hpp"
#include "oracle/support.hpp"

using namespace lpsr::srnet;

namespace {

const ExecOptions kRef{ExecMode::reference, 1};
const ExecOptions kFast{ExecMode::optimized, 1};
const ExecOptions kFast4{ExecMode::optimized, 4};

WeightTensor random_weights(std::mt19937_64& gen, int o, int i, int kh, int kw) {
    std::uniform_real_distribution<float> u(-1, 1);
    WeightTensor w{{o, i, kh, kw}, std::vector<float>(static_cast<std::size_t>(o * i * kh * kw))};
    for (float& v : w.data) v = u(gen);
    return w;
}

Tensor4 random_tensor(std::mt19937_64& gen, int n, int c, int h, int w) {
    std::uniform_real_distribution<float> u(-1, 1);
    Tensor4 t(n, c, h, w);
    for (float& v : t.data()) v = u(gen);
    return t;
}

double max_diff(const Tensor4& a, const Tensor4& b) {
    REQUIRE(a.same_shape(b));
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(static_cast<double>(a.data()[i]) - b.data()[i]));
    return m;
}

WeightStore zeroed(WeightStore s, const std::string& prefix = "") {
    const WeightStore original = s;
    for (const auto& [name, t] : original.tensors()) {
        if (name.rfind(prefix, 0) == 0) std::fill(s.mutable_tensor(name).data.begin(), s.mutable_tensor(name).data.end(), 0.0f);
    }
    return s;
}

const WeightStore& tiny_gen() {
    static const WeightStore s = load_weights(support::fixture("srnet/tiny_gen.srwt"));
    return s;
}

const WeightStore& toy_rrdb() {
    static const WeightStore s = load_weights(support::fixture("srnet/toy_rrdb.srwt"));
    return s;
}

}  // namespace

TEST_CASE("conv2d 1x1 unit kernel is identity") {
    std::mt19937_64 gen(20);
    const Tensor4 x = random_tensor(gen, 1, 1, 5, 7);
    const WeightTensor w{{1, 1, 1, 1}, {1.0f}};
    const std::vector<float> b{0.0f};
    for (const auto& o : {kRef, kFast}) CHECK(conv2d(x, w, b, 1, 0, o) == x);
}

TEST_CASE("conv2d zero weights give the bias") {
    std::mt19937_64 gen(21);
    const Tensor4 x = random_tensor(gen, 2, 3, 6, 4);
    const WeightTensor w{{2, 3, 3, 3}, std::vector<float>(54, 0.0f)};
    const std::vector<float> b{0.25f, -1.5f};
    for (const auto& o : {kRef, kFast}) {
        const Tensor4 y = conv2d(x, w, b, 1, 1, o);
        for (int n = 0; n < 2; ++n)
            for (int c = 0; c < 2; ++c)
                for (float v : y.plane(n, c)) CHECK(v == b[static_cast<std::size_t>(c)]);
    }
}

TEST_CASE("conv2d 3x3 ones kernel on 1..9 gives zero-padded neighborhood sums") {
    Tensor4 x(1, 1, 3, 3);
    for (int i = 0; i < 9; ++i) x.data()[static_cast<std::size_t>(i)] = static_cast<float>(i + 1);
    const WeightTensor w{{1, 1, 3, 3}, std::vector<float>(9, 1.0f)};
    const std::vector<float> b{0.0f};
    // Brute-force enumeration of each 3x3 window over the zero-padded grid.
    float want[9];
    for (int y = 0; y < 3; ++y)
        for (int xx = 0; xx < 3; ++xx) {
            float s = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int yy = y + dy, xc = xx + dx;
                    if (yy >= 0 && yy < 3 && xc >= 0 && xc < 3) s += static_cast<float>(yy * 3 + xc + 1);
                }
            want[y * 3 + xx] = s;
        }
    CHECK(want[0] == 12.0f);
    CHECK(want[4] == 45.0f);
    for (const auto& o : {kRef, kFast}) {
        const Tensor4 y = conv2d(x, w, b, 1, 1, o);
        for (int i = 0; i < 9; ++i) CHECK(y.data()[static_cast<std::size_t>(i)] == want[i]);
    }
}

TEST_CASE("conv2d matches the scalar oracle on random shapes") {
    std::mt19937_64 gen(22);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 1 + 2 * support::random_int(gen, 0, 2) + (trial % 7 == 0 ? 1 : 0);
        const int stride = support::random_int(gen, 1, 2);
        const int pad = support::random_int(gen, 0, k / 2 + (k % 2 == 0 ? 1 : 0));
        int h = support::random_int(gen, k, 12), w = support::random_int(gen, k, 12);
        while ((h + 2 * pad - k) % stride) ++h;
        while ((w + 2 * pad - k) % stride) ++w;
        const int ic = support::random_int(gen, 1, 6), oc = support::random_int(gen, 1, 9);
        const Tensor4 x = random_tensor(gen, 1, ic, h, w);
        const WeightTensor wt = random_weights(gen, oc, ic, k, k);
        std::vector<float> b(static_cast<std::size_t>(oc));
        for (float& v : b) v = std::uniform_real_distribution<float>(-1, 1)(gen);
        const auto ref = oracle::conv(oracle::from_tensor(x), wt, b, stride, pad);
        for (const auto& o : {kRef, kFast, kFast4}) {
            INFO("trial " << trial << " k=" << k << " stride=" << stride << " pad=" << pad);
            CHECK(oracle::max_abs_diff(ref, conv2d(x, wt, b, stride, pad, o)) <= 1e-5);
        }
    }
}

TEST_CASE("conv2d is linear in its input") {
    std::mt19937_64 gen(23);
    for (int trial = 0; trial < 30; ++trial) {
        const int ic = support::random_int(gen, 1, 5), oc = support::random_int(gen, 1, 5);
        const int h = support::random_int(gen, 3, 10), w = support::random_int(gen, 3, 10);
        const Tensor4 x = random_tensor(gen, 1, ic, h, w), y = random_tensor(gen, 1, ic, h, w);
        const WeightTensor wt = random_weights(gen, oc, ic, 3, 3);
        const std::vector<float> zero(static_cast<std::size_t>(oc), 0.0f);
        const float a = std::uniform_real_distribution<float>(-2, 2)(gen);
        const float b = std::uniform_real_distribution<float>(-2, 2)(gen);
        Tensor4 mix(1, ic, h, w);
        for (std::size_t i = 0; i < mix.size(); ++i) mix.data()[i] = a * x.data()[i] + b * y.data()[i];
        for (const auto& o : {kRef, kFast}) {
            const Tensor4 lhs = conv2d(mix, wt, zero, 1, 1, o);
            const Tensor4 cx = conv2d(x, wt, zero, 1, 1, o), cy = conv2d(y, wt, zero, 1, 1, o);
            for (std::size_t i = 0; i < lhs.size(); ++i) REQUIRE(std::abs(lhs.data()[i] - (a * cx.data()[i] + b * cy.data()[i])) <= 1e-5);
        }
    }
}

TEST_CASE("conv2d shape errors") {
    const Tensor4 x(1, 2, 5, 5);
    const WeightTensor w{{1, 3, 3, 3}, std::vector<float>(27, 0.0f)};
    CHECK_THROWS_AS(conv2d(x, w, std::vector<float>{0.0f}, 1, 1), lpsr::InvalidArgument);
    const WeightTensor ok{{1, 2, 3, 3}, std::vector<float>(18, 0.0f)};
    CHECK_THROWS_AS(conv2d(x, ok, std::vector<float>{0.0f, 0.0f}, 1, 1), lpsr::InvalidArgument);
    CHECK_NOTHROW(conv2d(x, ok, std::vector<float>{0.0f}, 2, 0));
    CHECK_THROWS_AS(conv2d(Tensor4(1, 2, 6, 6), ok, std::vector<float>{0.0f}, 2, 0), lpsr::InvalidArgument);
    CHECK_THROWS_AS(conv2d(x, ok, std::vector<float>{0.0f}, 0, 0), lpsr::InvalidArgument);
}

TEST_CASE("leaky relu") {
    Tensor4 x(1, 1, 1, 4, std::vector<float>{-2.0f, -0.5f, 0.0f, 3.0f});
    const Tensor4 y = leaky_relu(x, 0.2f);
    CHECK(y.data()[0] == doctest::Approx(-0.4));
    CHECK(y.data()[1] == doctest::Approx(-0.1));
    CHECK(y.data()[2] == 0.0f);
    CHECK(y.data()[3] == 3.0f);
    CHECK(leaky_relu(x, 1.0f) == x);
    const Tensor4 pos(1, 2, 2, 2, std::vector<float>{0, 1, 2, 3, 4, 5, 6, 7});
    CHECK(leaky_relu(pos, 0.2f) == pos);
}

TEST_CASE("bilinear tensor resize and pooling match the oracle") {
    std::mt19937_64 gen(24);
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor4 x = random_tensor(gen, 1, 3, 2 * support::random_int(gen, 1, 6), 2 * support::random_int(gen, 1, 6));
        const int oh = support::random_int(gen, 1, 20), ow = support::random_int(gen, 1, 20);
        CHECK(oracle::max_abs_diff(oracle::bilinear(oracle::from_tensor(x), oh, ow), resize_bilinear(x, oh, ow)) < 1e-6);
        CHECK(oracle::max_abs_diff(oracle::avgpool2(oracle::from_tensor(x)), avg_pool2x2(x)) < 1e-6);
        CHECK(oracle::max_abs_diff(oracle::upsample_nearest(oracle::from_tensor(x)), upsample_nearest2x(x)) == 0.0);
    }
}

TEST_CASE("rdb: zero weights and beta 0 are identities") {
    std::mt19937_64 gen(25);
    const Tensor4 x = random_tensor(gen, 1, 4, 6, 5);
    const WeightStore zero = zeroed(toy_rrdb());
    for (const auto& o : {kRef, kFast}) {
        CHECK(rdb_forward(x, zero, "rrdb.rdb1", 0.2, o) == x);
        CHECK(rdb_forward(x, toy_rrdb(), "rrdb.rdb1", 0.0, o) == x);
    }
}

TEST_CASE("rrdb: beta 0 is identity, zero weights scale by 1 + beta") {
    std::mt19937_64 gen(26);
    const Tensor4 x = random_tensor(gen, 1, 4, 6, 5);
    for (const auto& o : {kRef, kFast}) CHECK(rrdb_forward(x, toy_rrdb(), "rrdb", 0.0, o) == x);
    // Every dense block passes x through unchanged, so the outer residual
    // adds beta times x itself.
    const WeightStore zero = zeroed(toy_rrdb());
    for (const auto& o : {kRef, kFast}) {
        const Tensor4 y = rrdb_forward(x, zero, "rrdb", 0.2, o);
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.data()[i] == x.data()[i] + 0.2f * x.data()[i]);
    }
}

TEST_CASE("rdb and rrdb match the scalar oracle and the shipped fixture") {
    const TestVector vec = load_test_vector(support::fixture("srnet/toy_rrdb.vector.srwt"));
    const Tensor4& x = vec.tensor("input");
    const auto ox = oracle::from_tensor(x);
    CHECK(oracle::max_abs_diff(oracle::rdb(ox, toy_rrdb(), "rrdb.rdb1", 0.2), vec.tensor("rdb_output")) < 1e-6);
    CHECK(oracle::max_abs_diff(oracle::rrdb(ox, toy_rrdb(), "rrdb", 0.2), vec.tensor("output")) < 1e-6);
    for (const auto& o : {kRef, kFast, kFast4}) {
        CHECK(max_diff(rdb_forward(x, toy_rrdb(), "rrdb.rdb1", 0.2, o), vec.tensor("rdb_output")) <= 1e-5);
        CHECK(max_diff(rrdb_forward(x, toy_rrdb(), "rrdb", 0.2, o), vec.tensor("output")) <= 1e-5);
    }
}

TEST_CASE("rrdb converges to identity as beta shrinks") {
    // C measured on the toy fixture: max|out - in| / beta peaks near 1.05 for beta <= 0.2.
    constexpr double C = 1.1;
    const TestVector vec = load_test_vector(support::fixture("srnet/toy_rrdb.vector.srwt"));
    const Tensor4& x = vec.tensor("input");
    for (double beta : {0.2, 0.1, 0.05, 0.01, 1e-3, 1e-4}) {
        const Tensor4 y = rrdb_forward(x, toy_rrdb(), "rrdb", beta, kRef);
        INFO("beta " << beta);
        CHECK(max_diff(y, x) <= beta * C);
    }
}

TEST_CASE("rdb rejects mismatched weights") {
    const Tensor4 x(1, 5, 4, 4);
    CHECK_THROWS_AS(rdb_forward(x, toy_rrdb(), "rrdb.rdb1", 0.2), lpsr::WeightSchemaError);
    CHECK_THROWS_AS(rdb_forward(Tensor4(1, 4, 4, 4), toy_rrdb(), "missing", 0.2), lpsr::WeightSchemaError);
}

TEST_CASE("tiny-gen reproduces the oracle golden output") {
    const TestVector vec = load_test_vector(support::fixture("srnet/tiny_gen.vector.srwt"));
    const GeneratorConfig cfg = GeneratorConfig::from_json(tiny_gen().config);
    CHECK(cfg.num_feat == 8);
    CHECK(cfg.num_blocks == 2);
    CHECK(cfg.growth == 4);
    const Tensor4& x = vec.tensor("input");
    CHECK(oracle::max_abs_diff(oracle::generator(oracle::from_tensor(x), tiny_gen(), 2, 0.2), vec.tensor("output")) < 1e-6);
    for (const auto& o : {kRef, kFast, kFast4}) {
        const Tensor4 y = generator_forward(x, tiny_gen(), cfg, o);
        CHECK(y.height() == 32);
        CHECK(y.width() == 32);
        CHECK(max_diff(y, vec.tensor("output")) <= 1e-4);
    }
}

TEST_CASE("generator with a zeroed trunk is the head applied to conv_first features") {
    const GeneratorConfig cfg = GeneratorConfig::tiny();
    WeightStore s = zeroed(zeroed(tiny_gen(), "body."), "conv_body.");
    std::mt19937_64 gen(27);
    const Tensor4 x = random_tensor(gen, 1, 3, 5, 7);
    const auto feat = oracle::conv(oracle::from_tensor(x), s, "conv_first", 1, 1);
    const auto want = oracle::generator_head(feat, s);
    for (const auto& o : {kRef, kFast}) CHECK(oracle::max_abs_diff(want, generator_forward(x, s, cfg, o)) <= 1e-5);
}

TEST_CASE("generator with beta 0 skips the trunk blocks exactly") {
    GeneratorConfig cfg = GeneratorConfig::tiny();
    cfg.beta = 0.0;
    GeneratorConfig one = cfg;
    one.num_blocks = 0;
    std::mt19937_64 gen(28);
    const Tensor4 x = random_tensor(gen, 1, 3, 4, 4);
    // With beta 0 every RRDB returns its input, so the trunk is conv_body(feat) + feat.
    const Tensor4 feat = conv_layer(x, tiny_gen(), "conv_first", 1, 1, kRef);
    const Tensor4 trunk = add(conv_layer(feat, tiny_gen(), "conv_body", 1, 1, kRef), feat);
    Tensor4 h = leaky_relu(conv_layer(upsample_nearest2x(trunk), tiny_gen(), "conv_up1", 1, 1, kRef), 0.2f);
    h = leaky_relu(conv_layer(upsample_nearest2x(h), tiny_gen(), "conv_up2", 1, 1, kRef), 0.2f);
    h = leaky_relu(conv_layer(h, tiny_gen(), "conv_hr", 1, 1, kRef), 0.2f);
    h = conv_layer(h, tiny_gen(), "conv_last", 1, 1, kRef);
    CHECK(generator_forward(x, tiny_gen(), cfg, kRef) == h);
}

TEST_CASE("generator output is exactly 4x and finite for any input size") {
    const GeneratorConfig cfg = GeneratorConfig::tiny();
    std::mt19937_64 gen(29);
    for (int trial = 0; trial < 12; ++trial) {
        const int h = support::random_int(gen, 1, 12), w = support::random_int(gen, 1, 16);
        const lpsr::img::Image lr = support::random_image(gen, w, h, trial % 3 == 0 ? 1 : 3);
        const lpsr::img::Image sr = generator_forward(lr, tiny_gen(), cfg);
        CHECK(sr.width() == 4 * w);
        CHECK(sr.height() == 4 * h);
        CHECK(sr.channels() == 3);
        for (double v : sr.samples()) CHECK((v >= 0.0 && v <= 1.0));
        const Tensor4 raw = generator_forward(image_to_tensor(lpsr::img::to_rgb(lr)), tiny_gen(), cfg);
        CHECK(raw.all_finite());
    }
    const lpsr::img::Image plate(30, 10, 3, 0.5);
    const lpsr::img::Image sr = generator_forward(plate, tiny_gen(), cfg);
    CHECK(sr.width() == 120);
    CHECK(sr.height() == 40);
}

TEST_CASE("forward passes are deterministic across modes and thread counts") {
    const GeneratorConfig cfg = GeneratorConfig::tiny();
    std::mt19937_64 gen(30);
    const Tensor4 x = random_tensor(gen, 1, 3, 9, 11);
    const Tensor4 ref1 = generator_forward(x, tiny_gen(), cfg, kRef);
    CHECK(generator_forward(x, tiny_gen(), cfg, kRef) == ref1);
    const Tensor4 fast1 = generator_forward(x, tiny_gen(), cfg, kFast);
    for (unsigned t : {2u, 3u, 8u}) CHECK(generator_forward(x, tiny_gen(), cfg, {ExecMode::optimized, t}) == fast1);
    CHECK(max_diff(fast1, ref1) <= 1e-5);
}

TEST_CASE("generator schema errors name the first offending layer") {
    const GeneratorConfig cfg = GeneratorConfig::tiny();
    WeightStore s;
    s.arch_tag = "rrdb_gen";
    for (const auto& [name, t] : tiny_gen().tensors())
        if (name != "conv_up2.bias") s.add(name, t);
    try {
        generator_forward(lpsr::img::Image(4, 4, 3, 0.5), s, cfg);
        FAIL("expected WeightSchemaError");
    } catch (const lpsr::WeightSchemaError& e) {
        CHECK(e.layer() == "conv_up2.bias");
    }
    GeneratorConfig wide = cfg;
    wide.num_feat = 16;
    CHECK_THROWS_AS(generator_forward(lpsr::img::Image(4, 4, 3, 0.5), tiny_gen(), wide), lpsr::WeightSchemaError);
    GeneratorConfig x3 = cfg;
    x3.scale = 3;
    CHECK_THROWS_AS(x3.validate(), lpsr::InvalidArgument);
}

TEST_CASE("generator layout follows the checkpoint naming") {
    const auto layout = generator_layout(GeneratorConfig{});
    CHECK(layout.front().name == "conv_first.weight");
    CHECK(layout.back().name == "conv_last.bias");
    CHECK(layout.size() == 2 * (1 + 23 * 15 + 5));
    const auto it = std::find_if(layout.begin(), layout.end(), [](const LayerSpec& l) { return l.name == "body.22.rdb3.conv5.weight"; });
    REQUIRE(it != layout.end());
    CHECK(it->dims == std::vector<std::int64_t>{64, 64 + 4 * 32, 3, 3});
}

TEST_CASE("upscale to a non-4x target resamples and flags the result") {
    const GeneratorConfig cfg = GeneratorConfig::tiny();
    const lpsr::img::Image lr(20, 6, 3, 0.4);
    const auto exact = upscale_with_generator(lr, tiny_gen(), cfg, 80, 24);
    CHECK_FALSE(exact.approximate);
    const auto star = upscale_with_generator(lr, tiny_gen(), cfg, 150, 45);
    CHECK(star.approximate);
    CHECK(star.image.width() == 150);
    CHECK(star.image.height() == 45);
}
