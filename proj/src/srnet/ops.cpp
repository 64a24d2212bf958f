#include <algorithm>
#include <cmath>

#include "lpsr/errors.hpp"
#include "lpsr/parallel.hpp"
#include "lpsr/srnet.hpp"

namespace lpsr::srnet {

namespace {

struct ConvGeometry {
    int out_c, in_c, kh, kw, out_h, out_w;
};

ConvGeometry conv_geometry(const Tensor4& x, const WeightTensor& w, std::span<const float> bias, int stride, int pad) {
    if (w.dims.size() != 4) throw InvalidArgument("conv2d weights must be rank 4 (out, in, kh, kw)");
    if (stride < 1 || pad < 0) throw InvalidArgument("conv2d needs stride >= 1 and pad >= 0");
    ConvGeometry g{};
    g.out_c = static_cast<int>(w.dims[0]);
    g.in_c = static_cast<int>(w.dims[1]);
    g.kh = static_cast<int>(w.dims[2]);
    g.kw = static_cast<int>(w.dims[3]);
    if (g.in_c != x.channels())
        throw InvalidArgument("conv2d input has " + std::to_string(x.channels()) + " channels, weights expect " +
                              std::to_string(g.in_c));
    if (bias.size() != static_cast<std::size_t>(g.out_c))
        throw InvalidArgument("conv2d bias length " + std::to_string(bias.size()) + " != out channels " +
                              std::to_string(g.out_c));
    const int span_h = x.height() + 2 * pad - g.kh;
    const int span_w = x.width() + 2 * pad - g.kw;
    if (span_h < 0 || span_w < 0 || span_h % stride != 0 || span_w % stride != 0)
        throw InvalidArgument("conv2d output size is not integral for input " + std::to_string(x.height()) + "x" +
                              std::to_string(x.width()) + ", kernel " + std::to_string(g.kh) + "x" +
                              std::to_string(g.kw) + ", stride " + std::to_string(stride) + ", pad " +
                              std::to_string(pad));
    g.out_h = span_h / stride + 1;
    g.out_w = span_w / stride + 1;
    return g;
}

Tensor4 conv_reference(const Tensor4& x, const WeightTensor& w, std::span<const float> bias, int stride, int pad,
                       const ConvGeometry& g) {
    Tensor4 out(x.batch(), g.out_c, g.out_h, g.out_w);
    const int h = x.height();
    const int wd = x.width();
    for (int n = 0; n < x.batch(); ++n)
        for (int o = 0; o < g.out_c; ++o)
            for (int oy = 0; oy < g.out_h; ++oy)
                for (int ox = 0; ox < g.out_w; ++ox) {
                    double acc = bias[static_cast<std::size_t>(o)];
                    for (int i = 0; i < g.in_c; ++i)
                        for (int ky = 0; ky < g.kh; ++ky) {
                            const int iy = oy * stride - pad + ky;
                            if (iy < 0 || iy >= h) continue;
                            for (int kx = 0; kx < g.kw; ++kx) {
                                const int ix = ox * stride - pad + kx;
                                if (ix < 0 || ix >= wd) continue;
                                const std::size_t wi =
                                    ((static_cast<std::size_t>(o) * g.in_c + i) * g.kh + ky) * g.kw + kx;
                                acc += static_cast<double>(w.data[wi]) * x.at(n, i, iy, ix);
                            }
                        }
                    out.at(n, o, oy, ox) = static_cast<float>(acc);
                }
    return out;
}

// im2col: rows are (in_c, ky, kx) taps, columns are output pixels.
void im2col(const Tensor4& x, int n, int stride, int pad, const ConvGeometry& g, std::vector<float>& col) {
    const std::size_t pixels = static_cast<std::size_t>(g.out_h) * g.out_w;
    col.assign(static_cast<std::size_t>(g.in_c) * g.kh * g.kw * pixels, 0.0f);
    const int h = x.height();
    const int wd = x.width();
    std::size_t row = 0;
    for (int i = 0; i < g.in_c; ++i) {
        const auto plane = x.plane(n, i);
        for (int ky = 0; ky < g.kh; ++ky)
            for (int kx = 0; kx < g.kw; ++kx, ++row) {
                float* dst = col.data() + row * pixels;
                for (int oy = 0; oy < g.out_h; ++oy) {
                    const int iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= h) continue;
                    const float* src = plane.data() + static_cast<std::size_t>(iy) * wd;
                    float* d = dst + static_cast<std::size_t>(oy) * g.out_w;
                    for (int ox = 0; ox < g.out_w; ++ox) {
                        const int ix = ox * stride - pad + kx;
                        if (ix >= 0 && ix < wd) d[ox] = src[ix];
                    }
                }
            }
    }
}

Tensor4 conv_optimized(const Tensor4& x, const WeightTensor& w, std::span<const float> bias, int stride, int pad,
                       const ConvGeometry& g, unsigned threads) {
    Tensor4 out(x.batch(), g.out_c, g.out_h, g.out_w);
    const std::size_t pixels = static_cast<std::size_t>(g.out_h) * g.out_w;
    const std::size_t taps = static_cast<std::size_t>(g.in_c) * g.kh * g.kw;
    constexpr std::size_t kPixelBlock = 256;
    constexpr int kChannelBlock = 8;
    std::vector<float> col;
    for (int n = 0; n < x.batch(); ++n) {
        im2col(x, n, stride, pad, g, col);
        const std::size_t blocks = (static_cast<std::size_t>(g.out_c) + kChannelBlock - 1) / kChannelBlock;
        parallel_for(blocks, threads, [&](std::size_t b) {
            const int o_begin = static_cast<int>(b) * kChannelBlock;
            const int o_end = std::min(g.out_c, o_begin + kChannelBlock);
            for (std::size_t p0 = 0; p0 < pixels; p0 += kPixelBlock) {
                const std::size_t p1 = std::min(pixels, p0 + kPixelBlock);
                for (int o = o_begin; o < o_end; ++o) {
                    float* dst = out.plane(n, o).data();
                    const float bo = bias[static_cast<std::size_t>(o)];
                    for (std::size_t p = p0; p < p1; ++p) dst[p] = bo;
                    const float* wrow = w.data.data() + static_cast<std::size_t>(o) * taps;
                    for (std::size_t k = 0; k < taps; ++k) {
                        const float wk = wrow[k];
                        if (wk == 0.0f) continue;
                        const float* src = col.data() + k * pixels;
                        for (std::size_t p = p0; p < p1; ++p) dst[p] += wk * src[p];
                    }
                }
            }
        });
    }
    return out;
}

}  // namespace

Tensor4 conv2d(const Tensor4& x, const WeightTensor& weights, std::span<const float> bias, int stride, int pad,
               const ExecOptions& opts) {
    const ConvGeometry g = conv_geometry(x, weights, bias, stride, pad);
    if (opts.mode == ExecMode::reference) return conv_reference(x, weights, bias, stride, pad, g);
    return conv_optimized(x, weights, bias, stride, pad, g, opts.threads);
}

Tensor4 leaky_relu(Tensor4 x, float slope) {
    for (float& v : x.data())
        if (v < 0.0f) v *= slope;
    return x;
}

Tensor4 relu(Tensor4 x) {
    for (float& v : x.data()) v = std::max(v, 0.0f);
    return x;
}

Tensor4 sigmoid(Tensor4 x) {
    for (float& v : x.data()) v = static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(v))));
    return x;
}

Tensor4 add(Tensor4 a, const Tensor4& b) {
    if (!a.same_shape(b)) throw InvalidArgument("tensor add: shape mismatch");
    auto dst = a.data();
    const auto src = b.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    return a;
}

Tensor4 upsample_nearest2x(const Tensor4& x) {
    Tensor4 out(x.batch(), x.channels(), 2 * x.height(), 2 * x.width());
    for (int n = 0; n < x.batch(); ++n)
        for (int c = 0; c < x.channels(); ++c)
            for (int y = 0; y < out.height(); ++y)
                for (int xx = 0; xx < out.width(); ++xx) out.at(n, c, y, xx) = x.at(n, c, y / 2, xx / 2);
    return out;
}

Tensor4 resize_bilinear(const Tensor4& x, int out_h, int out_w) {
    Tensor4 out(x.batch(), x.channels(), out_h, out_w);
    const double ry = static_cast<double>(x.height()) / out_h;
    const double rx = static_cast<double>(x.width()) / out_w;
    for (int y = 0; y < out_h; ++y) {
        const double sy = std::max(0.0, (y + 0.5) * ry - 0.5);
        const int y0 = std::min(static_cast<int>(sy), x.height() - 1);
        const int y1 = std::min(y0 + 1, x.height() - 1);
        const double fy = sy - y0;
        for (int xx = 0; xx < out_w; ++xx) {
            const double sx = std::max(0.0, (xx + 0.5) * rx - 0.5);
            const int x0 = std::min(static_cast<int>(sx), x.width() - 1);
            const int x1 = std::min(x0 + 1, x.width() - 1);
            const double fx = sx - x0;
            for (int n = 0; n < x.batch(); ++n)
                for (int c = 0; c < x.channels(); ++c) {
                    const double top = (1 - fx) * x.at(n, c, y0, x0) + fx * x.at(n, c, y0, x1);
                    const double bot = (1 - fx) * x.at(n, c, y1, x0) + fx * x.at(n, c, y1, x1);
                    out.at(n, c, y, xx) = static_cast<float>((1 - fy) * top + fy * bot);
                }
        }
    }
    return out;
}

Tensor4 avg_pool2x2(const Tensor4& x) {
    if (x.height() % 2 != 0 || x.width() % 2 != 0) throw InvalidArgument("avg_pool2x2 needs even spatial dims");
    Tensor4 out(x.batch(), x.channels(), x.height() / 2, x.width() / 2);
    for (int n = 0; n < x.batch(); ++n)
        for (int c = 0; c < x.channels(); ++c)
            for (int y = 0; y < out.height(); ++y)
                for (int xx = 0; xx < out.width(); ++xx) {
                    const double s = static_cast<double>(x.at(n, c, 2 * y, 2 * xx)) + x.at(n, c, 2 * y, 2 * xx + 1) +
                                     x.at(n, c, 2 * y + 1, 2 * xx) + x.at(n, c, 2 * y + 1, 2 * xx + 1);
                    out.at(n, c, y, xx) = static_cast<float>(0.25 * s);
                }
    return out;
}

Tensor4 image_to_tensor(const img::Image& image) {
    Tensor4 t(1, image.channels(), image.height(), image.width());
    const auto src = image.samples();
    auto dst = t.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<float>(src[i]);
    return t;
}

img::Image tensor_to_image(const Tensor4& t, int batch_index) {
    if (t.channels() != 1 && t.channels() != 3)
        throw InvalidArgument("tensor_to_image needs 1 or 3 channels, got " + std::to_string(t.channels()));
    img::Image out(t.width(), t.height(), t.channels());
    for (int c = 0; c < t.channels(); ++c) {
        const auto src = t.plane(batch_index, c);
        auto dst = out.plane(c);
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i];
    }
    return out;
}

Tensor4 conv_layer(const Tensor4& x, const WeightStore& store, const std::string& name, int stride, int pad,
                   const ExecOptions& opts) {
    const WeightTensor& w = store.get(name + ".weight");
    const WeightTensor& b = store.get(name + ".bias");
    if (w.dims.size() != 4 || b.dims.size() != 1 || b.dims[0] != w.dims[0])
        throw WeightSchemaError(name + ".weight", "layer '" + name + "' has inconsistent weight/bias shapes");
    if (w.dims[1] != x.channels())
        throw WeightSchemaError(name + ".weight", "layer '" + name + "' expects " + std::to_string(w.dims[1]) +
                                                      " input channels, got " + std::to_string(x.channels()));
    return conv2d(x, w, b.data, stride, pad, opts);
}

}  // namespace lpsr::srnet
