#include <cmath>
#include <numbers>

#include "lpsr/degrade.hpp"
#include "lpsr/errors.hpp"

namespace lpsr::degrade {

using std::numbers::pi;

std::string to_string(BlurKind k) {
    switch (k) {
    case BlurKind::gaussian_iso: return "gaussian_iso";
    case BlurKind::gaussian_aniso: return "gaussian_aniso";
    case BlurKind::sinc: return "sinc";
    }
    return "?";
}

BlurKind parse_blur_kind(std::string_view s) {
    if (s == "gaussian_iso") return BlurKind::gaussian_iso;
    if (s == "gaussian_aniso") return BlurKind::gaussian_aniso;
    if (s == "sinc") return BlurKind::sinc;
    throw InvalidArgument("blur.kind: unknown blur kind '" + std::string(s) + "'");
}

void BlurSpec::validate() const {
    if (size < 1 || size % 2 == 0) throw InvalidArgument("blur.size must be odd and >= 1");
    if (kind == BlurKind::sinc) {
        if (!(sinc_cutoff > 0.0 && sinc_cutoff <= pi)) throw InvalidArgument("blur.sinc_cutoff must be in (0, pi]");
        return;
    }
    if (!(sigma_x > 0.0)) throw InvalidArgument("blur.sigma_x must be > 0");
    if (kind == BlurKind::gaussian_aniso && !(sigma_y > 0.0)) throw InvalidArgument("blur.sigma_y must be > 0");
    if (!(theta >= 0.0 && theta < pi)) throw InvalidArgument("blur.theta must be in [0, pi)");
}

img::Kernel2D gaussian_kernel(const BlurSpec& spec) {
    if (spec.kind == BlurKind::sinc) throw InvalidArgument("gaussian_kernel called with a sinc spec");
    spec.validate();
    const double sx = spec.sigma_x;
    const double sy = spec.kind == BlurKind::gaussian_iso ? spec.sigma_x : spec.sigma_y;
    const double c = std::cos(spec.theta);
    const double s = std::sin(spec.theta);
    // Sigma = R diag(sx^2, sy^2) R^T; its inverse is R diag(1/sx^2, 1/sy^2) R^T.
    const double ix = 1.0 / (sx * sx);
    const double iy = 1.0 / (sy * sy);
    const double a = c * c * ix + s * s * iy;
    const double b = c * s * (ix - iy);
    const double d = s * s * ix + c * c * iy;

    const int r = spec.size / 2;
    std::vector<double> taps;
    taps.reserve(static_cast<std::size_t>(spec.size) * spec.size);
    for (int y = -r; y <= r; ++y)
        for (int x = -r; x <= r; ++x) taps.push_back(std::exp(-0.5 * (a * x * x + 2.0 * b * x * y + d * y * y)));
    return img::Kernel2D(spec.size, std::move(taps)).normalized();
}

img::Kernel2D sinc_kernel(double cutoff, int size) {
    if (!(cutoff > 0.0 && cutoff <= pi)) throw InvalidArgument("sinc cutoff must be in (0, pi]");
    if (size < 1 || size % 2 == 0) throw InvalidArgument("sinc kernel size must be odd and >= 1");
    const int r = size / 2;
    std::vector<double> taps;
    taps.reserve(static_cast<std::size_t>(size) * size);
    for (int y = -r; y <= r; ++y) {
        for (int x = -r; x <= r; ++x) {
            if (x == 0 && y == 0) {
                taps.push_back(cutoff * cutoff / (4.0 * pi));
            } else {
                const double rad = std::sqrt(static_cast<double>(x * x + y * y));
                taps.push_back(cutoff * std::cyl_bessel_j(1.0, cutoff * rad) / (2.0 * pi * rad));
            }
        }
    }
    return img::Kernel2D(size, std::move(taps)).normalized();
}

img::Kernel2D blur_kernel(const BlurSpec& spec) {
    if (spec.kind == BlurKind::sinc) {
        spec.validate();
        return sinc_kernel(spec.sinc_cutoff, spec.size);
    }
    return gaussian_kernel(spec);
}

}  // namespace lpsr::degrade
