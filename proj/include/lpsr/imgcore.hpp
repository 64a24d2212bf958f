#pragma once

#include <string>
#include <string_view>

#include "lpsr/image.hpp"

namespace lpsr::img {

enum class Filter { nearest, bilinear, bicubic, box };

Filter parse_filter(std::string_view name);
std::string to_string(Filter f);

/// Resamples to out_w x out_h. Sample positions follow the half-pixel-center
/// convention: output index d maps to source coordinate (d + 0.5) * in / out - 0.5.
/// Bilinear and bicubic (Keys, a = -0.5) replicate edge samples; box averages
/// the exact source footprint of each output pixel, weighted by overlap.
Image resize(const Image& img, int out_w, int out_h, Filter filter);

enum class Border { reflect };

/// Per-channel correlation with reflect-101 borders (edge sample not repeated).
Image convolve2d(const Image& img, const Kernel2D& k, Border border = Border::reflect);

/// BT.601 luma for 3-channel input; 1-channel input is returned unchanged.
Image to_gray(const Image& img);

/// Replicates a 1-channel image into three channels; 3-channel input unchanged.
Image to_rgb(const Image& img);

struct Binarization {
    double threshold;  // in [0,1]; samples above it map to 1
    Image binary;
};

/// Otsu threshold over a 256-bin histogram (bin = round(v * 255)).
/// When several splits reach the maximal between-class variance the middle
/// of the plateau is used, so inverting the input mirrors the split.
/// Throws DegenerateInput if no split separates two nonempty classes.
Binarization otsu_binarize(const Image& gray);

/// 3x3 median per channel, reflect-101 borders.
Image median3x3(const Image& img);

/// Sub-image [x, x+w) x [y, y+h). Throws InvalidArgument when out of bounds.
Image crop(const Image& img, int x, int y, int w, int h);

/// 1 - v for every sample.
Image invert(const Image& img);

}  // namespace lpsr::img
