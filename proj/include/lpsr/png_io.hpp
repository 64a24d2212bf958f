#pragma once

#include <filesystem>

#include "lpsr/image.hpp"

namespace lpsr::img {

/// Reads an 8-bit PNG as 1 (gray) or 3 (color) channels scaled by 1/255.
/// Alpha, if present, is discarded. Throws IoError.
Image read_png(const std::filesystem::path& path);

/// Writes round(clamp(v) * 255) as an 8-bit gray or RGB PNG. Throws IoError.
void write_png(const Image& img, const std::filesystem::path& path);

}  // namespace lpsr::img
