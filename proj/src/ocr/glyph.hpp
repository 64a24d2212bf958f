#pragma once

#include "lpsr/image.hpp"

namespace lpsr::ocr {

/// Crops to ink (> 0.5) and bilinear-resizes to the cell; an inkless glyph maps to zeros.
img::Image normalize_glyph(const img::Image& glyph, int cell_w, int cell_h);

}  // namespace lpsr::ocr
