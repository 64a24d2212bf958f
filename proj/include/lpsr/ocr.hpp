#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lpsr/image.hpp"

namespace lpsr::ocr {

/// Characters the recognizer knows, in ordinal (ASCII) order.
inline constexpr std::string_view kAlphabet = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";

struct PlateString {
    std::string text;  // ^[A-Z0-9]+(-[A-Z0-9]+)?$, or empty with confidence 0
    std::string raw;   // unnormalized engine output
    double confidence = 0.0;
    bool no_pattern = false;  // no plate pattern matched; text is the filtered raw string

    bool empty() const noexcept { return text.empty(); }
    static bool valid_text(std::string_view text);
};

/// Connected component: bounding box in the source image and its binary mask.
struct CharBox {
    int x, y, w, h;
    img::Image glyph;
};

/// One binary bitmap per character in kAlphabet, each cell_w x cell_h.
class FontAtlas {
public:
    /// Built-in 5x7 design scaled to the cell and smoothed until it is a fixed
    /// point of the 3x3 median, so clean renders survive preprocessing unchanged.
    static FontAtlas builtin(int cell_w = 16, int cell_h = 24);

    int cell_w() const noexcept { return cell_w_; }
    int cell_h() const noexcept { return cell_h_; }
    const img::Image& glyph(char c) const;
    /// Glyph cropped to its ink and resized to the cell: what match_char compares against.
    const img::Image& match_template(char c) const;

private:
    FontAtlas(int cell_w, int cell_h) : cell_w_(cell_w), cell_h_(cell_h) {}

    int cell_w_;
    int cell_h_;
    std::vector<img::Image> glyphs_;
    std::vector<img::Image> templates_;
};

/// Plate layouts over {L, N, -}: L a letter, N a digit, '-' the group boundary.
class PatternSet {
public:
    explicit PatternSet(std::vector<std::string> patterns);
    /// New 7-character format LLL-NNNN and the older 6-character LL-NNNN / NNNN-LL.
    static PatternSet taiwan();
    /// JSON list of pattern strings.
    static PatternSet load(const std::filesystem::path& path);

    const std::vector<std::string>& patterns() const noexcept { return patterns_; }

private:
    std::vector<std::string> patterns_;
};

/// to_gray -> 3x3 median -> Otsu -> foreground (minority class) set to 1.
/// Returns nullopt for an image with no separable content.
std::optional<img::Image> preprocess_plate(const img::Image& image);

/// 4-connected components of a binary image, filtered by area (0.5% .. 40% of
/// the image) and aspect h/w in [0.8, 6], ordered by left edge.
std::vector<CharBox> segment_chars(const img::Image& binary);

struct CharMatch {
    char ch;       // '?' when the glyph is empty
    double score;  // normalized cross-correlation in [-1, 1]
};

/// NCC of the glyph (cropped to ink, bilinear-resized to the cell) against
/// every template, indexed like kAlphabet.
std::array<double, kAlphabet.size()> match_scores(const img::Image& glyph, const FontAtlas& atlas);

/// Best template; ties go to the lower character ordinal.
CharMatch match_char(const img::Image& glyph, const FontAtlas& atlas);

/// Fits the characters to the best pattern, swapping confusables
/// (O/0, I/1, B/8, S/5, Z/2) only where a position has the wrong class.
PlateString postprocess_plate(std::span<const CharMatch> chars, const PatternSet& patterns);

/// Normalizes free text (e.g. external OCR output) through postprocess_plate,
/// with each character scored 1.
PlateString normalize_text(std::string_view raw, const PatternSet& patterns);

PlateString recognize_builtin(const img::Image& image, const FontAtlas& atlas, const PatternSet& patterns);

struct AdapterOptions {
    std::string command;  // template containing {img}
    std::chrono::milliseconds timeout{30000};
};

/// Writes the image to a private temp PNG, runs the adapter and parses the
/// first stdout line. Throws AdapterFailure on spawn failure, timeout or nonzero exit.
PlateString recognize_external(const img::Image& image, const AdapterOptions& adapter, const PatternSet& patterns);

struct RenderStyle {
    double background = 0.95;
    double ink = 0.05;
    int margin = 8;
    int gap = 3;                       // pixels between glyph cells
    std::vector<int> gap_jitter;       // optional per-gap extra pixels
    std::vector<int> baseline_jitter;  // optional per-glyph vertical offsets in [-margin+1, margin-1]
};

/// Renders plate text (A-Z, 0-9 and at most one '-') with the atlas glyphs on a
/// flat 3-channel plate.
img::Image render_plate(std::string_view text, const FontAtlas& atlas, const RenderStyle& style = {});

}  // namespace lpsr::ocr
