#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lpsr/errors.hpp"
#include "lpsr/imgcore.hpp"
#include "lpsr/ocr.hpp"
#include "glyph.hpp"

namespace lpsr::ocr {
namespace {

using Bitmap = std::array<const char*, 7>;

// 5x7 design, indexed like kAlphabet.
constexpr std::array<Bitmap, kAlphabet.size()> kFont = {{
    {".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."},  // 0
    {"..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."},  // 1
    {".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"},  // 2
    {"#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."},  // 3
    {"...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."},  // 4
    {"#####", "#....", "####.", "....#", "....#", "#...#", ".###."},  // 5
    {"..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."},  // 6
    {"#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."},  // 7
    {".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."},  // 8
    {".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."},  // 9
    {".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"},  // A
    {"####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."},  // B
    {".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."},  // C
    {"####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."},  // D
    {"#####", "#....", "#....", "####.", "#....", "#....", "#####"},  // E
    {"#####", "#....", "#....", "####.", "#....", "#....", "#...."},  // F
    {".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".####"},  // G
    {"#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"},  // H
    {".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."},  // I
    {"..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."},  // J
    {"#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"},  // K
    {"#....", "#....", "#....", "#....", "#....", "#....", "#####"},  // L
    {"#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"},  // M
    {"#...#", "#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#"},  // N
    {".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."},  // O
    {"####.", "#...#", "#...#", "####.", "#....", "#....", "#...."},  // P
    {".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"},  // Q
    {"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"},  // R
    {".####", "#....", "#....", ".###.", "....#", "....#", "####."},  // S
    {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."},  // T
    {"#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."},  // U
    {"#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."},  // V
    {"#...#", "#...#", "#...#", "#.#.#", "#.#.#", "#.#.#", ".#.#."},  // W
    {"#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"},  // X
    {"#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."},  // Y
    {"#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"},  // Z
}};

constexpr int kDesignW = 5;
constexpr int kDesignH = 7;

std::size_t glyph_index(char c) {
    const auto pos = kAlphabet.find(c);
    if (pos == std::string_view::npos) {
        throw InvalidArgument(std::string("no glyph for character '") + c + "'");
    }
    return pos;
}

// Design bitmap with diagonal-only contacts bridged so every glyph is 4-connected.
std::array<std::array<bool, kDesignW>, kDesignH> design(const Bitmap& rows) {
    std::array<std::array<bool, kDesignW>, kDesignH> g{};
    for (int y = 0; y < kDesignH; ++y) {
        for (int x = 0; x < kDesignW; ++x) g[y][x] = rows[y][x] == '#';
    }
    for (int y = 0; y + 1 < kDesignH; ++y) {
        for (int x = 0; x + 1 < kDesignW; ++x) {
            if (g[y][x] && g[y + 1][x + 1] && !g[y][x + 1] && !g[y + 1][x]) g[y + 1][x] = true;
            if (g[y][x + 1] && g[y + 1][x] && !g[y][x] && !g[y + 1][x + 1]) g[y + 1][x + 1] = true;
        }
    }
    return g;
}

// Design cell -> pixel edges. Even columns and rows 0/3/6 carry most strokes
// and get the larger share so stroke ends are stable under the 3x3 median.
std::vector<int> edges(int pixels, std::initializer_list<int> weights) {
    int total = 0;
    for (int w : weights) total += w;
    std::vector<int> out{0};
    int acc = 0;
    for (int w : weights) {
        acc += w;
        out.push_back(static_cast<int>(std::lround(static_cast<double>(pixels) * acc / total)));
    }
    return out;
}

img::Image rasterize(const Bitmap& rows, int cell_w, int cell_h) {
    const auto g = design(rows);
    const auto xe = edges(cell_w, {2, 1, 2, 1, 2});
    const auto ye = edges(cell_h, {4, 3, 3, 4, 3, 3, 4});
    // Two pixels of background on each side so the median sees clean borders.
    constexpr int pad = 2;
    img::Image out(cell_w + 2 * pad, cell_h + 2 * pad, 1, 0.0);
    for (int sy = 0; sy < kDesignH; ++sy)
        for (int sx = 0; sx < kDesignW; ++sx)
            if (g[sy][sx])
                for (int y = ye[sy]; y < ye[sy + 1]; ++y)
                    for (int x = xe[sx]; x < xe[sx + 1]; ++x) out.at(0, y + pad, x + pad) = 1.0;
    for (int iter = 0; iter < 64; ++iter) {
        img::Image next = img::median3x3(out);
        if (next == out) break;
        out = std::move(next);
    }
    return img::crop(out, pad, pad, cell_w, cell_h);
}

struct InkBox {
    int x0, y0, x1, y1;  // inclusive
};

std::optional<InkBox> ink_box(const img::Image& g) {
    InkBox b{g.width(), g.height(), -1, -1};
    for (int y = 0; y < g.height(); ++y) {
        for (int x = 0; x < g.width(); ++x) {
            if (g.at(0, y, x) > 0.5) {
                b.x0 = std::min(b.x0, x);
                b.y0 = std::min(b.y0, y);
                b.x1 = std::max(b.x1, x);
                b.y1 = std::max(b.y1, y);
            }
        }
    }
    if (b.x1 < 0) return std::nullopt;
    return b;
}

}  // namespace

img::Image normalize_glyph(const img::Image& glyph, int cell_w, int cell_h) {
    const img::Image gray = img::to_gray(glyph);
    const auto box = ink_box(gray);
    if (!box) return img::Image(cell_w, cell_h, 1, 0.0);
    const img::Image ink = img::crop(gray, box->x0, box->y0, box->x1 - box->x0 + 1, box->y1 - box->y0 + 1);
    return img::resize(ink, cell_w, cell_h, img::Filter::bilinear);
}

FontAtlas FontAtlas::builtin(int cell_w, int cell_h) {
    if (cell_w < kDesignW || cell_h < kDesignH) {
        throw InvalidArgument("font cell must be at least 5x7, got " + std::to_string(cell_w) + "x" +
                              std::to_string(cell_h));
    }
    FontAtlas atlas(cell_w, cell_h);
    for (const auto& rows : kFont) {
        atlas.glyphs_.push_back(rasterize(rows, cell_w, cell_h));
        atlas.templates_.push_back(normalize_glyph(atlas.glyphs_.back(), cell_w, cell_h));
    }
    return atlas;
}

const img::Image& FontAtlas::glyph(char c) const { return glyphs_[glyph_index(c)]; }

const img::Image& FontAtlas::match_template(char c) const { return templates_[glyph_index(c)]; }

img::Image render_plate(std::string_view text, const FontAtlas& atlas, const RenderStyle& style) {
    if (text.empty()) throw InvalidArgument("render_plate: empty text");
    if (std::count(text.begin(), text.end(), '-') > 1) throw InvalidArgument("render_plate: more than one '-'");
    if (style.margin < 2 || style.gap < 0) throw InvalidArgument("render_plate: margin must be >= 2 and gap >= 0");

    const int cw = atlas.cell_w();
    const int ch = atlas.cell_h();
    const int dash_w = std::max(3, cw / 2);
    const auto extra_gap = [&](std::size_t i) {
        return i < style.gap_jitter.size() ? std::max(0, style.gap_jitter[i]) : 0;
    };
    const auto lift = [&](std::size_t i) {
        const int j = i < style.baseline_jitter.size() ? style.baseline_jitter[i] : 0;
        return std::clamp(j, -(style.margin - 1), style.margin - 1);
    };

    int width = 2 * style.margin;
    for (std::size_t i = 0; i < text.size(); ++i) {
        width += text[i] == '-' ? dash_w : cw;
        if (i + 1 < text.size()) width += style.gap + extra_gap(i);
    }
    const int height = ch + 2 * style.margin;

    img::Image mask(width, height, 1, 0.0);
    int x = style.margin;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '-') {
            const int bar_h = std::max(2, ch / 8);
            const int y0 = style.margin + (ch - bar_h) / 2;
            for (int y = y0; y < y0 + bar_h; ++y) {
                for (int dx = 0; dx < dash_w; ++dx) mask.at(0, y, x + dx) = 1.0;
            }
            x += dash_w;
        } else {
            const img::Image& g = atlas.glyph(c);
            const int y0 = style.margin + lift(i);
            for (int y = 0; y < ch; ++y) {
                for (int dx = 0; dx < cw; ++dx) {
                    if (g.at(0, y, dx) > 0.5) mask.at(0, y0 + y, x + dx) = 1.0;
                }
            }
            x += cw;
        }
        if (i + 1 < text.size()) x += style.gap + extra_gap(i);
    }

    img::Image out(width, height, 3, 0.0);
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < height; ++y) {
            for (int xx = 0; xx < width; ++xx) {
                out.at(c, y, xx) = mask.at(0, y, xx) > 0.5 ? style.ink : style.background;
            }
        }
    }
    return out;
}

}  // namespace lpsr::ocr
