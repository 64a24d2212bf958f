#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <json.hpp>

#include "glyph.hpp"
#include "lpsr/errors.hpp"
#include "lpsr/imgcore.hpp"
#include "lpsr/ocr.hpp"

namespace lpsr::ocr {
namespace {

char letter_for_digit(char c) {
    switch (c) {
        case '0': return 'O';
        case '1': return 'I';
        case '8': return 'B';
        case '5': return 'S';
        case '2': return 'Z';
        default: return 0;
    }
}

char digit_for_letter(char c) {
    switch (c) {
        case 'O': return '0';
        case 'I': return '1';
        case 'B': return '8';
        case 'S': return '5';
        case 'Z': return '2';
        default: return 0;
    }
}

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

struct Fit {
    std::string text;
    int substitutions;
};

std::optional<Fit> fit_pattern(std::string_view chars, std::string_view pattern) {
    std::string classes;
    for (char p : pattern) {
        if (p != '-') classes.push_back(p);
    }
    if (classes.size() != chars.size()) return std::nullopt;
    Fit fit{"", 0};
    std::size_t k = 0;
    for (char p : pattern) {
        if (p == '-') {
            fit.text.push_back('-');
            continue;
        }
        char c = chars[k++];
        if (p == 'L' && !is_upper(c)) {
            const char sub = letter_for_digit(c);
            if (!sub) return std::nullopt;
            c = sub;
            ++fit.substitutions;
        } else if (p == 'N' && !is_digit(c)) {
            const char sub = digit_for_letter(c);
            if (!sub) return std::nullopt;
            c = sub;
            ++fit.substitutions;
        }
        fit.text.push_back(c);
    }
    return fit;
}

void validate_pattern(const std::string& p) {
    const auto dashes = std::count(p.begin(), p.end(), '-');
    const bool symbols_ok = std::all_of(p.begin(), p.end(), [](char c) { return c == 'L' || c == 'N' || c == '-'; });
    if (!symbols_ok || dashes > 1 || p.empty() || p.front() == '-' || p.back() == '-') {
        throw InvalidArgument("invalid plate pattern '" + p + "': expected L/N groups joined by at most one '-'");
    }
}

}  // namespace

bool PlateString::valid_text(std::string_view text) {
    if (text.empty()) return false;
    const auto dash = text.find('-');
    if (dash != std::string_view::npos && (dash == 0 || dash + 1 == text.size() || text.find('-', dash + 1) != std::string_view::npos)) {
        return false;
    }
    return std::all_of(text.begin(), text.end(), [](char c) { return is_upper(c) || is_digit(c) || c == '-'; });
}

PatternSet::PatternSet(std::vector<std::string> patterns) : patterns_(std::move(patterns)) {
    if (patterns_.empty()) throw InvalidArgument("pattern set is empty");
    for (const auto& p : patterns_) validate_pattern(p);
}

PatternSet PatternSet::taiwan() { return PatternSet({"LLL-NNNN", "LL-NNNN", "NNNN-LL"}); }

PatternSet PatternSet::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open pattern file " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument("pattern file " + path.string() + ": " + e.what());
    }
    if (!j.is_array()) throw InvalidArgument("pattern file " + path.string() + ": expected a JSON list of strings");
    std::vector<std::string> out;
    for (const auto& item : j) {
        if (!item.is_string()) throw InvalidArgument("pattern file " + path.string() + ": non-string entry");
        out.push_back(item.get<std::string>());
    }
    return PatternSet(std::move(out));
}

std::optional<img::Image> preprocess_plate(const img::Image& image) {
    image.check_finite();
    const img::Image smooth = img::median3x3(img::to_gray(image));
    img::Binarization bin{0.0, smooth};
    try {
        bin = img::otsu_binarize(smooth);
    } catch (const DegenerateInput&) {
        return std::nullopt;
    }
    img::Image& b = bin.binary;
    const auto px = b.samples();
    const auto ones = static_cast<std::size_t>(std::count_if(px.begin(), px.end(), [](double v) { return v > 0.5; }));
    const std::size_t zeros = px.size() - ones;
    bool flip = ones > zeros;
    if (ones == zeros) {
        std::size_t border = 0;
        std::size_t border_ones = 0;
        for (int y = 0; y < b.height(); ++y) {
            for (int x = 0; x < b.width(); ++x) {
                if (y != 0 && x != 0 && y + 1 != b.height() && x + 1 != b.width()) continue;
                ++border;
                if (b.at(0, y, x) > 0.5) ++border_ones;
            }
        }
        flip = 2 * border_ones > border;
    }
    if (flip) return img::invert(b);
    return b;
}

std::vector<CharBox> segment_chars(const img::Image& binary) {
    if (binary.channels() != 1) throw InvalidArgument("segment_chars expects a 1-channel binary image");
    const int w = binary.width();
    const int h = binary.height();
    const double total = static_cast<double>(binary.pixel_count());
    std::vector<int> label(binary.pixel_count(), -1);
    std::vector<CharBox> boxes;
    std::vector<int> stack;
    std::vector<int> members;
    int next = 0;
    for (int start = 0; start < w * h; ++start) {
        if (label[start] >= 0 || binary.samples()[start] <= 0.5) continue;
        members.clear();
        stack.assign(1, start);
        label[start] = next;
        int x0 = w, y0 = h, x1 = -1, y1 = -1;
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            members.push_back(p);
            const int y = p / w;
            const int x = p % w;
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
            const int nbr[4][2] = {{y - 1, x}, {y + 1, x}, {y, x - 1}, {y, x + 1}};
            for (const auto& n : nbr) {
                if (n[0] < 0 || n[0] >= h || n[1] < 0 || n[1] >= w) continue;
                const int q = n[0] * w + n[1];
                if (label[q] < 0 && binary.samples()[q] > 0.5) {
                    label[q] = next;
                    stack.push_back(q);
                }
            }
        }
        const double frac = static_cast<double>(members.size()) / total;
        const int bw = x1 - x0 + 1;
        const int bh = y1 - y0 + 1;
        const double aspect = static_cast<double>(bh) / bw;
        if (frac >= 0.005 && frac <= 0.40 && aspect >= 0.8 && aspect <= 6.0) {
            img::Image glyph(bw, bh, 1, 0.0);
            for (int p : members) glyph.at(0, p / w - y0, p % w - x0) = 1.0;
            boxes.push_back(CharBox{x0, y0, bw, bh, std::move(glyph)});
        }
        ++next;
    }
    std::stable_sort(boxes.begin(), boxes.end(), [](const CharBox& a, const CharBox& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    return boxes;
}

std::array<double, kAlphabet.size()> match_scores(const img::Image& glyph, const FontAtlas& atlas) {
    std::array<double, kAlphabet.size()> scores{};
    const img::Image g = normalize_glyph(glyph, atlas.cell_w(), atlas.cell_h());
    const auto gs = g.samples();
    const double gmean = std::accumulate(gs.begin(), gs.end(), 0.0) / static_cast<double>(gs.size());
    double gvar = 0.0;
    for (double v : gs) gvar += (v - gmean) * (v - gmean);
    if (gvar <= 0.0) return scores;
    for (std::size_t k = 0; k < kAlphabet.size(); ++k) {
        const auto ts = atlas.match_template(kAlphabet[k]).samples();
        const double tmean = std::accumulate(ts.begin(), ts.end(), 0.0) / static_cast<double>(ts.size());
        double cross = 0.0;
        double tvar = 0.0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            cross += (gs[i] - gmean) * (ts[i] - tmean);
            tvar += (ts[i] - tmean) * (ts[i] - tmean);
        }
        scores[k] = tvar > 0.0 ? std::clamp(cross / std::sqrt(gvar * tvar), -1.0, 1.0) : 0.0;
    }
    return scores;
}

CharMatch match_char(const img::Image& glyph, const FontAtlas& atlas) {
    const auto scores = match_scores(glyph, atlas);
    if (std::all_of(scores.begin(), scores.end(), [](double s) { return s == 0.0; })) return {'?', 0.0};
    std::size_t best = 0;
    for (std::size_t k = 1; k < scores.size(); ++k) {
        if (scores[k] > scores[best]) best = k;
    }
    return {kAlphabet[best], scores[best]};
}

PlateString postprocess_plate(std::span<const CharMatch> chars, const PatternSet& patterns) {
    PlateString out;
    std::string stripped;
    double score_sum = 0.0;
    std::size_t scored = 0;
    for (const auto& m : chars) {
        out.raw.push_back(m.ch);
        if (m.ch == '-') continue;
        stripped.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(m.ch))));
        score_sum += m.score;
        ++scored;
    }

    std::optional<Fit> best;
    for (const auto& p : patterns.patterns()) {
        auto fit = fit_pattern(stripped, p);
        if (fit && (!best || fit->substitutions < best->substitutions)) best = std::move(fit);
    }
    if (best) {
        out.text = std::move(best->text);
    } else {
        out.no_pattern = true;
        for (char c : stripped) {
            if (is_upper(c) || is_digit(c)) out.text.push_back(c);
        }
    }
    out.confidence = out.text.empty() || scored == 0 ? 0.0 : std::clamp(score_sum / static_cast<double>(scored), 0.0, 1.0);
    return out;
}

PlateString normalize_text(std::string_view raw, const PatternSet& patterns) {
    std::vector<CharMatch> chars;
    for (char c : raw) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        chars.push_back({c, 1.0});
    }
    PlateString out = postprocess_plate(chars, patterns);
    out.raw = std::string(raw);
    return out;
}

PlateString recognize_builtin(const img::Image& image, const FontAtlas& atlas, const PatternSet& patterns) {
    const auto binary = preprocess_plate(image);
    if (!binary) return {};
    std::vector<CharMatch> chars;
    for (const auto& box : segment_chars(*binary)) chars.push_back(match_char(box.glyph, atlas));
    return postprocess_plate(chars, patterns);
}

}  // namespace lpsr::ocr
