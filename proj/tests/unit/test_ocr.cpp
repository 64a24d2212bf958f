#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "lpsr/errors.hpp"
#include "lpsr/imgcore.hpp"
#include "lpsr/ocr.hpp"
#include "oracle/support.hpp"

using lpsr::img::Image;
namespace ocr = lpsr::ocr;

namespace {

const ocr::FontAtlas& atlas() {
    static const ocr::FontAtlas a = ocr::FontAtlas::builtin();
    return a;
}

Image negate(const Image& img) {
    Image out = img;
    for (double& v : out.samples()) v = 1.0 - v;
    return out;
}

struct Component {
    int x0, y0, x1, y1, area;
};

// Plain recursive-free flood fill over 4-neighbours, row-major seeds.
std::vector<Component> components(const Image& bin) {
    const int w = bin.width(), h = bin.height();
    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    std::vector<Component> out;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (bin.at(0, y, x) < 0.5 || label[y * w + x] >= 0) continue;
            Component c{x, y, x, y, 0};
            std::vector<std::pair<int, int>> queue{{x, y}};
            label[y * w + x] = static_cast<int>(out.size());
            for (std::size_t q = 0; q < queue.size(); ++q) {
                auto [cx, cy] = queue[q];
                ++c.area;
                c.x0 = std::min(c.x0, cx), c.x1 = std::max(c.x1, cx);
                c.y0 = std::min(c.y0, cy), c.y1 = std::max(c.y1, cy);
                const int nx[] = {cx - 1, cx + 1, cx, cx};
                const int ny[] = {cy, cy, cy - 1, cy + 1};
                for (int k = 0; k < 4; ++k) {
                    if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
                    if (bin.at(0, ny[k], nx[k]) < 0.5 || label[ny[k] * w + nx[k]] >= 0) continue;
                    label[ny[k] * w + nx[k]] = static_cast<int>(out.size());
                    queue.push_back({nx[k], ny[k]});
                }
            }
            out.push_back(c);
        }
    return out;
}

void blob(Image& img, int x, int y, int w, int h) {
    for (int yy = y; yy < y + h; ++yy)
        for (int xx = x; xx < x + w; ++xx) img.at(0, yy, xx) = 1.0;
}

std::vector<ocr::CharMatch> scored(const std::string& s, double score = 1.0) {
    std::vector<ocr::CharMatch> out;
    for (char c : s) out.push_back({c, score});
    return out;
}

}  // namespace

TEST_CASE("atlas holds 36 cell-sized binary glyphs, one component each") {
    const auto& a = atlas();
    CHECK(a.cell_w() == 16);
    CHECK(a.cell_h() == 24);
    for (char c : ocr::kAlphabet) {
        const Image& g = a.glyph(c);
        CHECK(g.width() == 16);
        CHECK(g.height() == 24);
        CHECK(g.channels() == 1);
        for (double v : g.samples()) CHECK((v == 0.0 || v == 1.0));
        CHECK_MESSAGE(components(g).size() == 1, "glyph ", c);
    }
    CHECK_THROWS_AS(a.glyph('a'), lpsr::InvalidArgument);
    CHECK_THROWS_AS(a.glyph('-'), lpsr::InvalidArgument);
}

TEST_CASE("atlas glyphs are pairwise distinct and fixed under the median") {
    const auto& a = atlas();
    for (char c : ocr::kAlphabet) {
        Image padded(20, 28, 1, 0.0);
        for (int y = 0; y < 24; ++y)
            for (int x = 0; x < 16; ++x) padded.at(0, y + 2, x + 2) = a.glyph(c).at(0, y, x);
        CHECK_MESSAGE(lpsr::img::median3x3(padded) == padded, "glyph ", c);
        for (char d : ocr::kAlphabet)
            if (d > c) CHECK_FALSE(a.glyph(c) == a.glyph(d));
    }
}

TEST_CASE("preprocess maps dark text on a light plate to ones") {
    const Image plate = ocr::render_plate("ABC-1234", atlas());
    const auto bin = ocr::preprocess_plate(plate);
    REQUIRE(bin.has_value());
    CHECK(bin->channels() == 1);
    CHECK(bin->width() == plate.width());
    const Image gray = lpsr::img::to_gray(plate);
    std::size_t ones = 0;
    for (std::size_t i = 0; i < gray.size(); ++i) {
        const double v = bin->samples()[i];
        CHECK((v == 0.0 || v == 1.0));
        if (v == 1.0) {
            ++ones;
            CHECK(gray.samples()[i] < 0.5);
        }
    }
    CHECK(ones > 0);
    CHECK(ones * 2 < gray.size());
}

TEST_CASE("preprocess output ignores plate polarity") {
    for (const char* text : {"ABC-1234", "XY-0815", "9876-QZ"}) {
        const Image plate = ocr::render_plate(text, atlas());
        const auto a = ocr::preprocess_plate(plate);
        const auto b = ocr::preprocess_plate(negate(plate));
        REQUIRE(a.has_value());
        REQUIRE(b.has_value());
        CHECK(*a == *b);
    }
}

TEST_CASE("preprocess signals an empty plate for constant input") {
    CHECK_FALSE(ocr::preprocess_plate(Image(40, 20, 3, 0.5)).has_value());
    CHECK_FALSE(ocr::preprocess_plate(Image(40, 20, 1, 0.0)).has_value());
}

TEST_CASE("segment finds nothing on a blank image") {
    CHECK(ocr::segment_chars(Image(60, 30, 1, 0.0)).empty());
}

TEST_CASE("segment finds two disjoint blobs left to right") {
    Image bin(40, 20, 1, 0.0);
    blob(bin, 22, 4, 5, 9);
    blob(bin, 6, 6, 5, 9);
    const auto boxes = ocr::segment_chars(bin);
    const auto comps = components(bin);
    REQUIRE(comps.size() == 2);
    REQUIRE(boxes.size() == 2);
    std::vector<Component> sorted = comps;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.x0 < b.x0; });
    for (int i = 0; i < 2; ++i) {
        CHECK(boxes[i].x == sorted[i].x0);
        CHECK(boxes[i].y == sorted[i].y0);
        CHECK(boxes[i].w == sorted[i].x1 - sorted[i].x0 + 1);
        CHECK(boxes[i].h == sorted[i].y1 - sorted[i].y0 + 1);
        CHECK(boxes[i].glyph.width() == boxes[i].w);
        CHECK(boxes[i].glyph.height() == boxes[i].h);
    }
    CHECK(boxes[0].x == 6);
    CHECK(boxes[1].x == 22);
}

TEST_CASE("segment merges touching glyphs into one box") {
    Image bin(40, 20, 1, 0.0);
    blob(bin, 10, 5, 5, 9);
    blob(bin, 15, 5, 5, 9);
    const auto boxes = ocr::segment_chars(bin);
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0].w == 10);
    CHECK(boxes[0].h == 9);
}

TEST_CASE("segment applies the area and aspect filters") {
    Image bin(100, 50, 1, 0.0);
    blob(bin, 2, 2, 2, 2);      // 4 px < 0.5% of 5000
    blob(bin, 10, 10, 20, 4);   // h/w 0.2
    blob(bin, 40, 2, 2, 40);    // h/w 20
    blob(bin, 60, 10, 6, 10);   // kept
    const auto boxes = ocr::segment_chars(bin);
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0].x == 60);
}

TEST_CASE("segment agrees with the flood-fill oracle on random blobs") {
    std::mt19937_64 gen(77);
    for (int trial = 0; trial < 40; ++trial) {
        Image bin(80, 30, 1, 0.0);
        const int n = support::random_int(gen, 1, 5);
        for (int k = 0; k < n; ++k)
            blob(bin, support::random_int(gen, 0, 72), support::random_int(gen, 0, 18), support::random_int(gen, 3, 8),
                 support::random_int(gen, 6, 12));
        std::vector<Component> kept;
        for (const auto& c : components(bin)) {
            const double w = c.x1 - c.x0 + 1, h = c.y1 - c.y0 + 1, frac = c.area / 2400.0;
            if (frac >= 0.005 && frac <= 0.40 && h / w >= 0.8 && h / w <= 6.0) kept.push_back(c);
        }
        std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.x0 < b.x0; });
        const auto boxes = ocr::segment_chars(bin);
        REQUIRE(boxes.size() == kept.size());
        for (std::size_t i = 0; i < kept.size(); ++i) {
            CHECK(boxes[i].x == kept[i].x0);
            CHECK(boxes[i].w == kept[i].x1 - kept[i].x0 + 1);
            CHECK(boxes[i].h == kept[i].y1 - kept[i].y0 + 1);
            CHECK(boxes[i].x + boxes[i].w <= bin.width());
            CHECK(boxes[i].y + boxes[i].h <= bin.height());
        }
    }
}

TEST_CASE("every atlas glyph matches itself with score one") {
    for (char c : ocr::kAlphabet) {
        const auto m = ocr::match_char(atlas().glyph(c), atlas());
        CHECK(m.ch == c);
        CHECK(m.score == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("inverted glyph anticorrelates with its template") {
    const auto scores = ocr::match_scores(negate(atlas().glyph('A')), atlas());
    CHECK(scores[ocr::kAlphabet.find('A')] <= 0.0);
}

TEST_CASE("dilated 8 is still recognized") {
    const Image& g = atlas().glyph('8');
    Image d(g.width() + 2, g.height() + 2, 1, 0.0);
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x)
            if (g.at(0, y, x) > 0.5)
                for (int dy = 0; dy < 3; ++dy)
                    for (int dx = 0; dx < 3; ++dx) d.at(0, y + dy, x + dx) = 1.0;
    const auto m = ocr::match_char(d, atlas());
    CHECK(m.ch == '8');
    CHECK(m.score > 0.7);
    CHECK(m.score == doctest::Approx(0.7083).epsilon(1e-3));
}

TEST_CASE("empty glyph yields the unknown marker") {
    const auto m = ocr::match_char(Image(16, 24, 1, 0.0), atlas());
    CHECK(m.ch == '?');
    CHECK(m.score == 0.0);
}

TEST_CASE("postprocess groups by pattern") {
    const auto pats = ocr::PatternSet::taiwan();
    auto r = ocr::postprocess_plate(scored("ABC1234"), pats);
    CHECK(r.text == "ABC-1234");
    CHECK_FALSE(r.no_pattern);
    CHECK(ocr::postprocess_plate(scored("AB1234"), pats).text == "AB-1234");
    CHECK(ocr::postprocess_plate(scored("1234AB"), pats).text == "1234-AB");
}

TEST_CASE("postprocess swaps a confusable toward the required class") {
    const auto r = ocr::postprocess_plate(scored("0BC1234"), ocr::PatternSet::taiwan());
    CHECK(r.text == "OBC-1234");
}

TEST_CASE("postprocess leaves unmatched text raw with the flag") {
    const auto r = ocr::postprocess_plate(scored("####"), ocr::PatternSet::taiwan());
    CHECK(r.no_pattern);
    CHECK(r.raw == "####");
    for (char c : r.text) CHECK(((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-'));
}

TEST_CASE("postprocess confidence is the mean score") {
    std::vector<ocr::CharMatch> m{{'A', 0.5}, {'B', 1.0}, {'C', 0.9}, {'1', 0.8}, {'2', 0.7}, {'3', 0.6}, {'4', 1.0}};
    const auto r = ocr::postprocess_plate(m, ocr::PatternSet::taiwan());
    CHECK(r.confidence == doctest::Approx(5.5 / 7.0).epsilon(1e-12));
    CHECK(ocr::postprocess_plate({}, ocr::PatternSet::taiwan()).confidence == 0.0);
}

TEST_CASE("postprocess repairs every single-confusable plate") {
    const std::map<char, char> swap{{'O', '0'}, {'0', 'O'}, {'I', '1'}, {'1', 'I'}, {'B', '8'},
                                    {'8', 'B'}, {'S', '5'}, {'5', 'S'}, {'Z', '2'}, {'2', 'Z'}};
    const auto pats = ocr::PatternSet::taiwan();
    std::mt19937_64 gen(5);
    const std::string letters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ", digits = "0123456789";
    int checked = 0;
    for (const std::string& pat : pats.patterns())
        for (std::size_t pos = 0; pos < pat.size(); ++pos) {
            if (pat[pos] == '-') continue;
            const std::string& pool = pat[pos] == 'L' ? letters : digits;
            for (char correct : pool) {
                if (!swap.count(correct)) continue;
                for (int fill = 0; fill < 4; ++fill) {
                    std::string plate;
                    for (std::size_t i = 0; i < pat.size(); ++i) {
                        if (pat[i] == '-') plate += '-';
                        else if (i == pos) plate += correct;
                        else {
                            const std::string& p = pat[i] == 'L' ? letters : digits;
                            plate += p[support::random_int(gen, 0, static_cast<int>(p.size()) - 1)];
                        }
                    }
                    std::string raw;
                    for (std::size_t i = 0; i < plate.size(); ++i)
                        if (plate[i] != '-') raw += i == pos ? swap.at(correct) : plate[i];
                    const auto r = ocr::postprocess_plate(scored(raw), pats);
                    CHECK_MESSAGE(r.text == plate, raw);
                    CHECK_FALSE(r.no_pattern);
                    ++checked;
                }
            }
        }
    CHECK(checked > 100);
}

TEST_CASE("postprocess keeps characters that already fit their position") {
    const auto r = ocr::postprocess_plate(scored("OIB0185"), ocr::PatternSet::taiwan());
    CHECK(r.text == "OIB-0185");
}

TEST_CASE("postprocess output stays inside the plate charset") {
    std::mt19937_64 gen(9);
    const std::string chars = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-#?a ";
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<ocr::CharMatch> m;
        const int n = support::random_int(gen, 0, 9);
        for (int i = 0; i < n; ++i)
            m.push_back({chars[support::random_int(gen, 0, static_cast<int>(chars.size()) - 1)], 0.5});
        const auto r = ocr::postprocess_plate(m, ocr::PatternSet::taiwan());
        for (char c : r.text) CHECK(((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-'));
        if (!r.no_pattern && !r.text.empty()) CHECK(ocr::PlateString::valid_text(r.text));
        if (r.text.empty()) CHECK(r.confidence == 0.0);
    }
}

TEST_CASE("pattern sets load from json") {
    const auto dir = support::scratch_dir("patterns");
    std::ofstream(dir / "p.json") << R"(["NN-LLL"])";
    const auto p = ocr::PatternSet::load(dir / "p.json");
    REQUIRE(p.patterns().size() == 1);
    CHECK(ocr::postprocess_plate(scored("12ABC"), p).text == "12-ABC");
    std::ofstream(dir / "bad.json") << R"(["NX-L"])";
    CHECK_THROWS(ocr::PatternSet::load(dir / "bad.json"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("clean rendered plate round-trips") {
    const auto r = ocr::recognize_builtin(ocr::render_plate("ABC-1234", atlas()), atlas(), ocr::PatternSet::taiwan());
    CHECK(r.text == "ABC-1234");
    CHECK(r.confidence > 0.95);
}

TEST_CASE("blank image recognizes as empty") {
    const auto r = ocr::recognize_builtin(Image(120, 40, 3, 0.8), atlas(), ocr::PatternSet::taiwan());
    CHECK(r.empty());
    CHECK(r.confidence == 0.0);
}

TEST_CASE("recognition is deterministic and polarity invariant") {
    const auto pats = ocr::PatternSet::taiwan();
    ocr::RenderStyle style;
    style.gap_jitter = {1, 0, 2, 1, 0, 1};
    style.baseline_jitter = {0, 1, -1, 2, 0, -2, 1};
    const Image plate = ocr::render_plate("KZ-8051", atlas(), style);
    const auto a = ocr::recognize_builtin(plate, atlas(), pats);
    const auto b = ocr::recognize_builtin(plate, atlas(), pats);
    const auto c = ocr::recognize_builtin(negate(plate), atlas(), pats);
    CHECK(a.text == "KZ-8051");
    CHECK(a.text == b.text);
    CHECK(a.confidence == b.confidence);
    CHECK(a.text == c.text);
    CHECK(a.confidence == c.confidence);
}

TEST_CASE("every character survives a clean render") {
    const auto pats = ocr::PatternSet::taiwan();
    const std::string letters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    for (std::size_t i = 0; i + 2 < letters.size() + 2; i += 3) {
        std::string l = letters.substr(i % 24, 3);
        const std::string text = l + "-" + std::to_string(1000 + 1111 * (i % 8));
        const auto r = ocr::recognize_builtin(ocr::render_plate(text, atlas()), atlas(), pats);
        CHECK(r.text == text);
    }
    const auto r = ocr::recognize_builtin(ocr::render_plate("0567-YZ", atlas()), atlas(), pats);
    CHECK(r.text == "0567-YZ");
}

TEST_CASE("render rejects text outside the plate charset") {
    CHECK_THROWS_AS(ocr::render_plate("ab-12", atlas()), lpsr::InvalidArgument);
    CHECK_THROWS_AS(ocr::render_plate("A-B-1", atlas()), lpsr::InvalidArgument);
    CHECK_THROWS_AS(ocr::render_plate("", atlas()), lpsr::InvalidArgument);
}

TEST_CASE("external adapter echo harness") {
    const Image plate = ocr::render_plate("ABC-1234", atlas());
    const auto pats = ocr::PatternSet::taiwan();
    auto r = ocr::recognize_external(plate, {"test -f {img} && echo ABC-1234"}, pats);
    CHECK(r.text == "ABC-1234");
    r = ocr::recognize_external(plate, {"printf '  abc1234\\nignored\\n' # {img}"}, pats);
    CHECK(r.text == "ABC-1234");
}

TEST_CASE("external adapter failures") {
    const Image plate(20, 10, 3, 0.5);
    const auto pats = ocr::PatternSet::taiwan();
    try {
        ocr::recognize_external(plate, {"echo oops >&2; exit 2 # {img}"}, pats);
        FAIL("expected AdapterFailure");
    } catch (const lpsr::AdapterFailure& e) {
        CHECK(e.captured_stderr().find("oops") != std::string::npos);
        CHECK(e.exit_code() == 2);
    }
    CHECK_THROWS_AS(ocr::recognize_external(plate, {"sleep 5 # {img}", std::chrono::milliseconds(200)}, pats),
                    lpsr::AdapterFailure);
    CHECK_THROWS_AS(ocr::recognize_external(plate, {"/nonexistent/ocr-engine {img}"}, pats), lpsr::AdapterFailure);
    CHECK_THROWS_AS(ocr::recognize_external(plate, {"echo ABC1234"}, pats), lpsr::InvalidArgument);
}
