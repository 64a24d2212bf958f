#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "lpsr/dataset.hpp"
#include "lpsr/errors.hpp"
#include "lpsr/png_io.hpp"
#include "oracle/support.hpp"

namespace fs = std::filesystem;
namespace ds = lpsr::dataset;
using lpsr::img::Image;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const lpsr::ocr::FontAtlas& atlas() {
    static const auto a = lpsr::ocr::FontAtlas::builtin();
    return a;
}

void write_lines(const fs::path& p, const std::vector<std::string>& lines) {
    std::ofstream out(p);
    for (const auto& l : lines) out << l << '\n';
}

ds::Manifest random_manifest(std::mt19937_64& gen, int n) {
    ds::Manifest m;
    for (int i = 0; i < n; ++i) {
        ds::PlateRecord r;
        r.id = "r" + std::to_string(i);
        r.subset = static_cast<ds::Subset>(support::random_int(gen, 0, 4));
        r.hr_path = "/tmp/none/" + r.id + ".png";
        r.truth = "AB-1234";
        m.records.push_back(r);
    }
    return m;
}

}  // namespace

TEST_CASE("subset names round trip") {
    for (auto s : {ds::Subset::access_control, ds::Subset::law_enforcement, ds::Subset::road_patrol,
                   ds::Subset::dashcam, ds::Subset::synthetic})
        CHECK(ds::parse_subset(ds::to_string(s)) == s);
    CHECK_THROWS_AS(ds::parse_subset("parking"), lpsr::InvalidArgument);
}

TEST_CASE("expected real-corpus counts") {
    const auto& c = ds::expected_corpus_counts();
    CHECK(c.at(ds::Subset::access_control) == 681);
    CHECK(c.at(ds::Subset::law_enforcement) == 757);
    CHECK(c.at(ds::Subset::road_patrol) == 611);
    CHECK(c.at(ds::Subset::dashcam) == 1000);
}

TEST_CASE("manifest round trips with relative paths") {
    const auto dir = support::scratch_dir("manifest");
    ds::Manifest m;
    m.provenance = {"lpsr x", "abc123", 42};
    m.notes = "n";
    ds::PlateRecord a{"a", ds::Subset::dashcam, dir / "hr" / "a.png", "ABC-1234", ds::CropBox{1, 2, 3, 4},
                      dir / "lr" / "a.png", "deadbeef", dir / "sr" / "a.png"};
    ds::PlateRecord b{"b", ds::Subset::road_patrol, dir / "hr" / "b.png", "AB-1234", std::nullopt, std::nullopt,
                      std::nullopt, std::nullopt};
    m.records = {a, b};
    m.errors = {{"line 3", "unreadable"}};
    ds::save_manifest(m, dir / "manifest.json");
    const auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(j["records"][0]["hr_path"] == "hr/a.png");
    CHECK(j["records"][0]["lr_path"] == "lr/a.png");
    CHECK(j["records"][0]["sr_path"] == "sr/a.png");
    CHECK_FALSE(j["records"][1].contains("lr_path"));
    CHECK(j["provenance"]["seed"] == 42);
    CHECK(ds::load_manifest(dir / "manifest.json") == m);

    fs::create_directories(dir / "copy");
    fs::copy_file(dir / "manifest.json", dir / "copy" / "manifest.json");
    CHECK(ds::load_manifest(dir / "copy" / "manifest.json").records[0].hr_path == dir / "copy" / "hr" / "a.png");
    fs::remove_all(dir);
}

TEST_CASE("manifest parse errors name the key") {
    auto base = nlohmann::json::parse(R"({"format":"lpsr-manifest/1","provenance":{"tool_version":"t","config_hash":"h","seed":1},
        "records":[{"id":"a","subset":"dashcam","hr_path":"a.png","truth":"AB-1234"}]})");
    CHECK_NOTHROW(ds::manifest_from_json(base, "/tmp"));
    auto bad = base;
    bad["records"][0]["colour"] = "red";
    CHECK_THROWS_WITH_AS(ds::manifest_from_json(bad, "/tmp"), doctest::Contains("colour"), lpsr::InvalidArgument);
    bad = base;
    bad["records"][0].erase("truth");
    CHECK_THROWS_WITH_AS(ds::manifest_from_json(bad, "/tmp"), doctest::Contains("truth"), lpsr::InvalidArgument);
    bad = base;
    bad["format"] = "v0";
    CHECK_THROWS_WITH_AS(ds::manifest_from_json(bad, "/tmp"), doctest::Contains("format"), lpsr::InvalidArgument);
}

TEST_CASE("ingest of empty annotations gives an empty manifest") {
    const auto dir = support::scratch_dir("ingest-empty");
    write_lines(dir / "ann.jsonl", {});
    const auto m = ds::ingest(dir, dir / "ann.jsonl", dir / "out");
    CHECK(m.records.empty());
    CHECK(m.errors.empty());
    fs::remove_all(dir);
}

TEST_CASE("ingest collects unreadable images as errors") {
    const auto dir = support::scratch_dir("ingest");
    fs::create_directories(dir / "src");
    lpsr::img::write_png(Image(40, 20, 3, 0.5), dir / "src" / "one.png");
    lpsr::img::write_png(Image(120, 40, 3, 0.2), dir / "src" / "two.png");
    std::ofstream(dir / "src" / "three.png") << "not a png";
    write_lines(dir / "ann.jsonl",
                {R"({"path":"src/one.png","truth":"ABC-1234","subset":"access_control"})",
                 "",
                 R"({"path":"src/two.png","truth":"AB-1234","subset":"road_patrol","box":[10,5,60,20]})",
                 R"({"path":"src/three.png","truth":"XY-9999","subset":"dashcam"})"});
    const auto m = ds::ingest(dir, dir / "ann.jsonl", dir / "out");
    REQUIRE(m.records.size() == 2);
    REQUIRE(m.errors.size() == 1);
    CHECK(m.errors[0].source.find("line 4") != std::string::npos);
    CHECK(m.records[0].id == "one");
    const Image two = lpsr::img::read_png(m.records[1].hr_path);
    CHECK(two.width() == 60);
    CHECK(two.height() == 20);
    CHECK(m.records[1].crop_box == ds::CropBox{10, 5, 60, 20});
    CHECK(m.subset_counts().at(ds::Subset::road_patrol) == 1);
    CHECK(ds::validate(m).empty());
    fs::remove_all(dir);
}

TEST_CASE("ingest turns bad records into errors") {
    const auto dir = support::scratch_dir("ingest-bad");
    lpsr::img::write_png(Image(40, 20, 1, 0.5), dir / "a.png");
    write_lines(dir / "ann.jsonl", {R"({"path":"a.png","truth":"abc 12","subset":"dashcam"})",
                                    R"({"path":"a.png","truth":"AB-12","subset":"dashcam","box":[30,0,20,20]})",
                                    R"({"path":"a.png","truth":"AB-12","subset":"dashcam","id":"x"})",
                                    R"({"path":"a.png","truth":"AB-13","subset":"dashcam","id":"x"})"});
    const auto m = ds::ingest(dir, dir / "ann.jsonl", dir / "out");
    CHECK(m.records.size() == 1);
    CHECK(m.errors.size() == 3);
    fs::remove_all(dir);
}

TEST_CASE("malformed annotation lines report their line number") {
    const auto dir = support::scratch_dir("ingest-parse");
    write_lines(dir / "ann.jsonl", {R"({"path":"a.png","truth":"AB-12","subset":"dashcam"})", "{broken"});
    try {
        ds::ingest(dir, dir / "ann.jsonl", dir / "out");
        FAIL("expected ParseError");
    } catch (const lpsr::ParseError& e) {
        CHECK(e.line() == 2);
    }
    write_lines(dir / "ann.jsonl", {R"({"path":"a.png","truth":"AB-12","subset":"mall"})"});
    CHECK_THROWS_AS(ds::ingest(dir, dir / "ann.jsonl", dir / "out"), lpsr::ParseError);
    fs::remove_all(dir);
}

TEST_CASE("synth is deterministic per seed") {
    const auto dir = support::scratch_dir("synth");
    const auto pats = lpsr::ocr::PatternSet::taiwan();
    const auto a = ds::synth_plates(5, 7, atlas(), pats, dir / "a");
    const auto b = ds::synth_plates(5, 7, atlas(), pats, dir / "b");
    REQUIRE(a.records.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(a.records[i].truth == b.records[i].truth);
        CHECK(slurp(a.records[i].hr_path) == slurp(b.records[i].hr_path));
    }
    CHECK(a.provenance == b.provenance);
    const auto c = ds::synth_plates(5, 8, atlas(), pats, dir / "c");
    int differ = 0;
    for (std::size_t i = 0; i < 5; ++i) differ += a.records[i].truth != c.records[i].truth;
    CHECK(differ > 0);
    CHECK_THROWS_AS(ds::synth_plates(0, 7, atlas(), pats, dir / "d"), lpsr::InvalidArgument);
    fs::remove_all(dir);
}

TEST_CASE("synth truths follow the patterns") {
    const auto dir = support::scratch_dir("synth-pat");
    const auto m = ds::synth_plates(60, 11, atlas(), lpsr::ocr::PatternSet::taiwan(), dir);
    const std::regex re("^([A-Z]{3}-[0-9]{4}|[A-Z]{2}-[0-9]{4}|[0-9]{4}-[A-Z]{2})$");
    std::set<std::size_t> lengths;
    for (const auto& r : m.records) {
        CHECK_MESSAGE(std::regex_match(r.truth, re), r.truth);
        lengths.insert(r.truth.size());
    }
    CHECK(lengths.size() == 2);
    CHECK(ds::validate(m).empty());
    fs::remove_all(dir);
}

TEST_CASE("builtin OCR reads every clean synthetic plate") {
    const auto dir = support::scratch_dir("synth-ocr");
    const auto pats = lpsr::ocr::PatternSet::taiwan();
    const auto m = ds::synth_plates(100, 2024, atlas(), pats, dir);
    int exact = 0;
    for (const auto& r : m.records)
        exact += lpsr::ocr::recognize_builtin(lpsr::img::read_png(r.hr_path), atlas(), pats).text == r.truth;
    CHECK(exact == 100);
    fs::remove_all(dir);
}

TEST_CASE("lr pairs have the floor geometry and are reproducible") {
    const auto dir = support::scratch_dir("lr");
    ds::Manifest m;
    lpsr::img::write_png(Image(120, 40, 3, 0.6), dir / "a.png");
    lpsr::img::write_png(Image(150, 45, 3, 0.4), dir / "b.png");
    m.records = {{"a", ds::Subset::synthetic, dir / "a.png", "AB-1234", {}, {}, {}, {}},
                 {"b", ds::Subset::synthetic, dir / "b.png", "AB-1235", {}, {}, {}, {}}};
    const std::string hr_a = slurp(dir / "a.png");

    auto cfg = lpsr::degrade::preset("x4-paper");
    const auto x4 = ds::make_lr_pairs(m, cfg, dir / "x4");
    const Image lr = lpsr::img::read_png(*x4.records[0].lr_path);
    CHECK(lr.width() == 30);
    CHECK(lr.height() == 10);
    CHECK(x4.records[0].degradation == lpsr::degrade::config_hash(cfg));
    CHECK(slurp(dir / "a.png") == hr_a);

    const auto again = ds::make_lr_pairs(m, cfg, dir / "x4b", 4);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(slurp(*x4.records[i].lr_path) == slurp(*again.records[i].lr_path));

    cfg.scale_factor = 7.5;
    const auto x75 = ds::make_lr_pairs(m, cfg, dir / "x75");
    const Image small = lpsr::img::read_png(*x75.records[1].lr_path);
    CHECK(small.width() == 20);
    CHECK(small.height() == 6);
    CHECK(x75.records[1].degradation != x4.records[1].degradation);

    m.records[0].hr_path = dir / "missing.png";
    CHECK_THROWS_AS(ds::make_lr_pairs(m, cfg, dir / "bad"), lpsr::IoError);
    fs::remove_all(dir);
}

TEST_CASE("split examples") {
    std::mt19937_64 gen(1);
    ds::Manifest m = random_manifest(gen, 10);
    for (auto& r : m.records) r.subset = ds::Subset::synthetic;
    const auto [train, test] = ds::split(m, 0.8, 5);
    CHECK(train.records.size() == 8);
    CHECK(test.records.size() == 2);
    const auto [train2, test2] = ds::split(m, 0.8, 5);
    CHECK(train == train2);
    CHECK(test == test2);
    CHECK_THROWS_AS(ds::split(m, 0.0, 5), lpsr::InvalidArgument);
    CHECK_THROWS_AS(ds::split(m, 1.0, 5), lpsr::InvalidArgument);
}

TEST_CASE("split is a stratified partition") {
    std::mt19937_64 gen(12);
    for (int trial = 0; trial < 100; ++trial) {
        const ds::Manifest m = random_manifest(gen, support::random_int(gen, 0, 40));
        const double frac = std::uniform_real_distribution<double>(0.05, 0.95)(gen);
        const auto [train, test] = ds::split(m, frac, trial);
        std::multiset<std::string> ids;
        for (const auto& r : train.records) ids.insert(r.id);
        for (const auto& r : test.records) ids.insert(r.id);
        std::multiset<std::string> expect;
        for (const auto& r : m.records) expect.insert(r.id);
        CHECK(ids == expect);
        const auto all = m.subset_counts(), tr = train.subset_counts();
        for (const auto& [s, n] : all) {
            const auto got = tr.count(s) ? tr.at(s) : 0;
            CHECK(got == static_cast<std::size_t>(std::llround(frac * n)));
        }
    }
}

TEST_CASE("validate reports duplicates and missing files") {
    ds::Manifest m;
    m.records = {{"a", ds::Subset::synthetic, "/nonexistent/a.png", "AB-1234", {}, {}, {}, {}},
                 {"a", ds::Subset::synthetic, "/nonexistent/b.png", "ab", {}, {}, {}, {}}};
    const auto problems = ds::validate(m);
    CHECK(problems.size() == 4);
}
