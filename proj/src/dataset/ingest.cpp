#include <cctype>
#include <fstream>
#include <set>

#include "lpsr/dataset.hpp"
#include "lpsr/errors.hpp"
#include "lpsr/hash.hpp"
#include "lpsr/imgcore.hpp"
#include "lpsr/png_io.hpp"

namespace lpsr::dataset {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool valid_id(const std::string& id) {
    if (id.empty() || id.size() > 128 || id[0] == '.') return false;
    for (char c : id)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.') return false;
    return true;
}

struct Annotation {
    std::string path, truth, id;
    Subset subset;
    std::optional<CropBox> box;
};

Annotation parse_line(const std::string& line, std::size_t lineno) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(lineno, std::string("not a JSON object: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(lineno, "not a JSON object");
    for (const auto& [k, v] : j.items())
        if (k != "path" && k != "truth" && k != "subset" && k != "box" && k != "id")
            throw ParseError(lineno, "unknown key '" + k + "'");
    auto str = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_string()) throw ParseError(lineno, std::string("key '") + key + "' must be a string");
        return j[key].get<std::string>();
    };
    Annotation a;
    a.path = str("path");
    a.truth = str("truth");
    try {
        a.subset = parse_subset(str("subset"));
    } catch (const InvalidArgument& e) {
        throw ParseError(lineno, e.what());
    }
    a.id = j.contains("id") ? str("id") : fs::path(a.path).stem().string();
    if (j.contains("box")) {
        const json& b = j["box"];
        if (!b.is_array() || b.size() != 4) throw ParseError(lineno, "key 'box' must be [x, y, w, h]");
        for (const auto& v : b)
            if (!v.is_number_integer()) throw ParseError(lineno, "key 'box' must hold integers");
        a.box = CropBox{b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
    }
    return a;
}

}  // namespace

Manifest ingest(const fs::path& image_root, const fs::path& annotations, const fs::path& out_root) {
    std::ifstream in(annotations);
    if (!in) throw IoError("cannot read annotations " + annotations.string());
    std::vector<std::pair<std::size_t, Annotation>> parsed;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        parsed.emplace_back(lineno, parse_line(line, lineno));
    }

    Manifest m;
    std::string digest;
    std::set<std::string> ids;
    for (const auto& [lineno, a] : parsed) {
        const std::string source = "line " + std::to_string(lineno) + " (" + a.path + ")";
        auto fail = [&](const std::string& msg) { m.errors.push_back({source, msg}); };
        if (!valid_id(a.id)) {
            fail("invalid id '" + a.id + "'");
            continue;
        }
        if (!ids.insert(a.id).second) {
            fail("duplicate id '" + a.id + "'");
            continue;
        }
        if (!ocr::PlateString::valid_text(a.truth)) {
            fail("truth '" + a.truth + "' is not a plate string");
            continue;
        }
        img::Image image(1, 1, 1);
        try {
            image = img::read_png(image_root / a.path);
            if (a.box) image = img::crop(image, a.box->x, a.box->y, a.box->w, a.box->h);
        } catch (const std::exception& e) {
            fail(e.what());
            continue;
        }
        PlateRecord r;
        r.id = a.id;
        r.subset = a.subset;
        r.truth = a.truth;
        r.crop_box = a.box;
        r.hr_path = fs::absolute(out_root / "hr" / (a.id + ".png")).lexically_normal();
        fs::create_directories(r.hr_path.parent_path());
        img::write_png(image, r.hr_path);
        digest += a.id + '\t' + a.truth + '\n';
        m.records.push_back(std::move(r));
    }
    m.provenance.config_hash = hex64(fnv1a64(digest));
    m.notes = "ingested from " + annotations.filename().string();
    return m;
}

}  // namespace lpsr::dataset
