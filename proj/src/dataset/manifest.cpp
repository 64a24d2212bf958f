#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "lpsr/dataset.hpp"
#include "lpsr/errors.hpp"

namespace lpsr::dataset {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kFormat = "lpsr-manifest/1";

constexpr std::pair<Subset, std::string_view> kSubsets[] = {
    {Subset::access_control, "access_control"},
    {Subset::law_enforcement, "law_enforcement"},
    {Subset::road_patrol, "road_patrol"},
    {Subset::dashcam, "dashcam"},
    {Subset::synthetic, "synthetic"},
};

std::string relative_to(const fs::path& p, const fs::path& base) {
    const fs::path abs = fs::absolute(p).lexically_normal();
    const fs::path rel = abs.lexically_relative(fs::absolute(base).lexically_normal());
    return (rel.empty() ? abs : rel).generic_string();
}

fs::path resolve(const std::string& p, const fs::path& base) {
    const fs::path path(p);
    return (path.is_absolute() ? path : fs::absolute(base) / path).lexically_normal();
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!j.is_object()) throw InvalidArgument(where + ": expected an object");
    for (const auto& [k, v] : j.items())
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            throw InvalidArgument(where + ": unknown key '" + k + "'");
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw InvalidArgument(where + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InvalidArgument(where + ": key '" + key + "' has the wrong type");
    }
}

}  // namespace

std::string to_string(Subset s) {
    for (auto [v, name] : kSubsets)
        if (v == s) return std::string(name);
    throw InvalidArgument("unknown subset");
}

Subset parse_subset(std::string_view s) {
    for (auto [v, name] : kSubsets)
        if (name == s) return v;
    throw InvalidArgument("unknown subset '" + std::string(s) +
                          "' (expected access_control, law_enforcement, road_patrol, dashcam or synthetic)");
}

const PlateRecord* Manifest::find(std::string_view id) const {
    for (const auto& r : records)
        if (r.id == id) return &r;
    return nullptr;
}

std::map<Subset, std::size_t> Manifest::subset_counts() const {
    std::map<Subset, std::size_t> out;
    for (const auto& r : records) ++out[r.subset];
    return out;
}

json to_json(const Manifest& m, const fs::path& base) {
    json records = json::array();
    for (const auto& r : m.records) {
        json j{{"id", r.id}, {"subset", to_string(r.subset)}, {"hr_path", relative_to(r.hr_path, base)}, {"truth", r.truth}};
        if (r.crop_box) j["crop_box"] = {r.crop_box->x, r.crop_box->y, r.crop_box->w, r.crop_box->h};
        if (r.lr_path) j["lr_path"] = relative_to(*r.lr_path, base);
        if (r.degradation) j["degradation"] = *r.degradation;
        if (r.sr_path) j["sr_path"] = relative_to(*r.sr_path, base);
        records.push_back(std::move(j));
    }
    json errors = json::array();
    for (const auto& e : m.errors) errors.push_back({{"source", e.source}, {"message", e.message}});
    return {{"format", kFormat}, {"provenance", lpsr::to_json(m.provenance)}, {"notes", m.notes},
            {"records", records}, {"errors", errors}};
}

Manifest manifest_from_json(const json& j, const fs::path& base) {
    check_keys(j, {"format", "provenance", "notes", "records", "errors"}, "manifest");
    if (get<std::string>(j, "format", "manifest") != kFormat)
        throw InvalidArgument("manifest: key 'format' must be \"" + std::string(kFormat) + "\"");
    Manifest m;
    m.provenance = provenance_from_json(j.at("provenance"));
    if (j.contains("notes")) m.notes = get<std::string>(j, "notes", "manifest");
    const json& recs = j.contains("records") ? j.at("records") : json::array();
    if (!recs.is_array()) throw InvalidArgument("manifest: key 'records' must be a list");
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const json& r = recs[i];
        const std::string where = "manifest records[" + std::to_string(i) + "]";
        check_keys(r, {"id", "subset", "hr_path", "truth", "crop_box", "lr_path", "degradation", "sr_path"}, where);
        PlateRecord rec;
        rec.id = get<std::string>(r, "id", where);
        rec.subset = parse_subset(get<std::string>(r, "subset", where));
        rec.hr_path = resolve(get<std::string>(r, "hr_path", where), base);
        rec.truth = get<std::string>(r, "truth", where);
        if (r.contains("crop_box")) {
            const auto b = get<std::vector<int>>(r, "crop_box", where);
            if (b.size() != 4) throw InvalidArgument(where + ": key 'crop_box' needs [x, y, w, h]");
            rec.crop_box = CropBox{b[0], b[1], b[2], b[3]};
        }
        if (r.contains("lr_path")) rec.lr_path = resolve(get<std::string>(r, "lr_path", where), base);
        if (r.contains("degradation")) rec.degradation = get<std::string>(r, "degradation", where);
        if (r.contains("sr_path")) rec.sr_path = resolve(get<std::string>(r, "sr_path", where), base);
        m.records.push_back(std::move(rec));
    }
    if (j.contains("errors")) {
        for (const auto& e : j.at("errors")) {
            check_keys(e, {"source", "message"}, "manifest errors");
            m.errors.push_back({get<std::string>(e, "source", "manifest errors"),
                                get<std::string>(e, "message", "manifest errors")});
        }
    }
    return m;
}

void save_manifest(const Manifest& m, const fs::path& file) {
    const fs::path dir = fs::absolute(file).parent_path();
    fs::create_directories(dir);
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write manifest " + file.string());
    out << to_json(m, dir).dump(2) << '\n';
    if (!out) throw IoError("cannot write manifest " + file.string());
}

Manifest load_manifest(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot read manifest " + file.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidArgument("manifest " + file.string() + ": " + e.what());
    }
    return manifest_from_json(j, fs::absolute(file).parent_path());
}

std::vector<std::string> validate(const Manifest& m) {
    std::vector<std::string> problems;
    std::set<std::string> seen;
    for (const auto& r : m.records) {
        if (!seen.insert(r.id).second) problems.push_back("duplicate id '" + r.id + "'");
        if (!ocr::PlateString::valid_text(r.truth))
            problems.push_back(r.id + ": truth '" + r.truth + "' is not a plate string");
        if (!fs::is_regular_file(r.hr_path)) problems.push_back(r.id + ": missing HR file " + r.hr_path.string());
        if (r.lr_path && !fs::is_regular_file(*r.lr_path))
            problems.push_back(r.id + ": missing LR file " + r.lr_path->string());
        if (r.sr_path && !fs::is_regular_file(*r.sr_path))
            problems.push_back(r.id + ": missing SR file " + r.sr_path->string());
    }
    return problems;
}

}  // namespace lpsr::dataset
