#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lpsr/degrade.hpp"
#include "lpsr/ocr.hpp"
#include "lpsr/provenance.hpp"

namespace lpsr::dataset {

enum class Subset { access_control, law_enforcement, road_patrol, dashcam, synthetic };

std::string to_string(Subset s);
Subset parse_subset(std::string_view s);

/// Record counts of the real AOLP + dashcam corpus per subset. The corpus is
/// licensed data and not shipped; ingest of the full set should reproduce these.
inline const std::map<Subset, std::size_t>& expected_corpus_counts() {
    static const std::map<Subset, std::size_t> counts{{Subset::access_control, 681},
                                                     {Subset::law_enforcement, 757},
                                                     {Subset::road_patrol, 611},
                                                     {Subset::dashcam, 1000}};
    return counts;
}

struct CropBox {
    int x = 0, y = 0, w = 0, h = 0;
    friend bool operator==(const CropBox&, const CropBox&) = default;
};

/// Paths are absolute in memory and relative to the manifest file on disk.
struct PlateRecord {
    std::string id;
    Subset subset = Subset::synthetic;
    std::filesystem::path hr_path;
    std::string truth;
    std::optional<CropBox> crop_box;
    std::optional<std::filesystem::path> lr_path;
    std::optional<std::string> degradation;  // config hash
    std::optional<std::filesystem::path> sr_path;  // upscaled to the HR size
    friend bool operator==(const PlateRecord&, const PlateRecord&) = default;
};

/// A record that could not be ingested.
struct RecordError {
    std::string source;
    std::string message;
    friend bool operator==(const RecordError&, const RecordError&) = default;
};

struct Manifest {
    std::vector<PlateRecord> records;
    Provenance provenance;  // tool version, producing config hash, seed
    std::string notes;
    std::vector<RecordError> errors;
    friend bool operator==(const Manifest&, const Manifest&) = default;

    const PlateRecord* find(std::string_view id) const;
    std::map<Subset, std::size_t> subset_counts() const;
};

/// Paths in the JSON are written relative to `base`.
nlohmann::json to_json(const Manifest& m, const std::filesystem::path& base);
/// Relative paths are resolved against `base`. Throws InvalidArgument naming the key.
Manifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base);

void save_manifest(const Manifest& m, const std::filesystem::path& file);
Manifest load_manifest(const std::filesystem::path& file);

/// Problems that make the manifest unusable: duplicate ids, truths outside the
/// plate alphabet, missing HR or LR files. Empty when valid.
std::vector<std::string> validate(const Manifest& m);

/// One JSON object per line: {"path", "truth", "subset", optional "box": [x, y, w, h],
/// optional "id"}. Images are resolved against `image_root`; crops (or whole
/// images) are written to <out_root>/hr/<id>.png. Unreadable images and bad
/// records become error entries; malformed lines throw ParseError with the line.
Manifest ingest(const std::filesystem::path& image_root, const std::filesystem::path& annotations,
                const std::filesystem::path& out_root);

struct SynthOptions {
    int gap_jitter = 2;       // extra pixels per gap drawn from [0, gap_jitter]
    int baseline_jitter = 2;  // per-glyph vertical offset drawn from [-j, j]
};

/// n plates with pattern-conforming random text rendered from the atlas into
/// <out_root>/hr/<id>.png. Everything depends only on the seed.
Manifest synth_plates(int n, std::uint64_t seed, const ocr::FontAtlas& atlas, const ocr::PatternSet& patterns,
                      const std::filesystem::path& out_root, const SynthOptions& options = {});

/// Degrades every HR image into <out_root>/lr/<id>.png with the record's own
/// stream, filling lr_path and degradation. Output does not depend on `jobs`.
Manifest make_lr_pairs(const Manifest& m, const degrade::DegradationConfig& cfg,
                       const std::filesystem::path& out_root, unsigned jobs = 1);

/// Stratified by subset, shuffled per stratum from the seed; each stratum
/// contributes round(frac * size) records to train. Both outputs keep the
/// input order.
std::pair<Manifest, Manifest> split(const Manifest& m, double train_frac, std::uint64_t seed);

}  // namespace lpsr::dataset
