#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lpsr/dataset.hpp"
#include "lpsr/metrics.hpp"
#include "lpsr/ocr.hpp"
#include "lpsr/provenance.hpp"

namespace lpsr::cli {

/// Exit statuses of every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

struct UpscalerSpec {
    enum class Kind { bilinear, bicubic, generator, external };
    Kind kind = Kind::bicubic;
    std::filesystem::path weights;  // generator
    std::string command;            // external: template with {in} and {out}
    std::chrono::milliseconds timeout{30000};

    /// "bilinear", "bicubic", "generator[:weights]" or "external[:command]".
    /// The separate weights / command arguments fill in a bare kind.
    static UpscalerSpec parse(std::string_view spec, const std::filesystem::path& weights = {},
                              const std::string& command = {});
    /// Stable label used in reports and output directory names.
    std::string model_id() const;
};

struct RecognizerSpec {
    bool external = false;
    std::string command;  // template with {img}
    std::chrono::milliseconds timeout{30000};
};

enum class ImageKind { hr, lr, sr };
ImageKind parse_image_kind(std::string_view s);
std::string to_string(ImageKind k);

struct Prediction {
    std::string id;
    ocr::PlateString plate;
};

struct Predictions {
    Provenance provenance;
    ImageKind image = ImageKind::sr;
    std::string recognizer;
    std::vector<Prediction> items;  // manifest order
};

nlohmann::json to_json(const Predictions& p);
Predictions predictions_from_json(const nlohmann::json& j);
void save_predictions(const Predictions& p, const std::filesystem::path& file);
Predictions load_predictions(const std::filesystem::path& file);

/// Upscales every LR image to its HR size into <out_root>/sr/<id>.png.
dataset::Manifest upscale_manifest(const dataset::Manifest& m, const UpscalerSpec& spec,
                                   const std::filesystem::path& out_root, unsigned jobs);

Predictions recognize_manifest(const dataset::Manifest& m, ImageKind image, const RecognizerSpec& spec,
                               const ocr::PatternSet& patterns, unsigned jobs);

/// PSNR / SSIM of the recognized images against HR plus recognition scores.
/// Throws UndefinedMetric for an empty manifest.
metrics::EvalReport evaluate_manifest(const dataset::Manifest& m, const Predictions& p, const std::string& model_id,
                                      unsigned jobs);

/// Writes <dir>/<stem>.{json,csv,svg} for the requested formats, each with a
/// provenance block; the timestamp sits beside it.
void write_reports(std::span<const metrics::EvalReport> reports, const Provenance& provenance,
                   const std::filesystem::path& dir, const std::string& stem, const std::vector<std::string>& formats);

/// Entry point: args excludes the program name. Returns the exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lpsr::cli
