#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lpsr/image.hpp"
#include "lpsr/provenance.hpp"

namespace lpsr::metrics {

/// PSNR in dB over all samples. nullopt means identical inputs (MSE = 0).
std::optional<double> psnr(const img::Image& ref, const img::Image& test, double peak = 1.0);

/// Mean SSIM on luma: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, dynamic range 1, averaged over window positions fully inside
/// the image.
double ssim(const img::Image& ref, const img::Image& test);

/// Gap marker in alignments and the last confusion-matrix slot.
inline constexpr char kGap = '\0';

struct AlignedPair {
    char pred;   // kGap for an insertion
    char truth;  // kGap for a deletion
    friend bool operator==(const AlignedPair&, const AlignedPair&) = default;
};

/// Unit-cost Levenshtein alignment after removing hyphens. Traceback runs from
/// the end and prefers substitution (or match), then deletion, then insertion.
std::vector<AlignedPair> align_strings(std::string_view pred, std::string_view truth);

/// Edit distance of the alignment above.
std::size_t edit_distance(std::string_view pred, std::string_view truth);

struct ConfusionCounts {
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// (tp + tn) / (tp + tn + fp + fn). Throws UndefinedMetric on a zero total.
double accuracy(const ConfusionCounts& c);
/// tp / (tp + fp). Throws UndefinedMetric when tp + fp = 0.
double precision(const ConfusionCounts& c);

/// Counts over A-Z, 0-9 and the gap slot. Rows are truth, columns prediction.
class CharConfusionMatrix {
public:
    static constexpr std::size_t kClasses = 37;
    static constexpr std::string_view kLabels = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

    /// Slot of a plate character or kGap. Throws InvalidArgument otherwise.
    static std::size_t index(char c);

    void add(const AlignedPair& p);
    void add(std::string_view pred, std::string_view truth);

    std::uint64_t at(char truth, char pred) const { return counts_[index(truth)][index(pred)]; }
    std::uint64_t row_sum(char truth) const;
    std::uint64_t col_sum(char pred) const;
    std::uint64_t total() const;
    std::uint64_t diagonal() const;

    /// One-vs-rest counts for a character class: tn counts every aligned pair
    /// in which the class appears neither as truth nor as prediction.
    ConfusionCounts class_counts(char c) const;
    /// Sum of class_counts over the 36 characters.
    ConfusionCounts micro_counts() const;

    const std::array<std::array<std::uint64_t, kClasses>, kClasses>& counts() const noexcept { return counts_; }
    friend bool operator==(const CharConfusionMatrix&, const CharConfusionMatrix&) = default;

private:
    std::array<std::array<std::uint64_t, kClasses>, kClasses> counts_{};
};

CharConfusionMatrix char_confusion(std::span<const std::pair<std::string, std::string>> records);

/// Micro precision over the 36 characters. Throws UndefinedMetric when no
/// character was predicted.
double micro_precision(const CharConfusionMatrix& m);
/// Mean precision over characters that were predicted at least once.
double macro_precision(const CharConfusionMatrix& m);
/// Correct aligned pairs over all aligned pairs.
double char_accuracy(const CharConfusionMatrix& m);

/// Uppercased plate text keeping only A-Z and 0-9.
std::string normalize_plate(std::string_view text);

struct EvalRow {
    std::string id;
    std::optional<double> psnr_db;  // nullopt: identical to the reference
    double ssim = 0.0;
    std::string pred;
    std::string truth;
};

struct ReportRow {
    EvalRow row;
    bool exact_match = false;
    std::size_t char_errors = 0;
};

struct EvalReport {
    std::string model_id;
    std::vector<ReportRow> rows;  // sorted by id
    std::optional<double> psnr_mean, psnr_std;  // over rows with a finite PSNR
    std::size_t psnr_identical = 0;
    double ssim_mean = 0.0, ssim_std = 0.0;
    double exact_match_rate = 0.0;
    double char_accuracy = 0.0;
    double accuracy = 0.0;  // from micro counts
    std::optional<double> precision_micro, precision_macro;
    std::vector<std::pair<char, double>> precision_per_class;  // predicted classes only
    ConfusionCounts micro;
    CharConfusionMatrix confusion;
    Provenance provenance;
};

/// Aggregates are folded in id order, so row order never matters.
/// Throws UndefinedMetric for no rows and InvalidArgument for duplicate ids.
EvalReport build_report(std::vector<EvalRow> rows, std::string model_id, Provenance provenance = {});

nlohmann::json to_json(const EvalReport& r);
EvalReport report_from_json(const nlohmann::json& j);

/// One line per image: id,model,psnr_db,ssim,pred,truth,exact_match,char_errors.
std::string to_csv(std::span<const EvalReport> reports);

/// Grouped bars, one group per rate metric, one bar per model.
std::string to_svg(std::span<const EvalReport> reports);

/// Indices ordered by exact-match rate, then char accuracy, both descending;
/// remaining ties keep input order.
std::vector<std::size_t> rank_reports(std::span<const EvalReport> reports);

}  // namespace lpsr::metrics
