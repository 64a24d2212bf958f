#include <algorithm>
#include <cctype>
#include <string>
#include <vector>

#include "lpsr/errors.hpp"
#include "lpsr/metrics.hpp"

namespace lpsr::metrics {

namespace {

std::string strip_hyphens(std::string_view s) {
    std::string out;
    for (char c : s)
        if (c != '-') out += c;
    return out;
}

}  // namespace

std::vector<AlignedPair> align_strings(std::string_view pred_in, std::string_view truth_in) {
    const std::string p = strip_hyphens(pred_in), t = strip_hyphens(truth_in);
    const std::size_t n = p.size(), m = t.size();
    std::vector<std::size_t> d((n + 1) * (m + 1));
    auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
    for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
    for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= m; ++j)
            at(i, j) = std::min({at(i - 1, j - 1) + (p[i - 1] != t[j - 1]), at(i - 1, j) + 1, at(i, j - 1) + 1});

    std::vector<AlignedPair> out;
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + (p[i - 1] != t[j - 1])) {
            out.push_back({p[--i], t[--j]});
        } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
            out.push_back({p[--i], kGap});
        } else {
            out.push_back({kGap, t[--j]});
        }
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::size_t edit_distance(std::string_view pred, std::string_view truth) {
    std::size_t e = 0;
    for (const auto& a : align_strings(pred, truth)) e += a.pred != a.truth;
    return e;
}

double accuracy(const ConfusionCounts& c) {
    const std::uint64_t total = c.tp + c.tn + c.fp + c.fn;
    if (total == 0) throw UndefinedMetric("accuracy: tp + tn + fp + fn = 0");
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
}

double precision(const ConfusionCounts& c) {
    if (c.tp + c.fp == 0) throw UndefinedMetric("precision: tp + fp = 0");
    return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

std::size_t CharConfusionMatrix::index(char c) {
    if (c == kGap) return kClasses - 1;
    const auto pos = kLabels.find(c);
    if (pos == std::string_view::npos)
        throw InvalidArgument(std::string("confusion matrix: character '") + c + "' outside A-Z, 0-9");
    return pos;
}

void CharConfusionMatrix::add(const AlignedPair& p) {
    if (p.pred == kGap && p.truth == kGap) throw InvalidArgument("confusion matrix: empty aligned pair");
    ++counts_[index(p.truth)][index(p.pred)];
}

void CharConfusionMatrix::add(std::string_view pred, std::string_view truth) {
    for (const auto& p : align_strings(pred, truth)) add(p);
}

std::uint64_t CharConfusionMatrix::row_sum(char truth) const {
    std::uint64_t s = 0;
    for (auto v : counts_[index(truth)]) s += v;
    return s;
}

std::uint64_t CharConfusionMatrix::col_sum(char pred) const {
    const auto k = index(pred);
    std::uint64_t s = 0;
    for (const auto& row : counts_) s += row[k];
    return s;
}

std::uint64_t CharConfusionMatrix::total() const {
    std::uint64_t s = 0;
    for (const auto& row : counts_)
        for (auto v : row) s += v;
    return s;
}

std::uint64_t CharConfusionMatrix::diagonal() const {
    std::uint64_t s = 0;
    for (std::size_t k = 0; k + 1 < kClasses; ++k) s += counts_[k][k];
    return s;
}

ConfusionCounts CharConfusionMatrix::class_counts(char c) const {
    if (c == kGap) throw InvalidArgument("confusion matrix: the gap slot is not a class");
    ConfusionCounts r;
    r.tp = at(c, c);
    r.fp = col_sum(c) - r.tp;
    r.fn = row_sum(c) - r.tp;
    r.tn = total() - r.tp - r.fp - r.fn;
    return r;
}

ConfusionCounts CharConfusionMatrix::micro_counts() const {
    ConfusionCounts s;
    for (char c : kLabels) {
        const auto k = class_counts(c);
        s.tp += k.tp;
        s.fp += k.fp;
        s.tn += k.tn;
        s.fn += k.fn;
    }
    return s;
}

CharConfusionMatrix char_confusion(std::span<const std::pair<std::string, std::string>> records) {
    CharConfusionMatrix m;
    for (const auto& [pred, truth] : records) m.add(pred, truth);
    return m;
}

double micro_precision(const CharConfusionMatrix& m) { return precision(m.micro_counts()); }

double macro_precision(const CharConfusionMatrix& m) {
    double s = 0;
    int n = 0;
    for (char c : CharConfusionMatrix::kLabels) {
        const auto k = m.class_counts(c);
        if (k.tp + k.fp == 0) continue;
        s += precision(k);
        ++n;
    }
    if (n == 0) throw UndefinedMetric("macro precision: no character was predicted");
    return s / n;
}

double char_accuracy(const CharConfusionMatrix& m) {
    const auto total = m.total();
    if (total == 0) throw UndefinedMetric("char accuracy: no aligned characters");
    return static_cast<double>(m.diagonal()) / static_cast<double>(total);
}

std::string normalize_plate(std::string_view text) {
    std::string out;
    for (char c : text) {
        const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if ((u >= 'A' && u <= 'Z') || (u >= '0' && u <= '9')) out += u;
    }
    return out;
}

}  // namespace lpsr::metrics
