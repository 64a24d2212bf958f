#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "lpsr/errors.hpp"
#include "lpsr/metrics.hpp"

namespace lpsr::metrics {

using nlohmann::json;

namespace {

std::pair<double, double> mean_std(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    const double mean = s / static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string fmt(double v, const char* spec = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

EvalReport build_report(std::vector<EvalRow> rows, std::string model_id, Provenance provenance) {
    if (rows.empty()) throw UndefinedMetric("report '" + model_id + "': no records to evaluate");
    std::sort(rows.begin(), rows.end(), [](const EvalRow& a, const EvalRow& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].id == rows[i - 1].id) throw InvalidArgument("report: duplicate record id '" + rows[i].id + "'");

    EvalReport r;
    r.model_id = std::move(model_id);
    r.provenance = std::move(provenance);
    std::vector<double> psnrs, ssims;
    std::size_t exact = 0;
    for (auto& row : rows) {
        if (row.psnr_db && !std::isfinite(*row.psnr_db)) throw InvalidArgument("report: non-finite PSNR in " + row.id);
        const std::string p = normalize_plate(row.pred), t = normalize_plate(row.truth);
        ReportRow rr;
        rr.exact_match = p == t;
        rr.char_errors = edit_distance(p, t);
        r.confusion.add(p, t);
        exact += rr.exact_match;
        if (row.psnr_db) psnrs.push_back(*row.psnr_db);
        else ++r.psnr_identical;
        ssims.push_back(row.ssim);
        rr.row = std::move(row);
        r.rows.push_back(std::move(rr));
    }
    if (!psnrs.empty()) std::tie(r.psnr_mean, r.psnr_std) = mean_std(psnrs);
    std::tie(r.ssim_mean, r.ssim_std) = mean_std(ssims);
    r.exact_match_rate = static_cast<double>(exact) / static_cast<double>(r.rows.size());
    r.micro = r.confusion.micro_counts();
    if (r.confusion.total() > 0) {
        r.char_accuracy = char_accuracy(r.confusion);
        r.accuracy = accuracy(r.micro);
    } else {
        // Every prediction and truth is empty: nothing to get wrong.
        r.char_accuracy = 1.0;
        r.accuracy = 1.0;
    }
    if (r.micro.tp + r.micro.fp > 0) {
        r.precision_micro = precision(r.micro);
        r.precision_macro = macro_precision(r.confusion);
    }
    for (char c : CharConfusionMatrix::kLabels) {
        const auto k = r.confusion.class_counts(c);
        if (k.tp + k.fp > 0) r.precision_per_class.emplace_back(c, precision(k));
    }
    return r;
}

json to_json(const EvalReport& r) {
    json rows = json::array();
    for (const auto& rr : r.rows)
        rows.push_back({{"id", rr.row.id},
                        {"psnr_db", opt(rr.row.psnr_db)},
                        {"ssim", rr.row.ssim},
                        {"pred", rr.row.pred},
                        {"truth", rr.row.truth},
                        {"exact_match", rr.exact_match},
                        {"char_errors", rr.char_errors}});
    json per_class = json::object();
    for (const auto& [c, v] : r.precision_per_class) per_class[std::string(1, c)] = v;
    json labels = json::array();
    for (char c : CharConfusionMatrix::kLabels) labels.push_back(std::string(1, c));
    labels.push_back("eps");
    json grid = json::array();
    for (const auto& row : r.confusion.counts()) grid.push_back(row);
    return {{"model_id", r.model_id},
            {"provenance", lpsr::to_json(r.provenance)},
            {"negatives", "per character class, one-vs-rest over aligned pairs"},
            {"summary",
             {{"records", r.rows.size()},
              {"psnr_mean", opt(r.psnr_mean)},
              {"psnr_std", opt(r.psnr_std)},
              {"psnr_identical", r.psnr_identical},
              {"ssim_mean", r.ssim_mean},
              {"ssim_std", r.ssim_std},
              {"exact_match_rate", r.exact_match_rate},
              {"char_accuracy", r.char_accuracy},
              {"accuracy", r.accuracy},
              {"precision_micro", opt(r.precision_micro)},
              {"precision_macro", opt(r.precision_macro)},
              {"counts", {{"tp", r.micro.tp}, {"fp", r.micro.fp}, {"tn", r.micro.tn}, {"fn", r.micro.fn}}}}},
            {"precision_per_class", per_class},
            {"confusion", {{"labels", labels}, {"rows_are", "truth"}, {"counts", grid}}},
            {"rows", rows}};
}

EvalReport report_from_json(const json& j) {
    try {
        std::vector<EvalRow> rows;
        for (const auto& row : j.at("rows")) {
            EvalRow e;
            e.id = row.at("id").get<std::string>();
            if (!row.at("psnr_db").is_null()) e.psnr_db = row.at("psnr_db").get<double>();
            e.ssim = row.at("ssim").get<double>();
            e.pred = row.at("pred").get<std::string>();
            e.truth = row.at("truth").get<std::string>();
            rows.push_back(std::move(e));
        }
        return build_report(std::move(rows), j.at("model_id").get<std::string>(),
                            provenance_from_json(j.at("provenance")));
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("report json: ") + e.what());
    }
}

std::string to_csv(std::span<const EvalReport> reports) {
    std::string out = "id,model,psnr_db,ssim,pred,truth,exact_match,char_errors\n";
    for (const auto& r : reports)
        for (const auto& rr : r.rows) {
            out += csv_field(rr.row.id) + ',' + csv_field(r.model_id) + ',';
            if (rr.row.psnr_db) out += fmt(*rr.row.psnr_db);
            out += ',' + fmt(rr.row.ssim) + ',' + csv_field(rr.row.pred) + ',' + csv_field(rr.row.truth) + ',';
            out += (rr.exact_match ? "1," : "0,") + std::to_string(rr.char_errors) + '\n';
        }
    return out;
}

std::string to_svg(std::span<const EvalReport> reports) {
    struct Metric {
        const char* name;
        std::optional<double> (*get)(const EvalReport&);
    };
    static const Metric metrics[] = {
        {"exact match", [](const EvalReport& r) -> std::optional<double> { return r.exact_match_rate; }},
        {"char accuracy", [](const EvalReport& r) -> std::optional<double> { return r.char_accuracy; }},
        {"precision (micro)", [](const EvalReport& r) { return r.precision_micro; }},
        {"SSIM", [](const EvalReport& r) -> std::optional<double> { return r.ssim_mean; }},
    };
    static const char* palette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1"};
    const int n = static_cast<int>(reports.size());
    const int bar = 24, group_gap = 30, left = 50, top = 30, plot_h = 200;
    const int group_w = std::max(1, n) * bar + group_gap;
    const int width = left + static_cast<int>(std::size(metrics)) * group_w + 20;
    const int legend_y = top + plot_h + 40;
    const int height = legend_y + 18 * n + 10;

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    s << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << width - 10 << "\" y2=\""
      << top + plot_h << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double y = top + plot_h - plot_h * t / 4.0;
        s << "<text x=\"" << left - 6 << "\" y=\"" << fmt(y + 4, "%.1f") << "\" text-anchor=\"end\">"
          << fmt(t / 4.0, "%.2f") << "</text>\n";
    }
    for (std::size_t g = 0; g < std::size(metrics); ++g) {
        const int gx = left + static_cast<int>(g) * group_w + group_gap / 2;
        for (int m = 0; m < n; ++m) {
            const auto v = metrics[g].get(reports[m]);
            if (!v) continue;
            const double h = plot_h * std::clamp(*v, 0.0, 1.0);
            s << "<rect x=\"" << gx + m * bar << "\" y=\"" << fmt(top + plot_h - h, "%.2f") << "\" width=\""
              << bar - 2 << "\" height=\"" << fmt(h, "%.2f") << "\" fill=\"" << palette[m % std::size(palette)]
              << "\"><title>" << xml_escape(reports[m].model_id) << ' ' << metrics[g].name << ' '
              << fmt(*v, "%.4f") << "</title></rect>\n";
        }
        s << "<text x=\"" << gx + n * bar / 2 << "\" y=\"" << top + plot_h + 16 << "\" text-anchor=\"middle\">"
          << metrics[g].name << "</text>\n";
    }
    for (int m = 0; m < n; ++m) {
        const int y = legend_y + 18 * m;
        s << "<rect x=\"" << left << "\" y=\"" << y - 10 << "\" width=\"12\" height=\"12\" fill=\""
          << palette[m % std::size(palette)] << "\"/><text x=\"" << left + 18 << "\" y=\"" << y << "\">"
          << xml_escape(reports[m].model_id) << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

std::vector<std::size_t> rank_reports(std::span<const EvalReport> reports) {
    std::vector<std::size_t> idx(reports.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (reports[a].exact_match_rate != reports[b].exact_match_rate)
            return reports[a].exact_match_rate > reports[b].exact_match_rate;
        return reports[a].char_accuracy > reports[b].char_accuracy;
    });
    return idx;
}

}  // namespace lpsr::metrics
