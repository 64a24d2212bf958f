#include <fstream>
#include <map>
#include <optional>

#include "lpsr/cli.hpp"
#include "lpsr/errors.hpp"
#include "lpsr/hash.hpp"
#include "lpsr/imgcore.hpp"
#include "lpsr/parallel.hpp"
#include "lpsr/png_io.hpp"
#include "lpsr/srnet.hpp"
#include "lpsr/subprocess.hpp"
#include "lpsr/weights.hpp"

namespace lpsr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

UpscalerSpec UpscalerSpec::parse(std::string_view spec, const fs::path& weights, const std::string& command) {
    const auto colon = spec.find(':');
    const std::string kind(spec.substr(0, colon));
    const std::string arg = colon == std::string_view::npos ? "" : std::string(spec.substr(colon + 1));
    UpscalerSpec s;
    if (kind == "bilinear" || kind == "bicubic") {
        if (!arg.empty()) throw InvalidArgument("upscaler '" + kind + "' takes no argument");
        s.kind = kind == "bilinear" ? Kind::bilinear : Kind::bicubic;
    } else if (kind == "generator") {
        s.kind = Kind::generator;
        s.weights = arg.empty() ? weights : fs::path(arg);
        if (s.weights.empty()) throw InvalidArgument("upscaler 'generator' needs weights (generator:<path> or --weights)");
    } else if (kind == "external") {
        s.kind = Kind::external;
        s.command = arg.empty() ? command : arg;
        if (s.command.find("{in}") == std::string::npos || s.command.find("{out}") == std::string::npos)
            throw InvalidArgument("upscaler 'external' needs a command containing {in} and {out}");
    } else {
        throw InvalidArgument("unknown upscaler '" + kind + "' (expected bilinear, bicubic, generator or external)");
    }
    return s;
}

std::string UpscalerSpec::model_id() const {
    switch (kind) {
        case Kind::bilinear: return "bilinear";
        case Kind::bicubic: return "bicubic";
        case Kind::generator: return "generator-" + weights.stem().string();
        case Kind::external: return "external-" + hex64(fnv1a64(command)).substr(0, 8);
    }
    return "unknown";
}

ImageKind parse_image_kind(std::string_view s) {
    if (s == "hr") return ImageKind::hr;
    if (s == "lr") return ImageKind::lr;
    if (s == "sr") return ImageKind::sr;
    throw InvalidArgument("image must be hr, lr or sr, got '" + std::string(s) + "'");
}

std::string to_string(ImageKind k) {
    switch (k) {
        case ImageKind::hr: return "hr";
        case ImageKind::lr: return "lr";
        case ImageKind::sr: return "sr";
    }
    return "?";
}

json to_json(const Predictions& p) {
    json items = json::array();
    for (const auto& it : p.items)
        items.push_back({{"id", it.id},
                         {"text", it.plate.text},
                         {"raw", it.plate.raw},
                         {"confidence", it.plate.confidence},
                         {"no_pattern", it.plate.no_pattern}});
    return {{"provenance", lpsr::to_json(p.provenance)},
            {"image", to_string(p.image)},
            {"recognizer", p.recognizer},
            {"predictions", items}};
}

Predictions predictions_from_json(const json& j) {
    try {
        Predictions p;
        p.provenance = provenance_from_json(j.at("provenance"));
        p.image = parse_image_kind(j.at("image").get<std::string>());
        p.recognizer = j.at("recognizer").get<std::string>();
        for (const auto& it : j.at("predictions")) {
            Prediction pr;
            pr.id = it.at("id").get<std::string>();
            pr.plate.text = it.at("text").get<std::string>();
            pr.plate.raw = it.at("raw").get<std::string>();
            pr.plate.confidence = it.at("confidence").get<double>();
            pr.plate.no_pattern = it.at("no_pattern").get<bool>();
            p.items.push_back(std::move(pr));
        }
        return p;
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("predictions: ") + e.what());
    }
}

void save_predictions(const Predictions& p, const fs::path& file) {
    fs::create_directories(fs::absolute(file).parent_path());
    std::ofstream out(file, std::ios::binary);
    out << to_json(p).dump(2) << '\n';
    if (!out) throw IoError("cannot write " + file.string());
}

Predictions load_predictions(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot read predictions " + file.string());
    try {
        return predictions_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw InvalidArgument("predictions " + file.string() + ": " + e.what());
    }
}

namespace {

img::Image fit_to(const img::Image& image, int w, int h) {
    if (image.width() == w && image.height() == h) return image;
    return img::resize(image, w, h, img::Filter::bicubic).clamped();
}

std::pair<int, int> png_size(const fs::path& p) {
    const img::Image i = img::read_png(p);
    return {i.width(), i.height()};
}

}  // namespace

dataset::Manifest upscale_manifest(const dataset::Manifest& m, const UpscalerSpec& spec, const fs::path& out_root,
                                   unsigned jobs) {
    for (const auto& r : m.records)
        if (!r.lr_path) throw InvalidArgument("record '" + r.id + "' has no lr_path; run degrade first");
    std::optional<srnet::WeightStore> store;
    srnet::GeneratorConfig gcfg;
    std::string identity = spec.model_id();
    if (spec.kind == UpscalerSpec::Kind::generator) {
        if (!fs::is_regular_file(spec.weights)) throw InvalidArgument("weights file not found: " + spec.weights.string());
        store = srnet::load_weights(spec.weights);
        if (store->arch_tag != "rrdb_gen")
            throw InvalidArgument("weights " + spec.weights.string() + " are '" + store->arch_tag + "', not rrdb_gen");
        gcfg = srnet::GeneratorConfig::from_json(store->config);
        srnet::validate_generator_weights(*store, gcfg);
        std::ifstream in(spec.weights, std::ios::binary);
        identity += ":" + hex64(fnv1a64(std::string(std::istreambuf_iterator<char>(in), {})));
    } else if (spec.kind == UpscalerSpec::Kind::external) {
        identity += ":" + spec.command;
    }

    dataset::Manifest out = m;
    fs::create_directories(out_root / "sr");
    parallel_for(out.records.size(), jobs, [&](std::size_t i) {
        dataset::PlateRecord& r = out.records[i];
        const auto [hw, hh] = png_size(r.hr_path);
        const img::Image lr = img::read_png(*r.lr_path);
        img::Image sr(1, 1, 1);
        switch (spec.kind) {
            case UpscalerSpec::Kind::bilinear: sr = img::resize(lr, hw, hh, img::Filter::bilinear).clamped(); break;
            case UpscalerSpec::Kind::bicubic: sr = img::resize(lr, hw, hh, img::Filter::bicubic).clamped(); break;
            case UpscalerSpec::Kind::generator:
                sr = srnet::upscale_with_generator(lr, *store, gcfg, hw, hh).image;
                break;
            case UpscalerSpec::Kind::external: {
                TempDir tmp;
                const fs::path dst = tmp.path() / "out.png";
                const auto res = run_shell(fill_template(spec.command, {{"in", fs::absolute(*r.lr_path).string()},
                                                                        {"out", dst.string()}}),
                                           spec.timeout);
                if (res.timed_out) throw AdapterFailure("upscaler adapter timed out on " + r.id, res.err, -1);
                if (res.exit_code != 0)
                    throw AdapterFailure("upscaler adapter exited with status " + std::to_string(res.exit_code) +
                                             " on " + r.id,
                                         res.err, res.exit_code);
                sr = fit_to(img::read_png(dst), hw, hh);
                break;
            }
        }
        r.sr_path = fs::absolute(out_root / "sr" / (r.id + ".png")).lexically_normal();
        img::write_png(sr, *r.sr_path);
    });
    out.provenance.config_hash = hex64(fnv1a64(m.provenance.config_hash + "|upscale|" + identity));
    out.notes = "upscaler " + spec.model_id();
    return out;
}

Predictions recognize_manifest(const dataset::Manifest& m, ImageKind image, const RecognizerSpec& spec,
                               const ocr::PatternSet& patterns, unsigned jobs) {
    auto path_of = [&](const dataset::PlateRecord& r) -> fs::path {
        switch (image) {
            case ImageKind::hr: return r.hr_path;
            case ImageKind::lr:
                if (!r.lr_path) throw InvalidArgument("record '" + r.id + "' has no lr_path; run degrade first");
                return *r.lr_path;
            case ImageKind::sr:
                if (!r.sr_path) throw InvalidArgument("record '" + r.id + "' has no sr_path; run upscale first");
                return *r.sr_path;
        }
        return {};
    };
    for (const auto& r : m.records) path_of(r);

    const ocr::FontAtlas atlas = ocr::FontAtlas::builtin();
    Predictions p;
    p.image = image;
    p.recognizer = spec.external ? "external" : "builtin";
    p.items.resize(m.records.size());
    parallel_for(m.records.size(), jobs, [&](std::size_t i) {
        const auto& r = m.records[i];
        const img::Image im = img::read_png(path_of(r));
        p.items[i].id = r.id;
        p.items[i].plate = spec.external ? ocr::recognize_external(im, {spec.command, spec.timeout}, patterns)
                                         : ocr::recognize_builtin(im, atlas, patterns);
    });
    std::string pats;
    for (const auto& s : patterns.patterns()) pats += s + ",";
    p.provenance = m.provenance;
    p.provenance.config_hash = hex64(fnv1a64(m.provenance.config_hash + "|recognize|" + to_string(image) + "|" +
                                             p.recognizer + "|" + spec.command + "|" + pats));
    return p;
}

metrics::EvalReport evaluate_manifest(const dataset::Manifest& m, const Predictions& p, const std::string& model_id,
                                      unsigned jobs) {
    if (m.records.empty()) throw UndefinedMetric("evaluate: the manifest has no records, metrics are undefined");
    if (p.image == ImageKind::lr)
        throw InvalidArgument("evaluate: fidelity needs HR-sized images; recognize hr or sr images");
    std::map<std::string, const Prediction*> by_id;
    for (const auto& it : p.items) by_id[it.id] = &it;
    std::vector<metrics::EvalRow> rows(m.records.size());
    for (const auto& r : m.records) {
        if (!by_id.count(r.id)) throw InvalidArgument("evaluate: no prediction for record '" + r.id + "'");
        if (p.image == ImageKind::sr && !r.sr_path)
            throw InvalidArgument("evaluate: record '" + r.id + "' has no sr_path");
    }
    parallel_for(m.records.size(), jobs, [&](std::size_t i) {
        const auto& r = m.records[i];
        const img::Image hr = img::read_png(r.hr_path);
        const img::Image test = p.image == ImageKind::sr ? img::read_png(*r.sr_path) : hr;
        if (!hr.same_shape(test)) throw InvalidArgument("evaluate: '" + r.id + "' SR and HR sizes differ");
        rows[i] = {r.id, metrics::psnr(hr, test), metrics::ssim(hr, test), by_id.at(r.id)->plate.text, r.truth};
    });
    Provenance prov = p.provenance;
    prov.config_hash = hex64(fnv1a64(p.provenance.config_hash + "|evaluate|" + model_id));
    return metrics::build_report(std::move(rows), model_id, prov);
}

void write_reports(std::span<const metrics::EvalReport> reports, const Provenance& provenance, const fs::path& dir,
                   const std::string& stem, const std::vector<std::string>& formats) {
    fs::create_directories(dir);
    const json prov = lpsr::to_json(provenance);
    auto write = [&](const std::string& ext, const std::string& body) {
        std::ofstream out(dir / (stem + "." + ext), std::ios::binary);
        out << body;
        if (!out) throw IoError("cannot write " + (dir / (stem + "." + ext)).string());
    };
    for (const auto& f : formats) {
        if (f == "json") {
            json j;
            if (reports.size() == 1) {
                j = metrics::to_json(reports[0]);
            } else {
                json ranking = json::array();
                const auto order = metrics::rank_reports(reports);
                for (std::size_t k = 0; k < order.size(); ++k) {
                    const auto& r = reports[order[k]];
                    ranking.push_back({{"rank", k + 1},
                                       {"model_id", r.model_id},
                                       {"exact_match_rate", r.exact_match_rate},
                                       {"char_accuracy", r.char_accuracy},
                                       {"accuracy", r.accuracy},
                                       {"precision_micro", r.precision_micro ? json(*r.precision_micro) : json()},
                                       {"psnr_mean", r.psnr_mean ? json(*r.psnr_mean) : json()},
                                       {"ssim_mean", r.ssim_mean}});
                }
                json all = json::array();
                for (const auto& r : reports) all.push_back(metrics::to_json(r));
                j = {{"ranking", ranking}, {"reports", all}};
            }
            j["provenance"] = prov;
            j["generated_at"] = artifact_timestamp();
            write("json", j.dump(2) + "\n");
        } else if (f == "csv") {
            write("csv", "# provenance " + prov.dump() + "\n" + metrics::to_csv(reports));
        } else if (f == "svg") {
            std::string svg = metrics::to_svg(reports);
            const auto at = svg.find('\n') + 1;
            std::string meta = prov.dump();
            svg.insert(at, "<metadata id=\"provenance\"><![CDATA[" + meta + "]]></metadata>\n");
            write("svg", svg);
        } else {
            throw InvalidArgument("unknown report format '" + f + "' (expected json, csv or svg)");
        }
    }
}

}  // namespace lpsr::cli
