#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lpsr/cli.hpp"
#include "lpsr/degrade.hpp"
#include "lpsr/errors.hpp"
#include "lpsr/hash.hpp"
#include "lpsr/version.hpp"

namespace lpsr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
    fs::path config;
    fs::path manifest;
    fs::path out;
    fs::path root;
    fs::path annotations;
    fs::path predictions;
    fs::path patterns;
    fs::path degradation;
    fs::path weights;
    std::string preset = "x4-paper";
    std::optional<double> scale;
    std::optional<std::uint64_t> seed;
    unsigned jobs = 1;
    int n = 0;
    double train_frac = 0.8;
    int timeout_ms = 30000;
    std::vector<std::string> upscalers;
    std::string upscaler_cmd;
    std::string recognizer = "builtin";
    std::string adapter_cmd;
    std::string image = "sr";
    std::string model_id;
    std::vector<std::string> report_formats;
};

json read_json(const fs::path& file, const std::string& what) {
    if (!fs::is_regular_file(file)) throw InvalidArgument(what + " not found: " + file.string());
    std::ifstream in(file, std::ios::binary);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidArgument(what + " " + file.string() + ": " + e.what());
    }
}

dataset::Manifest need_manifest(const Options& o) {
    if (o.manifest.empty()) throw InvalidArgument("--manifest is required");
    if (!fs::is_regular_file(o.manifest)) throw InvalidArgument("manifest not found: " + o.manifest.string());
    return dataset::load_manifest(o.manifest);
}

fs::path need_out(const Options& o) {
    if (o.out.empty()) throw InvalidArgument("--out is required");
    return o.out;
}

ocr::PatternSet patterns_of(const Options& o) {
    if (o.patterns.empty()) return ocr::PatternSet::taiwan();
    if (!fs::is_regular_file(o.patterns)) throw InvalidArgument("patterns file not found: " + o.patterns.string());
    return ocr::PatternSet::load(o.patterns);
}

RecognizerSpec recognizer_of(const Options& o) {
    RecognizerSpec s;
    s.timeout = std::chrono::milliseconds(o.timeout_ms);
    if (o.recognizer == "builtin") return s;
    if (o.recognizer != "external")
        throw InvalidArgument("--recognizer must be builtin or external, got '" + o.recognizer + "'");
    if (o.adapter_cmd.find("{img}") == std::string::npos)
        throw InvalidArgument("--recognizer external needs --adapter-cmd containing {img}");
    s.external = true;
    s.command = o.adapter_cmd;
    return s;
}

std::vector<UpscalerSpec> upscalers_of(const Options& o, bool many) {
    std::vector<std::string> names = o.upscalers.empty() ? std::vector<std::string>{"bicubic"} : o.upscalers;
    if (!many && names.size() > 1) throw InvalidArgument("upscale takes one --upscaler; use compare for several");
    std::vector<UpscalerSpec> specs;
    for (const auto& n : names) {
        UpscalerSpec s = UpscalerSpec::parse(n, o.weights, o.upscaler_cmd);
        s.timeout = std::chrono::milliseconds(o.timeout_ms);
        specs.push_back(std::move(s));
    }
    return specs;
}

std::vector<std::string> formats_of(const Options& o) {
    std::vector<std::string> f = o.report_formats.empty() ? std::vector<std::string>{"json", "csv", "svg"}
                                                          : o.report_formats;
    for (const auto& x : f)
        if (x != "json" && x != "csv" && x != "svg")
            throw InvalidArgument("--report-format must be json, csv or svg, got '" + x + "'");
    return f;
}

void summarize(const metrics::EvalReport& r, std::ostream& out) {
    out << r.model_id << ": exact_match=" << r.exact_match_rate << " char_accuracy=" << r.char_accuracy;
    if (r.psnr_mean) out << " psnr=" << *r.psnr_mean;
    out << " ssim=" << r.ssim_mean << "\n";
}

int cmd_synth(const Options& o, std::ostream& out) {
    if (o.n < 0) throw InvalidArgument("--n must be nonnegative");
    const fs::path root = need_out(o);
    const auto m = dataset::synth_plates(o.n, o.seed.value_or(0), ocr::FontAtlas::builtin(), patterns_of(o), root);
    dataset::save_manifest(m, root / "manifest.json");
    out << "synthesized " << m.records.size() << " plates into " << (root / "manifest.json").string() << "\n";
    return kExitOk;
}

int cmd_ingest(const Options& o, std::ostream& out) {
    if (o.root.empty() || o.annotations.empty()) throw InvalidArgument("ingest needs --root and --annotations");
    if (!fs::is_regular_file(o.annotations))
        throw InvalidArgument("annotations not found: " + o.annotations.string());
    const fs::path root = need_out(o);
    const auto m = dataset::ingest(o.root, o.annotations, root);
    dataset::save_manifest(m, root / "manifest.json");
    out << "ingested " << m.records.size() << " records, " << m.errors.size() << " errors\n";
    for (const auto& [s, c] : m.subset_counts()) out << "  " << dataset::to_string(s) << ": " << c << "\n";
    return kExitOk;
}

int cmd_degrade(const Options& o, std::ostream& out) {
    const auto m = need_manifest(o);
    degrade::DegradationConfig cfg = o.degradation.empty()
                                         ? degrade::preset(o.preset)
                                         : degrade::config_from_json(read_json(o.degradation, "degradation config"));
    if (o.scale) cfg.scale_factor = *o.scale;
    if (o.seed) cfg.seed = *o.seed;
    cfg.validate();
    const fs::path root = need_out(o);
    const auto lr = dataset::make_lr_pairs(m, cfg, root, o.jobs);
    dataset::save_manifest(lr, root / "manifest.json");
    out << "degraded " << lr.records.size() << " plates (config " << degrade::config_hash(cfg) << ")\n";
    return kExitOk;
}

int cmd_upscale(const Options& o, std::ostream& out) {
    const auto m = need_manifest(o);
    const auto spec = upscalers_of(o, false).front();
    const fs::path root = need_out(o);
    const auto sr = upscale_manifest(m, spec, root, o.jobs);
    dataset::save_manifest(sr, root / "manifest.json");
    out << "upscaled " << sr.records.size() << " plates with " << spec.model_id() << "\n";
    return kExitOk;
}

int cmd_recognize(const Options& o, std::ostream& out) {
    const auto m = need_manifest(o);
    const auto p = recognize_manifest(m, parse_image_kind(o.image), recognizer_of(o), patterns_of(o), o.jobs);
    const fs::path root = need_out(o);
    save_predictions(p, root / "predictions.json");
    out << "recognized " << p.items.size() << " plates into " << (root / "predictions.json").string() << "\n";
    return kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
    const auto m = need_manifest(o);
    if (o.predictions.empty()) throw InvalidArgument("--predictions is required");
    if (!fs::is_regular_file(o.predictions))
        throw InvalidArgument("predictions not found: " + o.predictions.string());
    const auto formats = formats_of(o);
    const auto p = load_predictions(o.predictions);
    const std::string id = o.model_id.empty() ? m.notes.starts_with("upscaler ") ? m.notes.substr(9) : "model"
                                              : o.model_id;
    const auto report = evaluate_manifest(m, p, id, o.jobs);
    write_reports(std::span(&report, 1), report.provenance, need_out(o), "report", formats);
    summarize(report, out);
    return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
    const auto m = need_manifest(o);
    const auto specs = upscalers_of(o, true);
    const auto rec = recognizer_of(o);
    const auto pats = patterns_of(o);
    const auto formats = formats_of(o);
    const fs::path root = need_out(o);
    if (m.records.empty()) throw UndefinedMetric("compare: the manifest has no records, metrics are undefined");
    std::vector<metrics::EvalReport> reports;
    std::string chain = m.provenance.config_hash;
    for (const auto& spec : specs) {
        const fs::path dir = root / spec.model_id();
        const auto sr = upscale_manifest(m, spec, dir, o.jobs);
        dataset::save_manifest(sr, dir / "manifest.json");
        const auto p = recognize_manifest(sr, ImageKind::sr, rec, pats, o.jobs);
        save_predictions(p, dir / "predictions.json");
        reports.push_back(evaluate_manifest(sr, p, spec.model_id(), o.jobs));
        write_reports(std::span(&reports.back(), 1), reports.back().provenance, dir, "report", formats);
        chain += "|" + reports.back().provenance.config_hash;
    }
    Provenance prov = m.provenance;
    prov.config_hash = hex64(fnv1a64(chain));
    write_reports(reports, prov, root, "compare", formats);
    for (auto i : metrics::rank_reports(reports)) summarize(reports[i], out);
    return kExitOk;
}

int cmd_split(const Options& o, std::ostream& out) {
    const auto m = need_manifest(o);
    if (!(o.train_frac >= 0.0 && o.train_frac <= 1.0)) throw InvalidArgument("--train-frac must be in [0,1]");
    const auto [train, test] = dataset::split(m, o.train_frac, o.seed.value_or(0));
    const fs::path root = need_out(o);
    dataset::save_manifest(train, root / "train.json");
    dataset::save_manifest(test, root / "test.json");
    out << "train " << train.records.size() << ", test " << test.records.size() << "\n";
    return kExitOk;
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
    for (const auto& a : args)
        if (a == flag || a.starts_with(flag + "=")) return true;
    return false;
}

/// Turns the --config object into arguments for flags not already on the
/// command line. Keys are long option names without the dashes.
std::vector<std::string> overlay_config(const std::vector<std::string>& args, CLI::App& app) {
    std::string path;
    std::size_t sub_at = args.size();
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (sub_at == args.size() && app.get_subcommand_no_throw(args[i])) sub_at = i;
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].starts_with("--config=")) path = args[i].substr(9);
    }
    if (path.empty() || sub_at == args.size()) return args;
    CLI::App* sub = app.get_subcommand(args[sub_at]);
    const json j = read_json(path, "config");
    if (!j.is_object()) throw InvalidArgument("config " + path + " must be a JSON object");
    std::vector<std::string> extra;
    for (const auto& [key, value] : j.items()) {
        const std::string flag = "--" + key;
        CLI::Option* opt = key == "config" ? nullptr : sub->get_option_no_throw(flag);
        if (!opt) throw InvalidArgument("config: unknown key '" + key + "' for " + sub->get_name());
        if (given(args, flag)) continue;
        auto push = [&](const json& v) {
            extra.push_back(flag);
            if (v.is_string()) extra.push_back(v.get<std::string>());
            else if (v.is_number() || v.is_boolean()) extra.push_back(v.dump());
            else throw InvalidArgument("config: key '" + key + "' must be a string, number or list");
        };
        if (value.is_array())
            for (const auto& v : value) push(v);
        else
            push(value);
    }
    std::vector<std::string> merged(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(sub_at) + 1);
    merged.insert(merged.end(), extra.begin(), extra.end());
    merged.insert(merged.end(), args.begin() + static_cast<std::ptrdiff_t>(sub_at) + 1, args.end());
    return merged;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"License plate super-resolution and recognition toolkit", "lpsr"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    auto common = [&](CLI::App* s) {
        s->add_option("--config", o.config, "JSON file of option values; flags take precedence");
        s->add_option("--out", o.out, "Output directory");
        s->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::Range(1u, 1024u));
        s->add_option("--patterns", o.patterns, "JSON list of plate patterns");
    };
    auto with_manifest = [&](CLI::App* s) { s->add_option("--manifest", o.manifest, "Input manifest"); };
    auto with_upscaler = [&](CLI::App* s) {
        s->add_option("--upscaler", o.upscalers,
                      "bilinear | bicubic | generator[:weights] | external[:cmd with {in} {out}]");
        s->add_option("--weights", o.weights, "Generator weights (.srwt)");
        s->add_option("--upscaler-cmd", o.upscaler_cmd, "External upscaler command with {in} and {out}");
        s->add_option("--timeout-ms", o.timeout_ms, "Adapter timeout")->check(CLI::PositiveNumber);
    };
    auto with_recognizer = [&](CLI::App* s) {
        s->add_option("--recognizer", o.recognizer, "builtin | external");
        s->add_option("--adapter-cmd", o.adapter_cmd, "External OCR command with {img}");
        if (!s->get_option_no_throw("--timeout-ms"))
            s->add_option("--timeout-ms", o.timeout_ms, "Adapter timeout")->check(CLI::PositiveNumber);
    };
    auto with_reports = [&](CLI::App* s) {
        s->add_option("--report-format", o.report_formats, "json, csv, svg (comma separated or repeated)")
            ->delimiter(',');
    };

    auto* synth = app.add_subcommand("synth", "Render synthetic HR plates");
    common(synth);
    synth->add_option("--n", o.n, "Number of plates")->required();
    synth->add_option("--seed", o.seed, "Random seed");

    auto* ingest = app.add_subcommand("ingest", "Import annotated plate images");
    common(ingest);
    ingest->add_option("--root", o.root, "Image root");
    ingest->add_option("--annotations", o.annotations, "JSON-lines annotation file");

    auto* degrade = app.add_subcommand("degrade", "Make LR images from HR");
    common(degrade);
    with_manifest(degrade);
    degrade->add_option("--preset", o.preset, "Degradation preset (x4-paper, x7.5-star)");
    degrade->add_option("--degradation", o.degradation, "Degradation config JSON");
    degrade->add_option("--scale", o.scale, "Override the scale factor");
    degrade->add_option("--seed", o.seed, "Override the degradation seed");

    auto* upscale = app.add_subcommand("upscale", "Upscale LR images to HR size");
    common(upscale);
    with_manifest(upscale);
    with_upscaler(upscale);

    auto* recognize = app.add_subcommand("recognize", "Read plates");
    common(recognize);
    with_manifest(recognize);
    with_recognizer(recognize);
    recognize->add_option("--image", o.image, "Which image to read: hr, lr or sr");

    auto* evaluate = app.add_subcommand("evaluate", "Score predictions against the manifest");
    common(evaluate);
    with_manifest(evaluate);
    with_reports(evaluate);
    evaluate->add_option("--predictions", o.predictions, "predictions.json from recognize");
    evaluate->add_option("--model-id", o.model_id, "Label used in the report");

    auto* compare = app.add_subcommand("compare", "Upscale, read and score with several upscalers");
    common(compare);
    with_manifest(compare);
    with_upscaler(compare);
    with_recognizer(compare);
    with_reports(compare);

    auto* split = app.add_subcommand("split", "Stratified train/test split");
    common(split);
    with_manifest(split);
    split->add_option("--train-frac", o.train_frac, "Fraction of each subset used for training");
    split->add_option("--seed", o.seed, "Shuffle seed");

    try {
        std::vector<std::string> argv = overlay_config(args, app);
        std::reverse(argv.begin(), argv.end());
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitValidation;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    try {
        if (*synth) return cmd_synth(o, out);
        if (*ingest) return cmd_ingest(o, out);
        if (*degrade) return cmd_degrade(o, out);
        if (*upscale) return cmd_upscale(o, out);
        if (*recognize) return cmd_recognize(o, out);
        if (*evaluate) return cmd_evaluate(o, out);
        if (*compare) return cmd_compare(o, out);
        if (*split) return cmd_split(o, out);
    } catch (const UndefinedMetric& e) {
        err << "error: undefined metric: " << e.what() << "\n";
        return kExitValidation;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const WeightSchemaError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const AdapterFailure& e) {
        err << "error: " << e.what() << "\n";
        if (!e.captured_stderr().empty()) err << e.captured_stderr();
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitValidation;
}

}  // namespace lpsr::cli
