#include <cmath>
#include <cstdio>
#include <numeric>

#include "lpsr/dataset.hpp"
#include "lpsr/errors.hpp"
#include "lpsr/hash.hpp"
#include "lpsr/parallel.hpp"
#include "lpsr/png_io.hpp"
#include "lpsr/rng.hpp"

namespace lpsr::dataset {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kLetters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
constexpr std::string_view kDigits = "0123456789";

std::size_t pick(const CounterRng& rng, std::uint64_t i, std::size_t n) {
    return static_cast<std::size_t>(rng.uniform(i) * static_cast<double>(n));
}

}  // namespace

Manifest synth_plates(int n, std::uint64_t seed, const ocr::FontAtlas& atlas, const ocr::PatternSet& patterns,
                      const fs::path& out_root, const SynthOptions& options) {
    if (n < 1) throw InvalidArgument("synth: n must be at least 1");
    if (patterns.patterns().empty()) throw InvalidArgument("synth: empty pattern set");
    if (options.gap_jitter < 0 || options.baseline_jitter < 0) throw InvalidArgument("synth: negative jitter");
    const CounterRng root(seed);
    Manifest m;
    fs::create_directories(out_root / "hr");
    for (int k = 0; k < n; ++k) {
        char id[32];
        std::snprintf(id, sizeof id, "syn-%05d", k);
        const CounterRng text_rng = root.split(id).split("text");
        const CounterRng style_rng = root.split(id).split("style");
        const std::string& pat = patterns.patterns()[pick(text_rng, 0, patterns.patterns().size())];
        std::string text;
        for (std::size_t i = 0; i < pat.size(); ++i) {
            if (pat[i] == '-') text += '-';
            else if (pat[i] == 'L') text += kLetters[pick(text_rng, i + 1, kLetters.size())];
            else text += kDigits[pick(text_rng, i + 1, kDigits.size())];
        }
        ocr::RenderStyle style;
        style.background = style_rng.uniform(0, 0.85, 0.97);
        style.ink = style_rng.uniform(1, 0.03, 0.2);
        std::uint64_t c = 2;
        const auto glyphs = static_cast<int>(text.size());
        for (int g = 0; g + 1 < glyphs; ++g)
            style.gap_jitter.push_back(static_cast<int>(pick(style_rng, c++, options.gap_jitter + 1)));
        for (int g = 0; g < glyphs; ++g)
            style.baseline_jitter.push_back(static_cast<int>(pick(style_rng, c++, 2 * options.baseline_jitter + 1)) -
                                            options.baseline_jitter);
        style.margin = std::max(style.margin, options.baseline_jitter + 2);
        PlateRecord r;
        r.id = id;
        r.subset = Subset::synthetic;
        r.truth = text;
        r.hr_path = fs::absolute(out_root / "hr" / (r.id + ".png")).lexically_normal();
        img::write_png(ocr::render_plate(text, atlas, style), r.hr_path);
        m.records.push_back(std::move(r));
    }
    std::string params = "synth n=" + std::to_string(n) + " cell=" + std::to_string(atlas.cell_w()) + "x" +
                         std::to_string(atlas.cell_h()) + " gap_jitter=" + std::to_string(options.gap_jitter) +
                         " baseline_jitter=" + std::to_string(options.baseline_jitter) + " patterns=";
    for (const auto& p : patterns.patterns()) params += p + ",";
    m.provenance.config_hash = hex64(fnv1a64(params));
    m.provenance.seed = seed;
    m.notes = "synthetic plates rendered from the built-in font";
    return m;
}

Manifest make_lr_pairs(const Manifest& m, const degrade::DegradationConfig& cfg, const fs::path& out_root,
                       unsigned jobs) {
    cfg.validate();
    const std::string hash = degrade::config_hash(cfg);
    Manifest out = m;
    fs::create_directories(out_root / "lr");
    parallel_for(out.records.size(), jobs, [&](std::size_t i) {
        PlateRecord& r = out.records[i];
        const img::Image hr = img::read_png(r.hr_path);
        const img::Image lr = degrade::degrade_pipeline(hr, cfg, degrade::record_stream(cfg, r.id));
        r.lr_path = fs::absolute(out_root / "lr" / (r.id + ".png")).lexically_normal();
        img::write_png(lr, *r.lr_path);
        r.degradation = hash;
    });
    out.provenance.config_hash = hash;
    out.provenance.seed = cfg.seed;
    return out;
}

std::pair<Manifest, Manifest> split(const Manifest& m, double train_frac, std::uint64_t seed) {
    if (!(train_frac > 0.0 && train_frac < 1.0)) throw InvalidArgument("split: train fraction must lie in (0, 1)");
    std::vector<bool> in_train(m.records.size(), false);
    const CounterRng root(seed);
    for (Subset s : {Subset::access_control, Subset::law_enforcement, Subset::road_patrol, Subset::dashcam,
                     Subset::synthetic}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < m.records.size(); ++i)
            if (m.records[i].subset == s) idx.push_back(i);
        const CounterRng rng = root.split(to_string(s));
        for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[pick(rng, i, i)]);
        const auto k = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(idx.size())));
        for (std::size_t i = 0; i < k; ++i) in_train[idx[i]] = true;
    }
    Manifest train, test;
    train.provenance = test.provenance = m.provenance;
    train.notes = m.notes.empty() ? "train split" : m.notes + "; train split";
    test.notes = m.notes.empty() ? "test split" : m.notes + "; test split";
    for (std::size_t i = 0; i < m.records.size(); ++i) (in_train[i] ? train : test).records.push_back(m.records[i]);
    return {std::move(train), std::move(test)};
}

}  // namespace lpsr::dataset
