#include <cmath>
#include <numbers>
#include <set>

#include "lpsr/degrade.hpp"
#include "lpsr/errors.hpp"
#include "lpsr/hash.hpp"

namespace lpsr::degrade {

using nlohmann::json;

void StageRanges::validate() const {
    if (!(sigma_min > 0.0 && sigma_min <= sigma_max)) throw InvalidArgument("ranges.sigma_min/sigma_max invalid");
    if (!(noise_max >= 0.0 && noise_max <= 0.2)) throw InvalidArgument("ranges.noise_max must be in [0, 0.2]");
    if (jpeg_min < 1 || jpeg_max > 100 || jpeg_min > jpeg_max)
        throw InvalidArgument("ranges.jpeg_min/jpeg_max must satisfy 1 <= min <= max <= 100");
    if (!(sinc_cutoff_min > 0.0 && sinc_cutoff_min <= sinc_cutoff_max && sinc_cutoff_max <= std::numbers::pi))
        throw InvalidArgument("ranges.sinc_cutoff_min/max must lie in (0, pi]");
    if (sinc_size < 1 || sinc_size % 2 == 0) throw InvalidArgument("ranges.sinc_size must be odd");
}

void DegradationConfig::validate() const {
    if (!(scale_factor > 1.0) || !std::isfinite(scale_factor)) throw InvalidArgument("scale_factor must be > 1");
    blur.validate();
    if (!(noise_sigma >= 0.0 && noise_sigma <= 0.2)) throw InvalidArgument("noise_sigma must be in [0, 0.2]");
    if (jpeg_quality < 1 || jpeg_quality > 100) throw InvalidArgument("jpeg_quality must be in [1, 100]");
    if (!(final_sinc_prob >= 0.0 && final_sinc_prob <= 1.0))
        throw InvalidArgument("final_sinc_prob must be in [0, 1]");
    ranges.validate();
}

json to_json(const DegradationConfig& cfg) {
    return json{
        {"scale_factor", cfg.scale_factor},
        {"blur",
         {{"kind", to_string(cfg.blur.kind)},
          {"sigma_x", cfg.blur.sigma_x},
          {"sigma_y", cfg.blur.sigma_y},
          {"theta", cfg.blur.theta},
          {"sinc_cutoff", cfg.blur.sinc_cutoff},
          {"size", cfg.blur.size}}},
        {"noise_sigma", cfg.noise_sigma},
        {"jpeg_quality", cfg.jpeg_quality},
        {"second_order", cfg.second_order},
        {"final_sinc_prob", cfg.final_sinc_prob},
        {"seed", cfg.seed},
        {"resize_filter", img::to_string(cfg.resize_filter)},
        {"ranges",
         {{"sigma_min", cfg.ranges.sigma_min},
          {"sigma_max", cfg.ranges.sigma_max},
          {"noise_max", cfg.ranges.noise_max},
          {"jpeg_min", cfg.ranges.jpeg_min},
          {"jpeg_max", cfg.ranges.jpeg_max},
          {"sinc_cutoff_min", cfg.ranges.sinc_cutoff_min},
          {"sinc_cutoff_max", cfg.ranges.sinc_cutoff_max},
          {"sinc_size", cfg.ranges.sinc_size}}},
    };
}

namespace {

void reject_unknown(const json& j, const std::string& where, const std::set<std::string>& known) {
    if (!j.is_object()) throw InvalidArgument(where + ": expected a JSON object");
    for (const auto& [key, _] : j.items())
        if (!known.contains(key)) throw InvalidArgument("unknown degradation config key '" + where + key + "'");
}

template <typename T>
void read(const json& j, const std::string& key, const std::string& where, T& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        throw InvalidArgument("degradation config key '" + where + key + "' has the wrong type");
    }
}

}  // namespace

DegradationConfig config_from_json(const json& j) {
    DegradationConfig cfg;
    reject_unknown(j, "", {"scale_factor", "blur", "noise_sigma", "jpeg_quality", "second_order", "final_sinc_prob",
                           "seed", "resize_filter", "ranges"});
    read(j, "scale_factor", "", cfg.scale_factor);
    read(j, "noise_sigma", "", cfg.noise_sigma);
    read(j, "jpeg_quality", "", cfg.jpeg_quality);
    read(j, "second_order", "", cfg.second_order);
    read(j, "final_sinc_prob", "", cfg.final_sinc_prob);
    read(j, "seed", "", cfg.seed);
    std::string filter = img::to_string(cfg.resize_filter);
    read(j, "resize_filter", "", filter);
    cfg.resize_filter = img::parse_filter(filter);

    if (auto b = j.find("blur"); b != j.end()) {
        reject_unknown(*b, "blur.", {"kind", "sigma_x", "sigma_y", "theta", "sinc_cutoff", "size"});
        std::string kind = to_string(cfg.blur.kind);
        read(*b, "kind", "blur.", kind);
        cfg.blur.kind = parse_blur_kind(kind);
        read(*b, "sigma_x", "blur.", cfg.blur.sigma_x);
        read(*b, "sigma_y", "blur.", cfg.blur.sigma_y);
        read(*b, "theta", "blur.", cfg.blur.theta);
        read(*b, "sinc_cutoff", "blur.", cfg.blur.sinc_cutoff);
        read(*b, "size", "blur.", cfg.blur.size);
    }
    if (auto r = j.find("ranges"); r != j.end()) {
        reject_unknown(*r, "ranges.", {"sigma_min", "sigma_max", "noise_max", "jpeg_min", "jpeg_max",
                                       "sinc_cutoff_min", "sinc_cutoff_max", "sinc_size"});
        read(*r, "sigma_min", "ranges.", cfg.ranges.sigma_min);
        read(*r, "sigma_max", "ranges.", cfg.ranges.sigma_max);
        read(*r, "noise_max", "ranges.", cfg.ranges.noise_max);
        read(*r, "jpeg_min", "ranges.", cfg.ranges.jpeg_min);
        read(*r, "jpeg_max", "ranges.", cfg.ranges.jpeg_max);
        read(*r, "sinc_cutoff_min", "ranges.", cfg.ranges.sinc_cutoff_min);
        read(*r, "sinc_cutoff_max", "ranges.", cfg.ranges.sinc_cutoff_max);
        read(*r, "sinc_size", "ranges.", cfg.ranges.sinc_size);
    }
    cfg.validate();
    return cfg;
}

std::string config_hash(const DegradationConfig& cfg) { return hex64(fnv1a64(to_json(cfg).dump())); }

std::vector<std::string> preset_names() { return {"x4-paper", "x7.5-star"}; }

DegradationConfig preset(std::string_view name) {
    DegradationConfig cfg;
    if (name == "x4-paper") {
        cfg.scale_factor = 4.0;
        cfg.blur = BlurSpec{BlurKind::gaussian_iso, 1.0, 1.0, 0.0, std::numbers::pi / 2, 7};
        cfg.noise_sigma = 0.01;
        cfg.jpeg_quality = 90;
        cfg.seed = 2024;
        return cfg;
    }
    if (name == "x7.5-star") {
        cfg.scale_factor = 7.5;
        cfg.blur = BlurSpec{BlurKind::gaussian_aniso, 1.5, 1.0, 0.3, std::numbers::pi / 2, 9};
        cfg.noise_sigma = 0.02;
        cfg.jpeg_quality = 80;
        cfg.second_order = true;
        cfg.final_sinc_prob = 0.5;
        cfg.seed = 2024;
        return cfg;
    }
    throw InvalidArgument("unknown degradation preset '" + std::string(name) + "' (expected x4-paper or x7.5-star)");
}

}  // namespace lpsr::degrade
