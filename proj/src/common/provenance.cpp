#include "lpsr/provenance.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <string>

#include "lpsr/errors.hpp"

namespace lpsr {

nlohmann::json to_json(const Provenance& p) {
    return {{"tool_version", p.tool_version}, {"config_hash", p.config_hash}, {"seed", p.seed}};
}

Provenance provenance_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidArgument("provenance: expected an object");
    Provenance p;
    try {
        p.tool_version = j.at("tool_version").get<std::string>();
        p.config_hash = j.at("config_hash").get<std::string>();
        p.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("provenance: ") + e.what());
    }
    return p;
}

std::string artifact_timestamp() {
    std::time_t t;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
        char* end = nullptr;
        const long long v = std::strtoll(env, &end, 10);
        if (*end != '\0' || v < 0) throw InvalidArgument("SOURCE_DATE_EPOCH must be a nonnegative integer");
        t = static_cast<std::time_t>(v);
    } else {
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace lpsr
