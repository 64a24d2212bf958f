#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "lpsr/version.hpp"

namespace lpsr {

/// Written into every artifact. Identical inputs give identical blocks.
struct Provenance {
    std::string tool_version = kToolVersion;
    std::string config_hash;
    std::uint64_t seed = 0;
    friend bool operator==(const Provenance&, const Provenance&) = default;
};

nlohmann::json to_json(const Provenance& p);
Provenance provenance_from_json(const nlohmann::json& j);

/// RFC 3339 UTC time from SOURCE_DATE_EPOCH when set, else the wall clock.
/// Lives beside the provenance block, never inside hashed content.
std::string artifact_timestamp();

}  // namespace lpsr
