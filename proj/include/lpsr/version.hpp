#pragma once

namespace lpsr {
inline constexpr const char* kToolVersion = "lpsr 0.3.0";
}
