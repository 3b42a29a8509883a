#pragma once

namespace dcj {

inline constexpr const char* kToolName = "dcj";
inline constexpr const char* kToolVersion = "0.1.0";

} // namespace dcj
