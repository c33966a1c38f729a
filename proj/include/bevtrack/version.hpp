#pragma once

namespace bevtrack {

inline constexpr const char* kToolName = "bevtrack";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace bevtrack
