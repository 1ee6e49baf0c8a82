#pragma once

namespace vrmrf {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace vrmrf
