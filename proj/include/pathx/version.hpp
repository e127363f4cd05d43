#pragma once

namespace pathx {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pathx
