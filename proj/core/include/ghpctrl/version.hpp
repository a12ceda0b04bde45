#pragma once

namespace ghpctrl {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ghpctrl
