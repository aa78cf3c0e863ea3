#pragma once

namespace backhaul {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace backhaul
