#pragma once

namespace typogen {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace typogen
