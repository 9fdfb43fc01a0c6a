#pragma once

namespace jcmp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace jcmp
