#pragma once

namespace gridattack {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gridattack
