#pragma once

namespace safesim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace safesim
