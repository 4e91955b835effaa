#pragma once

namespace exactcoreset {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace exactcoreset
