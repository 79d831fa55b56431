#pragma once

namespace steering {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace steering
