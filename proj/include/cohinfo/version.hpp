#pragma once

namespace cohinfo {

inline constexpr const char kVersion[] = "0.1.0";

}  // namespace cohinfo
