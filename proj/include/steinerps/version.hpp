#pragma once

namespace steinerps {
inline constexpr const char* kVersion = "steinerps 0.1.0";
}
