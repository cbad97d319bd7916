#pragma once

namespace bridgelab {
inline constexpr const char* kVersion = "0.1.0";
}
