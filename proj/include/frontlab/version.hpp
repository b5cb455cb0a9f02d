#pragma once

namespace frontlab {
inline constexpr const char* version = "0.1.0";
}
