#pragma once

namespace risklab {

inline constexpr const char* version() { return "1.0.0"; }

}  // namespace risklab
