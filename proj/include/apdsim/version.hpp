#pragma once

namespace apdsim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace apdsim
