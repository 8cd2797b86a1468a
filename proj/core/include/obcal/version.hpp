#pragma once

namespace obcal {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace obcal
