#pragma once

namespace selftrain {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace selftrain
