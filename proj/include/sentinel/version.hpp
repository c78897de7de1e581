#pragma once

namespace sentinel {

inline constexpr const char* kToolkitVersion = "0.1.0";

}  // namespace sentinel
