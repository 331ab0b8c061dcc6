#pragma once

namespace mtest {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mtest
