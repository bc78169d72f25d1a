#pragma once

namespace degen {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace degen
