#pragma once

namespace wqst {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace wqst
