#pragma once

namespace ringbec {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ringbec
