#pragma once

namespace cauchy_im {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cauchy_im
