#pragma once

namespace crackle {

inline constexpr const char* kVersionTag = "crackle-0.1.0";

}  // namespace crackle
