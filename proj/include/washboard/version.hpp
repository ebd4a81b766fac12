#pragma once

namespace washboard {

inline constexpr const char* version_string = "washboard 1.0.0";

}
