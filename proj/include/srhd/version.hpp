#pragma once

namespace srhd {

inline constexpr const char* kVersion = "0.1.0";

} // namespace srhd
