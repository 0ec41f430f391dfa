#pragma once

namespace mpskit {

inline const char* version_string() { return "0.1.0"; }

}  // namespace mpskit
