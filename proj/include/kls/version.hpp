// Build identification embedded in every output file.
#pragma once

#ifndef KLS_VERSION
#define KLS_VERSION "unknown"
#endif

namespace kls {

inline const char* version_string() { return KLS_VERSION; }

}  // namespace kls
