#pragma once

#include <string>
#include <string_view>

namespace divkit {

// SHA-256 over the given bytes, lowercase hex.
std::string sha256_hex(std::string_view bytes);

}  // namespace divkit
