#pragma once

#include <string>
#include <string_view>

namespace patentpipe {

// Lowercase hex SHA-256 of the bytes. Stable across platforms and runs.
std::string sha256_hex(std::string_view data);

}  // namespace patentpipe
