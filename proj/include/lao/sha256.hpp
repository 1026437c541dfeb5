#pragma once

#include <string>
#include <string_view>

namespace lao {

// Lowercase hex SHA-256 digest. Self-contained so request hashing does
// not pull in a TLS library.
std::string sha256_hex(std::string_view data);

} // namespace lao
