#pragma once

#include <string>
#include <string_view>

namespace asrpost {

// Lowercase hex SHA-256 digest; keys the scripted-fixture replay format.
std::string sha256_hex(std::string_view data);

}  // namespace asrpost
