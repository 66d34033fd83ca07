#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sgrl::io {

// Standard base64 (RFC 4648, with padding).
std::string base64_encode(const std::uint8_t* data, std::size_t len);
std::vector<std::uint8_t> base64_decode(const std::string& text);

} // namespace sgrl::io
