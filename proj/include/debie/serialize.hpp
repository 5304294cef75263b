#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace debie {

// Doubles as 16 lowercase hex chars of the IEEE-754 bit pattern, big-endian
// nibble order. Round-trips are bit-exact by construction.
std::string doubles_to_hex(std::span<const double> values);
std::vector<double> hex_to_doubles(const std::string& hex);

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_file_hex(const std::string& path);

} // namespace debie
