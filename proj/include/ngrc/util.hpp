#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ngrc {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

/// Strict full-string parse; throws std::invalid_argument on junk.
double parse_double(std::string_view text);

std::uint64_t fnv1a(std::string_view text);

/// 16-digit lowercase hex of fnv1a(text).
std::string fnv1a_hex(std::string_view text);

}  // namespace ngrc
