#include "ngrc/util.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>

namespace ngrc {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last) {
        // from_chars rejects "nan"/"inf" spellings only on some platforms;
        // values we emit ourselves always reparse, anything else is junk
        if (text == "nan") return std::nan("");
        throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    }
    return value;
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string fnv1a_hex(std::string_view text) {
    static constexpr char digits[] = "0123456789abcdef";
    std::uint64_t h = fnv1a(text);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

}  // namespace ngrc
