#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace ttree {

/// Shortest decimal string that parses back to exactly the same double
/// (std::to_chars round-trip form). Keeps written artifacts diffable and
/// platform-stable.
inline std::string format_double(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

} // namespace ttree
