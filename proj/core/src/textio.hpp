#pragma once

// Internal text-file and formatting helpers. Not installed.

#include <charconv>
#include <string>
#include <string_view>

namespace pidtwin::detail {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

/// Writes to a sibling temp file, then renames over the target.
void atomic_write_text_file(const std::string& path, std::string_view content);

/// Shortest round-trip representation; locale-independent.
inline std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c += 'a' - 'A';
    return out;
}

} // namespace pidtwin::detail
