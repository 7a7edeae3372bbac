#ifndef CERTLOOP_UTIL_HPP
#define CERTLOOP_UTIL_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace certloop {

/// Shortest decimal representation of `v` that parses back to the same double.
/// Used everywhere a double is written to a file, so serialized artifacts are
/// byte-stable across runs.
std::string format_double(double v);

/// 64-bit FNV-1a over a byte string, rendered as 16 hex digits.
std::uint64_t fnv1a(std::string_view bytes);
std::string digest_hex(std::string_view bytes);

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Reads a whole file; throws certloop::Error when unreadable.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace certloop

#endif
