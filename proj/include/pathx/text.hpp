#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pathx {

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, char sep);

/// Lowercases and splits on runs of non-alphanumeric bytes.
std::vector<std::string> tokenize(std::string_view text);

/// Decodes %XX escapes; leaves everything else untouched.
std::string url_decode(std::string_view s);
std::string url_encode(std::string_view s);

std::string xml_escape(std::string_view s);

/// Reads a whole file; throws MissingFileError if it cannot be opened.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Splits file content into lines on '\n', dropping a trailing empty line.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Strict integer parse of a full field; throws ParseError otherwise.
std::int64_t parse_int(std::string_view field, std::string_view what);

/// FNV-1a 64-bit over a byte string. Used for manifest fingerprints.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t seed = 1469598103934665603ull);

/// Fixed-point decimal formatting helpers; printf-backed so output is
/// byte-stable across platforms.
std::string format_double(double v, int precision);
std::string format_double_hex(double v);   // lossless %a form
double parse_double_hex(std::string_view s);

}  // namespace pathx
