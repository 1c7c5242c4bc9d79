#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace logsynth {

// Escaping used by the line-oriented text formats: backslash, newline,
// carriage return, tab and (optionally) `|` become two-character sequences.
std::string escape_field(std::string_view raw, bool escape_pipe = true);
std::optional<std::string> unescape_field(std::string_view escaped);

// Splits on `sep`, honoring backslash escapes (the separator is not split on
// when escaped). Pieces are returned still escaped.
std::vector<std::string_view> split_escaped(std::string_view text, char sep);

std::vector<std::string_view> split_ws(std::string_view text);
std::string_view trim(std::string_view text);
// Trims and collapses every run of whitespace to a single space.
std::string normalize_ws(std::string_view text);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t state = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace logsynth
