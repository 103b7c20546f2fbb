#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gnnfuse::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based source line of each row, for diagnostics.
  std::vector<std::size_t> lines;
};

// Comma-separated, no quoting. Blank lines are ignored, fields are trimmed
// and trailing CR is stripped. Rows whose width differs from the header are
// rejected.
CsvTable read_csv(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);
// Throws ValidationError naming `context` on malformed text.
double parse_double(std::string_view text, std::string_view context);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);
std::string content_hash(std::string_view bytes);
std::string file_hash(const std::filesystem::path& path);

}  // namespace gnnfuse::io
