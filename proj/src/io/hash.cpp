#include <cstdio>

#include "gnnfuse/io.hpp"

namespace gnnfuse::io {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string content_hash(std::string_view bytes) { return "fnv1a64:" + hex64(fnv1a64(bytes)); }

std::string file_hash(const std::filesystem::path& path) { return content_hash(read_text(path)); }

}  // namespace gnnfuse::io
