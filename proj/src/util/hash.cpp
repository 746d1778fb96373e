#include "util/hash.hpp"

#include <fstream>
#include <sstream>

#include "util/error.hpp"

namespace cea {

uint64_t fnv1a(std::string_view data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fingerprint_hex(std::string_view data) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(data)));
  return std::string(buf);
}

std::string fingerprint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open file for fingerprinting: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return fingerprint_hex(ss.str());
}

}  // namespace cea
