#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cea {

// FNV-1a fingerprints. Used for config/input provenance in manifests, not for
// security.
uint64_t fnv1a(std::string_view data);
std::string fingerprint_hex(std::string_view data);
std::string fingerprint_file(const std::string& path);

}  // namespace cea
