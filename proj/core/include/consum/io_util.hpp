#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace consum::io {

// Write-temp-then-rename so interrupted runs never leave partial files.
void atomic_write_file(const std::filesystem::path& path,
                       std::string_view contents);

std::string read_file(const std::filesystem::path& path);

// FNV-1a 64-bit, optionally seeded. Stable across platforms; used for the
// hashed encoder buckets, artifact checksums, and embedding-cache keys.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0);

}  // namespace consum::io
