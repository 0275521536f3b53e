#pragma once

#include <filesystem>

#include "consum/component_classifier.hpp"
#include "consum/filler_classifier.hpp"

namespace consum {

// Versioned binary model artifact, little-endian:
//   magic "CNSM" | u32 version | 4-byte kind tag ("DFC"/"CCC") |
//   u32 header length | header JSON | u32 tensor count |
//   per tensor: u32 name length, name, u64 rows, u64 cols,
//               rows*cols f64 row-major |
//   u64 FNV-1a checksum of everything before it.
// Loads validate length and checksum before constructing anything, so a
// truncated or corrupted file never yields a partial model.

void save_dfc(const DfcModel& model, const std::filesystem::path& path);
DfcModel load_dfc(const std::filesystem::path& path);

void save_ccc(const CccModel& model, const std::filesystem::path& path);
CccModel load_ccc(const std::filesystem::path& path);

}  // namespace consum
