#pragma once

#include <filesystem>
#include <string>

#include "slblr/gap.hpp"

namespace slblr {

/// Directory searched for instance files: SLBLR_DATA_DIR when set, else
/// ./data.
std::filesystem::path default_data_dir();

/// True for instance names this build can synthesize (type-D assignment
/// benchmarks d05100, d10100, d10400, d201600, d401600, d801600).
bool known_benchmark(const std::string& name);

/// Path of data_dir/<name>.txt, writing a freshly generated type-D instance
/// with the name's dimensions and a pinned seed when the file is missing.
std::filesystem::path ensure_benchmark_instance(const std::string& name,
                                                const std::filesystem::path& data_dir);

/// Loads instance `index` (1-based) from a gap file.
GapInstance load_gap_instance(const std::filesystem::path& file, int index);

}  // namespace slblr
