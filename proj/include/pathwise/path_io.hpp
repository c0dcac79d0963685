#pragma once

#include "pathwise/paths.hpp"

#include <iosfwd>
#include <string>

namespace pathwise {

/// Binary layout (little-endian): "PWPF", u32 version = 1, u32 d, u64 N, f64 T, u64 seed, then N*d f64 increments.
void write_path_binary(const SamplePath& path, const std::string& filename);
SamplePath read_path_binary(const std::string& filename);

/// CSV with header `k,t,B_1,...,B_d`, one row per grid node.
void write_path_csv(const SamplePath& path, std::ostream& out);
void write_path_csv(const SamplePath& path, const std::string& filename);

}  // namespace pathwise
