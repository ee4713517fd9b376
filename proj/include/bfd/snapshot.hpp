#pragma once

#include "bfd/grid.hpp"

#include <string>

namespace bfd {

/// Binary snapshot: "BFDK", u32 version 1, u32 n, f64 radius, f64 gamma, f64 time,
/// then n^3 f64 values (x fastest), all little-endian.
struct Snapshot {
  DistributionField field;
  double gamma = 0.0;
  double time = 0.0;
};

void write_snapshot(const std::string& path, const Snapshot& snap);
Snapshot read_snapshot(const std::string& path);

}  // namespace bfd
