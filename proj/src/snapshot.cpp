#include "bfd/snapshot.hpp"

#include "bfd/error.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace bfd {

namespace {

constexpr char kMagic[4] = {'B', 'F', 'D', 'K'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put(std::ostream& os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::string& path) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw Error(ErrorCode::Io, "truncated snapshot " + path);
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_snapshot(const std::string& path, const Snapshot& snap) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  const VelocityGrid& g = snap.field.grid;
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.n()));
  put<double>(os, g.radius());
  put<double>(os, snap.gamma);
  put<double>(os, snap.time);
  for (Eigen::Index i = 0; i < snap.field.values.size(); ++i) put<double>(os, snap.field.values[i]);
  if (!os) throw Error(ErrorCode::Io, "write failed for " + path);
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(ErrorCode::Io, path + " is not a BFDK snapshot");
  }
  if (get<std::uint32_t>(is, path) != kVersion) throw Error(ErrorCode::Io, "unsupported snapshot version in " + path);
  const auto n = get<std::uint32_t>(is, path);
  const double radius = get<double>(is, path);
  Snapshot snap;
  snap.gamma = get<double>(is, path);
  snap.time = get<double>(is, path);
  const VelocityGrid grid(static_cast<int>(n), radius);
  NodeField values(static_cast<Eigen::Index>(grid.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) values[i] = get<double>(is, path);
  snap.field = DistributionField(grid, std::move(values));
  return snap;
}

}  // namespace bfd
