#pragma once

#include "hoiplan/geometry.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace hoiplan {

struct BpsConfig {
  std::size_t basis_size = 1024;
  std::uint64_t seed = 0x6270735f62617365ULL;
  double radius = 1.0;
  /// Center the cloud on its bounding-box center and scale it into the unit
  /// sphere before measuring.
  bool normalize = true;
};

struct BpsEncoding {
  std::vector<double> distances;
  std::uint64_t basis_seed = 0;
};

/// Basis points drawn uniformly from the ball of `radius` around the origin.
std::vector<Vec3> bps_basis(std::size_t count, std::uint64_t seed, double radius);

/// Nearest-point distance from every basis point to the cloud.
/// Throws EmptyCloud.
std::vector<double> bps_distances(std::span<const Vec3> cloud, std::span<const Vec3> basis);

BpsEncoding bps_encode(std::span<const Vec3> cloud, const BpsConfig& config = {});

/// Area-weighted uniform samples on the surface of an axis-aligned box
/// centered at the origin.
std::vector<Vec3> sample_box_surface(const Vec3& half_extents, std::size_t count,
                                     std::uint64_t seed);

}  // namespace hoiplan
