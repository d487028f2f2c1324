#include "hoiplan/bps.hpp"

#include "hoiplan/error.hpp"
#include "hoiplan/random.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace hoiplan {

namespace {

// Static 3-d tree over an index permutation; leaves hold up to kLeaf points.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points) : points_(points), index_(points.size()) {
    std::iota(index_.begin(), index_.end(), std::size_t{0});
    nodes_.reserve(2 * points.size() / kLeaf + 2);
    build(0, index_.size());
  }

  double nearest_distance(const Vec3& q) const {
    double best = std::numeric_limits<double>::infinity();
    search(0, q, best);
    return std::sqrt(best);
  }

 private:
  static constexpr std::size_t kLeaf = 8;

  struct Node {
    std::size_t begin, end;
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
    std::size_t left = 0, right = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end) {
    std::size_t id = nodes_.size();
    nodes_.push_back({begin, end});
    if (end - begin <= kLeaf) {
      return id;
    }
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (std::size_t i = begin; i < end; ++i) {
      lo = lo.cwiseMin(points_[index_[i]]);
      hi = hi.cwiseMax(points_[index_[i]]);
    }
    int axis;
    (hi - lo).maxCoeff(&axis);
    std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(index_.begin() + static_cast<std::ptrdiff_t>(begin),
                     index_.begin() + static_cast<std::ptrdiff_t>(mid),
                     index_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) {
                       return points_[a][axis] < points_[b][axis];
                     });
    nodes_[id].axis = axis;
    nodes_[id].split = points_[index_[mid]][axis];
    std::size_t l = build(begin, mid);
    std::size_t r = build(mid, end);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  void search(std::size_t id, const Vec3& q, double& best) const {
    const Node& n = nodes_[id];
    if (n.axis < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        best = std::min(best, (points_[index_[i]] - q).squaredNorm());
      }
      return;
    }
    const double d = q[n.axis] - n.split;
    const std::size_t near = d < 0.0 ? n.left : n.right;
    const std::size_t far = d < 0.0 ? n.right : n.left;
    search(near, q, best);
    if (d * d <= best) {
      search(far, q, best);
    }
  }

  std::span<const Vec3> points_;
  std::vector<std::size_t> index_;
  std::vector<Node> nodes_;
};

}  // namespace

std::vector<Vec3> bps_basis(std::size_t count, std::uint64_t seed, double radius) {
  Rng rng(seed);
  std::vector<Vec3> basis;
  basis.reserve(count);
  while (basis.size() < count) {
    Vec3 p(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    if (p.squaredNorm() <= 1.0) {
      basis.push_back(p * radius);
    }
  }
  return basis;
}

std::vector<double> bps_distances(std::span<const Vec3> cloud, std::span<const Vec3> basis) {
  if (cloud.empty()) {
    throw Error(ErrorCode::EmptyCloud, "point cloud is empty");
  }
  KdTree tree(cloud);
  std::vector<double> out;
  out.reserve(basis.size());
  for (const Vec3& b : basis) {
    out.push_back(tree.nearest_distance(b));
  }
  return out;
}

BpsEncoding bps_encode(std::span<const Vec3> cloud, const BpsConfig& config) {
  if (cloud.empty()) {
    throw Error(ErrorCode::EmptyCloud, "point cloud is empty");
  }
  std::vector<Vec3> points(cloud.begin(), cloud.end());
  if (config.normalize) {
    Vec3 lo = points.front();
    Vec3 hi = points.front();
    for (const Vec3& p : points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Vec3 center = 0.5 * (lo + hi);
    double r = 0.0;
    for (const Vec3& p : points) {
      r = std::max(r, (p - center).norm());
    }
    const double scale = r > 0.0 ? 1.0 / r : 1.0;
    for (Vec3& p : points) {
      p = (p - center) * scale;
    }
  }
  const auto basis = bps_basis(config.basis_size, config.seed, config.radius);
  return {bps_distances(points, basis), config.seed};
}

std::vector<Vec3> sample_box_surface(const Vec3& h, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  // Face pairs normal to x, y, z with areas 4*hy*hz, 4*hx*hz, 4*hx*hy.
  const std::array<double, 3> area = {h.y() * h.z(), h.x() * h.z(), h.x() * h.y()};
  const double total = area[0] + area[1] + area[2];
  std::vector<Vec3> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double u = rng.uniform() * total;
    int axis = u < area[0] ? 0 : (u < area[0] + area[1] ? 1 : 2);
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    Vec3 p(rng.uniform(-h.x(), h.x()), rng.uniform(-h.y(), h.y()), rng.uniform(-h.z(), h.z()));
    p[axis] = sign * h[axis];
    out.push_back(p);
  }
  return out;
}

}  // namespace hoiplan
