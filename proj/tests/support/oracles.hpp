#pragma once

// Reference implementations written directly from the formulas, sharing no
// code paths with the library beyond its plain data types.

#include "hoiplan/geometry.hpp"
#include "hoiplan/reward.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using hoiplan::Vec3;

inline std::array<std::array<double, 3>, 3> quat_matrix(const hoiplan::Quat& q_in) {
  const double n = std::sqrt(q_in.w() * q_in.w() + q_in.x() * q_in.x() + q_in.y() * q_in.y() +
                             q_in.z() * q_in.z());
  const double w = q_in.w() / n, x = q_in.x() / n, y = q_in.y() / n, z = q_in.z() / n;
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
           {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
           {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

using M3 = std::array<std::array<double, 3>, 3>;

inline std::array<double, 3> mul(const M3& m, const std::array<double, 3>& v) {
  std::array<double, 3> r{};
  for (int i = 0; i < 3; ++i) r[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
  return r;
}

inline std::array<double, 3> mul_t(const M3& m, const std::array<double, 3>& v) {
  std::array<double, 3> r{};
  for (int i = 0; i < 3; ++i) r[i] = m[0][i] * v[0] + m[1][i] * v[1] + m[2][i] * v[2];
  return r;
}

inline std::array<double, 3> arr(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

/// Rotation angle between two orientations from the matrix of a^T b.
inline double angle_between(const hoiplan::Quat& a, const hoiplan::Quat& b) {
  const M3 ra = quat_matrix(a);
  const M3 rb = quat_matrix(b);
  M3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] += ra[k][i] * rb[k][j];
  const double c = 0.5 * (r[0][0] + r[1][1] + r[2][2] - 1.0);
  const double sx = r[2][1] - r[1][2], sy = r[0][2] - r[2][0], sz = r[1][0] - r[0][1];
  const double s = 0.5 * std::sqrt(sx * sx + sy * sy + sz * sz);
  return std::atan2(s, c);
}

// Grid shortest paths: cost a + b*sqrt(2) kept as the integer pair (a, b).

struct Cost {
  long long a = 0;
  long long b = 0;
  friend bool operator==(const Cost&, const Cost&) = default;
};

/// true when x < y, decided without rounding.
inline bool cost_less(const Cost& x, const Cost& y) {
  const long long da = y.a - x.a;  // want da + db*sqrt2 > 0
  const long long db = y.b - x.b;
  if (da >= 0 && db >= 0) return da > 0 || db > 0;
  if (da <= 0 && db <= 0) return false;
  if (da > 0) return da * da > 2 * db * db;
  return 2 * db * db > da * da;
}

/// Plain Dijkstra over free cells from `s`; occupied is row-major [y * w + x].
/// Returns the cost to every cell, nullopt where unreachable.
inline std::vector<std::optional<Cost>> dijkstra_all(const std::vector<char>& occupied, int w,
                                                     int h, std::pair<int, int> s, bool eight) {
  auto free_at = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < w && y < h && !occupied[static_cast<std::size_t>(y * w + x)];
  };
  std::vector<std::optional<Cost>> dist(static_cast<std::size_t>(w * h));
  if (!free_at(s.first, s.second)) return dist;
  std::vector<char> done(static_cast<std::size_t>(w * h), 0);
  dist[static_cast<std::size_t>(s.second * w + s.first)] = Cost{};
  for (;;) {
    int best = -1;
    for (int i = 0; i < w * h; ++i) {
      if (done[static_cast<std::size_t>(i)] || !dist[static_cast<std::size_t>(i)]) continue;
      if (best < 0 || cost_less(*dist[static_cast<std::size_t>(i)],
                                *dist[static_cast<std::size_t>(best)])) {
        best = i;
      }
    }
    if (best < 0) break;
    done[static_cast<std::size_t>(best)] = 1;
    const int x = best % w, y = best / w;
    const Cost base = *dist[static_cast<std::size_t>(best)];
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const bool diag = dx != 0 && dy != 0;
        if (diag && !eight) continue;
        if (!free_at(x + dx, y + dy)) continue;
        if (diag && (!free_at(x + dx, y) || !free_at(x, y + dy))) continue;
        const Cost c{base.a + (diag ? 0 : 1), base.b + (diag ? 1 : 0)};
        auto& d = dist[static_cast<std::size_t>((y + dy) * w + x + dx)];
        if (!d || cost_less(c, *d)) d = c;
      }
    }
  }
  return dist;
}

inline std::optional<Cost> dijkstra(const std::vector<char>& occupied, int w, int h,
                                    std::pair<int, int> s, std::pair<int, int> g, bool eight) {
  if (g.first < 0 || g.second < 0 || g.first >= w || g.second >= h) return std::nullopt;
  if (occupied[static_cast<std::size_t>(g.second * w + g.first)]) return std::nullopt;
  return dijkstra_all(occupied, w, h, s, eight)[static_cast<std::size_t>(g.second * w + g.first)];
}

// Relative-pose loss by explicit point transforms.

inline double loss_oracle(const std::vector<hoiplan::Pose>& object,
                          const std::vector<hoiplan::Pose>& wrist, const std::vector<Vec3>& k_rest,
                          const std::vector<std::vector<Vec3>>& k_ref,
                          const std::vector<double>& labels, std::vector<double>* per_frame = nullptr) {
  double total = 0.0;
  for (std::size_t t = 0; t < object.size(); ++t) {
    double frame = 0.0;
    if (labels[t] != 0.0) {
      const M3 ro = quat_matrix(object[t].orientation());
      const M3 rw = quat_matrix(wrist[t].orientation());
      const auto to = arr(object[t].position());
      const auto tw = arr(wrist[t].position());
      for (std::size_t i = 0; i < k_rest.size(); ++i) {
        auto g = mul(ro, arr(k_rest[i]));
        for (int c = 0; c < 3; ++c) g[c] = g[c] + to[c] - tw[c];
        const auto local = mul_t(rw, g);
        for (int c = 0; c < 3; ++c) frame += std::abs(local[c] - k_ref[t][i][c]);
      }
      frame *= labels[t];
    }
    if (per_frame) per_frame->push_back(frame);
    total += frame;
  }
  return total;
}

// Tracking reward from the written formulas.

struct ScriptedLink {
  std::vector<std::size_t> joints;
  double wq;
  double wp;
};

/// Unnormalized per-link weights of the 22-joint body, object excluded.
inline std::vector<ScriptedLink> scripted_links() {
  return {{{0}, 1.0, 1.0},     {{3}, 0.2, 0.0},     {{6}, 0.2, 0.0},      {{9}, 0.2, 0.0},
          {{12}, 0.2, 0.0},    {{15}, 0.2, 0.0},    {{13, 14}, 0.1, 0.0}, {{16, 17}, 0.2, 0.0},
          {{18, 19}, 0.2, 0.0}, {{20, 21}, 0.3, 0.3}, {{1, 2}, 0.5, 0.0},  {{4, 5}, 0.3, 0.0},
          {{7, 8}, 0.2, 0.1}};
}

inline double scripted_body(const hoiplan::TrackFrame& sim, const hoiplan::TrackFrame& ref,
                            const std::vector<ScriptedLink>& links, double obj_wq, double obj_wp) {
  const bool active = ref.object.has_value();
  double zq = active ? obj_wq : 0.0;
  double zp = active ? obj_wp : 0.0;
  for (const auto& l : links) {
    zq += l.wq;
    zp += l.wp;
  }
  double sq = 0.0, sp = 0.0;
  for (const auto& l : links) {
    for (std::size_t j : l.joints) {
      const double share = 1.0 / static_cast<double>(l.joints.size());
      const double e = angle_between(sim.orientations[j], ref.orientations[j]);
      sq += (l.wq * share / zq) * e * e;
      const Vec3 d = sim.positions[j] - ref.positions[j];
      sp += (zp > 0 ? l.wp * share / zp : 0.0) * (d.x() * d.x() + d.y() * d.y() + d.z() * d.z());
    }
  }
  if (active) {
    const double e = angle_between(sim.object->orientation(), ref.object->orientation());
    sq += obj_wq / zq * e * e;
    const Vec3 d = sim.object->position() - ref.object->position();
    sp += obj_wp / zp * d.squaredNorm();
  }
  return 0.5 * std::exp(-15.0 * sq) + 0.5 * std::exp(-15.0 * sp);
}

inline double scripted_alpha(double d) { return std::clamp((1.0 - d) / 0.75, 0.0, 1.0); }

inline std::array<double, 3> local_point(const hoiplan::Pose& frame, const Vec3& p) {
  const auto t = arr(frame.position());
  return mul_t(quat_matrix(frame.orientation()),
               {p.x() - t[0], p.y() - t[1], p.z() - t[2]});
}

inline double dist3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                   (a[2] - b[2]) * (a[2] - b[2]));
}

inline double scripted_hand(const hoiplan::TrackFrame& sim, const hoiplan::TrackFrame& ref) {
  double sum = 0.0;
  std::size_t count = 0;
  for (int h = 0; h < 2; ++h) {
    double alpha = 0.0;
    if (ref.object && sim.object) {
      alpha = scripted_alpha((ref.hands[h].wrist.position() - ref.object->position()).norm());
    }
    for (std::size_t f = 0; f < sim.hands[h].fingers.size(); ++f) {
      const double ew = dist3(local_point(sim.hands[h].wrist, sim.hands[h].fingers[f]),
                              local_point(ref.hands[h].wrist, ref.hands[h].fingers[f]));
      double eo = 0.0;
      if (alpha > 0.0) {
        eo = dist3(local_point(*sim.object, sim.hands[h].fingers[f]),
                   local_point(*ref.object, ref.hands[h].fingers[f]));
      }
      sum += alpha * eo + (1.0 - alpha) * ew;
      ++count;
    }
  }
  if (count == 0) return 1.0;
  return std::exp(-5.0 / static_cast<double>(count) * sum);
}

inline double scripted_energy(const std::vector<Vec3>& accels) {
  double s = 0.0;
  for (const auto& a : accels) s += a.x() * a.x() + a.y() * a.y() + a.z() * a.z();
  return std::exp(-s / 900.0);
}

// Ordering constraints.

/// Every (before, after) pair appears in that order in `order`.
inline bool respects(const std::vector<std::string>& order,
                     const std::vector<std::pair<std::string, std::string>>& constraints) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
  for (const auto& [b, a] : constraints) {
    if (!pos.count(b) || !pos.count(a) || pos[b] >= pos[a]) return false;
  }
  return true;
}

}  // namespace oracle
