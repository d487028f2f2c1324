#include "hoiplan/motion.hpp"

#include "hoiplan/bps.hpp"
#include "hoiplan/error.hpp"

#include <algorithm>
#include <cmath>

namespace hoiplan {

namespace {

using json_io::Cursor;
using json_io::Json;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ShapeMismatch, what);
}

Json range_json(const FrameRange& r) { return Json::array({r.begin, r.end}); }

double pose_jump(const Pose& a, const Pose& b) {
  return (a.position() - b.position()).norm() + geodesic_angle(a.orientation(), b.orientation());
}

double max_jump(std::span<const Pose> traj) {
  double m = 0.0;
  for (std::size_t t = 1; t < traj.size(); ++t) m = std::max(m, pose_jump(traj[t - 1], traj[t]));
  return m;
}

bool nearly_same(const Pose& a, const Pose& b) {
  return (a.position() - b.position()).norm() <= 1e-12 &&
         geodesic_angle(a.orientation(), b.orientation()) <= 1e-12;
}

}  // namespace

HandPhases segment_hand(std::span<const double> labels, const SegmentOptions& options) {
  const std::size_t n = labels.size();
  std::size_t best_begin = n;
  std::size_t best_len = 0;
  std::size_t t = 0;
  while (t < n) {
    if (labels[t] < options.threshold) {
      ++t;
      continue;
    }
    const std::size_t start = t;
    while (t < n && labels[t] >= options.threshold) ++t;
    const std::size_t len = t - start;
    if (len >= options.min_run && len > best_len) {
      best_begin = start;
      best_len = len;
    }
  }
  HandPhases h;
  if (best_len == 0) {
    h.pre = {0, n};
    h.contact = {n, n};
    h.post = {n, n};
    return h;
  }
  h.pre = {0, best_begin};
  h.contact = {best_begin, best_begin + best_len};
  h.post = {best_begin + best_len, n};
  return h;
}

PhaseSegmentation segment_phases(std::span<const std::array<double, 2>> labels,
                                 const SegmentOptions& options) {
  PhaseSegmentation seg;
  for (std::size_t h = 0; h < 2; ++h) {
    std::vector<double> column;
    column.reserve(labels.size());
    for (const auto& l : labels) column.push_back(l[h]);
    seg.hands[h] = segment_hand(column, options);
  }
  return seg;
}

Pose average_wrist_pose(std::span<const Pose> wrist, FrameRange contact) {
  if (contact.empty()) throw Error(ErrorCode::EmptyContact, "contact phase is empty");
  require(contact.end <= wrist.size(), "contact range exceeds the wrist trajectory");
  return average_pose(wrist.subspan(contact.begin, contact.size()));
}

std::vector<std::vector<Vec3>> wrist_frame_points(std::span<const Pose> object,
                                                  std::span<const Pose> wrist,
                                                  std::span<const Vec3> k_rest) {
  require(object.size() == wrist.size(), "object and wrist trajectories differ in length");
  std::vector<std::vector<Vec3>> out(object.size());
  for (std::size_t t = 0; t < object.size(); ++t) {
    const Mat3 ro = object[t].rotation();
    const Mat3 rw_inv = wrist[t].rotation().transpose();
    out[t].reserve(k_rest.size());
    for (const Vec3& k : k_rest) {
      const Vec3 global = ro * k + object[t].position();
      out[t].push_back(rw_inv * (global - wrist[t].position()));
    }
  }
  return out;
}

RelativePoseLoss relative_pose_loss(std::span<const Pose> object, std::span<const Pose> wrist,
                                    std::span<const Vec3> k_rest,
                                    const std::vector<std::vector<Vec3>>& k_ref,
                                    std::span<const double> labels) {
  const std::size_t n = object.size();
  if (wrist.size() != n || k_ref.size() != n || labels.size() != n) {
    throw Error(ErrorCode::ShapeMismatch, "relative pose loss inputs differ in length",
                {{"object", n}, {"wrist", wrist.size()}, {"reference", k_ref.size()},
                 {"labels", labels.size()}});
  }
  RelativePoseLoss out;
  out.per_frame.assign(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    if (k_ref[t].size() != k_rest.size()) {
      throw Error(ErrorCode::ShapeMismatch, "reference point count differs from K_rest",
                  {{"frame", t}, {"expected", k_rest.size()}, {"got", k_ref[t].size()}});
    }
    if (labels[t] == 0.0) continue;
    const Mat3 ro = object[t].rotation();
    const Mat3 rw_inv = wrist[t].rotation().transpose();
    double sum = 0.0;
    for (std::size_t i = 0; i < k_rest.size(); ++i) {
      const Vec3 global = ro * k_rest[i] + object[t].position();
      const Vec3 local = rw_inv * (global - wrist[t].position());
      sum += (local - k_ref[t][i]).cwiseAbs().sum();
    }
    out.per_frame[t] = labels[t] * sum;
    out.total += out.per_frame[t];
  }
  return out;
}

std::vector<Vec3> rest_surface_points(const Vec3& half_extents, std::size_t count,
                                      std::uint64_t seed) {
  return sample_box_surface(half_extents, count, seed);
}

std::vector<Pose> smooth_boundary(std::span<const Pose> traj, std::size_t boundary,
                                  std::size_t window, const Pose& static_pose,
                                  SmoothDirection direction) {
  if (boundary >= traj.size() || window < 1) {
    throw Error(ErrorCode::WindowOutOfRange, "boundary or window outside the trajectory",
                {{"boundary", boundary}, {"window", window}, {"frames", traj.size()}});
  }
  std::vector<Pose> out(traj.begin(), traj.end());
  const Pose& at = traj[boundary];
  const Vec3 dp = static_pose.position() - at.position();
  const Vec3 dr = rotation_log(static_pose.orientation() * at.orientation().conjugate());
  out[boundary] = static_pose;
  for (std::size_t k = 1; k < window; ++k) {
    std::size_t t;
    if (direction == SmoothDirection::Forward) {
      t = boundary + k;
      if (t >= traj.size()) break;
    } else {
      if (k > boundary) break;
      t = boundary - k;
    }
    const double alpha = 1.0 - static_cast<double>(k) / static_cast<double>(window);
    out[t] = Pose(traj[t].position() + alpha * dp,
                  rotation_exp(alpha * dr) * traj[t].orientation());
  }
  return out;
}

std::vector<Pose> recompute_wrist(std::span<const Pose> object, std::span<const Pose> wrist,
                                  const GraspPose& grasp, FrameRange contact, std::size_t window) {
  require(object.size() == wrist.size(), "object and wrist trajectories differ in length");
  if (contact.empty()) throw Error(ErrorCode::EmptyContact, "contact phase is empty");
  require(contact.end <= object.size(), "contact range exceeds the trajectory");
  std::vector<Pose> computed(object.size());
  for (std::size_t t = contact.begin; t < contact.end; ++t) {
    computed[t] = compose(object[t], grasp.wrist);
  }
  std::vector<Pose> out(wrist.begin(), wrist.end());
  if (window >= 1) {
    if (contact.begin > 0) {
      out = smooth_boundary(out, contact.begin, window, computed[contact.begin],
                            SmoothDirection::Backward);
    }
    if (contact.end < object.size()) {
      out = smooth_boundary(out, contact.end - 1, window, computed[contact.end - 1],
                            SmoothDirection::Forward);
    }
  }
  for (std::size_t t = contact.begin; t < contact.end; ++t) out[t] = computed[t];
  return out;
}

ConditionTensors build_conditions(const MotionSequence& motion, const PhaseSegmentation& seg,
                                  const std::array<GraspPose, 2>& grasp,
                                  std::span<const Vec2> waypoints,
                                  const ConditionOptions& options) {
  const std::size_t n = motion.frames.size();
  const std::size_t j = motion.joint_count();
  for (std::size_t t = 0; t < n; ++t) {
    const auto& f = motion.frames[t];
    if (f.joints.size() != j || f.joint_rot6d.size() != j) {
      throw Error(ErrorCode::ShapeMismatch, "joint count varies across frames", {{"frame", t}});
    }
  }
  if (n > 0) require(options.root_joint < j, "root joint index out of range");
  for (const auto& h : seg.hands) {
    require(h.pre.end <= n && h.contact.end <= n && h.post.end <= n,
            "segmentation does not match the sequence length");
  }
  const Eigen::Index d = static_cast<Eigen::Index>(9 * j);
  const Eigen::Index cols = d + 12;
  ConditionTensors c;
  c.s_r = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), cols);
  c.s_mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
      static_cast<Eigen::Index>(n), cols, false);
  c.w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), 18);
  c.contact = Eigen::Matrix<bool, Eigen::Dynamic, 2>::Constant(static_cast<Eigen::Index>(n), 2,
                                                               false);
  if (n == 0) return c;

  auto put = [&](std::size_t t, Eigen::Index col, double v) {
    c.s_r(static_cast<Eigen::Index>(t), col) = v;
    c.s_mask(static_cast<Eigen::Index>(t), col) = true;
  };
  auto put_object = [&](std::size_t t, const Pose& p) {
    const Mat3 r = p.rotation();
    for (int k = 0; k < 3; ++k) put(t, d + k, p.position()[k]);
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) put(t, d + 3 + 3 * row + col, r(row, col));
    }
  };

  const MotionFrame& first = motion.frames.front();
  for (std::size_t k = 0; k < j; ++k) {
    for (int a = 0; a < 3; ++a) put(0, static_cast<Eigen::Index>(3 * k + a), first.joints[k][a]);
    for (int a = 0; a < 6; ++a) {
      put(0, static_cast<Eigen::Index>(3 * j + 6 * k + a), first.joint_rot6d[k][a]);
    }
  }
  put_object(0, first.object);
  put_object(n - 1, motion.frames.back().object);

  if (options.waypoint_interval > 0) {
    for (std::size_t k = 1; k < waypoints.size(); ++k) {
      const std::size_t t = k * options.waypoint_interval;
      if (t >= n) break;
      put(t, static_cast<Eigen::Index>(3 * options.root_joint), waypoints[k].x());
      put(t, static_cast<Eigen::Index>(3 * options.root_joint + 1), waypoints[k].y());
    }
  }

  FrameRange contact{n, n};
  for (const auto& h : seg.hands) {
    if (h.contact.empty()) continue;
    if (contact.empty()) {
      contact = h.contact;
    } else {
      contact.begin = std::min(contact.begin, h.contact.begin);
      contact.end = std::max(contact.end, h.contact.end);
    }
  }
  for (std::size_t t = 0; t < n; ++t) {
    if (contact.contains(t)) continue;
    const bool before = contact.empty() || t < contact.begin;
    put_object(t, before ? first.object : motion.frames.back().object);
  }

  for (std::size_t h = 0; h < 2; ++h) {
    const Rot6D r6 = rot6d_encode(grasp[h].wrist.orientation());
    for (std::size_t t = seg.hands[h].contact.begin; t < seg.hands[h].contact.end; ++t) {
      const auto row = static_cast<Eigen::Index>(t);
      c.contact(row, static_cast<Eigen::Index>(h)) = true;
      const Eigen::Index base = static_cast<Eigen::Index>(9 * h);
      for (int a = 0; a < 3; ++a) c.w(row, base + a) = grasp[h].wrist.position()[a];
      for (int a = 0; a < 6; ++a) c.w(row, base + 3 + a) = r6[a];
    }
  }
  return c;
}

IkResult ik_solve(std::span<const Vec3> chain, const Vec3& target, int max_iters, double tol) {
  require(chain.size() >= 2, "IK chain needs at least two joints");
  IkResult r;
  r.positions.assign(chain.begin(), chain.end());
  r.rotations.assign(chain.size() - 1, Quat::Identity());
  for (std::size_t k = 1; k < chain.size(); ++k) {
    require((chain[k] - chain[k - 1]).norm() > 0.0, "IK chain has a zero-length segment");
  }
  const std::size_t last = chain.size() - 1;
  r.residual = (r.positions[last] - target).norm();
  r.residual_history.push_back(r.residual);
  while (r.residual > tol && r.iterations < max_iters) {
    for (std::size_t pivot = last; pivot-- > 0;) {
      const Vec3 to_end = r.positions[last] - r.positions[pivot];
      const Vec3 to_target = target - r.positions[pivot];
      if (to_end.norm() < 1e-12 || to_target.norm() < 1e-12) continue;
      const Quat q = Quat::FromTwoVectors(to_end, to_target);
      for (std::size_t k = pivot + 1; k <= last; ++k) {
        r.positions[k] = r.positions[pivot] + q * (r.positions[k] - r.positions[pivot]);
      }
      for (std::size_t s = pivot; s < r.rotations.size(); ++s) {
        r.rotations[s] = (q * r.rotations[s]).normalized();
      }
    }
    ++r.iterations;
    r.residual = (r.positions[last] - target).norm();
    r.residual_history.push_back(r.residual);
  }
  r.reachable = r.residual <= tol;
  return r;
}

GraspFile default_grasp_file() {
  GraspFile g;
  g.hands[0] = {"left", {16, 18, 20}, {}};
  g.hands[1] = {"right", {17, 19, 21}, {}};
  return g;
}

Json grasp_to_json(const GraspFile& g) {
  Json j = Json::object();
  if (g.object_half_extents) {
    const Vec3& h = *g.object_half_extents;
    j["object_half_extents"] = Json::array({h.x(), h.y(), h.z()});
  }
  Json hands = Json::array();
  for (const auto& h : g.hands) {
    Json e = Json::object();
    e["side"] = h.side;
    e["chain"] = Json::array({h.chain[0], h.chain[1], h.chain[2]});
    e["wrist"] = pose_to_json(h.grasp.wrist);
    e["fingers"] = h.grasp.fingers;
    hands.push_back(std::move(e));
  }
  j["hands"] = std::move(hands);
  return j;
}

GraspFile grasp_from_json(const Json& j) {
  Cursor root(j, "");
  GraspFile g = default_grasp_file();
  if (root.has("object_half_extents")) {
    Cursor h = root.at("object_half_extents");
    h.array_size(3);
    Vec3 v;
    for (std::size_t k = 0; k < 3; ++k) {
      v[static_cast<Eigen::Index>(k)] = h.at(k).as_double();
      if (!(v[static_cast<Eigen::Index>(k)] > 0.0)) h.at(k).fail("half extent must be positive");
    }
    g.object_half_extents = v;
  }
  Cursor hands = root.at("hands");
  std::array<bool, 2> seen{false, false};
  for (std::size_t i = 0, n = hands.array_size(); i < n; ++i) {
    Cursor c = hands.at(i);
    const std::string side = c.at("side").as_string();
    std::size_t slot;
    if (side == "left") {
      slot = 0;
    } else if (side == "right") {
      slot = 1;
    } else {
      c.at("side").fail("side must be \"left\" or \"right\"");
    }
    if (seen[slot]) c.at("side").fail("hand listed twice");
    seen[slot] = true;
    HandSetup& h = g.hands[slot];
    if (c.has("chain")) {
      Cursor ch = c.at("chain");
      ch.array_size(3);
      for (std::size_t k = 0; k < 3; ++k) {
        const long long v = ch.at(k).as_int();
        if (v < 0) ch.at(k).fail("joint index must be non-negative");
        h.chain[k] = static_cast<std::size_t>(v);
      }
    }
    h.grasp.wrist = pose_from_json(c.at("wrist"));
    h.grasp.fingers.clear();
    if (c.has("fingers")) {
      Cursor fc = c.at("fingers");
      for (std::size_t k = 0, m = fc.array_size(); k < m; ++k) {
        h.grasp.fingers.push_back(fc.at(k).as_double());
      }
    }
  }
  return g;
}

GraspFile load_grasp(const std::filesystem::path& path) {
  return grasp_from_json(json_io::load(path));
}

void save_grasp(const GraspFile& g, const std::filesystem::path& path) {
  json_io::save(path, grasp_to_json(g));
}

std::vector<Pose> wrist_track(const MotionSequence& motion, std::size_t joint) {
  std::vector<Pose> out;
  out.reserve(motion.frames.size());
  for (const auto& f : motion.frames) {
    require(joint < f.joints.size() && joint < f.joint_rot6d.size(),
            "joint index out of range");
    out.emplace_back(f.joints[joint], Quat(rot6d_decode(f.joint_rot6d[joint])));
  }
  return out;
}

std::vector<Pose> object_track(const MotionSequence& motion) {
  std::vector<Pose> out;
  out.reserve(motion.frames.size());
  for (const auto& f : motion.frames) out.push_back(f.object);
  return out;
}

PostprocessResult postprocess_motion(const MotionSequence& motion, const GraspFile& grasp,
                                     const PostprocessOptions& options) {
  PostprocessResult res{motion, Json::object()};
  const std::size_t n = motion.frames.size();
  const std::size_t j = motion.joint_count();
  for (const auto& h : grasp.hands) {
    for (std::size_t k : h.chain) {
      if (k >= j) {
        throw Error(ErrorCode::ShapeMismatch, "hand chain joint index out of range",
                    {{"side", h.side}, {"joint", k}, {"joints", j}});
      }
    }
  }
  if (n == 0) return res;

  std::vector<std::array<double, 2>> labels;
  for (const auto& f : motion.frames) labels.push_back(f.contact);
  const PhaseSegmentation seg = segment_phases(labels, options.segment);

  FrameRange contact{n, n};
  for (const auto& h : seg.hands) {
    if (h.contact.empty()) continue;
    if (contact.empty()) {
      contact = h.contact;
    } else {
      contact.begin = std::min(contact.begin, h.contact.begin);
      contact.end = std::max(contact.end, h.contact.end);
    }
  }

  const std::vector<Pose> object_in = object_track(motion);
  std::vector<Pose> object = object_in;
  const Pose static_pre = object_in.front();
  const Pose static_post = object_in.back();
  std::size_t w_eff = 0;
  if (contact.empty()) {
    std::fill(object.begin(), object.end(), static_pre);
  } else {
    w_eff = std::max<std::size_t>(1, std::min(options.window, (contact.size() - 1) / 2));
    if (contact.begin > 0) {
      object = smooth_boundary(object, contact.begin, w_eff, static_pre, SmoothDirection::Forward);
    }
    if (contact.end < n) {
      object = smooth_boundary(object, contact.end - 1, w_eff, static_post,
                               SmoothDirection::Backward);
    }
    for (std::size_t t = 0; t < contact.begin; ++t) object[t] = static_pre;
    for (std::size_t t = contact.end; t < n; ++t) object[t] = static_post;
  }
  for (std::size_t t = 0; t < n; ++t) res.motion.frames[t].object = object[t];

  const Vec3 half = grasp.object_half_extents.value_or(options.object_half_extents);
  const std::vector<Vec3> k_rest = rest_surface_points(half);

  Json segments = Json::array();
  Json losses = Json::object();
  Json ik = Json::object();
  for (std::size_t h = 0; h < 2; ++h) {
    const HandSetup& hand = grasp.hands[h];
    const HandPhases& ph = seg.hands[h];
    segments.push_back({{"side", hand.side},
                        {"pre", range_json(ph.pre)},
                        {"contact", range_json(ph.contact)},
                        {"post", range_json(ph.post)}});
    const std::size_t wj = hand.chain[2];
    const std::vector<Pose> wrist_in = wrist_track(motion, wj);

    const std::vector<Pose> grasp_frames(n, hand.grasp.wrist);
    const std::vector<Pose> identity(n, Pose::identity());
    const auto k_ref = wrist_frame_points(identity, grasp_frames, k_rest);
    std::vector<double> hand_labels;
    for (const auto& l : labels) hand_labels.push_back(l[h]);
    const double before = relative_pose_loss(object_in, wrist_in, k_rest, k_ref, hand_labels).total;

    std::vector<Pose> wrist = wrist_in;
    double max_residual = 0.0;
    Json unreachable = Json::array();
    if (!ph.contact.empty()) {
      wrist = recompute_wrist(object, wrist_in, hand.grasp, ph.contact, options.window);
      for (std::size_t t = 0; t < n; ++t) {
        if (nearly_same(wrist[t], wrist_in[t])) {
          wrist[t] = wrist_in[t];
          continue;
        }
        MotionFrame& f = res.motion.frames[t];
        const std::array<Vec3, 3> chain = {f.joints[hand.chain[0]], f.joints[hand.chain[1]],
                                           f.joints[hand.chain[2]]};
        const IkResult r = ik_solve(chain, wrist[t].position(), options.ik_iters, options.ik_tol);
        max_residual = std::max(max_residual, r.residual);
        if (!r.reachable) unreachable.push_back(t);
        f.joints[hand.chain[1]] = r.positions[1];
        f.joints[wj] = wrist[t].position();
        for (std::size_t s = 0; s < 2; ++s) {
          const std::size_t jid = hand.chain[s];
          const Quat q = r.rotations[s] * Quat(rot6d_decode(f.joint_rot6d[jid]));
          f.joint_rot6d[jid] = rot6d_encode(q.normalized());
        }
        f.joint_rot6d[wj] = rot6d_encode(wrist[t].orientation());
      }
    }
    const double after = relative_pose_loss(object, wrist, k_rest, k_ref, hand_labels).total;
    losses[hand.side] = {{"before", before}, {"after", after}};
    ik[hand.side] = {{"max_residual", max_residual}, {"unreachable_frames", unreachable}};
  }

  Json d = Json::object();
  d["segments"] = std::move(segments);
  d["object_contact"] = range_json(contact);
  d["window"] = w_eff;
  d["relative_pose_loss"] = std::move(losses);
  d["ik"] = std::move(ik);
  d["max_object_jump"] = {{"before", max_jump(object_in)}, {"after", max_jump(object)}};
  res.diagnostics = std::move(d);
  return res;
}

}  // namespace hoiplan
