#include "hoiplan/reward.hpp"

#include "hoiplan/error.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace hoiplan {

namespace {

using json_io::Cursor;
using json_io::Json;

constexpr double kBodyScale = 15.0;
constexpr double kHandScale = 5.0;
constexpr double kEnergyScale = 900.0;
constexpr double kNearHand = 0.25;
constexpr double kFarHand = 1.0;

void check_links(const TrackFrame& sim, const TrackFrame& ref) {
  if (sim.positions.size() != ref.positions.size() ||
      sim.orientations.size() != ref.orientations.size() ||
      sim.positions.size() != sim.orientations.size()) {
    throw Error(ErrorCode::LinkSetMismatch, "simulated and reference link sets differ",
                {{"sim_positions", sim.positions.size()},
                 {"ref_positions", ref.positions.size()},
                 {"sim_orientations", sim.orientations.size()},
                 {"ref_orientations", ref.orientations.size()}});
  }
  if (sim.object.has_value() != ref.object.has_value()) {
    throw Error(ErrorCode::LinkSetMismatch, "active object present in only one frame");
  }
}

}  // namespace

NormalizedWeights BodyWeights::normalized(bool object_active) const {
  std::map<std::size_t, std::pair<double, double>> per_joint;
  for (const auto& link : links) {
    if (link.joints.empty()) continue;
    const double share = 1.0 / static_cast<double>(link.joints.size());
    for (std::size_t j : link.joints) {
      per_joint[j].first += link.w_q * share;
      per_joint[j].second += link.w_p * share;
    }
  }
  double sum_q = object_active ? object_w_q : 0.0;
  double sum_p = object_active ? object_w_p : 0.0;
  for (const auto& [j, w] : per_joint) {
    sum_q += w.first;
    sum_p += w.second;
  }
  NormalizedWeights n;
  const double scale_q = sum_q > 0.0 ? 1.0 / sum_q : 0.0;
  const double scale_p = sum_p > 0.0 ? 1.0 / sum_p : 0.0;
  for (const auto& [j, w] : per_joint) {
    if (w.first != 0.0) n.q.emplace_back(j, w.first * scale_q);
    if (w.second != 0.0) n.p.emplace_back(j, w.second * scale_p);
  }
  if (object_active) {
    n.object_q = object_w_q * scale_q;
    n.object_p = object_w_p * scale_p;
  }
  return n;
}

BodyWeights default_body_weights() {
  BodyWeights w;
  w.links = {
      {"root", {0}, 1.0, 1.0},          {"lower_abdomen", {3}, 0.2, 0.0},
      {"upper_abdomen", {6}, 0.2, 0.0}, {"chest", {9}, 0.2, 0.0},
      {"neck", {12}, 0.2, 0.0},         {"head", {15}, 0.2, 0.0},
      {"clavicles", {13, 14}, 0.1, 0.0}, {"upper_arms", {16, 17}, 0.2, 0.0},
      {"lower_arms", {18, 19}, 0.2, 0.0}, {"wrists", {20, 21}, 0.3, 0.3},
      {"thighs", {1, 2}, 0.5, 0.0},     {"calves", {4, 5}, 0.3, 0.0},
      {"feet", {7, 8}, 0.2, 0.1},
  };
  w.object_w_q = 1.0;
  w.object_w_p = 1.0;
  w.end_effectors = {7, 8, 20, 21};
  return w;
}

Json weights_to_json(const BodyWeights& w) {
  Json links = Json::array();
  for (const auto& l : w.links) {
    Json e = Json::object();
    e["name"] = l.name;
    e["joints"] = l.joints;
    e["w_q"] = l.w_q;
    e["w_p"] = l.w_p;
    links.push_back(std::move(e));
  }
  Json j = Json::object();
  j["links"] = std::move(links);
  j["object"] = {{"w_q", w.object_w_q}, {"w_p", w.object_w_p}};
  j["end_effectors"] = w.end_effectors;
  return j;
}

BodyWeights weights_from_json(const Json& j) {
  Cursor root(j, "");
  BodyWeights w;
  auto weight = [](const Cursor& c, std::string_view key) {
    if (!c.has(key)) return 0.0;
    const double v = c.at(key).as_double();
    if (v < 0.0) c.at(key).fail("weight must be non-negative");
    return v;
  };
  auto index = [](const Cursor& c) {
    const long long v = c.as_int();
    if (v < 0) c.fail("joint index must be non-negative");
    return static_cast<std::size_t>(v);
  };
  Cursor lc = root.at("links");
  for (std::size_t i = 0, n = lc.array_size(); i < n; ++i) {
    Cursor c = lc.at(i);
    LinkWeight l;
    l.name = c.at("name").as_string();
    Cursor jc = c.at("joints");
    for (std::size_t k = 0, m = jc.array_size(); k < m; ++k) l.joints.push_back(index(jc.at(k)));
    if (l.joints.empty()) jc.fail("a link needs at least one joint");
    l.w_q = weight(c, "w_q");
    l.w_p = weight(c, "w_p");
    w.links.push_back(std::move(l));
  }
  if (root.has("object")) {
    Cursor oc = root.at("object");
    w.object_w_q = weight(oc, "w_q");
    w.object_w_p = weight(oc, "w_p");
  }
  if (root.has("end_effectors")) {
    Cursor ec = root.at("end_effectors");
    for (std::size_t k = 0, m = ec.array_size(); k < m; ++k) {
      w.end_effectors.push_back(index(ec.at(k)));
    }
  }
  return w;
}

BodyWeights load_weights(const std::filesystem::path& path) {
  return weights_from_json(json_io::load(path));
}

double body_reward(const TrackFrame& sim, const TrackFrame& ref, const BodyWeights& weights) {
  check_links(sim, ref);
  const bool active = ref.object.has_value();
  const NormalizedWeights w = weights.normalized(active);
  const std::size_t n = sim.positions.size();
  double sum_q = 0.0;
  for (const auto& [j, wq] : w.q) {
    if (j >= n) {
      throw Error(ErrorCode::LinkSetMismatch, "weighted joint missing from the frame",
                  {{"joint", j}, {"joints", n}});
    }
    const double e = geodesic_angle(sim.orientations[j], ref.orientations[j]);
    sum_q += wq * e * e;
  }
  double sum_p = 0.0;
  for (const auto& [j, wp] : w.p) {
    if (j >= n) {
      throw Error(ErrorCode::LinkSetMismatch, "weighted joint missing from the frame",
                  {{"joint", j}, {"joints", n}});
    }
    sum_p += wp * (sim.positions[j] - ref.positions[j]).squaredNorm();
  }
  if (active) {
    const double e = geodesic_angle(sim.object->orientation(), ref.object->orientation());
    sum_q += w.object_q * e * e;
    sum_p += w.object_p * (sim.object->position() - ref.object->position()).squaredNorm();
  }
  return 0.5 * std::exp(-kBodyScale * sum_q) + 0.5 * std::exp(-kBodyScale * sum_p);
}

double hand_alpha(double distance) {
  if (distance <= kNearHand) return 1.0;
  if (distance >= kFarHand) return 0.0;
  return (kFarHand - distance) / (kFarHand - kNearHand);
}

std::array<double, 2> hand_object_distances(const TrackFrame& ref) {
  std::array<double, 2> d;
  for (std::size_t h = 0; h < 2; ++h) {
    d[h] = ref.object ? (ref.hands[h].wrist.position() - ref.object->position()).norm()
                      : std::numeric_limits<double>::infinity();
  }
  return d;
}

double hand_reward(const TrackFrame& sim, const TrackFrame& ref,
                   const std::array<double, 2>& distances) {
  std::size_t count = 0;
  for (std::size_t h = 0; h < 2; ++h) {
    if (sim.hands[h].fingers.size() != ref.hands[h].fingers.size()) {
      throw Error(ErrorCode::FingerSetMismatch, "simulated and reference finger sets differ",
                  {{"hand", h},
                   {"sim", sim.hands[h].fingers.size()},
                   {"ref", ref.hands[h].fingers.size()}});
    }
    count += sim.hands[h].fingers.size();
  }
  if (count == 0) return 1.0;
  double sum = 0.0;
  for (std::size_t h = 0; h < 2; ++h) {
    double alpha = hand_alpha(distances[h]);
    if (!sim.object || !ref.object) alpha = 0.0;
    const HandFrame& hs = sim.hands[h];
    const HandFrame& hr = ref.hands[h];
    for (std::size_t f = 0; f < hs.fingers.size(); ++f) {
      const double e_w = (hs.wrist.inverse_transform_point(hs.fingers[f]) -
                          hr.wrist.inverse_transform_point(hr.fingers[f]))
                             .norm();
      double e_o = 0.0;
      if (alpha > 0.0) {
        e_o = (sim.object->inverse_transform_point(hs.fingers[f]) -
               ref.object->inverse_transform_point(hr.fingers[f]))
                  .norm();
      }
      sum += alpha * e_o + (1.0 - alpha) * e_w;
    }
  }
  return std::exp(-(kHandScale / static_cast<double>(count)) * sum);
}

double energy_reward(std::span<const Vec3> accelerations) {
  double sum = 0.0;
  for (std::size_t i = 0; i < accelerations.size(); ++i) {
    if (!accelerations[i].allFinite()) {
      throw Error(ErrorCode::NonFiniteInput, "non-finite end-effector acceleration",
                  {{"index", i}});
    }
    sum += accelerations[i].squaredNorm();
  }
  return std::exp(-sum / kEnergyScale);
}

RewardBreakdown total_reward(const TrackFrame& sim, const TrackFrame& ref,
                             const BodyWeights& weights, std::span<const Vec3> accelerations) {
  RewardBreakdown r;
  r.body = body_reward(sim, ref, weights);
  r.hand = hand_reward(sim, ref, hand_object_distances(ref));
  r.energy = energy_reward(accelerations);
  r.total = 0.8 * r.body + 0.2 * r.hand + 0.05 * r.energy;
  return r;
}

std::vector<std::vector<Vec3>> joint_accelerations(const MotionSequence& motion,
                                                   std::span<const std::size_t> joints) {
  const std::size_t n = motion.frames.size();
  std::vector<std::vector<Vec3>> out(n, std::vector<Vec3>(joints.size(), Vec3::Zero()));
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j : joints) {
      if (j >= motion.frames[t].joints.size()) {
        throw Error(ErrorCode::LinkSetMismatch, "end effector missing from the motion",
                    {{"joint", j}, {"frame", t}});
      }
    }
  }
  if (n < 3) return out;
  const double fps2 = static_cast<double>(motion.fps) * static_cast<double>(motion.fps);
  for (std::size_t t = 1; t + 1 < n; ++t) {
    for (std::size_t k = 0; k < joints.size(); ++k) {
      const std::size_t j = joints[k];
      out[t][k] = (motion.frames[t + 1].joints[j] - 2.0 * motion.frames[t].joints[j] +
                   motion.frames[t - 1].joints[j]) *
                  fps2;
    }
  }
  out[0] = out[1];
  out[n - 1] = out[n - 2];
  return out;
}

TrackingError tracking_error(const MotionSequence& sim, const MotionSequence& ref) {
  if (sim.frames.size() != ref.frames.size()) {
    throw Error(ErrorCode::LengthMismatch, "sequences differ in length",
                {{"sim", sim.frames.size()}, {"ref", ref.frames.size()}});
  }
  TrackingError e;
  const std::size_t n = sim.frames.size();
  if (n == 0) return e;
  double sum_h = 0.0;
  double sum_o = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const auto& a = sim.frames[t];
    const auto& b = ref.frames[t];
    if (a.joints.size() != b.joints.size()) {
      throw Error(ErrorCode::LengthMismatch, "joint counts differ", {{"frame", t}});
    }
    double frame = 0.0;
    for (std::size_t j = 0; j < a.joints.size(); ++j) frame += (a.joints[j] - b.joints[j]).norm();
    if (!a.joints.empty()) sum_h += frame / static_cast<double>(a.joints.size());
    sum_o += (a.object.position() - b.object.position()).norm();
  }
  e.e_h = 100.0 * sum_h / static_cast<double>(n);
  e.e_o = 100.0 * sum_o / static_cast<double>(n);
  return e;
}

TrackFrame track_frame(const MotionFrame& frame, std::array<std::size_t, 2> wrist_joints) {
  TrackFrame f;
  f.positions = frame.joints;
  f.orientations.reserve(frame.joint_rot6d.size());
  for (const auto& r : frame.joint_rot6d) f.orientations.emplace_back(rot6d_decode(r));
  f.object = frame.object;
  for (std::size_t h = 0; h < 2; ++h) {
    const std::size_t j = wrist_joints[h];
    if (j < f.positions.size() && j < f.orientations.size()) {
      f.hands[h].wrist = Pose(f.positions[j], f.orientations[j]);
    }
  }
  return f;
}

Json score_report(const MotionSequence& ref, const MotionSequence& sim,
                  const BodyWeights& weights) {
  const TrackingError te = tracking_error(sim, ref);
  const auto accels = joint_accelerations(sim, weights.end_effectors);
  const std::size_t n = sim.frames.size();
  Json per_frame = Json::array();
  RewardBreakdown mean;
  for (std::size_t t = 0; t < n; ++t) {
    const RewardBreakdown r =
        total_reward(track_frame(sim.frames[t]), track_frame(ref.frames[t]), weights, accels[t]);
    mean.body += r.body;
    mean.hand += r.hand;
    mean.energy += r.energy;
    per_frame.push_back({{"body", r.body}, {"hand", r.hand}, {"energy", r.energy}, {"total", r.total}});
  }
  if (n > 0) {
    mean.body /= static_cast<double>(n);
    mean.hand /= static_cast<double>(n);
    mean.energy /= static_cast<double>(n);
  }
  mean.total = 0.8 * mean.body + 0.2 * mean.hand + 0.05 * mean.energy;
  Json j = Json::object();
  j["frames"] = n;
  j["fps"] = sim.fps;
  j["reward"] = {{"body", mean.body}, {"hand", mean.hand}, {"energy", mean.energy},
                 {"total", mean.total}};
  j["tracking_error"] = {{"E_h", te.e_h}, {"E_o", te.e_o}};
  j["per_frame"] = std::move(per_frame);
  return j;
}

}  // namespace hoiplan
