#include "playkit/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "playkit/rng.hpp"

namespace playkit {

namespace {

constexpr double kArmLengthFrac = 0.08;
constexpr double kArmOpenWidthFrac = 0.05;
constexpr double kArmClosedWidthFrac = 0.03;
constexpr double kHandleRadiusFrac = 0.06;

double wrap_angle(double a) {
  while (a >= std::numbers::pi) a -= 2.0 * std::numbers::pi;
  while (a < -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

Vec2 rotate_about(const Vec2& p, const Vec2& anchor, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  const Vec2 d = p - anchor;
  return anchor + Vec2(c * d.x() - s * d.y(), s * d.x() + c * d.y());
}

// Object footprint at the current state.
std::vector<Vec2> object_polygon(const ObjectSpec& obj, const WorldState& st) {
  std::vector<Vec2> poly = obj.polygon;
  if (obj.kind == ObjectKind::HingedDoor) {
    const double angle = st.articulations.at(obj.id);
    for (auto& p : poly) p = rotate_about(p, obj.hinge, angle);
  } else {
    const Vec2 rest = polygon_centroid(obj.polygon);
    const FreePose& fp = st.free_poses.at(obj.id);
    const Vec2 d = Vec2(fp.x, fp.y) - rest;
    for (auto& p : poly) p += d;
  }
  return poly;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 < 1e-18) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double point_polygon_distance(const Vec2& p, const std::vector<Vec2>& poly) {
  if (point_in_polygon(p, poly)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(poly.size());
  for (int i = 0; i < n; ++i)
    best = std::min(best, point_segment_distance(p, poly[i], poly[(i + 1) % n]));
  return best;
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c,
                        const Vec2& d) {
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    const double v =
        (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
    if (v > 0) return 1;
    if (v < 0) return -1;
    return 0;
  };
  const int o1 = orient(a, b, c), o2 = orient(a, b, d);
  const int o3 = orient(c, d, a), o4 = orient(c, d, b);
  return o1 != o2 && o3 != o4;
}

bool polygons_overlap(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  for (const auto& p : a)
    if (point_in_polygon(p, b)) return true;
  for (const auto& p : b)
    if (point_in_polygon(p, a)) return true;
  const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      if (segments_intersect(a[i], a[(i + 1) % n], b[j], b[(j + 1) % m]))
        return true;
  return false;
}

// Door handle: the rest vertex farthest from the hinge, at the current angle.
Vec2 handle_point(const ObjectSpec& door, double angle) {
  Vec2 far = door.polygon.front();
  double best = -1.0;
  for (const auto& p : door.polygon) {
    const double d = (p - door.hinge).norm();
    if (d > best) {
      best = d;
      far = p;
    }
  }
  return rotate_about(far, door.hinge, angle);
}

}  // namespace

std::vector<Vec2> arm_footprint(const SceneConfig& scene, const ArmState& arm) {
  const double side = scene.side();
  const double half_len = 0.5 * kArmLengthFrac * side;
  const double half_wid =
      0.5 * (arm.gripper_closed ? kArmClosedWidthFrac : kArmOpenWidthFrac) * side;
  const Vec2 u(std::cos(arm.theta), std::sin(arm.theta));
  const Vec2 v(-std::sin(arm.theta), std::cos(arm.theta));
  const Vec2 c(arm.x, arm.y);
  return {c + half_len * u + half_wid * v, c - half_len * u + half_wid * v,
          c - half_len * u - half_wid * v, c + half_len * u - half_wid * v};
}

WorldState reset(const SceneConfig& scene, const RegionDescriptor& region,
                 std::uint64_t seed) {
  if (scene.find(region.object_id) == nullptr)
    throw ConfigError("region '" + region.object_id + "' not in scene");
  WorldState st;
  for (const auto& o : scene.objects) {
    if (o.kind == ObjectKind::HingedDoor) {
      st.articulations[o.id] = o.angle_min;
    } else {
      const Vec2 c = polygon_centroid(o.polygon);
      st.free_poses[o.id] = {c.x(), c.y(), false};
    }
  }
  Rng rng(mix_seed(seed, 0xA51CE5EEDULL));
  const double r = region.radius * std::sqrt(rng.uniform());
  const double a = 2.0 * std::numbers::pi * rng.uniform();
  st.arm.x = std::clamp(region.center.x() + r * std::cos(a),
                        scene.workspace_min.x(), scene.workspace_max.x());
  st.arm.y = std::clamp(region.center.y() + r * std::sin(a),
                        scene.workspace_min.y(), scene.workspace_max.y());
  st.arm.theta = 0.0;
  st.arm.gripper_closed = false;
  st.time_step = 0;
  return st;
}

WorldState step(const SceneConfig& scene, const WorldState& state,
                const Action& action, const ControlParams& ctrl) {
  WorldState next = state;
  const double side = scene.side();
  const auto clamp1 = [](double v) { return std::clamp(v, -1.0, 1.0); };
  const double dx = clamp1(action.dx) * ctrl.move_scale * side;
  const double dy = clamp1(action.dy) * ctrl.move_scale * side;
  const double dth = clamp1(action.dtheta) * ctrl.turn_scale;
  const double grip = clamp1(action.grip);

  const Vec2 old_pos(state.arm.x, state.arm.y);
  next.arm.x = std::clamp(state.arm.x + dx, scene.workspace_min.x(),
                          scene.workspace_max.x());
  next.arm.y = std::clamp(state.arm.y + dy, scene.workspace_min.y(),
                          scene.workspace_max.y());
  next.arm.theta = wrap_angle(state.arm.theta + dth);
  if (grip > ctrl.grip_threshold) next.arm.gripper_closed = true;
  else if (grip < -ctrl.grip_threshold) next.arm.gripper_closed = false;
  const Vec2 disp = Vec2(next.arm.x, next.arm.y) - old_pos;

  const auto arm_poly = arm_footprint(scene, next.arm);

  // Held items track the arm while the gripper stays closed.
  for (const auto& obj : scene.objects) {
    if (obj.kind == ObjectKind::HingedDoor) continue;
    FreePose& fp = next.free_poses[obj.id];
    if (obj.kind == ObjectKind::LiftableItem && fp.lifted) {
      if (next.arm.gripper_closed) {
        fp.x += disp.x();
        fp.y += disp.y();
      } else {
        fp.lifted = false;
      }
    }
  }

  // Grab / push. A closed gripper over a liftable item grabs it; anything
  // else in contact is dragged along the arm displacement.
  for (const auto& obj : scene.objects) {
    if (obj.kind == ObjectKind::HingedDoor) continue;
    FreePose& fp = next.free_poses[obj.id];
    if (fp.lifted) continue;
    const auto poly = object_polygon(obj, next);
    if (!polygons_overlap(arm_poly, poly)) continue;
    if (obj.kind == ObjectKind::LiftableItem && next.arm.gripper_closed) {
      fp.lifted = true;
    } else {
      fp.x = std::clamp(fp.x + disp.x(), scene.workspace_min.x(),
                        scene.workspace_max.x());
      fp.y = std::clamp(fp.y + disp.y(), scene.workspace_min.y(),
                        scene.workspace_max.y());
    }
  }

  // Doors: contact at the handle advances the hinge by the arm motion
  // projected on the opening tangent.
  for (const auto& obj : scene.objects) {
    if (obj.kind != ObjectKind::HingedDoor) continue;
    double& angle = next.articulations[obj.id];
    const Vec2 handle = handle_point(obj, angle);
    const double handle_radius = kHandleRadiusFrac * side;
    if (point_polygon_distance(handle, arm_poly) > handle_radius) continue;
    const Vec2 radial = handle - obj.hinge;
    const double dist = radial.norm();
    if (dist < 1e-9) continue;
    const Vec2 tangent = Vec2(-radial.y(), radial.x()) / dist;
    angle = std::clamp(angle + disp.dot(tangent) / dist, obj.angle_min,
                       obj.angle_max);
  }

  next.time_step = state.time_step + 1;
  return next;
}

Observation render(const SceneConfig& scene, const WorldState& state) {
  const int n = scene.raster_size;
  Observation obs;
  obs.env = ImageF::Zero(n, n);
  obs.agent = ImageB::Zero(n, n);

  const double side = scene.side();
  const double px = side / n;
  auto pixel_center = [&](int r, int c) {
    return Vec2(scene.workspace_min.x() + (c + 0.5) * px,
                scene.workspace_max.y() - (r + 0.5) * px);
  };
  auto raster_bounds = [&](const std::vector<Vec2>& poly, int& r0, int& r1,
                           int& c0, int& c1) {
    double xmin = poly[0].x(), xmax = poly[0].x();
    double ymin = poly[0].y(), ymax = poly[0].y();
    for (const auto& p : poly) {
      xmin = std::min(xmin, p.x());
      xmax = std::max(xmax, p.x());
      ymin = std::min(ymin, p.y());
      ymax = std::max(ymax, p.y());
    }
    c0 = std::max(0, static_cast<int>((xmin - scene.workspace_min.x()) / px) - 1);
    c1 = std::min(n - 1,
                  static_cast<int>((xmax - scene.workspace_min.x()) / px) + 1);
    r0 = std::max(0, static_cast<int>((scene.workspace_max.y() - ymax) / px) - 1);
    r1 = std::min(n - 1,
                  static_cast<int>((scene.workspace_max.y() - ymin) / px) + 1);
  };

  for (const auto& obj : scene.objects) {
    const auto poly = object_polygon(obj, state);
    int r0, r1, c0, c1;
    raster_bounds(poly, r0, r1, c0, c1);
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c)
        if (point_in_polygon(pixel_center(r, c), poly))
          obs.env(r, c) = obj.intensity;
  }

  const auto arm_poly = arm_footprint(scene, state.arm);
  int r0, r1, c0, c1;
  raster_bounds(arm_poly, r0, r1, c0, c1);
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c)
      if (point_in_polygon(pixel_center(r, c), arm_poly)) obs.agent(r, c) = 1;

  obs.composite = obs.env;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      if (obs.agent(r, c)) obs.composite(r, c) = kAgentIntensity;
  return obs;
}

bool success(const SceneConfig& scene, const WorldState& state,
             const std::string& task_id) {
  const ObjectSpec* obj = scene.find(task_id);
  if (obj == nullptr) throw ConfigError("unknown task id '" + task_id + "'");
  switch (obj->kind) {
    case ObjectKind::HingedDoor: {
      const double angle = state.articulations.at(task_id);
      return std::abs(angle - obj->angle_min) >
             0.6 * (obj->angle_max - obj->angle_min);
    }
    case ObjectKind::LiftableItem: {
      const FreePose& fp = state.free_poses.at(task_id);
      const double rest_y = polygon_centroid(obj->polygon).y();
      return fp.lifted && (fp.y - rest_y) > obj->lift_threshold;
    }
    case ObjectKind::FreestandingItem: {
      const FreePose& fp = state.free_poses.at(task_id);
      const Vec2 rest = polygon_centroid(obj->polygon);
      return (Vec2(fp.x, fp.y) - rest).norm() > obj->push_threshold;
    }
  }
  return false;
}

std::vector<RegionDescriptor> regions(const SceneConfig& scene) {
  std::vector<RegionDescriptor> out;
  for (const auto& obj : scene.objects) {
    RegionDescriptor rd;
    rd.object_id = obj.id;
    rd.center = polygon_centroid(obj.polygon);
    double far = 0.0;
    for (const auto& p : obj.polygon)
      far = std::max(far, (p - rd.center).norm());
    rd.radius = far + kHandleRadiusFrac * scene.side();
    out.push_back(rd);
  }
  return out;
}

}  // namespace playkit
