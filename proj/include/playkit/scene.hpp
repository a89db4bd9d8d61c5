#pragma once

#include <string>
#include <vector>

#include "playkit/types.hpp"

namespace playkit {

enum class ObjectKind { HingedDoor, LiftableItem, FreestandingItem };

std::string to_string(ObjectKind kind);
ObjectKind object_kind_from_string(const std::string& s);

struct ObjectSpec {
  std::string id;
  ObjectKind kind = ObjectKind::FreestandingItem;
  // Footprint at rest, world units, counter-clockwise.
  std::vector<Vec2> polygon;
  // Doors: rotation anchor and allowed angle range (rest angle is angle_min).
  Vec2 hinge = Vec2::Zero();
  double angle_min = 0.0;
  double angle_max = 0.0;
  // Items: success thresholds in world units (lift height / displacement).
  double lift_threshold = 0.0;
  double push_threshold = 0.0;
  // Render gray level, always k/255.
  float intensity = 0.5f;
};

struct SceneConfig {
  int version = 1;
  std::string name = "scene";
  // Axis-aligned workspace, world units.
  Vec2 workspace_min = Vec2(0.0, 0.0);
  Vec2 workspace_max = Vec2(1.0, 1.0);
  int raster_size = 64;
  std::uint64_t seed = 0;
  std::vector<ObjectSpec> objects;

  double side() const { return workspace_max.x() - workspace_min.x(); }
  const ObjectSpec* find(const std::string& id) const;
};

struct RegionDescriptor {
  std::string object_id;
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
};

// Throws ConfigError when an invariant is violated (footprints outside the
// workspace, duplicate ids, self-intersecting polygons, bad hinge ranges).
void validate(const SceneConfig& scene);

double polygon_area(const std::vector<Vec2>& poly);
Vec2 polygon_centroid(const std::vector<Vec2>& poly);
bool polygon_is_simple(const std::vector<Vec2>& poly);
bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly);

// Scene text format (see docs/formats.md). Throws ConfigError on parse or
// invariant failure.
SceneConfig load_scene(const std::string& path);
SceneConfig parse_scene(const std::string& text, const std::string& origin);
std::string scene_to_text(const SceneConfig& scene);

// Built-in play sets. kitchen1: cabinet door, knife, hanging pan.
// kitchen2: top shelf door, fridge door, pot.
SceneConfig make_kitchen1();
SceneConfig make_kitchen2();

struct TaskSpec {
  std::string name;       // CLI task name
  SceneConfig scene;
  std::string object_id;  // success predicate target and reset region
};

TaskSpec make_task(const std::string& name);
std::vector<std::string> builtin_task_names();

}  // namespace playkit
