#include "playkit/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace playkit {

std::string to_string(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::HingedDoor: return "hinged_door";
    case ObjectKind::LiftableItem: return "liftable_item";
    case ObjectKind::FreestandingItem: return "freestanding_item";
  }
  return "unknown";
}

ObjectKind object_kind_from_string(const std::string& s) {
  if (s == "hinged_door") return ObjectKind::HingedDoor;
  if (s == "liftable_item") return ObjectKind::LiftableItem;
  if (s == "freestanding_item") return ObjectKind::FreestandingItem;
  throw ConfigError("unknown object kind '" + s + "'");
}

const ObjectSpec* SceneConfig::find(const std::string& id) const {
  for (const auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

double polygon_area(const std::vector<Vec2>& poly) {
  double a = 0.0;
  const int n = static_cast<int>(poly.size());
  for (int i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

Vec2 polygon_centroid(const std::vector<Vec2>& poly) {
  const double a = polygon_area(poly);
  if (std::abs(a) < 1e-12) {
    Vec2 sum = Vec2::Zero();
    for (const auto& p : poly) sum += p;
    return sum / static_cast<double>(poly.size());
  }
  Vec2 c = Vec2::Zero();
  const int n = static_cast<int>(poly.size());
  for (int i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    const double cross = p.x() * q.y() - q.x() * p.y();
    c += (p + q) * cross;
  }
  return c / (6.0 * a);
}

namespace {

// Proper segment intersection (excluding shared endpoints).
bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    const double v = (q.x() - p.x()) * (r.y() - p.y()) -
                     (q.y() - p.y()) * (r.x() - p.x());
    if (v > 1e-12) return 1;
    if (v < -1e-12) return -1;
    return 0;
  };
  const int o1 = orient(a, b, c), o2 = orient(a, b, d);
  const int o3 = orient(c, d, a), o4 = orient(c, d, b);
  return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

}  // namespace

bool polygon_is_simple(const std::vector<Vec2>& poly) {
  const int n = static_cast<int>(poly.size());
  if (n < 3) return false;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      // Skip adjacent edges (they share an endpoint).
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
        return false;
    }
  return true;
}

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
  bool inside = false;
  const int n = static_cast<int>(poly.size());
  for (int i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x =
          a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

void validate(const SceneConfig& scene) {
  if (scene.raster_size < 16)
    throw ConfigError("raster_size must be >= 16");
  if (!(scene.workspace_max.x() > scene.workspace_min.x()) ||
      !(scene.workspace_max.y() > scene.workspace_min.y()))
    throw ConfigError("workspace must have positive extent");
  std::vector<std::string> ids;
  for (const auto& o : scene.objects) {
    if (o.id.empty()) throw ConfigError("object with empty id");
    if (std::find(ids.begin(), ids.end(), o.id) != ids.end())
      throw ConfigError("duplicate object id '" + o.id + "'");
    ids.push_back(o.id);
    if (o.polygon.size() < 3)
      throw ConfigError("object '" + o.id + "' needs >= 3 polygon vertices");
    if (!polygon_is_simple(o.polygon))
      throw ConfigError("object '" + o.id + "' polygon self-intersects");
    for (const auto& p : o.polygon) {
      if (p.x() < scene.workspace_min.x() - 1e-9 ||
          p.x() > scene.workspace_max.x() + 1e-9 ||
          p.y() < scene.workspace_min.y() - 1e-9 ||
          p.y() > scene.workspace_max.y() + 1e-9)
        throw ConfigError("object '" + o.id + "' footprint outside workspace");
    }
    if (o.kind == ObjectKind::HingedDoor) {
      if (o.angle_min < 0.0 || o.angle_max > std::numbers::pi ||
          o.angle_min >= o.angle_max)
        throw ConfigError("object '" + o.id +
                          "' hinge range must be within [0, pi]");
    }
  }
}

// ---------------------------------------------------------------------------
// Scene text format

namespace {

std::vector<double> parse_numbers(const std::string& s, const std::string& ctx) {
  std::vector<double> out;
  std::istringstream is(s);
  double v;
  while (is >> v) out.push_back(v);
  if (out.empty()) throw ConfigError(ctx + ": expected numbers, got '" + s + "'");
  return out;
}

struct Line {
  std::string key, value;
};

}  // namespace

SceneConfig parse_scene(const std::string& text, const std::string& origin) {
  SceneConfig scene;
  scene.objects.clear();
  ObjectSpec* cur = nullptr;
  bool saw_version = false;

  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    auto trim = [](std::string s) {
      const char* ws = " \t\r\n";
      const auto b = s.find_first_not_of(ws);
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(ws);
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);

    if (line == "[object]") {
      scene.objects.emplace_back();
      cur = &scene.objects.back();
      continue;
    }
    if (line.front() == '[')
      throw ConfigError(where + ": unknown section " + line);

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (cur == nullptr) {
      if (key == "version") {
        scene.version = std::stoi(value);
        saw_version = true;
      } else if (key == "name") {
        scene.name = value;
      } else if (key == "workspace") {
        auto v = parse_numbers(value, where);
        if (v.size() != 4) throw ConfigError(where + ": workspace needs 4 numbers");
        scene.workspace_min = Vec2(v[0], v[1]);
        scene.workspace_max = Vec2(v[2], v[3]);
      } else if (key == "raster_size") {
        scene.raster_size = std::stoi(value);
      } else if (key == "seed") {
        scene.seed = std::stoull(value);
      } else {
        throw ConfigError(where + ": unknown scene key '" + key + "'");
      }
      continue;
    }

    if (key == "id") cur->id = value;
    else if (key == "kind") cur->kind = object_kind_from_string(value);
    else if (key == "polygon") {
      auto v = parse_numbers(value, where);
      if (v.size() < 6 || v.size() % 2 != 0)
        throw ConfigError(where + ": polygon needs >= 3 x,y pairs");
      cur->polygon.clear();
      for (size_t i = 0; i < v.size(); i += 2)
        cur->polygon.emplace_back(v[i], v[i + 1]);
    } else if (key == "hinge") {
      auto v = parse_numbers(value, where);
      if (v.size() != 2) throw ConfigError(where + ": hinge needs 2 numbers");
      cur->hinge = Vec2(v[0], v[1]);
    } else if (key == "range") {
      auto v = parse_numbers(value, where);
      if (v.size() != 2) throw ConfigError(where + ": range needs 2 numbers");
      cur->angle_min = v[0];
      cur->angle_max = v[1];
    } else if (key == "lift_threshold") cur->lift_threshold = std::stod(value);
    else if (key == "push_threshold") cur->push_threshold = std::stod(value);
    else if (key == "intensity") {
      const int k = std::stoi(value);
      if (k < 0 || k > 255) throw ConfigError(where + ": intensity in 0..255");
      cur->intensity = intensity_level(k);
    } else throw ConfigError(where + ": unknown object key '" + key + "'");
  }

  if (!saw_version) throw ConfigError(origin + ": missing 'version' field");
  // Default item thresholds relative to workspace side.
  for (auto& o : scene.objects) {
    if (o.kind == ObjectKind::LiftableItem && o.lift_threshold <= 0.0)
      o.lift_threshold = 0.10 * scene.side();
    if (o.kind != ObjectKind::HingedDoor && o.push_threshold <= 0.0)
      o.push_threshold = 0.05 * scene.side();
  }
  validate(scene);
  return scene;
}

SceneConfig load_scene(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open scene file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_scene(ss.str(), path);
}

std::string scene_to_text(const SceneConfig& scene) {
  std::ostringstream os;
  os << "version = " << scene.version << "\n";
  os << "name = " << scene.name << "\n";
  os << "workspace = " << scene.workspace_min.x() << " " << scene.workspace_min.y()
     << " " << scene.workspace_max.x() << " " << scene.workspace_max.y() << "\n";
  os << "raster_size = " << scene.raster_size << "\n";
  os << "seed = " << scene.seed << "\n";
  for (const auto& o : scene.objects) {
    os << "\n[object]\n";
    os << "id = " << o.id << "\n";
    os << "kind = " << to_string(o.kind) << "\n";
    os << "polygon =";
    for (const auto& p : o.polygon) os << " " << p.x() << " " << p.y();
    os << "\n";
    if (o.kind == ObjectKind::HingedDoor) {
      os << "hinge = " << o.hinge.x() << " " << o.hinge.y() << "\n";
      os << "range = " << o.angle_min << " " << o.angle_max << "\n";
    } else {
      os << "lift_threshold = " << o.lift_threshold << "\n";
      os << "push_threshold = " << o.push_threshold << "\n";
    }
    os << "intensity = " << static_cast<int>(std::lround(o.intensity * 255.0f))
       << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Built-in play sets

namespace {

ObjectSpec rect_object(const std::string& id, ObjectKind kind, double x0,
                       double y0, double x1, double y1, int intensity) {
  ObjectSpec o;
  o.id = id;
  o.kind = kind;
  o.polygon = {Vec2(x0, y0), Vec2(x1, y0), Vec2(x1, y1), Vec2(x0, y1)};
  o.intensity = intensity_level(intensity);
  return o;
}

}  // namespace

SceneConfig make_kitchen1() {
  SceneConfig s;
  s.name = "kitchen1";
  // Cabinet door: panel hinged at its left edge, opens upward through the
  // free space above; handle is the far edge of the panel.
  ObjectSpec cabinet = rect_object("cabinet", ObjectKind::HingedDoor,
                                   0.20, 0.52, 0.52, 0.60, 160);
  cabinet.hinge = Vec2(0.20, 0.56);
  cabinet.angle_min = 0.0;
  cabinet.angle_max = 1.8;
  // Knife: small slender item on the counter, must be grasped and lifted.
  ObjectSpec knife = rect_object("knife", ObjectKind::LiftableItem,
                                 0.62, 0.30, 0.78, 0.36, 224);
  knife.lift_threshold = 0.10;
  knife.push_threshold = 0.05;
  // Hanging pan: free item that counts as interacted once displaced.
  ObjectSpec pan = rect_object("pan", ObjectKind::FreestandingItem,
                               0.30, 0.16, 0.44, 0.30, 96);
  pan.push_threshold = 0.05;
  s.objects = {cabinet, knife, pan};
  validate(s);
  return s;
}

SceneConfig make_kitchen2() {
  SceneConfig s;
  s.name = "kitchen2";
  ObjectSpec shelf = rect_object("topshelf", ObjectKind::HingedDoor,
                                 0.15, 0.70, 0.50, 0.78, 176);
  shelf.hinge = Vec2(0.15, 0.74);
  shelf.angle_min = 0.0;
  shelf.angle_max = 1.8;
  ObjectSpec fridge = rect_object("fridge", ObjectKind::HingedDoor,
                                  0.62, 0.35, 0.70, 0.70, 128);
  fridge.hinge = Vec2(0.66, 0.35);
  fridge.angle_min = 0.0;
  fridge.angle_max = 1.5;
  ObjectSpec pot = rect_object("pot", ObjectKind::FreestandingItem,
                               0.30, 0.18, 0.46, 0.32, 208);
  pot.push_threshold = 0.05;
  s.objects = {shelf, fridge, pot};
  validate(s);
  return s;
}

TaskSpec make_task(const std::string& name) {
  if (name == "door" || name == "cabinet")
    return {name, make_kitchen1(), "cabinet"};
  if (name == "knife") return {name, make_kitchen1(), "knife"};
  if (name == "pan") return {name, make_kitchen1(), "pan"};
  if (name == "shelf" || name == "topshelf")
    return {name, make_kitchen2(), "topshelf"};
  if (name == "fridge") return {name, make_kitchen2(), "fridge"};
  if (name == "pot") return {name, make_kitchen2(), "pot"};
  throw ConfigError("unknown task '" + name + "'");
}

std::vector<std::string> builtin_task_names() {
  return {"door", "knife", "pan", "shelf", "fridge", "pot"};
}

}  // namespace playkit
