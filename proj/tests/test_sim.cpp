#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "playkit/rng.hpp"
#include "playkit/scene.hpp"
#include "playkit/world.hpp"

using namespace playkit;

namespace {

RegionDescriptor region_for(const SceneConfig& scene, const std::string& id) {
  for (const auto& r : regions(scene))
    if (r.object_id == id) return r;
  throw std::runtime_error("no region " + id);
}

}  // namespace

TEST_CASE("reset places the arm inside the region disc") {
  const SceneConfig scene = make_kitchen1();
  const RegionDescriptor r = region_for(scene, "cabinet");
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const WorldState st = reset(scene, r, seed);
    const double d = std::hypot(st.arm.x - r.center.x(), st.arm.y - r.center.y());
    CHECK(d <= r.radius + 1e-9);
  }
}

TEST_CASE("reset is deterministic and validates the region") {
  const SceneConfig scene = make_kitchen1();
  const RegionDescriptor r = region_for(scene, "knife");
  const WorldState a = reset(scene, r, 7);
  const WorldState b = reset(scene, r, 7);
  CHECK(a == b);
  const WorldState c = reset(scene, r, 8);
  CHECK(a != c);

  RegionDescriptor bogus = r;
  bogus.object_id = "microwave";
  CHECK_THROWS_AS(reset(scene, bogus, 7), ConfigError);
}

TEST_CASE("zero action changes only the time step") {
  const SceneConfig scene = make_kitchen1();
  const WorldState st = reset(scene, region_for(scene, "cabinet"), 3);
  const WorldState next = step(scene, st, Action{});
  WorldState expect = st;
  expect.time_step += 1;
  CHECK(next == expect);
}

TEST_CASE("actions clamp to the unit box") {
  const SceneConfig scene = make_kitchen1();
  const WorldState st = reset(scene, region_for(scene, "cabinet"), 3);
  const WorldState a = step(scene, st, Action{5.0, -5.0, 5.0, 0.0});
  const WorldState b = step(scene, st, Action{1.0, -1.0, 1.0, 0.0});
  CHECK(a == b);
}

TEST_CASE("pushing the handle along the opening tangent opens the door") {
  const SceneConfig scene = make_kitchen1();
  const ObjectSpec* door = scene.find("cabinet");
  REQUIRE(door != nullptr);

  // Start the arm right at the handle (the rest vertex farthest from the
  // hinge) and push along the opening tangent; the geometric contact oracle
  // says the hinge must advance.
  Vec2 handle = door->polygon.front();
  for (const auto& p : door->polygon)
    if ((p - door->hinge).norm() > (handle - door->hinge).norm()) handle = p;
  WorldState st = reset(scene, region_for(scene, "cabinet"), 3);
  st.arm.x = handle.x();
  st.arm.y = handle.y();

  const Vec2 radial = handle - door->hinge;
  const Vec2 tangent = Vec2(-radial.y(), radial.x()).normalized();
  Action push;
  push.dx = tangent.x();
  push.dy = tangent.y();

  const double before = st.articulations.at("cabinet");
  const WorldState next = step(scene, st, push);
  CHECK(next.articulations.at("cabinet") > before);

  // Pushing the opposite way from the rest angle stays clamped at the range.
  Action pull;
  pull.dx = -tangent.x();
  pull.dy = -tangent.y();
  const WorldState closed = step(scene, st, pull);
  CHECK(closed.articulations.at("cabinet") == doctest::Approx(door->angle_min));
}

TEST_CASE("door success is monotone while the angle increases") {
  const SceneConfig scene = make_kitchen1();
  const ObjectSpec* door = scene.find("cabinet");
  WorldState st = reset(scene, region_for(scene, "cabinet"), 3);
  bool seen_success = false;
  for (double frac = 0.0; frac <= 1.0; frac += 0.05) {
    st.articulations["cabinet"] =
        door->angle_min + frac * (door->angle_max - door->angle_min);
    const bool ok = success(scene, st, "cabinet");
    if (seen_success) CHECK(ok);
    seen_success = seen_success || ok;
    if (frac > 0.61) CHECK(ok);
    if (frac < 0.59) CHECK_FALSE(ok);
  }
  CHECK(seen_success);
}

TEST_CASE("success predicates at rest and at scripted states") {
  const SceneConfig scene = make_kitchen1();
  WorldState st = reset(scene, region_for(scene, "cabinet"), 3);
  for (const auto& obj : scene.objects) CHECK_FALSE(success(scene, st, obj.id));
  CHECK_THROWS_AS(success(scene, st, "toaster"), ConfigError);

  const ObjectSpec* door = scene.find("cabinet");
  st.articulations["cabinet"] =
      door->angle_min + 0.9 * (door->angle_max - door->angle_min);
  CHECK(success(scene, st, "cabinet"));

  const ObjectSpec* knife = scene.find("knife");
  FreePose& kp = st.free_poses["knife"];
  kp.lifted = true;
  kp.y += knife->lift_threshold * 1.01;
  CHECK(success(scene, st, "knife"));
  kp.lifted = false;
  CHECK_FALSE(success(scene, st, "knife"));
}

TEST_CASE("grabbing and lifting the knife") {
  const SceneConfig scene = make_kitchen1();
  const ObjectSpec* knife = scene.find("knife");
  const Vec2 rest = polygon_centroid(knife->polygon);
  WorldState st = reset(scene, region_for(scene, "knife"), 3);
  st.arm.x = rest.x();
  st.arm.y = rest.y();

  Action close;
  close.grip = 1.0;
  st = step(scene, st, close);
  CHECK(st.free_poses.at("knife").lifted);

  Action up;
  up.dy = 1.0;
  up.grip = 1.0;
  for (int i = 0; i < 5; ++i) st = step(scene, st, up);
  CHECK(success(scene, st, "knife"));

  Action open;
  open.grip = -1.0;
  st = step(scene, st, open);
  CHECK_FALSE(st.free_poses.at("knife").lifted);
  CHECK_FALSE(success(scene, st, "knife"));
}

TEST_CASE("freestanding items displace on contact") {
  const SceneConfig scene = make_kitchen1();
  const ObjectSpec* pan = scene.find("pan");
  const Vec2 rest = polygon_centroid(pan->polygon);
  WorldState st = reset(scene, region_for(scene, "pan"), 3);
  st.arm.x = rest.x();
  st.arm.y = rest.y();
  Action push;
  push.dx = 1.0;
  for (int i = 0; i < 3; ++i) st = step(scene, st, push);
  const FreePose& fp = st.free_poses.at("pan");
  CHECK((Vec2(fp.x, fp.y) - rest).norm() > 0.0);
}

TEST_CASE("rendering layers compose with the agent on top") {
  const SceneConfig scene = make_kitchen1();
  const WorldState st = reset(scene, region_for(scene, "cabinet"), 3);
  const Observation obs = render(scene, st);
  REQUIRE(obs.composite.rows() == scene.raster_size);
  bool any_agent = false;
  for (int r = 0; r < obs.composite.rows(); ++r)
    for (int c = 0; c < obs.composite.cols(); ++c) {
      if (obs.agent(r, c)) {
        any_agent = true;
        CHECK(obs.composite(r, c) == kAgentIntensity);
      } else {
        CHECK(obs.composite(r, c) == obs.env(r, c));
      }
    }
  CHECK(any_agent);
}

TEST_CASE("empty scene renders an empty env layer") {
  SceneConfig scene = make_kitchen1();
  scene.objects.clear();
  WorldState st;
  st.arm = {0.5, 0.5, 0.0, false};
  const Observation obs = render(scene, st);
  CHECK(obs.env.maxCoeff() == 0.0f);
}

TEST_CASE("rasterized area of a unit square matches the analytic bound") {
  SceneConfig scene;
  scene.raster_size = 64;
  ObjectSpec box;
  box.id = "box";
  box.kind = ObjectKind::FreestandingItem;
  const double s = 0.25;
  box.polygon = {Vec2(0.4, 0.4), Vec2(0.4 + s, 0.4), Vec2(0.4 + s, 0.4 + s),
                 Vec2(0.4, 0.4 + s)};
  box.push_threshold = 0.05;
  scene.objects = {box};
  validate(scene);

  WorldState st;
  st.arm = {0.05, 0.05, 0.0, false};
  st.free_poses["box"] = {0.4 + s / 2, 0.4 + s / 2, false};
  const Observation obs = render(scene, st);
  const double count = obs.env.cast<double>().sum() / box.intensity;
  const double px_per_unit = 64.0;
  const double expected = s * s * px_per_unit * px_per_unit;
  const double perimeter = 4.0 * s * px_per_unit;
  CHECK(count >= expected - perimeter);
  CHECK(count <= expected + perimeter);
}

TEST_CASE("regions: one descriptor per object, centered on the centroid") {
  const SceneConfig scene = make_kitchen1();
  const auto rs = regions(scene);
  CHECK(rs.size() == scene.objects.size());
  for (size_t i = 0; i < rs.size(); ++i) {
    const Vec2 c = polygon_centroid(scene.objects[i].polygon);
    CHECK(rs[i].object_id == scene.objects[i].id);
    CHECK((rs[i].center - c).norm() < 1e-12);
    CHECK(rs[i].radius > 0.0);
  }
  SceneConfig empty = scene;
  empty.objects.clear();
  CHECK(regions(empty).empty());
}

TEST_CASE("identical action sequences give bit-identical trajectories") {
  const SceneConfig scene = make_kitchen1();
  const RegionDescriptor r = region_for(scene, "cabinet");
  Rng rng(99);
  std::vector<Action> actions;
  for (int i = 0; i < 20; ++i)
    actions.push_back(Action{rng.uniform(-1, 1), rng.uniform(-1, 1),
                             rng.uniform(-1, 1), rng.uniform(-1, 1)});
  WorldState a = reset(scene, r, 5), b = reset(scene, r, 5);
  for (const auto& act : actions) {
    a = step(scene, a, act);
    b = step(scene, b, act);
    CHECK(a == b);
    CHECK(render(scene, a) == render(scene, b));
  }
}

TEST_CASE("scene file round trip") {
  const SceneConfig scene = make_kitchen1();
  const std::string text = scene_to_text(scene);
  const SceneConfig back = parse_scene(text, "roundtrip");
  CHECK(back.objects.size() == scene.objects.size());
  CHECK(back.name == scene.name);
  for (size_t i = 0; i < scene.objects.size(); ++i) {
    CHECK(back.objects[i].id == scene.objects[i].id);
    CHECK(back.objects[i].kind == scene.objects[i].kind);
    CHECK(back.objects[i].intensity == scene.objects[i].intensity);
  }
  CHECK_THROWS_AS(parse_scene("workspace = 0 0 1 1\n", "noversion"),
                  ConfigError);
}

TEST_CASE("scene invariants are validated") {
  SceneConfig scene = make_kitchen1();
  scene.raster_size = 8;
  CHECK_THROWS_AS(validate(scene), ConfigError);

  scene = make_kitchen1();
  scene.objects[0].angle_max = 4.0;  // > pi
  CHECK_THROWS_AS(validate(scene), ConfigError);

  scene = make_kitchen1();
  scene.objects[1].id = scene.objects[0].id;
  CHECK_THROWS_AS(validate(scene), ConfigError);

  scene = make_kitchen1();
  // Self-intersecting bowtie.
  scene.objects[2].polygon = {Vec2(0.1, 0.1), Vec2(0.3, 0.3), Vec2(0.3, 0.1),
                              Vec2(0.1, 0.3)};
  CHECK_THROWS_AS(validate(scene), ConfigError);
}
