#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "playkit/change.hpp"
#include "playkit/image.hpp"
#include "playkit/replay.hpp"
#include "playkit/rng.hpp"
#include "playkit/world.hpp"

using namespace playkit;

namespace {

RegionDescriptor region_for(const SceneConfig& scene, const std::string& id) {
  for (const auto& r : regions(scene))
    if (r.object_id == id) return r;
  throw std::runtime_error("no region " + id);
}

Observation obs_with_arm(const SceneConfig& scene, const WorldState& base,
                         double x, double y, double theta = 0.0) {
  WorldState st = base;
  st.arm.x = x;
  st.arm.y = y;
  st.arm.theta = theta;
  return render(scene, st);
}

}  // namespace

TEST_CASE("perfect segmenter recovers exactly the env layer") {
  const SceneConfig scene = make_kitchen1();
  // Arm overlapping the cabinet so occlusion is actually exercised.
  WorldState st = reset(scene, region_for(scene, "cabinet"), 1);
  st.arm.x = 0.36;
  st.arm.y = 0.56;
  const Observation obs = render(scene, st);
  bool occludes = false;
  for (int r = 0; r < obs.agent.rows(); ++r)
    for (int c = 0; c < obs.agent.cols(); ++c)
      if (obs.agent(r, c) && obs.env(r, c) > 0.0f) occludes = true;
  CHECK(occludes);
  const ImageF masked = mask_agent(obs, MaskNoiseConfig{}, 0);
  CHECK(masked == obs.env);
}

TEST_CASE("masking an all-agent frame of an empty scene gives zeros") {
  SceneConfig scene = make_kitchen1();
  scene.objects.clear();
  WorldState st;
  st.arm = {0.5, 0.5, 0.0, false};
  Observation obs = render(scene, st);
  obs.agent.setConstant(1);
  obs.composite.setConstant(kAgentIntensity);
  const ImageF masked = mask_agent(obs, MaskNoiseConfig{}, 3);
  CHECK(masked.maxCoeff() == 0.0f);
  const ImageF masked_noisy = mask_agent(obs, MaskNoiseConfig{0.0, 1}, 3);
  CHECK(masked_noisy.maxCoeff() == 0.0f);
}

TEST_CASE("mask flips follow binomial statistics") {
  const SceneConfig scene = make_kitchen1();
  const WorldState st = reset(scene, region_for(scene, "cabinet"), 1);
  const Observation obs = render(scene, st);
  const double p = 0.05;
  const double n = static_cast<double>(obs.agent.size());
  double total_flips = 0.0;
  const int kSeeds = 40;
  for (int seed = 0; seed < kSeeds; ++seed) {
    const ImageB mask = noisy_mask(obs, MaskNoiseConfig{p, 0}, seed);
    double flips = 0.0;
    for (int r = 0; r < mask.rows(); ++r)
      for (int c = 0; c < mask.cols(); ++c)
        if (mask(r, c) != obs.agent(r, c)) flips += 1.0;
    total_flips += flips;
  }
  const double mean_flips = total_flips / kSeeds;
  const double expect = p * n;
  const double tol = 4.0 * std::sqrt(n * p * (1 - p)) / std::sqrt(double(kSeeds));
  CHECK(std::abs(mean_flips - expect) <= tol);
}

TEST_CASE("identical observations give an all-zero change image") {
  const SceneConfig scene = make_kitchen1();
  const Observation obs =
      render(scene, reset(scene, region_for(scene, "cabinet"), 1));
  const ChangeImage ci = change_image(obs, obs, ChangeConfig{}, 0);
  CHECK(ci.norm == 0.0);
  CHECK(ci.grid.maxCoeff() == 0);
}

TEST_CASE("change is invariant to arm-only motion at zero noise") {
  const SceneConfig scene = make_kitchen1();
  const WorldState base = reset(scene, region_for(scene, "cabinet"), 1);
  Rng rng(42);
  for (int i = 0; i < 25; ++i) {
    const Observation a =
        obs_with_arm(scene, base, rng.uniform(0.05, 0.95),
                     rng.uniform(0.05, 0.95), rng.uniform(-3.0, 3.0));
    const Observation b =
        obs_with_arm(scene, base, rng.uniform(0.05, 0.95),
                     rng.uniform(0.05, 0.95), rng.uniform(-3.0, 3.0));
    const ChangeImage ci = change_image(a, b, ChangeConfig{}, 0);
    CHECK(ci.norm == 0.0);
  }
}

TEST_CASE("change grids are symmetric at zero noise") {
  const SceneConfig scene = make_kitchen1();
  WorldState rest = reset(scene, region_for(scene, "cabinet"), 1);
  WorldState open = rest;
  const ObjectSpec* door = scene.find("cabinet");
  open.articulations["cabinet"] = door->angle_max;
  const Observation a = render(scene, rest);
  const Observation b = render(scene, open);
  const ChangeImage ab = change_image(a, b, ChangeConfig{}, 0);
  const ChangeImage ba = change_image(b, a, ChangeConfig{}, 0);
  CHECK(ab.grid == ba.grid);
  CHECK(ab.norm == ba.norm);
  CHECK(ab.norm > 0.0);
}

TEST_CASE("door change pixels stay inside the blurred footprint union") {
  const SceneConfig scene = make_kitchen1();
  const ObjectSpec* door = scene.find("cabinet");
  WorldState rest = reset(scene, region_for(scene, "cabinet"), 1);
  rest.arm.x = 0.9;  // park the arm away from the door
  rest.arm.y = 0.1;
  WorldState open = rest;
  open.articulations["cabinet"] = door->angle_max;
  const Observation a = render(scene, rest);
  const Observation b = render(scene, open);

  ChangeConfig cfg;
  const ChangeImage ci = change_image(a, b, cfg, 0);
  CHECK(ci.norm > 0.0);

  // Rasterization oracle: union of the two door footprints, dilated by the
  // blur kernel radius, then max-pooled to the change grid.
  const float intensity = door->intensity;
  ImageB unions(a.env.rows(), a.env.cols());
  for (int r = 0; r < a.env.rows(); ++r)
    for (int c = 0; c < a.env.cols(); ++c)
      unions(r, c) = (a.env(r, c) == intensity || b.env(r, c) == intensity) ? 1 : 0;
  const int blur_radius = static_cast<int>(std::ceil(3.0 * cfg.blur_sigma));
  const ImageB allowed =
      max_pool(dilate(unions, blur_radius),
               static_cast<int>(a.env.rows()) / cfg.change_size);
  for (int r = 0; r < ci.grid.rows(); ++r)
    for (int c = 0; c < ci.grid.cols(); ++c)
      if (ci.grid(r, c)) CHECK(allowed(r, c) == 1);
}

TEST_CASE("raising the pixel threshold never increases the norm") {
  const SceneConfig scene = make_kitchen1();
  const ObjectSpec* door = scene.find("cabinet");
  WorldState rest = reset(scene, region_for(scene, "cabinet"), 1);
  WorldState open = rest;
  open.articulations["cabinet"] = 0.5 * (door->angle_min + door->angle_max);
  const Observation a = render(scene, rest);
  const Observation b = render(scene, open);
  double prev = 2.0;
  for (double thr : {0.02, 0.05, 0.1, 0.2, 0.4, 0.8}) {
    ChangeConfig cfg;
    cfg.pixel_threshold = thr;
    const double norm = change_image(a, b, cfg, 0).norm;
    CHECK(norm <= prev + 1e-15);
    prev = norm;
  }
}

TEST_CASE("norm stays separable from noise at small flip rates") {
  const SceneConfig scene = make_kitchen1();
  const ObjectSpec* door = scene.find("cabinet");
  WorldState rest = reset(scene, region_for(scene, "cabinet"), 1);
  WorldState open = rest;
  open.articulations["cabinet"] = door->angle_max;
  open.arm.x += 0.1;
  const Observation a = render(scene, rest);
  const Observation b = render(scene, open);
  const Observation b_static = obs_with_arm(scene, rest, rest.arm.x + 0.1,
                                            rest.arm.y, rest.arm.theta);
  ChangeConfig cfg;
  cfg.noise.flip_prob = 0.01;
  double opened = 0.0, statics = 0.0;
  for (int seed = 0; seed < 10; ++seed) {
    opened += change_image(a, b, cfg, seed).norm;
    statics += change_image(a, b_static, cfg, seed).norm;
  }
  CHECK(opened >= 10.0 * statics);
}

TEST_CASE("trajectory labeling") {
  const SceneConfig scene = make_kitchen1();
  const RegionDescriptor region = region_for(scene, "cabinet");
  const ChangeConfig cfg;

  SUBCASE("static trajectory labels are all zero") {
    WorldState st = reset(scene, region, 2);
    Trajectory traj;
    for (int t = 0; t < 6; ++t) {
      traj.frames.push_back({render(scene, st), Eigen::Vector4d::Zero(), {}});
      st = step(scene, st, Action{});
    }
    label_trajectory(traj, cfg, 7);
    CHECK(traj.total_change == 0.0);
    for (const auto& f : traj.frames) CHECK(f.change.norm == 0.0);
  }

  SUBCASE("monotone door opening gives nondecreasing change norms") {
    const ObjectSpec* door = scene.find("cabinet");
    WorldState st = reset(scene, region, 2);
    st.arm.x = 0.9;
    st.arm.y = 0.1;
    Trajectory traj;
    for (int t = 0; t < 8; ++t) {
      st.articulations["cabinet"] =
          door->angle_min + (door->angle_max - door->angle_min) * t / 7.0;
      traj.frames.push_back({render(scene, st), Eigen::Vector4d::Zero(), {}});
    }
    label_trajectory(traj, cfg, 7);
    for (size_t t = 1; t < traj.frames.size(); ++t)
      CHECK(traj.frames[t].change.norm >= traj.frames[t - 1].change.norm - 1e-12);
    CHECK(traj.total_change > 0.0);
  }

  SUBCASE("single frame totals zero; empty throws") {
    WorldState st = reset(scene, region, 2);
    Trajectory traj;
    traj.frames.push_back({render(scene, st), Eigen::Vector4d::Zero(), {}});
    label_trajectory(traj, cfg, 7);
    CHECK(traj.total_change == 0.0);
    CHECK(traj.frames[0].change.norm == 0.0);

    Trajectory empty;
    CHECK_THROWS_AS(label_trajectory(empty, cfg, 7), RuntimeError);
  }
}

TEST_CASE("dimension mismatch is rejected") {
  const SceneConfig scene = make_kitchen1();
  SceneConfig big = scene;
  big.raster_size = 128;
  const Observation a = render(scene, reset(scene, region_for(scene, "cabinet"), 1));
  const Observation b = render(big, reset(big, region_for(big, "cabinet"), 1));
  CHECK_THROWS_AS(change_image(a, b, ChangeConfig{}, 0), RuntimeError);
}

TEST_CASE("norm is recomputable from the grid") {
  const SceneConfig scene = make_kitchen1();
  const ObjectSpec* door = scene.find("cabinet");
  WorldState rest = reset(scene, region_for(scene, "cabinet"), 1);
  WorldState open = rest;
  open.articulations["cabinet"] = door->angle_max;
  const ChangeImage ci =
      change_image(render(scene, rest), render(scene, open), ChangeConfig{}, 0);
  CHECK(ci.norm == ci.recompute_norm());
  CHECK(ci.norm >= 0.0);
  CHECK(ci.norm <= 1.0);
}
