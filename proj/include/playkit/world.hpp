#pragma once

#include <map>
#include <string>
#include <vector>

#include "playkit/scene.hpp"
#include "playkit/types.hpp"

namespace playkit {

// Bounded continuous control: planar deltas, rotation delta, gripper command.
// Components outside [-1, 1] are clamped by step().
struct Action {
  double dx = 0.0;
  double dy = 0.0;
  double dtheta = 0.0;
  double grip = 0.0;

  Eigen::Vector4d vec() const { return {dx, dy, dtheta, grip}; }
  static Action from_vec(const Eigen::Vector4d& v) {
    return {v[0], v[1], v[2], v[3]};
  }
};

// Per-component action scales, world units per unit command.
struct ControlParams {
  double move_scale = 0.05;
  double turn_scale = 0.3;
  // grip > +threshold closes, < -threshold opens, in between holds.
  double grip_threshold = 0.33;
};

struct ArmState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  bool gripper_closed = false;

  bool operator==(const ArmState&) const = default;
};

struct FreePose {
  double x = 0.0;
  double y = 0.0;
  bool lifted = false;

  bool operator==(const FreePose&) const = default;
};

struct WorldState {
  ArmState arm;
  std::map<std::string, double> articulations;  // door id -> angle
  std::map<std::string, FreePose> free_poses;   // item id -> pose
  int time_step = 0;

  bool operator==(const WorldState&) const = default;
};

// Layered raster observation. composite equals env overwritten with the agent
// intensity wherever the agent layer is set.
struct Observation {
  ImageF composite;
  ImageB agent;   // binary arm footprint
  ImageF env;     // objects only, rendered without occlusion

  bool operator==(const Observation&) const = default;
};

inline constexpr float kAgentIntensity = 1.0f;  // 255/255

// Arm footprint: an oriented rectangle centred on the arm position. The
// footprint narrows when the gripper is closed so the state is observable.
std::vector<Vec2> arm_footprint(const SceneConfig& scene, const ArmState& arm);

// Canonical rest articulations/poses; arm placed uniformly at random (seeded)
// inside the region disc. Identical inputs give bit-identical states.
WorldState reset(const SceneConfig& scene, const RegionDescriptor& region,
                 std::uint64_t seed);

// Kinematic step; total (all quantities clamp, no failure modes).
WorldState step(const SceneConfig& scene, const WorldState& state,
                const Action& action, const ControlParams& ctrl = {});

Observation render(const SceneConfig& scene, const WorldState& state);

// Task success predicates: doors past 60% of their range, items lifted above
// their lift threshold, items displaced beyond their push threshold.
bool success(const SceneConfig& scene, const WorldState& state,
             const std::string& task_id);

// One oracle region per object, centred on the rest centroid.
std::vector<RegionDescriptor> regions(const SceneConfig& scene);

}  // namespace playkit
