// The navigation loop: read the tracker, evaluate the plan, push the
// setpoint toward the target with steering forces, emit NavigationData.
//
// The emitted setpoint is a "carrot" with its own position and velocity.
// Steering acts on the carrot, so the setpoint stream is smooth (bounded
// acceleration) whatever the measurement noise, and the controller's job is
// to keep the drone on it.
#pragma once

#include "dronecine/framing.hpp"
#include "dronecine/trajectory.hpp"
#include "dronecine/world.hpp"

#include <optional>
#include <span>
#include <vector>

namespace dronecine {

struct NavigationData {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    double course = 0.0;
    double tilt = 0.0;  // gimbal setpoint
    // Feed-forward for the controller.
    Vec3 acceleration = Vec3::Zero();
    double course_rate = 0.0;
};

struct SteeringLimits {
    double v_max = 1.5;            // m/s
    double a_max = 1.0;            // m/s^2
    double slow_radius = 1.0;      // m
    double obstacle_radius = 1.5;  // m, range of the repulsion
    double obstacle_gain = 2.0;    // m/s^2 at contact
    double period = 1.0 / 30.0;    // s, nominal navigator step
};

struct Obstacle {
    Vec3 center = Vec3::Zero();
    double radius = 0.0;
};

inline constexpr double kActorObstacleRadius = 0.5;
inline constexpr double kVelocityFilter = 0.5;        // weight of the newest finite difference
inline constexpr double kTargetVelocityFilter = 0.2;
inline constexpr double kCourseRateFilter = 0.3;
inline constexpr double kAccelerationFilter = 0.3;

/// Everything the loop remembers between steps.
struct NavigatorState {
    bool initialised = false;
    double last_time = 0.0;
    Vec3 last_measured = Vec3::Zero();
    Vec3 measured_velocity = Vec3::Zero();  // stage 1 estimate
    Vec3 carrot = Vec3::Zero();
    Vec3 carrot_velocity = Vec3::Zero();
    std::optional<Vec3> last_target;
    Vec3 target_velocity = Vec3::Zero();
    Pose target;  // last stage 2 target, for logging
    std::optional<double> last_course;
    double course_rate = 0.0;
    Vec3 acceleration = Vec3::Zero();  // carrot, low-passed
};

/// Forgets the target history, so the next target's velocity estimate does
/// not see a jump between plans as motion.
void reset_target(NavigatorState& state);

/// Arrival force: full speed far away, linear slow-down inside slow_radius.
/// The desired velocity may carry a feed-forward term (the target's own
/// velocity); the result is clamped to a_max.
Vec3 steer_arrive(const Vec3& current_pos, const Vec3& current_vel, const Vec3& target_pos,
                  const SteeringLimits& limits, const Vec3& target_vel = Vec3::Zero());

/// Outward repulsion from every obstacle whose surface is closer than
/// obstacle_radius: gain * (1 - d / obstacle_radius)^2.
Vec3 avoid_obstacles(const Vec3& current_pos, std::span<const Obstacle> obstacles, const SteeringLimits& limits);

/// Actors as spherical obstacles around their aim points.
std::vector<Obstacle> actor_obstacles(std::span<const ActorState> actors);

/// Moves the carrot one step toward `target` and orients it. When
/// `subjects` is non-empty the course and tilt frame them at `screen`,
/// otherwise the target's course and tilt are used. The carrot is the
/// setpoint for the snapshot time and coasts at its velocity until the next
/// call.
NavigationData steer_step(NavigatorState& state, const TrackerSnapshot& snapshot, const Pose& target,
                          std::span<const ActorState> subjects, const std::vector<Vec2>& screen,
                          const SteeringLimits& limits, const CameraIntrinsics& intrinsics, double dt);

/// One pass of the four-stage loop for an active plan.
NavigationData navigation_step(NavigatorState& state, const TrackerSnapshot& snapshot, const TransitionPlan& plan,
                               double t, double dt, const SteeringLimits& limits = {},
                               const CameraIntrinsics& intrinsics = {});

}  // namespace dronecine
