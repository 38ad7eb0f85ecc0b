#include "dronecine/navigator.hpp"

#include <algorithm>
#include <cmath>

namespace dronecine {
namespace {

constexpr double kBrakingShare = 0.8;  // fraction of a_max budgeted for obstacle braking

double repulsion(double surface_distance, const SteeringLimits& limits) {
    const double d = std::max(surface_distance, 0.0);
    if (d >= limits.obstacle_radius) return 0.0;
    const double s = 1.0 - d / limits.obstacle_radius;
    return limits.obstacle_gain * s * s;
}

}  // namespace

Vec3 steer_arrive(const Vec3& current_pos, const Vec3& current_vel, const Vec3& target_pos,
                  const SteeringLimits& limits, const Vec3& target_vel) {
    const Vec3 offset = target_pos - current_pos;
    const double dist = offset.norm();
    Vec3 desired = target_vel;
    if (dist > 1e-12) desired += limits.v_max * clamp(dist / limits.slow_radius, 0.0, 1.0) * offset / dist;
    desired = clamp_norm(desired, limits.v_max);
    return clamp_norm((desired - current_vel) / limits.period, limits.a_max);
}

Vec3 avoid_obstacles(const Vec3& current_pos, std::span<const Obstacle> obstacles, const SteeringLimits& limits) {
    Vec3 force = Vec3::Zero();
    for (const auto& o : obstacles) {
        const Vec3 away = current_pos - o.center;
        const double r = away.norm();
        if (r < 1e-9) continue;  // no defined outward direction
        force += repulsion(r - o.radius, limits) * away / r;
    }
    return force;
}

std::vector<Obstacle> actor_obstacles(std::span<const ActorState> actors) {
    std::vector<Obstacle> out;
    for (const auto& a : actors) out.push_back({aim_point(a), kActorObstacleRadius});
    return out;
}

void reset_target(NavigatorState& state) {
    state.last_target.reset();
    state.target_velocity = Vec3::Zero();
}

NavigationData steer_step(NavigatorState& state, const TrackerSnapshot& snapshot, const Pose& target,
                          std::span<const ActorState> subjects, const std::vector<Vec2>& screen,
                          const SteeringLimits& limits, const CameraIntrinsics& intrinsics, double dt) {
    const Vec3 measured = snapshot.drone.pose.position;

    // Stage 1: velocity from successive tracker positions, low-passed.
    if (!state.initialised) {
        state.initialised = true;
        state.measured_velocity = Vec3::Zero();
        state.carrot = measured;
        state.carrot_velocity = Vec3::Zero();
    } else if (snapshot.timestamp > state.last_time) {
        const Vec3 raw = (measured - state.last_measured) / (snapshot.timestamp - state.last_time);
        state.measured_velocity = kVelocityFilter * raw + (1.0 - kVelocityFilter) * state.measured_velocity;
    }
    state.last_measured = measured;
    state.last_time = snapshot.timestamp;

    // Stage 2 happened in the caller; estimate how fast the target moves so
    // the carrot can keep pace with walking subjects.
    if (state.last_target) {
        const Vec3 raw = (target.position - *state.last_target) / dt;
        state.target_velocity = kTargetVelocityFilter * raw + (1.0 - kTargetVelocityFilter) * state.target_velocity;
        state.target_velocity = clamp_norm(state.target_velocity, limits.v_max);
    }
    state.last_target = target.position;
    state.target = target;

    // Stage 3: arrival plus obstacle repulsion. Obstacles only act when the
    // carrot is nearer to them than the target is, so an actor never pushes
    // the carrot off a target that sits inside its range (a close-up) but
    // still bends paths that cut past it. Repulsion alone cannot stop a
    // carrot at full speed within a_max, so the approach speed toward such
    // an obstacle is also capped at what braking can absorb.
    const auto obstacles = actor_obstacles(snapshot.actors);
    Vec3 target_vel = state.target_velocity;
    Vec3 push = Vec3::Zero();
    Vec3 approach_vel = state.carrot_velocity;
    for (const auto& o : obstacles) {
        const Vec3 away = state.carrot - o.center;
        const double r = away.norm();
        if (r < 1e-9) continue;
        const double d_here = r - o.radius;
        const double d_there = (target.position - o.center).norm() - o.radius;
        if (d_here >= d_there || d_here >= limits.obstacle_radius) continue;
        const Vec3 n = away / r;
        push += (repulsion(d_here, limits) - repulsion(d_there, limits)) * n;
        const double allowed = std::sqrt(2.0 * kBrakingShare * limits.a_max * std::max(d_here, 0.0));
        const double closing = -approach_vel.dot(n);
        if (closing > allowed) approach_vel += (closing - allowed) * n;
    }
    // Arrive from the braking-limited velocity: the difference shows up as
    // extra deceleration toward the obstacle. The carrot is the setpoint at
    // the snapshot time, so the target is compared with where it has coasted
    // to since the last call, and velocity errors close over that same step.
    SteeringLimits step_limits = limits;
    step_limits.period = dt;
    const Vec3 coasted = state.carrot + state.carrot_velocity * dt;
    Vec3 force = steer_arrive(coasted, approach_vel, target.position, step_limits, target_vel) +
                 (approach_vel - state.carrot_velocity) / dt + push;
    force = clamp_norm(force, limits.a_max);

    // Stage 4: clamp the velocity, then integrate the position.
    const Vec3 previous_velocity = state.carrot_velocity;
    state.carrot_velocity = clamp_norm(state.carrot_velocity + force * dt, limits.v_max);
    state.carrot += state.carrot_velocity * dt;
    state.carrot.z() = std::max(state.carrot.z(), 0.0);

    NavigationData nav;
    nav.position = state.carrot;
    nav.velocity = state.carrot_velocity;
    const Vec3 raw_acceleration = (state.carrot_velocity - previous_velocity) / dt;
    state.acceleration = kAccelerationFilter * raw_acceleration + (1.0 - kAccelerationFilter) * state.acceleration;
    nav.acceleration = state.acceleration;
    nav.course = target.course;
    nav.tilt = target.tilt;
    if (!subjects.empty()) {
        // Look at the subjects from where the drone actually is.
        try {
            const Pose view = orient(measured, subjects, screen, intrinsics, kTrackingVerticalWeight);
            nav.course = view.course;
            nav.tilt = view.tilt;
        } catch (const std::exception&) {
            // Directly above a subject: keep the target's orientation.
        }
    }
    if (state.last_course) {
        const double raw = angle_diff(nav.course, *state.last_course) / dt;
        state.course_rate = kCourseRateFilter * raw + (1.0 - kCourseRateFilter) * state.course_rate;
    }
    state.last_course = nav.course;
    nav.course_rate = state.course_rate;
    return nav;
}

NavigationData navigation_step(NavigatorState& state, const TrackerSnapshot& snapshot, const TransitionPlan& plan,
                               double t, double dt, const SteeringLimits& limits, const CameraIntrinsics& intrinsics) {
    if (!(dt > 0.0)) throw std::invalid_argument("navigation_step: dt must be positive");
    const auto subjects = plan_subjects(plan, snapshot);
    const Pose target = target_pose_at(plan, t, subjects, intrinsics);
    const FramingProperties props = interpolate_properties(plan, t);
    return steer_step(state, snapshot, target, subjects, props.screen, limits, intrinsics, dt);
}

}  // namespace dronecine
