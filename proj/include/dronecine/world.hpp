// Shared geometric and kinematic types.
//
// World frame: x east, y north, z up. Course is a rotation about +z,
// 0 means facing +y, positive counter-clockwise seen from above.
// Every module in the project uses this single convention.

#pragma once

#include <Eigen/Core>

#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace dronecine {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kMaxTilt = kPi / 4.0;  // simulated gimbal range

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Signed shortest rotation from `from` to `to`, in (-pi, pi].
inline double angle_diff(double to, double from) { return wrap_angle(to - from); }

struct Pose {
    Vec3 position = Vec3::Zero();
    double course = 0.0;  // rad, (-pi, pi]
    double tilt = 0.0;    // rad, positive looking down, |tilt| <= pi/4
};

struct ActorState {
    std::string id;
    Vec3 position = Vec3::Zero();  // feet, z = ground
    double facing = 0.0;
    double height = 1.8;
};

struct DroneState {
    Pose pose;
    Vec3 velocity = Vec3::Zero();
    double course_rate = 0.0;
};

struct TrackerSnapshot {
    double timestamp = 0.0;
    DroneState drone;
    std::vector<ActorState> actors;

    /// Returns nullptr when the id is not tracked.
    const ActorState* find_actor(const std::string& id) const;
};

/// Raised when a direction is undefined (e.g. vertically stacked points).
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Horizontal unit vector the course points at: (-sin c, cos c, 0).
Vec3 course_forward(double course);
/// Horizontal unit vector to the right of the course: (cos c, sin c, 0).
Vec3 course_right(double course);

/// Rotates `local` by the pose course about z, then translates. Tilt is a
/// camera-view property and is not applied.
Vec3 transform_to_world(const Pose& pose, const Vec3& local);
Vec3 inverse_transform(const Pose& pose, const Vec3& world);

/// Course that points the +y-forward axis from `from` toward `to`.
/// Throws GeometryError when the horizontal offset vanishes.
double heading_between(const Vec3& from, const Vec3& to);

/// Clamps the magnitude of v to at most max_norm.
Vec3 clamp_norm(const Vec3& v, double max_norm);

}  // namespace dronecine
