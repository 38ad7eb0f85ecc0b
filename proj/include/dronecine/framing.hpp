// Shot framing: from a parsed sentence to exact framing properties, and
// from framing properties to a camera pose on a sphere (one subject) or a
// toric surface (two subjects), plus the inverse mapping.
//
// Conventions for the property set:
//   profile   camera azimuth around the first subject relative to its facing,
//             0 = in front, positive toward the subject's left
//   vertical  camera elevation; for two subjects, rotation of the toric arc
//             plane about the subject axis
//   size      camera range to the first subject's aim point
//   screen    per-subject normalised image position, x right, y up
//
// Aim points sit at 0.75 x actor height.

#pragma once

#include "dronecine/psl.hpp"
#include "dronecine/world.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace dronecine {

struct CameraIntrinsics {
    double vfov = deg2rad(60.0);
    double aspect = 16.0 / 9.0;

    double tan_half_v() const;
    double tan_half_h() const;
};

struct FramingProperties {
    std::vector<Vec2> screen;     // one entry per subject, |x|,|y| <= 1
    double vertical = 0.0;        // rad, [-pi/3, pi/3]
    double profile = 0.0;         // rad
    double size_distance = 1.0;   // m
    // Two-subject shots only: angle at the first subject's aim point between
    // the subject axis and the camera. When set it fixes the camera's place on
    // the toric arc; otherwise the arc position is derived from size_distance.
    std::optional<double> arc_angle;

    std::size_t subject_count() const { return screen.size(); }
};

enum class ManifoldKind { Sphere, Toric };

struct ManifoldPoint {
    ManifoldKind kind = ManifoldKind::Sphere;
    double u = 0.0;      // sphere: azimuth; toric: arc angle at the first subject
    double v = 0.0;      // elevation / arc-plane rotation
    double scale = 1.0;  // sphere radius (m) or toric subtended angle (rad)
};

struct Projection {
    Vec2 screen = Vec2::Zero();
    bool behind = false;  // point at or behind the image plane
    double forward = 0.0;

    bool in_frustum() const { return !behind && std::abs(screen.x()) <= 1.0 && std::abs(screen.y()) <= 1.0; }
};

class FramingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kAimHeightRatio = 0.75;
inline constexpr double kMaxVertical = kPi / 3.0;

Vec3 aim_point(const ActorState& actor);

/// Keyword tables.
double profile_angle(psl::Profile p);
double vertical_angle(psl::Vertical v);
double screen_x(psl::Screen s);
double frame_height(psl::ShotSize size);

/// Camera-to-subject range that makes frame_height(size) fill the image height.
double size_to_distance(psl::ShotSize size, const CameraIntrinsics& intrinsics);

/// Exact property values: keyword tables, defaults, and "later conflicting
/// constraint is dropped" resolution.
FramingProperties resolve_spec(const psl::ShotSentence& sentence, const CameraIntrinsics& intrinsics);
/// Same, but first checks that every subject is present in `scene`.
FramingProperties resolve_spec(const psl::ShotSentence& sentence, const CameraIntrinsics& intrinsics,
                               std::span<const ActorState> scene);

/// Pinhole projection through a camera with course and tilt.
Projection project(const Pose& camera, const Vec3& point, const CameraIntrinsics& intrinsics);

/// Course and tilt that bring `aim` to `screen` from `position` (exact,
/// subject to the tilt clamp).
Pose orient_single(const Vec3& position, const Vec3& aim, const Vec2& screen, const CameraIntrinsics& intrinsics);

/// Weight of the mean-y residual against the two x residuals. Placement
/// keeps it small: without roll, exact x on high and low arcs costs some y.
/// From an arbitrary position a small weight lets the solver tilt far to
/// stretch an unreachable x spacing, so tracking uses a balanced weight.
inline constexpr double kPlacementVerticalWeight = 0.05;
inline constexpr double kTrackingVerticalWeight = 1.0;

/// Course and tilt that bring both aim points to their screen x (least
/// squares with a pull of the mean y toward the requested mean y).
Pose orient_pair(const Vec3& position, const Vec3& aim_a, const Vec3& aim_b, const Vec2& screen_a, const Vec2& screen_b,
                 const CameraIntrinsics& intrinsics, double vertical_weight = kPlacementVerticalWeight);

/// Camera on the sphere of radius size_distance around the actor's aim point.
Pose sphere_place(const ActorState& actor, const FramingProperties& props, const CameraIntrinsics& intrinsics);

/// Angle two subjects at the given screen x subtend at the camera.
/// Frame of a subject pair: e1 from the first to the second aim point, w the
/// world up made perpendicular to e1, n0 = e1 x w (the side from which the
/// first subject appears left).
struct AxisFrame {
    Vec3 e1, w, n0;
    double length;
};
AxisFrame axis_frame(const Vec3& pa, const Vec3& pb);

double toric_alpha(double screen_a_x, double screen_b_x, const CameraIntrinsics& intrinsics);

/// Arc angle at the first subject used when props.arc_angle is unset: the
/// point of the toric arc at range size_distance from the first subject.
double toric_arc_angle(const ActorState& a, const ActorState& b, const FramingProperties& props,
                       const CameraIntrinsics& intrinsics);

/// Camera on the surface from which the two aim points subtend toric_alpha.
Pose toric_place(const ActorState& a, const ActorState& b, const FramingProperties& props,
                 const CameraIntrinsics& intrinsics);

/// Parametric coordinates of a placement (sphere: azimuth/elevation/radius,
/// toric: arc angle/plane rotation/alpha).
ManifoldPoint manifold_point(const Pose& camera, std::span<const ActorState> actors, const CameraIntrinsics& intrinsics);

/// Inverse of sphere_place / toric_place.
FramingProperties world_to_manifold(const Pose& camera, std::span<const ActorState> actors,
                                    const CameraIntrinsics& intrinsics);

/// Places a camera for one or two subjects.
Pose place(std::span<const ActorState> subjects, const FramingProperties& props, const CameraIntrinsics& intrinsics);

/// Camera orientation for the requested screen positions from an arbitrary position.
Pose orient(const Vec3& position, std::span<const ActorState> subjects, const std::vector<Vec2>& screen,
            const CameraIntrinsics& intrinsics, double vertical_weight = kPlacementVerticalWeight);

}  // namespace dronecine
