#include "dronecine/world.hpp"

#include <cmath>

namespace dronecine {

double wrap_angle(double a) {
    if (!std::isfinite(a)) return a;
    double w = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
    if (w <= -kPi) w += 2.0 * kPi;
    return w;
}

const ActorState* TrackerSnapshot::find_actor(const std::string& id) const {
    for (const auto& a : actors) {
        if (a.id == id) return &a;
    }
    return nullptr;
}

Vec3 course_forward(double course) { return {-std::sin(course), std::cos(course), 0.0}; }

Vec3 course_right(double course) { return {std::cos(course), std::sin(course), 0.0}; }

Vec3 transform_to_world(const Pose& pose, const Vec3& local) {
    const double c = std::cos(pose.course);
    const double s = std::sin(pose.course);
    return pose.position + Vec3(c * local.x() - s * local.y(), s * local.x() + c * local.y(), local.z());
}

Vec3 inverse_transform(const Pose& pose, const Vec3& world) {
    const Vec3 d = world - pose.position;
    const double c = std::cos(pose.course);
    const double s = std::sin(pose.course);
    return {c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z()};
}

double heading_between(const Vec3& from, const Vec3& to) {
    const double dx = to.x() - from.x();
    const double dy = to.y() - from.y();
    if (std::hypot(dx, dy) < 1e-12) {
        throw GeometryError("heading undefined: points are vertically stacked");
    }
    return wrap_angle(std::atan2(-dx, dy));
}

Vec3 clamp_norm(const Vec3& v, double max_norm) {
    const double n = v.norm();
    if (n > max_norm && n > 0.0) return v * (max_norm / n);
    return v;
}

}  // namespace dronecine
