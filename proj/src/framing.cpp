#include "dronecine/framing.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace dronecine {
namespace {

struct CameraAxes {
    Vec3 forward;
    Vec3 right;
    Vec3 up;
};

CameraAxes camera_axes(double course, double tilt) {
    const double sc = std::sin(course), cc = std::cos(course);
    const double st = std::sin(tilt), ct = std::cos(tilt);
    return {
        Vec3(-sc * ct, cc * ct, -st),
        Vec3(cc, sc, 0.0),
        Vec3(-sc * st, cc * st, ct),
    };
}

// Image-plane angles of a point: horizontal atan2(right, forward) and vertical
// atan2(up, forward). Smooth everywhere except on the camera itself.
Vec2 view_angles(const Vec3& position, double course, double tilt, const Vec3& point) {
    const CameraAxes ax = camera_axes(course, tilt);
    const Vec3 d = point - position;
    const double fw = d.dot(ax.forward);
    return {std::atan2(d.dot(ax.right), fw), std::atan2(d.dot(ax.up), fw)};
}

double angle_to_screen(double angle, double tan_half) {
    if (std::abs(angle) >= kPi / 2.0) return angle > 0 ? 1.0 : -1.0;
    return std::clamp(std::tan(angle) / tan_half, -1.0, 1.0);
}

// Screen position a point would take, saturated to the frame edge; used when
// reading framing back from an arbitrary camera.
Vec2 clamped_screen(const Pose& camera, const Vec3& point, const CameraIntrinsics& k) {
    const Vec2 a = view_angles(camera.position, camera.course, camera.tilt, point);
    return {angle_to_screen(a.x(), k.tan_half_h()), angle_to_screen(a.y(), k.tan_half_v())};
}

double clamp_tilt(double t) { return std::clamp(t, -kMaxTilt, kMaxTilt); }

}  // namespace

AxisFrame axis_frame(const Vec3& pa, const Vec3& pb) {
    const Vec3 ab = pb - pa;
    const double length = ab.norm();
    if (length < 1e-9) throw FramingError("coincident actors: aim points are identical");
    const Vec3 e1 = ab / length;
    Vec3 w = Vec3::UnitZ() - e1.z() * e1;
    if (w.norm() < 1e-6) throw FramingError("degenerate toric: subjects are vertically stacked");
    w.normalize();
    return {e1, w, e1.cross(w), length};
}

namespace {

double sphere_distance_guard(double d) {
    if (!(d > 0.0) || !std::isfinite(d)) throw FramingError("size distance must be positive");
    return d;
}

}  // namespace

double CameraIntrinsics::tan_half_v() const { return std::tan(vfov / 2.0); }
double CameraIntrinsics::tan_half_h() const { return aspect * std::tan(vfov / 2.0); }

Vec3 aim_point(const ActorState& actor) { return actor.position + Vec3(0.0, 0.0, kAimHeightRatio * actor.height); }

double profile_angle(psl::Profile p) {
    using psl::Profile;
    switch (p) {
        case Profile::Front: return 0.0;
        case Profile::ThreeQuarterLeft: return deg2rad(45.0);
        case Profile::Left: return deg2rad(90.0);
        case Profile::ThreeQuarterBackLeft: return deg2rad(135.0);
        case Profile::Back: return kPi;
        case Profile::ThreeQuarterBackRight: return deg2rad(-135.0);
        case Profile::Right: return deg2rad(-90.0);
        case Profile::ThreeQuarterRight: return deg2rad(-45.0);
    }
    return 0.0;
}

double vertical_angle(psl::Vertical v) {
    switch (v) {
        case psl::Vertical::High: return deg2rad(30.0);
        case psl::Vertical::Eye: return 0.0;
        case psl::Vertical::Low: return deg2rad(-30.0);
    }
    return 0.0;
}

double screen_x(psl::Screen s) {
    switch (s) {
        case psl::Screen::Left: return -0.3;
        case psl::Screen::Center: return 0.0;
        case psl::Screen::Right: return 0.3;
    }
    return 0.0;
}

double frame_height(psl::ShotSize size) {
    using psl::ShotSize;
    switch (size) {
        case ShotSize::CU: return 0.5;
        case ShotSize::MCU: return 0.8;
        case ShotSize::MS: return 1.2;
        case ShotSize::MLS: return 1.8;
        case ShotSize::FS: return 2.4;
        case ShotSize::LS: return 4.8;
    }
    return 1.2;
}

double size_to_distance(psl::ShotSize size, const CameraIntrinsics& intrinsics) {
    return frame_height(size) / (2.0 * intrinsics.tan_half_v());
}

FramingProperties resolve_spec(const psl::ShotSentence& sentence, const CameraIntrinsics& intrinsics) {
    const auto& subjects = sentence.subjects;
    if (subjects.empty() || subjects.size() > 2) throw FramingError("a shot needs one or two subjects");

    FramingProperties props;
    props.size_distance = size_to_distance(sentence.size, intrinsics);

    // One profile and one vertical per shot: the first subject that states one wins.
    props.profile = 0.0;
    for (const auto& s : subjects) {
        if (s.profile) {
            props.profile = profile_angle(*s.profile);
            break;
        }
    }
    props.vertical = 0.0;
    for (const auto& s : subjects) {
        if (s.vertical) {
            props.vertical = vertical_angle(*s.vertical);
            break;
        }
    }

    if (subjects.size() == 1) {
        const double x = subjects[0].screen ? screen_x(*subjects[0].screen) : 0.0;
        props.screen = {Vec2(x, 0.0)};
        return props;
    }

    std::optional<double> xa, xb;
    if (subjects[0].screen) xa = screen_x(*subjects[0].screen);
    if (subjects[1].screen) xb = screen_x(*subjects[1].screen);
    if (xa && xb && *xa == *xb) xb.reset();  // later constraint loses

    // Unconstrained subjects take their default slot unless it is taken.
    auto fill = [](std::optional<double> self, std::optional<double> other, double slot) {
        if (self) return *self;
        if (other && *other == slot) return *other != 0.0 ? -*other : -slot;
        return slot;
    };
    const double ax = fill(xa, xb, -0.3);
    const double bx = fill(xb, ax, 0.3);
    props.screen = {Vec2(ax, 0.0), Vec2(bx, 0.0)};
    return props;
}

FramingProperties resolve_spec(const psl::ShotSentence& sentence, const CameraIntrinsics& intrinsics,
                               std::span<const ActorState> scene) {
    for (const auto& s : sentence.subjects) {
        const bool known = std::any_of(scene.begin(), scene.end(), [&](const ActorState& a) { return a.id == s.actor_id; });
        if (!known) throw FramingError("unknown actor '" + s.actor_id + "'");
    }
    return resolve_spec(sentence, intrinsics);
}

Projection project(const Pose& camera, const Vec3& point, const CameraIntrinsics& intrinsics) {
    const CameraAxes ax = camera_axes(camera.course, camera.tilt);
    const Vec3 d = point - camera.position;
    Projection p;
    p.forward = d.dot(ax.forward);
    if (p.forward <= 0.0) {
        p.behind = true;
        return p;
    }
    p.screen = Vec2(d.dot(ax.right) / p.forward / intrinsics.tan_half_h(), d.dot(ax.up) / p.forward / intrinsics.tan_half_v());
    return p;
}

Pose orient_single(const Vec3& position, const Vec3& aim, const Vec2& screen, const CameraIntrinsics& intrinsics) {
    Pose pose;
    pose.position = position;
    const Vec3 d = aim - position;
    const double rho = std::hypot(d.x(), d.y());
    if (rho < 1e-12) {
        // Aim straight above or below: course is free, tilt saturates.
        pose.course = 0.0;
        pose.tilt = clamp_tilt(d.z() < 0 ? kPi / 2 : -kPi / 2);
        return pose;
    }
    const double X = screen.x() * intrinsics.tan_half_h();
    const double beta = std::atan(screen.y() * intrinsics.tan_half_v());
    const double cb = std::cos(beta);
    const double k = d.z() / rho;

    // Solve -sin(g) / sqrt(X^2 cos^2(b) + cos^2(g)) = k for g = tilt - beta.
    double sin_g = -k * std::sqrt((1.0 + X * X * cb * cb) / (1.0 + k * k));
    sin_g = std::clamp(sin_g, -1.0, 1.0);
    const double g = std::asin(sin_g);
    const double delta = std::atan2(X * cb, std::cos(g));

    pose.course = wrap_angle(heading_between(position, aim) + delta);
    pose.tilt = clamp_tilt(g + beta);
    return pose;
}

Pose orient_pair(const Vec3& position, const Vec3& aim_a, const Vec3& aim_b, const Vec2& screen_a, const Vec2& screen_b,
                 const CameraIntrinsics& intrinsics, double vertical_weight) {
    const double tan_h = intrinsics.tan_half_h();
    const double tan_v = intrinsics.tan_half_v();
    const double ha = std::atan(screen_a.x() * tan_h);
    const double hb = std::atan(screen_b.x() * tan_h);
    const double v_mean = 0.5 * (std::atan(screen_a.y() * tan_v) + std::atan(screen_b.y() * tan_v));

    auto residual = [&](const Eigen::Vector2d& q) {
        const Vec2 a = view_angles(position, q[0], q[1], aim_a);
        const Vec2 b = view_angles(position, q[0], q[1], aim_b);
        return Eigen::Vector3d(wrap_angle(a.x() - ha), wrap_angle(b.x() - hb), vertical_weight * (0.5 * (a.y() + b.y()) - v_mean));
    };

    const Vec3 mid = 0.5 * (aim_a + aim_b);
    const Vec3 d = mid - position;
    const double rho = std::hypot(d.x(), d.y());
    Eigen::Vector2d q;
    q[0] = (rho > 1e-12 ? heading_between(position, mid) : 0.0) + 0.5 * (ha + hb);
    q[1] = clamp_tilt(std::atan2(-d.z(), std::max(rho, 1e-12)) - v_mean);

    double mu = 1e-6;
    Eigen::Vector3d r = residual(q);
    double cost = r.squaredNorm();
    for (int it = 0; it < 100 && cost > 1e-26; ++it) {
        Eigen::Matrix<double, 3, 2> J;
        constexpr double h = 1e-7;
        for (int j = 0; j < 2; ++j) {
            Eigen::Vector2d qp = q, qm = q;
            qp[j] += h;
            qm[j] -= h;
            J.col(j) = (residual(qp) - residual(qm)) / (2.0 * h);
        }
        const Eigen::Matrix2d JtJ = J.transpose() * J;
        const Eigen::Vector2d g = J.transpose() * r;
        bool improved = false;
        double gain = 0.0;
        for (int tries = 0; tries < 20; ++tries) {
            const Eigen::Vector2d step = (JtJ + mu * Eigen::Matrix2d::Identity()).ldlt().solve(-g);
            Eigen::Vector2d cand = q + step;
            cand[1] = clamp_tilt(cand[1]);
            const Eigen::Vector3d rc = residual(cand);
            if (rc.squaredNorm() < cost) {
                q = cand;
                r = rc;
                gain = cost - rc.squaredNorm();
                cost = rc.squaredNorm();
                mu = std::max(mu * 0.3, 1e-12);
                improved = true;
                break;
            }
            mu *= 10.0;
        }
        if (!improved || gain < 1e-30) break;
    }

    Pose pose;
    pose.position = position;
    pose.course = wrap_angle(q[0]);
    pose.tilt = clamp_tilt(q[1]);
    return pose;
}

Pose sphere_place(const ActorState& actor, const FramingProperties& props, const CameraIntrinsics& intrinsics) {
    const double dist = sphere_distance_guard(props.size_distance);
    const Vec3 aim = aim_point(actor);
    const double v = props.vertical;
    const Vec3 dir = std::cos(v) * course_forward(actor.facing + props.profile) + std::sin(v) * Vec3::UnitZ();
    const Vec2 screen = props.screen.empty() ? Vec2::Zero() : props.screen[0];
    return orient_single(aim + dist * dir, aim, screen, intrinsics);
}

double toric_alpha(double screen_a_x, double screen_b_x, const CameraIntrinsics& intrinsics) {
    if (std::abs(screen_a_x - screen_b_x) < 1e-12) {
        throw FramingError("degenerate toric: both subjects requested at the same screen x");
    }
    const double t = intrinsics.tan_half_h();
    return std::abs(std::atan(screen_a_x * t) - std::atan(screen_b_x * t));
}

double toric_arc_angle(const ActorState& a, const ActorState& b, const FramingProperties& props,
                       const CameraIntrinsics& intrinsics) {
    if (props.screen.size() != 2) throw FramingError("toric placement needs two screen positions");
    const AxisFrame f = axis_frame(aim_point(a), aim_point(b));
    const double alpha = toric_alpha(props.screen[0].x(), props.screen[1].x(), intrinsics);
    // Arc point at range size_distance from the first subject; of the two
    // such points, the one nearer that subject keeps it in the foreground.
    const double two_r = f.length / std::sin(alpha);
    const double ratio = std::clamp(sphere_distance_guard(props.size_distance) / two_r, -1.0, 1.0);
    return kPi / 2.0 - alpha + std::acos(ratio);
}

Pose toric_place(const ActorState& a, const ActorState& b, const FramingProperties& props,
                 const CameraIntrinsics& intrinsics) {
    if (props.screen.size() != 2) throw FramingError("toric placement needs two screen positions");
    const Vec3 pa = aim_point(a);
    const Vec3 pb = aim_point(b);
    const AxisFrame f = axis_frame(pa, pb);
    const double alpha = toric_alpha(props.screen[0].x(), props.screen[1].x(), intrinsics);
    // The first subject appears left when seen from the +n0 side.
    const double side = props.screen[0].x() < props.screen[1].x() ? 1.0 : -1.0;

    constexpr double kArcMargin = 1e-6;
    double beta = props.arc_angle ? *props.arc_angle : toric_arc_angle(a, b, props, intrinsics);
    beta = std::clamp(beta, kArcMargin, kPi - alpha - kArcMargin);

    const double range = f.length * std::sin(alpha + beta) / std::sin(alpha);
    const double phi = props.vertical;
    const Vec3 normal = side * std::cos(phi) * f.n0 + std::sin(phi) * f.w;
    const Vec3 position = pa + range * (std::cos(beta) * f.e1 + std::sin(beta) * normal);
    return orient_pair(position, pa, pb, props.screen[0], props.screen[1], intrinsics);
}

ManifoldPoint manifold_point(const Pose& camera, std::span<const ActorState> actors, const CameraIntrinsics&) {
    ManifoldPoint m;
    if (actors.size() == 1) {
        const Vec3 off = camera.position - aim_point(actors[0]);
        m.kind = ManifoldKind::Sphere;
        m.scale = off.norm();
        if (m.scale < 1e-9) throw FramingError("camera coincides with the aim point");
        m.v = std::asin(std::clamp(off.z() / m.scale, -1.0, 1.0));
        m.u = std::hypot(off.x(), off.y()) > 1e-12 ? std::atan2(-off.x(), off.y()) : 0.0;
        return m;
    }
    if (actors.size() != 2) throw FramingError("framing supports one or two subjects");
    const Vec3 pa = aim_point(actors[0]);
    const Vec3 pb = aim_point(actors[1]);
    const AxisFrame f = axis_frame(pa, pb);
    const Vec3 rel = camera.position - pa;
    const Vec3 perp = rel - rel.dot(f.e1) * f.e1;
    if (perp.norm() < 1e-9) throw FramingError("camera lies on the subject axis");
    m.kind = ManifoldKind::Toric;
    m.u = std::acos(std::clamp(rel.normalized().dot(f.e1), -1.0, 1.0));
    m.v = std::atan2(perp.dot(f.w), std::abs(perp.dot(f.n0)));
    const Vec3 ra = (pa - camera.position).normalized();
    const Vec3 rb = (pb - camera.position).normalized();
    m.scale = std::acos(std::clamp(ra.dot(rb), -1.0, 1.0));
    return m;
}

FramingProperties world_to_manifold(const Pose& camera, std::span<const ActorState> actors,
                                    const CameraIntrinsics& intrinsics) {
    if (actors.empty() || actors.size() > 2) throw FramingError("framing supports one or two subjects");
    const ManifoldPoint m = manifold_point(camera, actors, intrinsics);
    const ActorState& first = actors[0];
    const Vec3 pa = aim_point(first);

    FramingProperties props;
    props.vertical = std::clamp(m.v, -kMaxVertical, kMaxVertical);
    props.size_distance = (camera.position - pa).norm();
    const Vec3 off = camera.position - pa;
    props.profile = std::hypot(off.x(), off.y()) > 1e-12 ? wrap_angle(heading_between(pa, camera.position) - first.facing) : 0.0;

    if (actors.size() == 1) {
        props.screen = {clamped_screen(camera, pa, intrinsics)};
        return props;
    }

    const Vec3 pb = aim_point(actors[1]);
    const AxisFrame f = axis_frame(pa, pb);
    const double side = (camera.position - pa).dot(f.n0) >= 0.0 ? 1.0 : -1.0;
    // Keep the measured horizontal centre of the pair but spread the two
    // subjects by the angle they actually subtend, so placing from these
    // properties lands back on the camera position.
    const Vec2 va = view_angles(camera.position, camera.course, camera.tilt, pa);
    const Vec2 vb = view_angles(camera.position, camera.course, camera.tilt, pb);
    const double half_h = std::atan(intrinsics.tan_half_h());
    const double room = std::max(0.0, half_h - 0.5 * m.scale);
    const double center = std::clamp(0.5 * (va.x() + vb.x()), -room, room);
    const double ha = center - side * 0.5 * m.scale;
    const double hb = center + side * 0.5 * m.scale;
    const double tan_h = intrinsics.tan_half_h();
    const double tan_v = intrinsics.tan_half_v();
    props.screen = {
        Vec2(angle_to_screen(ha, tan_h), angle_to_screen(va.y(), tan_v)),
        Vec2(angle_to_screen(hb, tan_h), angle_to_screen(vb.y(), tan_v)),
    };
    props.arc_angle = m.u;
    return props;
}

Pose place(std::span<const ActorState> subjects, const FramingProperties& props, const CameraIntrinsics& intrinsics) {
    if (subjects.size() == 1) return sphere_place(subjects[0], props, intrinsics);
    if (subjects.size() == 2) return toric_place(subjects[0], subjects[1], props, intrinsics);
    throw FramingError("framing supports one or two subjects");
}

Pose orient(const Vec3& position, std::span<const ActorState> subjects, const std::vector<Vec2>& screen,
            const CameraIntrinsics& intrinsics, double vertical_weight) {
    if (subjects.size() == 1 && screen.size() == 1) return orient_single(position, aim_point(subjects[0]), screen[0], intrinsics);
    if (subjects.size() == 2 && screen.size() == 2) {
        return orient_pair(position, aim_point(subjects[0]), aim_point(subjects[1]), screen[0], screen[1], intrinsics,
                           vertical_weight);
    }
    throw FramingError("screen positions do not match the subject count");
}

}  // namespace dronecine
