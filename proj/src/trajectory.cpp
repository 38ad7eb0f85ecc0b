#include "dronecine/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace dronecine {
namespace {

double lerp_angle(double from, double to, double w) { return wrap_angle(from + w * angle_diff(to, from)); }

FramingProperties blend(const FramingProperties& a, const FramingProperties& b, double w) {
    FramingProperties out;
    const double w0 = 1.0 - w;
    out.screen.resize(a.screen.size());
    for (std::size_t i = 0; i < a.screen.size(); ++i) out.screen[i] = w0 * a.screen[i] + w * b.screen[i];
    out.profile = lerp_angle(a.profile, b.profile, w);
    out.vertical = a.vertical + w * angle_diff(b.vertical, a.vertical);
    out.size_distance = w0 * a.size_distance + w * b.size_distance;
    if (a.arc_angle && b.arc_angle) out.arc_angle = w0 * *a.arc_angle + w * *b.arc_angle;
    else if (a.arc_angle && w == 0.0) out.arc_angle = a.arc_angle;
    else if (b.arc_angle && w == 1.0) out.arc_angle = b.arc_angle;
    return out;
}

}  // namespace

double clamp(double x, double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("clamp: min is greater than max");
    return std::min(std::max(x, lo), hi);
}

double end_weight(const TransitionPlan& plan, double t) {
    return clamp((t - plan.t0) / (plan.tf - plan.t0), 0.0, 1.0);
}

FramingProperties interpolate_properties(const TransitionPlan& plan, double t) {
    if (t <= plan.t0) return plan.p_start;
    if (t >= plan.tf) return plan.p_end;
    // Weights as written: start * clamp((tf-t)/(tf-t0)) + end * clamp((t-t0)/(tf-t0)).
    return blend(plan.p_start, plan.p_end, end_weight(plan, t));
}

std::vector<ActorState> plan_subjects(const TransitionPlan& plan, const TrackerSnapshot& snapshot) {
    std::vector<ActorState> out;
    for (const auto& id : plan.subject_ids) {
        const ActorState* a = snapshot.find_actor(id);
        if (!a) throw PlanningError("unknown actor '" + id + "'");
        out.push_back(*a);
    }
    return out;
}

namespace {

bool screen_order_flips(const TransitionPlan& plan) {
    if (plan.p_start.screen.size() != 2 || plan.p_end.screen.size() != 2) return false;
    const double before = plan.p_start.screen[1].x() - plan.p_start.screen[0].x();
    const double after = plan.p_end.screen[1].x() - plan.p_end.screen[0].x();
    return before * after < 0.0;
}

// Camera position about the first aim point: theta runs from e1 through the
// +n0 side (0..pi) and on through the -n0 side (pi..2pi).
struct Polar {
    double theta, range, vertical;
};

Polar polar_about(const AxisFrame& f, const Vec3& pa, const Vec3& position) {
    const Vec3 rel = position - pa;
    const double side = rel.dot(f.n0);
    const double up = rel.dot(f.w);
    double theta = std::atan2(std::hypot(side, up), rel.dot(f.e1));
    if (side < 0.0) theta = 2.0 * kPi - theta;
    return {theta, rel.norm(), std::atan2(up, std::abs(side))};
}

// Swapping the subjects' screen order means crossing the vertical plane
// through both. The toric law has no finite camera where the two overlap on
// screen, so the target instead swings behind the first subject in polar
// coordinates about it, between the two end placements.
Pose swap_sides(const TransitionPlan& plan, double t, std::span<const ActorState> subjects,
                const FramingProperties& now, const CameraIntrinsics& intrinsics) {
    const Vec3 pa = aim_point(subjects[0]);
    const Vec3 pb = aim_point(subjects[1]);
    const AxisFrame f = axis_frame(pa, pb);
    FramingProperties end = plan.p_end;
    if (plan.p_start.arc_angle && !end.arc_angle) end.arc_angle = toric_arc_angle(subjects[0], subjects[1], end, intrinsics);
    const Polar a = polar_about(f, pa, place(subjects, plan.p_start, intrinsics).position);
    const Polar b = polar_about(f, pa, place(subjects, end, intrinsics).position);
    const double w = end_weight(plan, t);
    const double theta = (1.0 - w) * a.theta + w * b.theta;
    const double range = (1.0 - w) * a.range + w * b.range;
    const double phi = (1.0 - w) * a.vertical + w * b.vertical;
    const Vec3 position = pa + range * (std::cos(theta) * f.e1 + std::sin(theta) * std::cos(phi) * f.n0 +
                                        std::abs(std::sin(theta)) * std::sin(phi) * f.w);
    try {
        return orient_pair(position, pa, pb, now.screen[0], now.screen[1], intrinsics);
    } catch (const FramingError&) {
        return orient_single(position, 0.5 * (pa + pb), Vec2::Zero(), intrinsics);
    }
}

}  // namespace

Pose target_pose_at(const TransitionPlan& plan, double t, std::span<const ActorState> subjects,
                    const CameraIntrinsics& intrinsics) {
    FramingProperties p = interpolate_properties(plan, t);
    if (subjects.size() == 2 && t > plan.t0 && t < plan.tf && screen_order_flips(plan)) {
        return swap_sides(plan, t, subjects, p, intrinsics);
    }
    if (subjects.size() == 2 && plan.p_start.arc_angle && !plan.p_end.arc_angle && !p.arc_angle) {
        // The end framing fixes its arc position through size_distance, which
        // depends on where the subjects are now; blend arc angles instead.
        const double end_arc = toric_arc_angle(subjects[0], subjects[1], plan.p_end, intrinsics);
        const double w = end_weight(plan, t);
        p.arc_angle = (1.0 - w) * *plan.p_start.arc_angle + w * end_arc;
    }
    return place(subjects, p, intrinsics);
}

Pose target_pose_at(const TransitionPlan& plan, double t, const TrackerSnapshot& snapshot,
                    const CameraIntrinsics& intrinsics) {
    const auto subjects = plan_subjects(plan, snapshot);
    return target_pose_at(plan, t, subjects, intrinsics);
}

double estimate_path_length(const TransitionPlan& plan, std::span<const ActorState> subjects,
                            const CameraIntrinsics& intrinsics, int samples) {
    double length = 0.0;
    Vec3 prev = target_pose_at(plan, plan.t0, subjects, intrinsics).position;
    for (int i = 1; i < samples; ++i) {
        const double t = plan.t0 + (plan.tf - plan.t0) * i / (samples - 1);
        const Vec3 p = target_pose_at(plan, t, subjects, intrinsics).position;
        length += (p - prev).norm();
        prev = p;
    }
    return length;
}

TransitionPlan plan_transition(const TrackerSnapshot& snapshot, const psl::ShotSentence& sentence, double now,
                               const PlanOptions& options) {
    TransitionPlan plan;
    for (const auto& s : sentence.subjects) plan.subject_ids.push_back(s.actor_id);
    const auto subjects = plan_subjects(plan, snapshot);

    try {
        plan.p_end = resolve_spec(sentence, options.intrinsics);
        plan.p_start = world_to_manifold(snapshot.drone.pose, subjects, options.intrinsics);
    } catch (const FramingError& e) {
        throw PlanningError(e.what());
    }
    plan.t0 = now;

    double duration;
    if (sentence.duration) {
        duration = *sentence.duration;
    } else {
        // Any positive span works for measuring the path; only the shape matters.
        plan.tf = now + 1.0;
        const double length = estimate_path_length(plan, subjects, options.intrinsics, options.length_samples);
        const double speed = sentence.speed.value_or(options.cruise_speed);
        duration = length / speed;
    }
    plan.tf = now + std::max(duration, options.min_duration);
    return plan;
}

}  // namespace dronecine
