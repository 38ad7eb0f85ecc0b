// Transitions between two framings: the drone's current framing and the one
// a new sentence asks for. The plan stores framing properties, not camera
// positions, so it is re-anchored on the subjects every time it is evaluated.
#pragma once

#include "dronecine/framing.hpp"
#include "dronecine/psl.hpp"
#include "dronecine/world.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace dronecine {

struct TransitionPlan {
    FramingProperties p_start;
    FramingProperties p_end;
    double t0 = 0.0;
    double tf = 1.0;
    std::vector<std::string> subject_ids;
};

struct PlanOptions {
    CameraIntrinsics intrinsics;
    double cruise_speed = 0.5;   // m/s, used when the sentence gives neither duration nor speed
    double min_duration = 1.0;   // s
    int length_samples = 50;
};

class PlanningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The clamp function of the interpolation weights. Throws
/// std::invalid_argument when lo > hi.
double clamp(double x, double lo, double hi);

/// Weight of p_end at time t; p_start gets 1 minus this.
double end_weight(const TransitionPlan& plan, double t);

/// Blends every property; profile and vertical follow the shortest arc.
FramingProperties interpolate_properties(const TransitionPlan& plan, double t);

/// Subjects of the plan as currently seen by the tracker, in plan order.
std::vector<ActorState> plan_subjects(const TransitionPlan& plan, const TrackerSnapshot& snapshot);

/// Starts from the framing the drone has now (measured against the new
/// subject set) and ends at the resolved sentence.
TransitionPlan plan_transition(const TrackerSnapshot& snapshot, const psl::ShotSentence& sentence, double now,
                               const PlanOptions& options = {});

/// Camera pose realising the interpolated framing around the subjects'
/// current positions.
Pose target_pose_at(const TransitionPlan& plan, double t, const TrackerSnapshot& snapshot,
                    const CameraIntrinsics& intrinsics = {});

/// Same, with the subjects already looked up.
Pose target_pose_at(const TransitionPlan& plan, double t, std::span<const ActorState> subjects,
                    const CameraIntrinsics& intrinsics = {});

/// Length of the camera path over [t0, tf] with the subjects frozen.
double estimate_path_length(const TransitionPlan& plan, std::span<const ActorState> subjects,
                            const CameraIntrinsics& intrinsics, int samples);

}  // namespace dronecine
