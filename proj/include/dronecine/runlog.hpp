// Run-log export and framing metrics.
//
// The log is CSV, one row per tick, header first. Columns:
//
//   time, state, plan_id
//   x, y, z, vx, vy, vz, course, course_rate          ground truth
//   meas_x, meas_y, meas_z, meas_course                tracker reading
//   est_x, est_y, est_z, est_vx, est_vy, est_vz, est_course
//   nav_x, nav_y, nav_z, nav_vx, nav_vy, nav_vz, nav_course, nav_tilt
//   target_x, target_y, target_z, target_course        empty unless Executing
//   pitch, roll, yaw_rate, climb_rate
//   camera_tilt
//   s0_x, s0_y, s0_tx, s0_ty, s0_outside               first subject: projected
//   s1_x, s1_y, s1_tx, s1_ty, s1_outside               and requested screen
//                                                      position, 1 if outside
//                                                      the frustum; empty when
//                                                      there is no such subject
//   <id>_x, <id>_y, <id>_z, <id>_facing                every actor, scenario order
//
// Angles in radians, numbers in shortest round-trip form.
#pragma once

#include "dronecine/simulator.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dronecine {

class LogFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string format_csv(const RunLog& log);

struct SubjectSample {
    Vec2 screen = Vec2::Zero();
    Vec2 requested = Vec2::Zero();
    bool outside = false;
};

/// The columns the metrics need, read back from a log.
struct LogRow {
    double time = 0.0;
    std::string state;
    int plan_id = 0;
    Vec3 position = Vec3::Zero();
    double course = 0.0;
    std::optional<Pose> target;
    std::vector<SubjectSample> subjects;
};

std::vector<LogRow> parse_csv(const std::string& text);

struct PlanMetrics {
    int plan_id = 0;
    double start = 0.0;  // s, first tick of the plan
    double end = 0.0;    // s, last tick
    int ticks = 0;
    double mean_screen_error = 0.0;  // normalised units, over ticks and subjects
    double max_screen_error = 0.0;
    std::optional<double> settling_time;  // s after start
    int frustum_violations = 0;           // ticks with a subject outside
};

struct MetricsReport {
    std::vector<PlanMetrics> plans;
    std::optional<double> final_position_error;  // m, truth against target on the last tick
    std::optional<double> final_course_error;    // deg
    double path_length = 0.0;                    // m
    int ticks = 0;
};

inline constexpr double kSettleThreshold = 0.1;
inline constexpr double kSettleHold = 1.0;  // s

MetricsReport compute_metrics(const std::vector<LogRow>& rows);
std::string format_metrics(const MetricsReport& report);

}  // namespace dronecine
