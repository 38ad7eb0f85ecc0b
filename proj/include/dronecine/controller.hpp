// Generic rotary-wing model and its servo loop.
//
// The drone is driven by four commands: pitch (forward/back), roll
// (left/right), yaw rate and climb rate. Roll and pitch stay small, so the
// only orientation that matters for translation is the course, and the
// course responds much more slowly than translation. That gives two coupled
// linear blocks:
//
//   translation  a_xy = Rz(c) (g tan(pitch) fwd, -g tan(roll) right) - drag v_xy
//                v_z relaxes toward climb_rate with time constant tau_z
//   course       dc/dt relaxes toward yaw_rate with time constant tau_psi
//
// Each step integrates these exactly under a zero-order hold, with the
// course inside the thrust rotation held at its start-of-step value. The
// plant and the filter's prediction share this step.
//
// State vector (8): position x y z, velocity x y z, course, course rate.
#pragma once

#include "dronecine/navigator.hpp"
#include "dronecine/world.hpp"

#include <Eigen/Core>

namespace dronecine {

struct FlightControl {
    double pitch = 0.0;       // rad, positive accelerates forward
    double roll = 0.0;        // rad, positive accelerates left
    double yaw_rate = 0.0;    // rad/s
    double climb_rate = 0.0;  // m/s
};

struct ControlLimits {
    double max_angle = deg2rad(12.0);
    double max_yaw_rate = deg2rad(90.0);
    double max_climb = 1.0;
};

struct DroneModel {
    double g = 9.81;
    double drag = 0.3;      // 1/s
    double tau_z = 0.25;    // s
    double tau_psi = 0.15;  // s
    double dt = 0.01;       // s
};

struct ControlGains {
    double kp = 0.8;
    double kv = 1.2;
    double kz = 1.0;
    double kpsi = 2.0;
};

/// Diagonal process noise used by the filter's prediction.
struct ProcessNoise {
    double accel_sigma = 0.3;       // m/s^2
    double climb_sigma = 0.3;       // m/s^2
    double yaw_accel_sigma = 1.0;   // rad/s^2
};

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateMatrix = Eigen::Matrix<double, 8, 8>;
using MeasurementNoise = Eigen::Matrix4d;

enum StateIndex { kPx = 0, kPy, kPz, kVx, kVy, kVz, kCourse, kCourseRate };

struct StateEstimate {
    StateVector mean = StateVector::Zero();
    StateMatrix covariance = StateMatrix::Identity();

    Vec3 position() const { return mean.segment<3>(kPx); }
    Vec3 velocity() const { return mean.segment<3>(kVx); }
    double course() const { return mean[kCourse]; }
};

/// A tracker reading of the drone: position and course.
struct Measurement {
    Vec3 position = Vec3::Zero();
    double course = 0.0;
};

FlightControl saturate(const FlightControl& c, const ControlLimits& limits = {});
bool within_limits(const FlightControl& c, const ControlLimits& limits = {});

StateVector to_state(const DroneState& d);
DroneState to_drone_state(const StateVector& s);

/// One exact zero-order-hold step of the model.
StateVector propagate(const DroneModel& model, const StateVector& s, const FlightControl& u, double dt);

/// Jacobian of propagate with respect to the state.
StateMatrix propagate_jacobian(const DroneModel& model, const StateVector& s, const FlightControl& u, double dt);

StateMatrix process_noise(const ProcessNoise& q, double dt);

/// Filter prediction over model.dt.
StateEstimate predict(const DroneModel& model, const StateEstimate& estimate, const FlightControl& control,
                      const ProcessNoise& q = {});

/// Measurement update on position and course. Throws std::invalid_argument
/// when the noise matrix is not positive definite.
StateEstimate kalman_update(const StateEstimate& estimate, const Measurement& z, const MeasurementNoise& r);

MeasurementNoise measurement_noise(double position_sigma, double course_sigma);

/// Full-state feedback toward the navigation setpoint, saturated. The
/// setpoint's own motion is fed forward (drag * velocity and acceleration
/// horizontally, course rate in yaw) so a moving setpoint is followed
/// without steady lag.
FlightControl compute_control(const StateEstimate& estimate, const NavigationData& nav, const DroneModel& model,
                              const ControlGains& gains = {}, const ControlLimits& limits = {});

double min_eigenvalue(const StateMatrix& m);

}  // namespace dronecine
