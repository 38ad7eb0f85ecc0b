#include "dronecine/controller.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace dronecine {
namespace {

// World horizontal acceleration commanded by pitch and roll at a course.
Eigen::Vector2d thrust_accel(const DroneModel& m, double course, const FlightControl& u) {
    const Vec3 f = course_forward(course);
    const Vec3 r = course_right(course);
    const double a_fwd = m.g * std::tan(u.pitch);
    const double a_right = -m.g * std::tan(u.roll);
    return a_fwd * f.head<2>() + a_right * r.head<2>();
}

// d(thrust_accel)/d(course): the forward axis turns into -right, right into forward.
Eigen::Vector2d thrust_accel_dcourse(const DroneModel& m, double course, const FlightControl& u) {
    const Vec3 f = course_forward(course);
    const Vec3 r = course_right(course);
    const double a_fwd = m.g * std::tan(u.pitch);
    const double a_right = -m.g * std::tan(u.roll);
    return -a_fwd * r.head<2>() + a_right * f.head<2>();
}

// Integrals of exp(-k s) over a step: e = exp(-k dt), i1 = (1 - e) / k,
// i2 = (dt - i1) / k. Smooth at k -> 0.
struct Decay {
    double e, i1, i2;
};

Decay decay(double k, double dt) {
    if (k * dt < 1e-8) return {1.0 - k * dt, dt, 0.5 * dt * dt};
    const double e = std::exp(-k * dt);
    const double i1 = -std::expm1(-k * dt) / k;
    return {e, i1, (dt - i1) / k};
}

}  // namespace

FlightControl saturate(const FlightControl& c, const ControlLimits& limits) {
    FlightControl out;
    out.pitch = std::clamp(c.pitch, -limits.max_angle, limits.max_angle);
    out.roll = std::clamp(c.roll, -limits.max_angle, limits.max_angle);
    out.yaw_rate = std::clamp(c.yaw_rate, -limits.max_yaw_rate, limits.max_yaw_rate);
    out.climb_rate = std::clamp(c.climb_rate, -limits.max_climb, limits.max_climb);
    return out;
}

bool within_limits(const FlightControl& c, const ControlLimits& limits) {
    return std::abs(c.pitch) <= limits.max_angle && std::abs(c.roll) <= limits.max_angle &&
           std::abs(c.yaw_rate) <= limits.max_yaw_rate && std::abs(c.climb_rate) <= limits.max_climb;
}

StateVector to_state(const DroneState& d) {
    StateVector s;
    s.segment<3>(kPx) = d.pose.position;
    s.segment<3>(kVx) = d.velocity;
    s[kCourse] = d.pose.course;
    s[kCourseRate] = d.course_rate;
    return s;
}

DroneState to_drone_state(const StateVector& s) {
    DroneState d;
    d.pose.position = s.segment<3>(kPx);
    d.velocity = s.segment<3>(kVx);
    d.pose.course = wrap_angle(s[kCourse]);
    d.course_rate = s[kCourseRate];
    return d;
}

StateVector propagate(const DroneModel& m, const StateVector& s, const FlightControl& u, double dt) {
    StateVector out = s;
    const Eigen::Vector2d b = thrust_accel(m, s[kCourse], u);
    const Decay h = decay(m.drag, dt);
    const Eigen::Vector2d v = s.segment<2>(kVx);
    out.segment<2>(kPx) += v * h.i1 + b * h.i2;
    out.segment<2>(kVx) = v * h.e + b * h.i1;

    const Decay z = decay(1.0 / m.tau_z, dt);
    const double vz_err = s[kVz] - u.climb_rate;
    out[kPz] += u.climb_rate * dt + vz_err * z.i1;
    out[kVz] = u.climb_rate + vz_err * z.e;

    const Decay y = decay(1.0 / m.tau_psi, dt);
    const double w_err = s[kCourseRate] - u.yaw_rate;
    out[kCourse] = wrap_angle(s[kCourse] + u.yaw_rate * dt + w_err * y.i1);
    out[kCourseRate] = u.yaw_rate + w_err * y.e;
    return out;
}

StateMatrix propagate_jacobian(const DroneModel& m, const StateVector& s, const FlightControl& u, double dt) {
    StateMatrix f = StateMatrix::Identity();
    const Decay h = decay(m.drag, dt);
    const Eigen::Vector2d db = thrust_accel_dcourse(m, s[kCourse], u);
    for (int i = 0; i < 2; ++i) {
        f(kPx + i, kVx + i) = h.i1;
        f(kVx + i, kVx + i) = h.e;
        f(kPx + i, kCourse) = db[i] * h.i2;
        f(kVx + i, kCourse) = db[i] * h.i1;
    }
    const Decay z = decay(1.0 / m.tau_z, dt);
    f(kPz, kVz) = z.i1;
    f(kVz, kVz) = z.e;
    const Decay y = decay(1.0 / m.tau_psi, dt);
    f(kCourse, kCourseRate) = y.i1;
    f(kCourseRate, kCourseRate) = y.e;
    return f;
}

StateMatrix process_noise(const ProcessNoise& q, double dt) {
    // White acceleration over one step: position picks up dt^2/2, velocity dt.
    StateMatrix out = StateMatrix::Zero();
    auto fill = [&](int p, int v, double sigma) {
        const double a = sigma * sigma;
        out(p, p) = a * dt * dt * dt * dt / 4.0;
        out(p, v) = out(v, p) = a * dt * dt * dt / 2.0;
        out(v, v) = a * dt * dt;
    };
    fill(kPx, kVx, q.accel_sigma);
    fill(kPy, kVy, q.accel_sigma);
    fill(kPz, kVz, q.climb_sigma);
    fill(kCourse, kCourseRate, q.yaw_accel_sigma);
    return out;
}

StateEstimate predict(const DroneModel& model, const StateEstimate& estimate, const FlightControl& control,
                      const ProcessNoise& q) {
    StateEstimate out;
    const StateMatrix f = propagate_jacobian(model, estimate.mean, control, model.dt);
    out.mean = propagate(model, estimate.mean, control, model.dt);
    const StateMatrix p = f * estimate.covariance * f.transpose() + process_noise(q, model.dt);
    out.covariance = 0.5 * (p + p.transpose());
    return out;
}

MeasurementNoise measurement_noise(double position_sigma, double course_sigma) {
    MeasurementNoise r = MeasurementNoise::Zero();
    r.diagonal() << position_sigma * position_sigma, position_sigma * position_sigma, position_sigma * position_sigma,
        course_sigma * course_sigma;
    return r;
}

StateEstimate kalman_update(const StateEstimate& estimate, const Measurement& z, const MeasurementNoise& r) {
    Eigen::LLT<MeasurementNoise> llt(r);
    if (llt.info() != Eigen::Success || !r.isApprox(r.transpose())) {
        throw std::invalid_argument("measurement noise must be symmetric positive definite");
    }
    Eigen::Matrix<double, 4, 8> h = Eigen::Matrix<double, 4, 8>::Zero();
    h(0, kPx) = h(1, kPy) = h(2, kPz) = h(3, kCourse) = 1.0;

    Eigen::Vector4d innovation;
    innovation.head<3>() = z.position - estimate.position();
    innovation[3] = angle_diff(z.course, estimate.course());

    const StateMatrix& p = estimate.covariance;
    const Eigen::Matrix4d s = h * p * h.transpose() + r;
    const Eigen::Matrix<double, 8, 4> k = p * h.transpose() * s.inverse();

    StateEstimate out;
    out.mean = estimate.mean + k * innovation;
    out.mean[kCourse] = wrap_angle(out.mean[kCourse]);
    // Joseph form keeps the covariance symmetric positive semi-definite.
    const StateMatrix a = StateMatrix::Identity() - k * h;
    const StateMatrix joseph = a * p * a.transpose() + k * r * k.transpose();
    out.covariance = 0.5 * (joseph + joseph.transpose());
    return out;
}

FlightControl compute_control(const StateEstimate& estimate, const NavigationData& nav, const DroneModel& model,
                              const ControlGains& gains, const ControlLimits& limits) {
    const Vec3 p = estimate.position();
    const Vec3 v = estimate.velocity();
    const double c = estimate.course();

    const Vec3 a = gains.kp * (nav.position - p) + gains.kv * (nav.velocity - v) + model.drag * nav.velocity +
                   nav.acceleration;
    const double a_fwd = a.dot(course_forward(c));
    const double a_right = a.dot(course_right(c));

    FlightControl u;
    u.pitch = std::atan(a_fwd / model.g);
    u.roll = -std::atan(a_right / model.g);
    u.climb_rate = gains.kz * (nav.position.z() - p.z()) + nav.velocity.z();
    u.yaw_rate = gains.kpsi * angle_diff(nav.course, c) + nav.course_rate;
    return saturate(u, limits);
}

double min_eigenvalue(const StateMatrix& m) {
    Eigen::SelfAdjointEigenSolver<StateMatrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace dronecine
