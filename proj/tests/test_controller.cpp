#include "dronecine/controller.hpp"

#include "doctest.h"

#include <random>

using namespace dronecine;

namespace {

// Independent oracle: explicit Euler on the continuous model at a fine step.
StateVector euler(const DroneModel& m, StateVector s, const FlightControl& u, double dt, int substeps) {
    const double h = dt / substeps;
    for (int i = 0; i < substeps; ++i) {
        const double c = s[kCourse];
        const double af = m.g * std::tan(u.pitch), ar = -m.g * std::tan(u.roll);
        const double ax = -std::sin(c) * af + std::cos(c) * ar - m.drag * s[kVx];
        const double ay = std::cos(c) * af + std::sin(c) * ar - m.drag * s[kVy];
        const double az = (u.climb_rate - s[kVz]) / m.tau_z;
        const double aw = (u.yaw_rate - s[kCourseRate]) / m.tau_psi;
        s[kPx] += h * s[kVx];
        s[kPy] += h * s[kVy];
        s[kPz] += h * s[kVz];
        s[kCourse] += h * s[kCourseRate];
        s[kVx] += h * ax;
        s[kVy] += h * ay;
        s[kVz] += h * az;
        s[kCourseRate] += h * aw;
    }
    return s;
}

}  // namespace

TEST_CASE("predict examples") {
    const DroneModel m;
    StateEstimate e;
    e.mean.segment<3>(kPx) = Vec3(1, 2, 3);
    e.covariance.setZero();
    StateEstimate next = predict(m, e, FlightControl{});
    CHECK((next.mean - e.mean).norm() == 0.0);
    CHECK((next.covariance - process_noise(ProcessNoise{}, m.dt)).norm() < 1e-18);
    CHECK(next.covariance.trace() > 0);

    FlightControl u;
    u.pitch = 0.05;
    e.mean.setZero();
    next = predict(m, e, u);
    const double hand = 9.81 * std::tan(0.05) * 0.01;
    CHECK(hand == doctest::Approx(0.004909).epsilon(1e-4));
    // The step integrates drag exactly, which shaves 0.15% off the one-term formula.
    CHECK(next.mean[kVy] == doctest::Approx(hand).epsilon(2e-3));
    CHECK(std::abs(next.mean[kVy] - euler(m, e.mean, u, m.dt, 10)[kVy]) < 1e-6);
    CHECK(std::abs(next.mean[kVx]) < 1e-15);

    e.mean[kCourse] = kPi / 2;
    next = predict(m, e, u);
    CHECK(next.mean[kVx] == doctest::Approx(-hand).epsilon(2e-3));
    CHECK(std::abs(next.mean[kVy]) < 1e-15);
}

TEST_CASE("propagate agrees with fine Euler integration for random inputs") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    DroneModel m;
    for (int i = 0; i < 200; ++i) {
        StateVector s;
        for (int k = 0; k < 8; ++k) s[k] = u(rng);
        FlightControl c{0.2 * u(rng), 0.2 * u(rng), u(rng), u(rng)};
        const StateVector exact = propagate(m, s, c, m.dt);
        const StateVector fine = euler(m, s, c, m.dt, 2000);
        StateVector diff = exact - fine;
        diff[kCourse] = angle_diff(exact[kCourse], fine[kCourse]);
        // The thrust direction is frozen over the step: error of order
        // |a| |course rate| dt^2.
        CHECK(diff.norm() < 3e-4);

        // Without turning the step is exact.
        StateVector still = s;
        still[kCourseRate] = 0.0;
        FlightControl no_yaw = c;
        no_yaw.yaw_rate = 0.0;
        CHECK((propagate(m, still, no_yaw, m.dt) - euler(m, still, no_yaw, m.dt, 2000)).norm() < 1e-6);

        // Jacobian against central differences.
        const StateMatrix j = propagate_jacobian(m, s, c, m.dt);
        for (int k = 0; k < 8; ++k) {
            StateVector sp = s, sm = s;
            sp[k] += 1e-6;
            sm[k] -= 1e-6;
            StateVector col = propagate(m, sp, c, m.dt) - propagate(m, sm, c, m.dt);
            col[kCourse] = angle_diff(propagate(m, sp, c, m.dt)[kCourse], propagate(m, sm, c, m.dt)[kCourse]);
            CHECK((col / 2e-6 - j.col(k)).norm() < 1e-6);
        }
    }
}

TEST_CASE("kalman_update") {
    StateEstimate e;
    e.mean.segment<3>(kPx) = Vec3(1, 2, 3);
    e.mean[kCourse] = 0.5;
    const MeasurementNoise r = measurement_noise(0.01, 0.01);

    StateEstimate u = kalman_update(e, {Vec3(1, 2, 3), 0.5}, r);
    CHECK((u.mean - e.mean).norm() < 1e-15);
    CHECK(u.covariance.trace() < e.covariance.trace());

    u = kalman_update(e, {Vec3(5, 5, 5), 2.0}, measurement_noise(1e8, 1e8));
    CHECK((u.mean - e.mean).norm() < 1e-6);

    // Course innovation takes the short way across +-pi.
    e.mean[kCourse] = deg2rad(179);
    u = kalman_update(e, {e.position(), deg2rad(-179)}, r);
    CHECK(std::abs(angle_diff(u.mean[kCourse], kPi)) < deg2rad(1.01));

    MeasurementNoise bad = r;
    bad(3, 3) = -1;
    CHECK_THROWS_AS(kalman_update(e, {}, bad), std::invalid_argument);
}

TEST_CASE("filtered position beats raw measurements") {
    std::mt19937_64 rng(42);
    const double sigma = 0.005;
    std::normal_distribution<double> meas(0.0, sigma), accel(0.0, 0.05);
    const DroneModel m;
    StateVector truth = StateVector::Zero();
    truth[kPz] = 1.0;
    StateEstimate est;
    est.mean = truth;
    est.covariance = StateMatrix::Identity() * 0.01;
    const MeasurementNoise r = measurement_noise(sigma, sigma);
    NavigationData hold;
    hold.position = Vec3(0.5, 0, 1.0);

    double raw_se = 0.0, est_se = 0.0;
    double min_eig = 1.0;
    for (int i = 0; i < 1000; ++i) {
        const Measurement z{truth.segment<3>(kPx) + Vec3(meas(rng), meas(rng), meas(rng)), truth[kCourse] + meas(rng)};
        est = kalman_update(est, z, r);
        raw_se += (z.position - truth.segment<3>(kPx)).squaredNorm();
        est_se += (est.position() - truth.segment<3>(kPx)).squaredNorm();
        min_eig = std::min(min_eig, min_eigenvalue(est.covariance));
        const FlightControl u = compute_control(est, hold, m);
        truth = propagate(m, truth, u, m.dt);
        truth.segment<3>(kVx) += Vec3(accel(rng), accel(rng), accel(rng)) * m.dt;
        est = predict(m, est, u);
    }
    CHECK(std::sqrt(est_se / 1000) < std::sqrt(raw_se / 1000));
    CHECK(min_eig >= -1e-9);
}

TEST_CASE("covariance stays symmetric PSD over 1e4 cycles") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1, 1);
    const DroneModel m;
    StateEstimate est;
    const MeasurementNoise r = measurement_noise(0.005, 0.005);
    double worst = 1.0, asym = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const FlightControl c = saturate({0.3 * u(rng), 0.3 * u(rng), 2 * u(rng), u(rng)});
        est = predict(m, est, c);
        est = kalman_update(est, {est.position() + 0.01 * Vec3(u(rng), u(rng), u(rng)), est.course() + 0.01 * u(rng)}, r);
        worst = std::min(worst, min_eigenvalue(est.covariance));
        asym = std::max(asym, (est.covariance - est.covariance.transpose()).norm());
    }
    CHECK(worst >= -1e-9);
    CHECK(asym == 0.0);
}

TEST_CASE("compute_control") {
    const DroneModel m;
    StateEstimate e;
    e.mean.segment<3>(kPx) = Vec3(1, 1, 1);
    e.mean[kCourse] = 0.7;
    NavigationData nav;
    nav.position = Vec3(1, 1, 1);
    nav.course = 0.7;
    FlightControl u = compute_control(e, nav, m);
    CHECK(u.pitch == 0.0);
    CHECK(u.roll == 0.0);
    CHECK(u.yaw_rate == 0.0);
    CHECK(u.climb_rate == 0.0);

    // One metre ahead along the course.
    nav.position = e.position() + course_forward(0.7);
    u = compute_control(e, nav, m);
    CHECK(rad2deg(u.pitch) == doctest::Approx(4.66).epsilon(2e-3));
    CHECK(std::abs(u.roll) < 1e-12);

    // One metre to the right needs negative roll.
    nav.position = e.position() + course_right(0.7);
    CHECK(compute_control(e, nav, m).roll < 0);

    nav.position = e.position() + 10 * course_forward(0.7);
    CHECK(rad2deg(compute_control(e, nav, m).pitch) == doctest::Approx(12.0));

    // Course error alone never tilts the drone.
    nav.position = e.position();
    for (double err : {-3.0, -1.0, 0.2, 2.5}) {
        nav.course = wrap_angle(0.7 + err);
        u = compute_control(e, nav, m);
        CHECK(u.pitch == 0.0);
        CHECK(u.roll == 0.0);
        CHECK(within_limits(u));
    }
}

TEST_CASE("closed loop from a 1 m offset settles without growing oscillation") {
    const DroneModel m;
    StateEstimate est;
    est.mean[kPz] = 1.0;
    NavigationData nav;
    nav.position = Vec3(1.0, 0, 1.0);
    std::vector<double> err;
    for (int i = 0; i <= 1000; ++i) {
        err.push_back((est.position() - nav.position).norm());
        const FlightControl u = compute_control(est, nav, m);
        CHECK(within_limits(u));
        est.mean = propagate(m, est.mean, u, m.dt);
    }
    CHECK(err[600] < 0.05);
    for (std::size_t i = 600; i < err.size(); ++i) CHECK(err[i] < 0.05);
    std::vector<double> peaks;
    for (std::size_t i = 1; i + 1 < err.size(); ++i) {
        if (err[i] > err[i - 1] && err[i] >= err[i + 1]) peaks.push_back(err[i]);
    }
    for (std::size_t i = 1; i < peaks.size(); ++i) CHECK(peaks[i] < peaks[i - 1]);
}
