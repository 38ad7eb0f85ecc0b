#include "dronecine/runlog.hpp"
#include "dronecine/simulator.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace dronecine;

namespace {

Scenario static_actor_scenario() {
    Scenario s;
    s.seed = 3;
    s.duration = 16.0;
    s.drone_start.position = Vec3(0, 1.0392, 1.35);
    s.drone_start.course = kPi;
    ActorScript a;
    a.id = "A";
    a.waypoints.push_back({0.0, Vec3::Zero(), 0.0});
    s.actors.push_back(a);
    s.commands.push_back({0.5, "MS on A front"});
    s.commands.push_back({4.0, "MS on A 34backright in 6s"});
    return s;
}

}  // namespace

TEST_CASE("step_plant: hover with no control") {
    const DroneModel m;
    DroneState d;
    d.pose.position = Vec3(1, 2, 3);
    for (int i = 0; i < 500; ++i) d = step_plant(d, {}, m, m.dt);
    CHECK((d.pose.position - Vec3(1, 2, 3)).norm() < 1e-12);
    CHECK(d.velocity.norm() < 1e-12);
}

TEST_CASE("step_plant: terminal speed under constant pitch") {
    const DroneModel m;
    FlightControl u;
    u.pitch = 0.05;
    DroneState d;
    for (int i = 0; i < 3000; ++i) d = step_plant(d, u, m, m.dt);
    const double expected = m.g * std::tan(0.05) / m.drag;
    CHECK(expected == doctest::Approx(1.636).epsilon(1e-3));
    CHECK(d.velocity.norm() == doctest::Approx(expected).epsilon(0.01));
    // Course 0 flies along +y.
    CHECK(d.velocity.y() > 0.99 * d.velocity.norm());
}

TEST_CASE("step_plant matches the filter's prediction without noise") {
    const DroneModel m;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    DroneState plant;
    plant.pose.position = Vec3(0, 0, 2);
    StateEstimate est;
    est.mean = to_state(plant);
    est.covariance = StateMatrix::Identity() * 1e-3;
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        FlightControl c;
        c.pitch = 0.15 * u(rng);
        c.roll = 0.15 * u(rng);
        c.yaw_rate = 0.5 * u(rng);
        c.climb_rate = 0.2 * u(rng);
        plant = step_plant(plant, c, m, m.dt);
        est = predict(m, est, c, {});
        const StateVector diff = to_state(plant) - est.mean;
        worst = std::max(worst, std::max(diff.head<6>().cwiseAbs().maxCoeff(),
                                         std::abs(angle_diff(plant.pose.course, est.course()))));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("step_plant: ground is a floor") {
    const DroneModel m;
    DroneState d;
    d.pose.position = Vec3(0, 0, 0.01);
    FlightControl u;
    u.climb_rate = -1.0;
    for (int i = 0; i < 100; ++i) d = step_plant(d, u, m, m.dt);
    CHECK(d.pose.position.z() == 0.0);
    CHECK(d.velocity.z() >= 0.0);
}

TEST_CASE("energy: speed never grows without control or noise") {
    const DroneModel m;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        DroneState d;
        d.pose.position = Vec3(0, 0, 5);
        d.velocity = Vec3(u(rng), u(rng), 0.5 * u(rng));
        d.course_rate = u(rng);
        double speed = d.velocity.norm();
        for (int i = 0; i < 500; ++i) {
            d = step_plant(d, {}, m, m.dt);
            const double next = d.velocity.norm();
            REQUIRE(next <= speed + 1e-12);
            speed = next;
        }
    }
}

TEST_CASE("perturbed scales drag and time constants") {
    const DroneModel m;
    const DroneModel p = perturbed(m, 1.2);
    CHECK(p.drag == doctest::Approx(m.drag * 1.2));
    CHECK(p.tau_z == doctest::Approx(m.tau_z * 1.2));
    CHECK(p.tau_psi == doctest::Approx(m.tau_psi * 1.2));
    CHECK(p.g == m.g);
    CHECK_THROWS(perturbed(m, 0.0));
}

TEST_CASE("actor_state_at") {
    ActorScript a;
    a.id = "A";
    a.waypoints = {{0.0, Vec3(0, 0, 0), 0.0}, {10.0, Vec3(10, 0, 0), 0.0}};
    CHECK((actor_state_at(a, 5.0).position - Vec3(5, 0, 0)).norm() < 1e-12);
    CHECK((actor_state_at(a, 10.0).position - Vec3(10, 0, 0)).norm() < 1e-12);
    CHECK((actor_state_at(a, 99.0).position - Vec3(10, 0, 0)).norm() < 1e-12);

    ActorScript late;
    late.id = "B";
    late.waypoints = {{3.0, Vec3(1, 1, 0), 0.5}, {4.0, Vec3(2, 1, 0), 0.5}};
    const ActorState before = actor_state_at(late, 0.0);
    CHECK((before.position - Vec3(1, 1, 0)).norm() < 1e-12);
    CHECK(before.facing == doctest::Approx(0.5));

    // 170 deg to -170 deg turns through 180, not through 0.
    ActorScript turn;
    turn.id = "C";
    turn.waypoints = {{0.0, Vec3::Zero(), deg2rad(170.0)}, {2.0, Vec3::Zero(), deg2rad(-170.0)}};
    CHECK(std::abs(angle_diff(actor_state_at(turn, 1.0).facing, kPi)) < 1e-12);
    CHECK(std::abs(angle_diff(actor_state_at(turn, 0.5).facing, deg2rad(175.0))) < 1e-12);

    ActorScript none;
    none.id = "D";
    CHECK_THROWS(actor_state_at(none, 0.0));
}

TEST_CASE("run_scenario: record count and spacing") {
    Scenario s;
    s.duration = 10.0;
    const RunLog log = run_scenario(s);
    REQUIRE(log.records.size() == 1001);
    for (std::size_t i = 0; i < log.records.size(); ++i) {
        CHECK(log.records[i].time == doctest::Approx(0.01 * static_cast<double>(i)).epsilon(1e-12));
    }
}

TEST_CASE("run_scenario is deterministic") {
    Scenario s = static_actor_scenario();
    s.duration = 6.0;
    s.noise.process_sigma = 0.05;
    const std::string a = format_csv(run_scenario(s));
    const std::string b = format_csv(run_scenario(s));
    CHECK(a == b);
    s.seed = 4;
    CHECK(format_csv(run_scenario(s)) != a);
}

TEST_CASE("tracker noise statistics") {
    Scenario s;
    s.duration = 40.0;
    s.seed = 17;
    s.drone_start.position = Vec3(0, 0, 1);
    s.noise.measurement_sigma = 0.005;
    const RunLog log = run_scenario(s);
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (const auto& r : log.records) {
        for (int i = 0; i < 3; ++i) {
            const double e = r.measured.position[i] - r.truth.pose.position[i];
            sum += e;
            sq += e * e;
            ++n;
        }
    }
    REQUIRE(n >= 10000);
    const double mean = sum / static_cast<double>(n);
    const double sd = std::sqrt(sq / static_cast<double>(n) - mean * mean);
    CHECK(sd == doctest::Approx(0.005).epsilon(0.10));
}

TEST_CASE("bad commands are reported and the run continues") {
    Scenario s;
    s.duration = 1.0;
    s.drone_start.position = Vec3(0, 0, 1);
    s.commands = {{0.1, "MS on A sideways"}, {0.2, "land"}};
    const RunLog log = run_scenario(s);
    REQUIRE(log.commands.size() == 2);
    CHECK_FALSE(log.commands[0].accepted);
    REQUIRE(log.commands[0].offset.has_value());
    CHECK(*log.commands[0].offset == 8);
    CHECK(log.commands[0].time == doctest::Approx(0.1));
    CHECK(log.commands[1].accepted);
    CHECK(log.records.size() == 101);
}

TEST_CASE("static actor transition recovers the requested profile") {
    const RunLog log = run_scenario(static_actor_scenario());
    const LogRecord& last = log.records.back();
    REQUIRE(last.state == SessionState::Executing);
    const std::vector<ActorState> subjects{last.actors[0]};
    const FramingProperties seen =
        world_to_manifold(Pose{last.truth.pose.position, last.truth.pose.course, last.camera_tilt}, subjects, {});
    CHECK(std::abs(rad2deg(angle_diff(seen.profile, deg2rad(-135.0)))) < 5.0);
}

TEST_CASE("preemption keeps the setpoint continuous") {
    Scenario s = static_actor_scenario();
    s.duration = 9.0;
    s.commands.push_back({6.0, "MS on A 34left in 2s"});
    const RunLog log = run_scenario(s);
    const SteeringLimits lim;
    const double nav_dt = 1.0 / SimulationConfig{}.navigator_rate;
    for (std::size_t i = 1; i < log.records.size(); ++i) {
        const auto& a = log.records[i - 1].nav;
        const auto& b = log.records[i].nav;
        // Between navigator ticks the setpoint is held; on a tick it moves at
        // most v_max over one (possibly 40 ms) step.
        CHECK((b.position - a.position).norm() <= lim.v_max * (nav_dt + 0.01) + 1e-9);
        CHECK(b.velocity.norm() <= lim.v_max + 1e-9);
    }
    int plans = 0;
    for (const auto& e : log.commands) plans += e.accepted ? 1 : 0;
    CHECK(plans == 3);
    CHECK(log.records.back().plan_id == 3);
}

TEST_CASE("Simulation accepts live commands between ticks") {
    Scenario s;
    s.duration = 0.0;
    ActorScript a;
    a.id = "A";
    a.waypoints.push_back({0.0, Vec3(0, 0, 0), 0.0});
    s.actors.push_back(a);
    Simulation sim(s);
    CHECK(sim.session().state == SessionState::Grounded);
    CHECK(sim.submit("takeoff").accepted);
    bool ready = false;
    for (int i = 0; i < 1000 && !ready; ++i) ready = sim.step().state == SessionState::Ready;
    REQUIRE(ready);
    const CommandReport r = sim.submit("MS on A front");
    CHECK(r.accepted);
    CHECK(sim.step().state == SessionState::Executing);
    const auto events = sim.take_events();
    REQUIRE(events.size() >= 3);
    CHECK(events.front().to == SessionState::TakingOff);
    CHECK(events.back().to == SessionState::Executing);
    CHECK(sim.take_events().empty());
}
