// Ground-truth world and the full loop around it.
//
// One tick (100 Hz):
//   actors move along their scripts
//   tracker measures drone and actors with Gaussian noise
//   due console commands go through the director
//   filter update, navigator (30 Hz, zero-order hold between), controller
//   the tick is logged, then plant and filter prediction advance by dt
//
// Everything random comes from one seeded generator drawn in a fixed order,
// so a scenario and seed always give the same log.
#pragma once

#include "dronecine/controller.hpp"
#include "dronecine/director.hpp"
#include "dronecine/framing.hpp"
#include "dronecine/navigator.hpp"
#include "dronecine/world.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace dronecine {

struct Waypoint {
    double time = 0.0;
    Vec3 position = Vec3::Zero();
    double facing = 0.0;
};

struct ActorScript {
    std::string id;
    double height = 1.8;
    std::vector<Waypoint> waypoints;  // times strictly increasing
};

struct ScriptCommand {
    double time = 0.0;
    std::string text;
};

struct NoiseConfig {
    double measurement_sigma = 0.005;  // m, tracker position noise
    double process_sigma = 0.0;        // m/s^2, plant acceleration noise
    // rad, tracker course/facing noise; defaults to measurement_sigma read as radians
    std::optional<double> course_sigma;
    double course() const { return course_sigma.value_or(measurement_sigma); }
};

struct Scenario {
    int version = 1;
    std::uint64_t seed = 0;
    double duration = 10.0;
    Pose drone_start;
    std::vector<ActorScript> actors;
    std::vector<ScriptCommand> commands;
    NoiseConfig noise;
    // Multiplies the plant's drag and time constants (the controller keeps
    // the nominal model); 1 = no mismatch.
    double plant_scale = 1.0;
};

struct SimulationConfig {
    DroneModel model;
    ControlGains gains;
    ControlLimits control_limits;
    SteeringLimits steering;
    ProcessNoise filter_noise;
    DirectorConfig director;
    CameraIntrinsics intrinsics;
    double navigator_rate = 30.0;  // Hz
};

inline constexpr std::size_t kMaxSubjects = 2;

struct LogRecord {
    double time = 0.0;
    SessionState state = SessionState::Grounded;
    int plan_id = 0;
    DroneState truth;
    Measurement measured;
    DroneState estimate;
    NavigationData nav;
    std::optional<Pose> target;  // stage 2 target while executing
    FlightControl control;
    double camera_tilt = 0.0;
    // Active plan subjects: projected and requested screen positions.
    std::vector<Vec2> screen;
    std::vector<Vec2> screen_target;
    std::vector<bool> in_frame;
    std::vector<ActorState> actors;  // ground truth, scenario order
};

struct CommandReport {
    double time = 0.0;
    std::string text;
    bool accepted = false;
    std::string detail;
    std::optional<std::size_t> offset;  // parse error position
};

struct RunLog {
    std::vector<std::string> actor_ids;
    std::vector<LogRecord> records;
    std::vector<CommandReport> commands;
    std::vector<SessionEvent> events;
};

/// Piecewise-linear position, shortest-arc facing; holds the end
/// waypoints outside their time range.
ActorState actor_state_at(const ActorScript& script, double t);

/// One plant step: shared model dynamics plus acceleration noise, with the
/// ground as a floor.
DroneState step_plant(const DroneState& state, const FlightControl& control, const DroneModel& model, double dt,
                      const Vec3& noise_accel = Vec3::Zero());

DroneModel perturbed(const DroneModel& m, double scale);

/// The loop as an object, so the live service can feed it commands and
/// step it against the wall clock.
class Simulation {
public:
    explicit Simulation(Scenario scenario, SimulationConfig config = {});

    /// Runs the console path for `text` at the current time.
    CommandReport submit(const std::string& text);

    /// Advances one tick and returns its record.
    const LogRecord& step();

    double time() const { return tick_ * config_.model.dt; }
    std::int64_t tick() const { return tick_; }
    const Session& session() const { return session_; }
    const LogRecord& last() const { return last_; }
    const Scenario& scenario() const { return scenario_; }
    const SimulationConfig& config() const { return config_; }
    const StateEstimate& estimate() const { return estimate_; }
    const TrackerSnapshot& snapshot() const { return snapshot_; }

    /// Session transitions since the last call.
    std::vector<SessionEvent> take_events();
    /// Script paths requested with "load"; the caller decides what to do.
    std::vector<std::string> take_script_requests();

    /// Queues commands with times relative to now; they run through the
    /// same path as the scenario's own commands.
    void schedule(const std::vector<ScriptCommand>& commands);
    /// Outcomes of scheduled and scenario commands since the last call.
    std::vector<CommandReport> take_reports();

private:
    void measure(double t);
    void apply(const HandleResult& r);
    NavigationData navigate(double t);

    Scenario scenario_;
    SimulationConfig config_;
    DroneModel plant_model_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> unit_{0.0, 1.0};

    std::int64_t tick_ = 0;
    double next_nav_ = 0.0;
    DroneState truth_;
    StateEstimate estimate_;
    TrackerSnapshot snapshot_;
    std::vector<ActorState> actors_truth_;
    Session session_;
    NavigatorState navigator_;
    NavigationData nav_;
    std::size_t next_command_ = 0;
    LogRecord last_;
    std::vector<SessionEvent> events_;
    std::vector<std::string> script_requests_;
    std::vector<CommandReport> reports_;
    std::size_t reports_taken_ = 0;

    friend RunLog run_scenario(const Scenario&, const SimulationConfig&);
};

/// Runs the scenario from t = 0 to duration inclusive: duration * 100 + 1
/// records. Command failures are reported in the log; the run continues.
RunLog run_scenario(const Scenario& scenario, const SimulationConfig& config = {});

}  // namespace dronecine
