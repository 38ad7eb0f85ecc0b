#include "dronecine/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace dronecine {
namespace {

constexpr double kTimeEpsilon = 1e-9;
// Below this the tracker is treated as exact; the filter still needs a
// positive-definite noise matrix.
constexpr double kMinSigma = 1e-4;

StateMatrix initial_covariance(const NoiseConfig& n) {
    StateVector d;
    const double p = std::max(n.measurement_sigma, kMinSigma);
    const double c = std::max(n.course(), kMinSigma);
    d << p * p, p * p, p * p, 0.01, 0.01, 0.01, c * c, 0.01;
    return d.asDiagonal();
}

}  // namespace

ActorState actor_state_at(const ActorScript& script, double t) {
    if (script.waypoints.empty()) throw std::invalid_argument("actor '" + script.id + "' has no waypoints");
    ActorState a;
    a.id = script.id;
    a.height = script.height;
    const auto& w = script.waypoints;
    if (t <= w.front().time) {
        a.position = w.front().position;
        a.facing = wrap_angle(w.front().facing);
        return a;
    }
    if (t >= w.back().time) {
        a.position = w.back().position;
        a.facing = wrap_angle(w.back().facing);
        return a;
    }
    const auto next = std::upper_bound(w.begin(), w.end(), t, [](double x, const Waypoint& p) { return x < p.time; });
    const Waypoint& b = *next;
    const Waypoint& f = *(next - 1);
    const double u = (t - f.time) / (b.time - f.time);
    a.position = (1.0 - u) * f.position + u * b.position;
    a.facing = wrap_angle(f.facing + u * angle_diff(b.facing, f.facing));
    return a;
}

DroneState step_plant(const DroneState& state, const FlightControl& control, const DroneModel& model, double dt,
                      const Vec3& noise_accel) {
    StateVector s = propagate(model, to_state(state), control, dt);
    s.segment<3>(kPx) += 0.5 * noise_accel * dt * dt;
    s.segment<3>(kVx) += noise_accel * dt;
    if (s[kPz] < 0.0) {
        s[kPz] = 0.0;
        s[kVz] = std::max(s[kVz], 0.0);
    }
    DroneState out = to_drone_state(s);
    out.pose.tilt = state.pose.tilt;
    return out;
}

DroneModel perturbed(const DroneModel& m, double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("plant scale must be positive");
    DroneModel p = m;
    p.drag *= scale;
    p.tau_z *= scale;
    p.tau_psi *= scale;
    return p;
}

Simulation::Simulation(Scenario scenario, SimulationConfig config)
    : scenario_(std::move(scenario)),
      config_(std::move(config)),
      plant_model_(perturbed(config_.model, scenario_.plant_scale)),
      rng_(scenario_.seed) {
    std::stable_sort(scenario_.commands.begin(), scenario_.commands.end(),
                     [](const ScriptCommand& a, const ScriptCommand& b) { return a.time < b.time; });

    truth_.pose = scenario_.drone_start;
    truth_.velocity = Vec3::Zero();
    estimate_.mean = to_state(truth_);
    estimate_.covariance = initial_covariance(scenario_.noise);

    session_.hold = scenario_.drone_start;
    session_.state = scenario_.drone_start.position.z() > 0.05 ? SessionState::Ready : SessionState::Grounded;

    nav_.position = truth_.pose.position;
    nav_.course = truth_.pose.course;
    nav_.tilt = scenario_.drone_start.tilt;

    // Noise-free view of t = 0, so commands can be submitted before the first tick.
    for (const auto& a : scenario_.actors) actors_truth_.push_back(actor_state_at(a, 0.0));
    snapshot_.timestamp = 0.0;
    snapshot_.drone = truth_;
    snapshot_.actors = actors_truth_;
}

void Simulation::measure(double t) {
    const double ps = scenario_.noise.measurement_sigma;
    const double cs = scenario_.noise.course();
    snapshot_.timestamp = t;

    Vec3 n(unit_(rng_), unit_(rng_), unit_(rng_));
    const double nc = unit_(rng_);
    snapshot_.drone.pose.position = truth_.pose.position + ps * n;
    snapshot_.drone.pose.course = wrap_angle(truth_.pose.course + cs * nc);

    snapshot_.actors.resize(actors_truth_.size());
    for (std::size_t i = 0; i < actors_truth_.size(); ++i) {
        Vec3 na(unit_(rng_), unit_(rng_), unit_(rng_));
        const double nf = unit_(rng_);
        ActorState a = actors_truth_[i];
        a.position += ps * na;
        a.facing = wrap_angle(a.facing + cs * nf);
        snapshot_.actors[i] = a;
    }
}

void Simulation::apply(const HandleResult& r) {
    session_ = r.session;
    events_.insert(events_.end(), r.events.begin(), r.events.end());
    if (r.new_plan) reset_target(navigator_);
}

CommandReport Simulation::submit(const std::string& text) {
    CommandReport rep;
    rep.time = time();
    rep.text = text;
    Command command;
    try {
        command = interpret(text);
    } catch (const CommandError& e) {
        rep.detail = e.what();
        rep.offset = e.offset();
        return rep;
    } catch (const psl::ParseError& e) {
        rep.detail = e.detail();
        rep.offset = e.offset();
        return rep;
    }
    const HandleResult r = handle(session_, command, snapshot_, time(), config_.director);
    rep.accepted = r.accepted;
    rep.detail = r.detail;
    if (r.accepted) {
        apply(r);
        if (const auto* load = std::get_if<cmd::LoadScript>(&command)) script_requests_.push_back(load->path);
    }
    return rep;
}

NavigationData Simulation::navigate(double t) {
    const double period = 1.0 / config_.navigator_rate;
    const double dt = navigator_.initialised ? std::max(t - navigator_.last_time, kTimeEpsilon) : period;
    switch (session_.state) {
        case SessionState::Off:
        case SessionState::Grounded: {
            navigator_ = NavigatorState{};
            NavigationData nav;
            nav.position = estimate_.position();
            nav.course = estimate_.course();
            nav.tilt = nav_.tilt;
            return nav;
        }
        case SessionState::Executing:
            if (session_.active_plan) {
                return navigation_step(navigator_, snapshot_, *session_.active_plan, t, dt, config_.steering,
                                       config_.intrinsics);
            }
            [[fallthrough]];
        default: {
            const Pose target = hold_target(session_, t, config_.director);
            return steer_step(navigator_, snapshot_, target, {}, {}, config_.steering, config_.intrinsics, dt);
        }
    }
}

const LogRecord& Simulation::step() {
    const double t = time();
    const double dt = config_.model.dt;

    for (std::size_t i = 0; i < scenario_.actors.size(); ++i) actors_truth_[i] = actor_state_at(scenario_.actors[i], t);
    measure(t);

    const Measurement z{snapshot_.drone.pose.position, snapshot_.drone.pose.course};
    estimate_ = kalman_update(estimate_, z,
                              measurement_noise(std::max(scenario_.noise.measurement_sigma, kMinSigma),
                                                std::max(scenario_.noise.course(), kMinSigma)));
    // Director and navigator see the filtered drone; actors pass through raw.
    snapshot_.drone = to_drone_state(estimate_.mean);
    snapshot_.drone.pose.tilt = nav_.tilt;

    while (next_command_ < scenario_.commands.size() && scenario_.commands[next_command_].time <= t + kTimeEpsilon) {
        reports_.push_back(submit(scenario_.commands[next_command_].text));
        ++next_command_;
    }
    apply(advance(session_, snapshot_, estimate_.mean[kPz], t, dt, config_.director));

    if (t + kTimeEpsilon >= next_nav_) {
        nav_ = navigate(t);
        next_nav_ += 1.0 / config_.navigator_rate;
    }

    FlightControl u;
    if (session_.state == SessionState::Off || session_.state == SessionState::Grounded) {
        // Motors idle: whatever height is left settles onto the ground.
        u.climb_rate = -config_.director.landing_speed;
    } else {
        u = compute_control(estimate_, nav_, config_.model, config_.gains, config_.control_limits);
    }

    LogRecord& rec = last_;
    rec.time = t;
    rec.state = session_.state;
    rec.plan_id = session_.plan_id;
    rec.truth = truth_;
    rec.measured = z;
    rec.estimate = to_drone_state(estimate_.mean);
    rec.nav = nav_;
    rec.target.reset();
    rec.control = u;
    rec.camera_tilt = nav_.tilt;
    rec.screen.clear();
    rec.screen_target.clear();
    rec.in_frame.clear();
    if (session_.state == SessionState::Executing && session_.active_plan) {
        const auto& plan = *session_.active_plan;
        rec.target = navigator_.target;
        const Pose camera{truth_.pose.position, truth_.pose.course, nav_.tilt};
        rec.screen_target = interpolate_properties(plan, t).screen;
        for (const auto& id : plan.subject_ids) {
            const auto it = std::find_if(actors_truth_.begin(), actors_truth_.end(),
                                         [&](const ActorState& a) { return a.id == id; });
            if (it == actors_truth_.end()) continue;
            const Projection p = project(camera, aim_point(*it), config_.intrinsics);
            rec.screen.push_back(p.screen);
            rec.in_frame.push_back(p.in_frustum());
        }
    }
    rec.actors = actors_truth_;

    Vec3 w(unit_(rng_), unit_(rng_), unit_(rng_));
    truth_ = step_plant(truth_, u, plant_model_, dt, scenario_.noise.process_sigma * w);
    estimate_ = predict(config_.model, estimate_, u, config_.filter_noise);
    ++tick_;
    return last_;
}

std::vector<SessionEvent> Simulation::take_events() { return std::exchange(events_, {}); }

std::vector<std::string> Simulation::take_script_requests() { return std::exchange(script_requests_, {}); }

void Simulation::schedule(const std::vector<ScriptCommand>& commands) {
    const double now = time();
    std::vector<ScriptCommand> pending(scenario_.commands.begin() + static_cast<std::ptrdiff_t>(next_command_),
                                       scenario_.commands.end());
    for (const auto& c : commands) pending.push_back({now + std::max(c.time, 0.0), c.text});
    std::stable_sort(pending.begin(), pending.end(),
                     [](const ScriptCommand& a, const ScriptCommand& b) { return a.time < b.time; });
    scenario_.commands.resize(next_command_);
    scenario_.commands.insert(scenario_.commands.end(), pending.begin(), pending.end());
}

std::vector<CommandReport> Simulation::take_reports() {
    std::vector<CommandReport> out(reports_.begin() + static_cast<std::ptrdiff_t>(reports_taken_), reports_.end());
    reports_taken_ = reports_.size();
    return out;
}

RunLog run_scenario(const Scenario& scenario, const SimulationConfig& config) {
    if (!(scenario.duration >= 0.0)) throw std::invalid_argument("duration must be non-negative");
    Simulation sim(scenario, config);
    RunLog log;
    for (const auto& a : scenario.actors) log.actor_ids.push_back(a.id);
    const auto ticks = static_cast<std::int64_t>(std::llround(scenario.duration / config.model.dt));
    log.records.reserve(static_cast<std::size_t>(ticks + 1));
    for (std::int64_t k = 0; k <= ticks; ++k) log.records.push_back(sim.step());
    log.commands = std::move(sim.reports_);
    log.events = std::move(sim.events_);
    return log;
}

}  // namespace dronecine
