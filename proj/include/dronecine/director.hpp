// The director: console commands and the flight-session state machine.
//
//   Off --turnon--> Grounded --takeoff--> TakingOff --(at hover height)--> Ready
//   Ready/Executing --PSL--> Executing (a new sentence preempts the plan)
//   TakingOff/Ready/Executing --land--> Landing --(on the ground)--> Grounded
//   Grounded --turnoff--> Off
//
// A sentence sent while taking off is held and started on reaching Ready.
#pragma once

#include "dronecine/psl.hpp"
#include "dronecine/trajectory.hpp"
#include "dronecine/world.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dronecine {

namespace cmd {
struct Psl {
    psl::ShotSentence sentence;
};
struct TakeOff {};
struct Land {};
struct TurnOn {};
struct TurnOff {};
struct Record {
    bool on = true;
};
struct LoadScript {
    std::string path;
};
struct SwitchDrone {
    std::string id;
};
struct SwitchCamera {
    std::string id;
};
}  // namespace cmd

using Command = std::variant<cmd::Psl, cmd::TakeOff, cmd::Land, cmd::TurnOn, cmd::TurnOff, cmd::Record,
                             cmd::LoadScript, cmd::SwitchDrone, cmd::SwitchCamera>;

/// A console line that starts with a command keyword but is malformed.
class CommandError : public std::runtime_error {
public:
    CommandError(const std::string& message, std::size_t offset)
        : std::runtime_error(message), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Keyword commands first (case-insensitive), PSL otherwise. Throws
/// CommandError or psl::ParseError, both with a character offset.
Command interpret(std::string_view text);

std::string describe(const Command& c);

enum class SessionState { Off, Grounded, TakingOff, Ready, Executing, Landing };

std::string_view to_string(SessionState s);
bool is_airborne(SessionState s);

struct Session {
    SessionState state = SessionState::Grounded;
    std::optional<TransitionPlan> active_plan;
    std::optional<psl::ShotSentence> pending;  // sentence waiting for Ready
    bool recording = false;
    double battery = 100.0;  // percent
    int plan_id = 0;         // increments with every plan
    Pose hold;               // station-keeping target outside Executing
    double phase_start = 0.0;
    std::string active_command;
};

struct DirectorConfig {
    double hover_height = 1.0;       // m
    double takeoff_tolerance = 0.05;  // m
    double landing_speed = 0.3;      // m/s
    double ground_height = 0.02;     // m
    double battery_drain = 0.1;      // percent per airborne second
    double battery_reserve = 5.0;    // percent; forces a landing
    PlanOptions planning;
};

struct SessionEvent {
    double time = 0.0;
    SessionState from = SessionState::Off;
    SessionState to = SessionState::Off;
    std::string reason;
};

struct HandleResult {
    Session session;
    bool accepted = false;
    std::string detail;
    bool new_plan = false;
    std::vector<SessionEvent> events;
};

/// Applies one command. Rejected commands leave the session unchanged and
/// carry the reason in `detail`.
HandleResult handle(const Session& session, const Command& command, const TrackerSnapshot& snapshot, double now,
                    const DirectorConfig& config = {});

/// Time-driven transitions (take-off complete, touchdown, low battery) and
/// battery drain over `dt`. `altitude` is the drone's estimated height.
HandleResult advance(const Session& session, const TrackerSnapshot& snapshot, double altitude, double now, double dt,
                     const DirectorConfig& config = {});

/// Station-keeping target for TakingOff, Ready and Landing.
Pose hold_target(const Session& session, double now, const DirectorConfig& config = {});

}  // namespace dronecine
