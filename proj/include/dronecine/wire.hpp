// JSON documents exchanged with console clients over the WebSocket.
//
// Server to client:
//   {"type": "state", "time", "session_state", "battery", "recording",
//    "active_command", "plan_id",
//    "drone": {"position": [x, y, z], "course", "velocity": [..], "tilt"},
//    "nav": {"position": [..], "course"}, "nav_error_m",
//    "actors": [{"id", "position", "facing", "height"}],
//    "screen_positions": [{"id", "x", "y", "in_frame", "subject",
//                          "requested": [x, y] (subjects only)}]}
//   {"type": "event", "time", "from", "to", "reason"}
//   {"type": "ack" | "error", "time", "text", "detail", "position"?}
//
// Client to server:
//   {"type": "command", "text": "<console text>"}
//
// Angles in radians. screen_positions covers every actor as seen from the
// drone camera; behind-camera actors have in_frame false.
#pragma once

#include "dronecine/simulator.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace dronecine {

class WireError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string state_frame(const LogRecord& record, const Session& session, const CameraIntrinsics& intrinsics);
std::string event_frame(const SessionEvent& event);
std::string reply_frame(const CommandReport& report);
/// Error reply for frames that never reached the interpreter.
std::string protocol_error_frame(const std::string& detail);

/// Returns the console text of a command frame.
std::string parse_command_frame(std::string_view text);

}  // namespace dronecine
