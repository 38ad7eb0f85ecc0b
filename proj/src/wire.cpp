#include "dronecine/wire.hpp"

#include "json.hpp"

#include <algorithm>

namespace dronecine {
namespace {

using nlohmann::ordered_json;

ordered_json vec(const Vec3& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }

}  // namespace

std::string state_frame(const LogRecord& rec, const Session& session, const CameraIntrinsics& intrinsics) {
    ordered_json j;
    j["type"] = "state";
    j["time"] = rec.time;
    j["session_state"] = std::string(to_string(rec.state));
    j["battery"] = session.battery;
    j["recording"] = session.recording;
    j["active_command"] = session.active_command;
    j["plan_id"] = rec.plan_id;
    j["drone"] = {{"position", vec(rec.truth.pose.position)},
                  {"course", rec.truth.pose.course},
                  {"velocity", vec(rec.truth.velocity)},
                  {"tilt", rec.camera_tilt}};
    j["nav"] = {{"position", vec(rec.nav.position)}, {"course", rec.nav.course}};
    j["nav_error_m"] = (rec.truth.pose.position - rec.nav.position).norm();

    ordered_json actors = ordered_json::array();
    ordered_json screens = ordered_json::array();
    const Pose camera{rec.truth.pose.position, rec.truth.pose.course, rec.camera_tilt};
    const std::vector<std::string> subjects =
        session.active_plan ? session.active_plan->subject_ids : std::vector<std::string>{};
    for (const auto& a : rec.actors) {
        actors.push_back({{"id", a.id}, {"position", vec(a.position)}, {"facing", a.facing}, {"height", a.height}});
        const Projection p = project(camera, aim_point(a), intrinsics);
        ordered_json s = {{"id", a.id},
                          {"x", p.screen.x()},
                          {"y", p.screen.y()},
                          {"in_frame", p.in_frustum()},
                          {"subject", false}};
        const auto it = std::find(subjects.begin(), subjects.end(), a.id);
        const auto k = static_cast<std::size_t>(it - subjects.begin());
        if (it != subjects.end() && k < rec.screen_target.size()) {
            s["subject"] = true;
            s["requested"] = {rec.screen_target[k].x(), rec.screen_target[k].y()};
        }
        screens.push_back(std::move(s));
    }
    j["actors"] = std::move(actors);
    j["screen_positions"] = std::move(screens);
    return j.dump();
}

std::string event_frame(const SessionEvent& e) {
    ordered_json j;
    j["type"] = "event";
    j["time"] = e.time;
    j["from"] = std::string(to_string(e.from));
    j["to"] = std::string(to_string(e.to));
    j["reason"] = e.reason;
    return j.dump();
}

std::string reply_frame(const CommandReport& r) {
    ordered_json j;
    j["type"] = r.accepted ? "ack" : "error";
    j["time"] = r.time;
    j["text"] = r.text;
    j["detail"] = r.detail;
    if (r.offset) j["position"] = *r.offset;
    return j.dump();
}

std::string protocol_error_frame(const std::string& detail) {
    ordered_json j;
    j["type"] = "error";
    j["detail"] = detail;
    return j.dump();
}

std::string parse_command_frame(std::string_view text) {
    const auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw WireError("frame is not valid JSON");
    if (!j.is_object()) throw WireError("frame must be an object");
    const auto type = j.find("type");
    if (type == j.end() || !type->is_string()) throw WireError("frame has no type");
    if (*type != "command") throw WireError("unknown frame type '" + type->get<std::string>() + "'");
    const auto t = j.find("text");
    if (t == j.end() || !t->is_string()) throw WireError("command frame has no text");
    return t->get<std::string>();
}

}  // namespace dronecine
