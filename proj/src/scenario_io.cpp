#include "dronecine/scenario_io.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dronecine {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ValidationError(path + ": " + what); }

const json& field(const json& obj, const std::string& key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing");
    return *it;
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& path) {
    const auto it = obj.find(key);
    return it == obj.end() ? fallback : number(*it, path + "." + key);
}

Vec3 vec3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) fail(path, "expected [x, y, z]");
    return {number(j[0], path + "[0]"), number(j[1], path + "[1]"), number(j[2], path + "[2]")};
}

std::string string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

const json& object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    return j;
}

const json& array(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected a list");
    return j;
}

std::string actor_path(std::size_t i, const std::string& id) {
    std::string p = "actors[" + std::to_string(i) + "]";
    if (!id.empty()) p += " '" + id + "'";
    return p;
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

void validate(const Scenario& s) {
    if (s.version != kScenarioVersion) fail("version", "unsupported version " + std::to_string(s.version));
    if (!(s.duration >= 0.0)) fail("duration", "must be non-negative");
    if (!(s.noise.measurement_sigma >= 0.0)) fail("noise.measurement_sigma", "must be non-negative");
    if (!(s.noise.process_sigma >= 0.0)) fail("noise.process_sigma", "must be non-negative");
    if (s.noise.course_sigma && !(*s.noise.course_sigma >= 0.0)) fail("noise.course_sigma", "must be non-negative");
    if (!(s.plant_scale > 0.0)) fail("plant_scale", "must be positive");
    if (s.drone_start.position.z() < 0.0) fail("drone_start.position", "must not be below the ground");
    if (std::abs(s.drone_start.tilt) > kMaxTilt + 1e-12) fail("drone_start.tilt", "outside the gimbal range");

    for (std::size_t i = 0; i < s.actors.size(); ++i) {
        const auto& a = s.actors[i];
        const std::string p = actor_path(i, a.id);
        if (a.id.empty()) fail(p + ".id", "must not be empty");
        if (psl::is_reserved_word(a.id)) fail(p + ".id", "'" + a.id + "' is a PSL keyword");
        for (std::size_t j = 0; j < i; ++j) {
            if (s.actors[j].id == a.id) fail(p + ".id", "duplicate of actors[" + std::to_string(j) + "]");
        }
        if (!(a.height > 0.0)) fail(p + ".height", "must be positive");
        if (a.waypoints.empty()) fail(p + ".waypoints", "needs at least one waypoint");
        for (std::size_t k = 0; k < a.waypoints.size(); ++k) {
            const std::string wp = p + ".waypoints[" + std::to_string(k) + "]";
            if (a.waypoints[k].time < 0.0) fail(wp + ".time", "must be non-negative");
            if (k > 0 && !(a.waypoints[k].time > a.waypoints[k - 1].time)) {
                fail(wp + ".time", "waypoint times must be strictly increasing");
            }
        }
    }
    for (std::size_t i = 0; i < s.commands.size(); ++i) {
        const auto& c = s.commands[i];
        const std::string p = "commands[" + std::to_string(i) + "]";
        if (c.time < 0.0 || c.time > s.duration) fail(p + ".time", "outside [0, duration]");
        if (c.text.find_first_not_of(" \t") == std::string::npos) fail(p + ".text", "empty command");
    }
}

Scenario parse_scenario(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("scenario: invalid JSON: ") + e.what());
    }
    object(root, "scenario");

    Scenario s;
    const json& version = field(root, "version", "scenario");
    if (!version.is_number_integer()) fail("version", "expected an integer");
    s.version = version.get<int>();
    if (s.version != kScenarioVersion) fail("version", "unsupported version " + std::to_string(s.version));

    const json& seed = field(root, "seed", "scenario");
    if (!seed.is_number_unsigned()) fail("seed", "expected a non-negative integer");
    s.seed = seed.get<std::uint64_t>();
    s.duration = number(field(root, "duration", "scenario"), "duration");

    const json& start = object(field(root, "drone_start", "scenario"), "drone_start");
    s.drone_start.position = vec3(field(start, "position", "drone_start"), "drone_start.position");
    s.drone_start.course = wrap_angle(number_or(start, "course", 0.0, "drone_start"));
    s.drone_start.tilt = number_or(start, "tilt", 0.0, "drone_start");

    if (root.contains("actors")) {
        const json& actors = array(root["actors"], "actors");
        for (std::size_t i = 0; i < actors.size(); ++i) {
            const json& a = object(actors[i], actor_path(i, ""));
            ActorScript script;
            script.id = string(field(a, "id", actor_path(i, "")), actor_path(i, "") + ".id");
            const std::string p = actor_path(i, script.id);
            script.height = number_or(a, "height", 1.8, p);
            if (a.contains("waypoints")) {
                const json& wps = array(a["waypoints"], p + ".waypoints");
                for (std::size_t k = 0; k < wps.size(); ++k) {
                    const std::string wp = p + ".waypoints[" + std::to_string(k) + "]";
                    const json& w = object(wps[k], wp);
                    Waypoint point;
                    point.time = number(field(w, "time", wp), wp + ".time");
                    point.position = vec3(field(w, "position", wp), wp + ".position");
                    point.facing = number_or(w, "facing", 0.0, wp);
                    script.waypoints.push_back(point);
                }
            }
            if (script.waypoints.empty() && a.contains("position")) {
                Waypoint point;
                point.position = vec3(a["position"], p + ".position");
                point.facing = number_or(a, "facing", 0.0, p);
                script.waypoints.push_back(point);
            }
            s.actors.push_back(std::move(script));
        }
    }

    if (root.contains("commands")) {
        const json& cmds = array(root["commands"], "commands");
        for (std::size_t i = 0; i < cmds.size(); ++i) {
            const std::string p = "commands[" + std::to_string(i) + "]";
            const json& c = object(cmds[i], p);
            s.commands.push_back({number(field(c, "time", p), p + ".time"), string(field(c, "text", p), p + ".text")});
        }
    }

    if (root.contains("noise")) {
        const json& n = object(root["noise"], "noise");
        s.noise.measurement_sigma = number_or(n, "measurement_sigma", s.noise.measurement_sigma, "noise");
        s.noise.process_sigma = number_or(n, "process_sigma", s.noise.process_sigma, "noise");
        if (n.contains("course_sigma")) s.noise.course_sigma = number(n["course_sigma"], "noise.course_sigma");
    }
    s.plant_scale = number_or(root, "plant_scale", 1.0, "scenario");

    validate(s);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::vector<std::string> list_scenarios(const std::filesystem::path& dir) {
    std::vector<std::string> out;
    std::error_code ec;
    for (const auto& e : std::filesystem::directory_iterator(dir, ec)) {
        if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path().stem().string());
    }
    if (ec) throw std::runtime_error("cannot list scenarios in '" + dir.string() + "': " + ec.message());
    std::sort(out.begin(), out.end());
    return out;
}

std::string format_scenario(const Scenario& s) {
    json root;
    root["version"] = s.version;
    root["seed"] = s.seed;
    root["duration"] = s.duration;
    root["drone_start"] = {{"position", to_json(s.drone_start.position)},
                           {"course", s.drone_start.course},
                           {"tilt", s.drone_start.tilt}};
    json actors = json::array();
    for (const auto& a : s.actors) {
        json wps = json::array();
        for (const auto& w : a.waypoints) {
            wps.push_back({{"time", w.time}, {"position", to_json(w.position)}, {"facing", w.facing}});
        }
        actors.push_back({{"id", a.id}, {"height", a.height}, {"waypoints", wps}});
    }
    root["actors"] = actors;
    json cmds = json::array();
    for (const auto& c : s.commands) cmds.push_back({{"time", c.time}, {"text", c.text}});
    root["commands"] = cmds;
    root["noise"] = {{"measurement_sigma", s.noise.measurement_sigma}, {"process_sigma", s.noise.process_sigma}};
    if (s.noise.course_sigma) root["noise"]["course_sigma"] = *s.noise.course_sigma;
    if (s.plant_scale != 1.0) root["plant_scale"] = s.plant_scale;
    return root.dump(2) + "\n";
}

}  // namespace dronecine
