#include "dronecine/director.hpp"

#include <algorithm>
#include <cctype>

namespace dronecine {
namespace {

struct Word {
    std::string text;
    std::size_t offset;
};

std::vector<Word> split(std::string_view text) {
    std::vector<Word> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        const std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) out.push_back({std::string(text.substr(start, i - start)), start});
    }
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Joins "take off", "turn on", "switch drone" etc. into one keyword.
std::optional<std::pair<std::string, std::size_t>> keyword(const std::vector<Word>& w) {
    if (w.empty()) return std::nullopt;
    const std::string first = lower(w[0].text);
    static const std::vector<std::string> single{"takeoff", "take-off", "land", "turnon", "turn-on", "turnoff",
                                                 "turn-off", "record", "load", "switchdrone", "switchcamera"};
    if (std::find(single.begin(), single.end(), first) != single.end()) {
        std::string k = first;
        k.erase(std::remove(k.begin(), k.end(), '-'), k.end());
        return std::pair{k, std::size_t{1}};
    }
    if (w.size() >= 2) {
        const std::string second = lower(w[1].text);
        if ((first == "take" && second == "off") || (first == "turn" && (second == "on" || second == "off")) ||
            (first == "switch" && (second == "drone" || second == "camera"))) {
            return std::pair{first + second, std::size_t{2}};
        }
    }
    return std::nullopt;
}

std::string state_error(SessionState s, std::string_view what) {
    return std::string(what) + " not allowed while " + std::string(to_string(s));
}

HandleResult reject(const Session& s, std::string reason) {
    HandleResult r;
    r.session = s;
    r.accepted = false;
    r.detail = std::move(reason);
    return r;
}

void transition(HandleResult& r, SessionState to, double now, std::string reason) {
    if (r.session.state == to) return;
    r.events.push_back({now, r.session.state, to, std::move(reason)});
    r.session.state = to;
}

Pose current_pose(const TrackerSnapshot& snap) {
    Pose p = snap.drone.pose;
    p.tilt = 0.0;
    return p;
}

HandleResult start_plan(const Session& session, const psl::ShotSentence& sentence, const TrackerSnapshot& snapshot,
                        double now, const DirectorConfig& config) {
    HandleResult r;
    r.session = session;
    try {
        r.session.active_plan = plan_transition(snapshot, sentence, now, config.planning);
    } catch (const std::exception& e) {
        return reject(session, e.what());
    }
    r.session.pending.reset();
    r.session.plan_id += 1;
    r.session.active_command = psl::format(sentence);
    r.accepted = true;
    r.new_plan = true;
    r.detail = "plan " + std::to_string(r.session.plan_id) + ": " + r.session.active_command;
    transition(r, SessionState::Executing, now, r.session.active_command);
    return r;
}

}  // namespace

Command interpret(std::string_view text) {
    const auto words = split(text);
    const auto kw = keyword(words);
    if (!kw) return cmd::Psl{psl::parse(text)};

    const auto& [name, used] = *kw;
    const std::size_t rest = words.size() - used;
    auto no_args = [&]() {
        if (rest != 0) throw CommandError("unexpected argument '" + words[used].text + "'", words[used].offset);
    };
    auto one_arg = [&](const char* what) -> const Word& {
        if (rest == 0) throw CommandError(std::string("missing ") + what, text.size());
        if (rest > 1) throw CommandError("unexpected argument '" + words[used + 1].text + "'", words[used + 1].offset);
        return words[used];
    };

    if (name == "takeoff") {
        no_args();
        return cmd::TakeOff{};
    }
    if (name == "land") {
        no_args();
        return cmd::Land{};
    }
    if (name == "turnon") {
        no_args();
        return cmd::TurnOn{};
    }
    if (name == "turnoff") {
        no_args();
        return cmd::TurnOff{};
    }
    if (name == "record") {
        if (rest == 0) return cmd::Record{true};
        const Word& arg = one_arg("on/off");
        const std::string v = lower(arg.text);
        if (v == "on") return cmd::Record{true};
        if (v == "off") return cmd::Record{false};
        throw CommandError("record expects 'on' or 'off', got '" + arg.text + "'", arg.offset);
    }
    if (name == "load") {
        // The path is the rest of the line, spaces included.
        if (rest == 0) throw CommandError("missing script path", text.size());
        std::string path(text.substr(words[used].offset));
        while (!path.empty() && std::isspace(static_cast<unsigned char>(path.back()))) path.pop_back();
        return cmd::LoadScript{path};
    }
    if (name == "switchdrone") return cmd::SwitchDrone{one_arg("drone id").text};
    if (name == "switchcamera") return cmd::SwitchCamera{one_arg("camera id").text};
    throw CommandError("unknown command '" + words[0].text + "'", words[0].offset);
}

std::string describe(const Command& c) {
    struct V {
        std::string operator()(const cmd::Psl& p) const { return psl::format(p.sentence); }
        std::string operator()(const cmd::TakeOff&) const { return "takeoff"; }
        std::string operator()(const cmd::Land&) const { return "land"; }
        std::string operator()(const cmd::TurnOn&) const { return "turnon"; }
        std::string operator()(const cmd::TurnOff&) const { return "turnoff"; }
        std::string operator()(const cmd::Record& r) const { return r.on ? "record on" : "record off"; }
        std::string operator()(const cmd::LoadScript& l) const { return "load " + l.path; }
        std::string operator()(const cmd::SwitchDrone& s) const { return "switch drone " + s.id; }
        std::string operator()(const cmd::SwitchCamera& s) const { return "switch camera " + s.id; }
    };
    return std::visit(V{}, c);
}

std::string_view to_string(SessionState s) {
    switch (s) {
        case SessionState::Off: return "Off";
        case SessionState::Grounded: return "Grounded";
        case SessionState::TakingOff: return "TakingOff";
        case SessionState::Ready: return "Ready";
        case SessionState::Executing: return "Executing";
        case SessionState::Landing: return "Landing";
    }
    return "?";
}

bool is_airborne(SessionState s) {
    return s == SessionState::TakingOff || s == SessionState::Ready || s == SessionState::Executing ||
           s == SessionState::Landing;
}

HandleResult handle(const Session& session, const Command& command, const TrackerSnapshot& snapshot, double now,
                    const DirectorConfig& config) {
    const SessionState st = session.state;
    HandleResult r;
    r.session = session;
    r.accepted = true;

    if (const auto* p = std::get_if<cmd::Psl>(&command)) {
        if (st == SessionState::TakingOff) {
            // Check the actors now so that a typo is reported immediately.
            for (const auto& s : p->sentence.subjects) {
                if (!snapshot.find_actor(s.actor_id)) return reject(session, "unknown actor '" + s.actor_id + "'");
            }
            r.session.pending = p->sentence;
            r.detail = "queued until airborne: " + psl::format(p->sentence);
            return r;
        }
        if (st != SessionState::Ready && st != SessionState::Executing) return reject(session, "not airborne");
        return start_plan(session, p->sentence, snapshot, now, config);
    }
    if (std::holds_alternative<cmd::TakeOff>(command)) {
        if (st == SessionState::Off) return reject(session, "drone is off");
        if (st != SessionState::Grounded) return reject(session, "already airborne");
        r.session.hold = current_pose(snapshot);
        r.session.hold.position.z() = config.hover_height;
        r.session.phase_start = now;
        r.detail = "taking off";
        transition(r, SessionState::TakingOff, now, "takeoff");
        return r;
    }
    if (std::holds_alternative<cmd::Land>(command)) {
        if (st == SessionState::Off) return reject(session, "drone is off");
        if (st == SessionState::Grounded) return reject(session, "not airborne");
        if (st == SessionState::Landing) return reject(session, "already landing");
        r.session.active_plan.reset();
        r.session.pending.reset();
        r.session.active_command.clear();
        r.session.hold = current_pose(snapshot);
        r.session.phase_start = now;
        r.detail = "landing";
        transition(r, SessionState::Landing, now, "land");
        return r;
    }
    if (std::holds_alternative<cmd::TurnOn>(command)) {
        if (st != SessionState::Off) return reject(session, "already on");
        r.detail = "powered on";
        transition(r, SessionState::Grounded, now, "turnon");
        return r;
    }
    if (std::holds_alternative<cmd::TurnOff>(command)) {
        if (st == SessionState::Off) return reject(session, "already off");
        if (st != SessionState::Grounded) return reject(session, state_error(st, "turnoff") + "; land first");
        r.session.recording = false;
        r.detail = "powered off";
        transition(r, SessionState::Off, now, "turnoff");
        return r;
    }
    if (const auto* rec = std::get_if<cmd::Record>(&command)) {
        if (st == SessionState::Off) return reject(session, "drone is off");
        r.session.recording = rec->on;
        r.detail = rec->on ? "recording" : "recording stopped";
        return r;
    }
    if (const auto* load = std::get_if<cmd::LoadScript>(&command)) {
        r.detail = "script " + load->path;
        return r;
    }
    if (const auto* sw = std::get_if<cmd::SwitchDrone>(&command)) {
        r.detail = "single-drone build: switch drone '" + sw->id + "' ignored";
        return r;
    }
    if (const auto* sw = std::get_if<cmd::SwitchCamera>(&command)) {
        r.detail = "single-drone build: switch camera '" + sw->id + "' ignored";
        return r;
    }
    return reject(session, "unsupported command");
}

HandleResult advance(const Session& session, const TrackerSnapshot& snapshot, double altitude, double now, double dt,
                     const DirectorConfig& config) {
    HandleResult r;
    r.session = session;
    r.accepted = true;
    Session& s = r.session;

    if (is_airborne(s.state)) s.battery = std::max(0.0, s.battery - config.battery_drain * dt);

    if (s.state == SessionState::TakingOff && std::abs(altitude - config.hover_height) <= config.takeoff_tolerance) {
        s.hold.position = snapshot.drone.pose.position;
        s.hold.position.z() = config.hover_height;
        s.hold.course = snapshot.drone.pose.course;
        transition(r, SessionState::Ready, now, "hover height reached");
        if (s.pending) {
            const psl::ShotSentence queued = *s.pending;
            HandleResult started = start_plan(s, queued, snapshot, now, config);
            if (started.accepted) {
                r.events.insert(r.events.end(), started.events.begin(), started.events.end());
                r.session = started.session;
                r.new_plan = true;
                r.detail = started.detail;
            } else {
                s.pending.reset();
                r.detail = "queued sentence dropped: " + started.detail;
            }
        }
    }
    if (r.session.state == SessionState::Landing && altitude <= config.ground_height) {
        transition(r, SessionState::Grounded, now, "touchdown");
    }
    if (r.session.battery <= config.battery_reserve &&
        (r.session.state == SessionState::Ready || r.session.state == SessionState::Executing ||
         r.session.state == SessionState::TakingOff)) {
        r.session.active_plan.reset();
        r.session.pending.reset();
        r.session.hold = current_pose(snapshot);
        r.session.phase_start = now;
        transition(r, SessionState::Landing, now, "battery low");
    }
    return r;
}

Pose hold_target(const Session& session, double now, const DirectorConfig& config) {
    Pose p = session.hold;
    if (session.state == SessionState::Landing) {
        p.position.z() = std::max(0.0, session.hold.position.z() - config.landing_speed * (now - session.phase_start));
    }
    return p;
}

}  // namespace dronecine
