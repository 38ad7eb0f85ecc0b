#include "dronecine/runlog.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace dronecine {
namespace {

class Row {
public:
    void num(double v) {
        sep();
        char buf[32];
        const auto r = std::to_chars(buf, buf + sizeof buf, v);
        out_.append(buf, r.ptr);
    }
    void num(int v) { num(static_cast<double>(v)); }
    void text(std::string_view s) {
        sep();
        out_ += s;
    }
    void empty(int n) {
        for (int i = 0; i < n; ++i) sep();
    }
    std::string line() {
        first_ = true;
        return std::exchange(out_, {}) + "\n";
    }

private:
    void sep() {
        if (!first_) out_ += ',';
        first_ = false;
    }
    std::string out_;
    bool first_ = true;
};

double parse_number(std::string_view s, std::size_t line, std::string_view column) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
        throw LogFormatError("line " + std::to_string(line) + ", column " + std::string(column) + ": bad number '" +
                             std::string(s) + "'");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

std::string format_csv(const RunLog& log) {
    std::string out;
    Row r;
    for (const char* c :
         {"time", "state", "plan_id", "x", "y", "z", "vx", "vy", "vz", "course", "course_rate", "meas_x", "meas_y",
          "meas_z", "meas_course", "est_x", "est_y", "est_z", "est_vx", "est_vy", "est_vz", "est_course", "nav_x",
          "nav_y", "nav_z", "nav_vx", "nav_vy", "nav_vz", "nav_course", "nav_tilt", "target_x", "target_y", "target_z",
          "target_course", "pitch", "roll", "yaw_rate", "climb_rate", "camera_tilt"}) {
        r.text(c);
    }
    for (std::size_t k = 0; k < kMaxSubjects; ++k) {
        const std::string s = "s" + std::to_string(k) + "_";
        for (const char* c : {"x", "y", "tx", "ty", "outside"}) r.text(s + c);
    }
    for (const auto& id : log.actor_ids) {
        for (const char* c : {"_x", "_y", "_z", "_facing"}) r.text(id + c);
    }
    out += r.line();

    for (const auto& rec : log.records) {
        r.num(rec.time);
        r.text(to_string(rec.state));
        r.num(rec.plan_id);
        for (int i = 0; i < 3; ++i) r.num(rec.truth.pose.position[i]);
        for (int i = 0; i < 3; ++i) r.num(rec.truth.velocity[i]);
        r.num(rec.truth.pose.course);
        r.num(rec.truth.course_rate);
        for (int i = 0; i < 3; ++i) r.num(rec.measured.position[i]);
        r.num(rec.measured.course);
        for (int i = 0; i < 3; ++i) r.num(rec.estimate.pose.position[i]);
        for (int i = 0; i < 3; ++i) r.num(rec.estimate.velocity[i]);
        r.num(rec.estimate.pose.course);
        for (int i = 0; i < 3; ++i) r.num(rec.nav.position[i]);
        for (int i = 0; i < 3; ++i) r.num(rec.nav.velocity[i]);
        r.num(rec.nav.course);
        r.num(rec.nav.tilt);
        if (rec.target) {
            for (int i = 0; i < 3; ++i) r.num(rec.target->position[i]);
            r.num(rec.target->course);
        } else {
            r.empty(4);
        }
        r.num(rec.control.pitch);
        r.num(rec.control.roll);
        r.num(rec.control.yaw_rate);
        r.num(rec.control.climb_rate);
        r.num(rec.camera_tilt);
        for (std::size_t k = 0; k < kMaxSubjects; ++k) {
            if (k < rec.screen.size() && k < rec.screen_target.size()) {
                r.num(rec.screen[k].x());
                r.num(rec.screen[k].y());
                r.num(rec.screen_target[k].x());
                r.num(rec.screen_target[k].y());
                r.num(rec.in_frame[k] ? 0 : 1);
            } else {
                r.empty(5);
            }
        }
        for (const auto& a : rec.actors) {
            for (int i = 0; i < 3; ++i) r.num(a.position[i]);
            r.num(a.facing);
        }
        out += r.line();
    }
    return out;
}

std::vector<LogRow> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string header_line;
    if (!std::getline(in, header_line)) throw LogFormatError("empty log");
    const auto header = split(header_line);
    std::string line;
    std::map<std::string, std::size_t, std::less<>> col;
    for (std::size_t i = 0; i < header.size(); ++i) col.emplace(std::string(header[i]), i);
    auto index = [&](const std::string& name) {
        const auto it = col.find(name);
        if (it == col.end()) throw LogFormatError("missing column '" + name + "'");
        return it->second;
    };
    const std::size_t c_time = index("time"), c_state = index("state"), c_plan = index("plan_id");
    const std::size_t c_x = index("x"), c_course = index("course");
    const std::size_t c_tx = index("target_x"), c_tcourse = index("target_course");
    std::size_t c_sub[kMaxSubjects];
    for (std::size_t k = 0; k < kMaxSubjects; ++k) c_sub[k] = index("s" + std::to_string(k) + "_x");

    std::vector<LogRow> rows;
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != header.size()) {
            throw LogFormatError("line " + std::to_string(n) + ": " + std::to_string(f.size()) + " fields, expected " +
                                 std::to_string(header.size()));
        }
        auto num = [&](std::size_t c) { return parse_number(f[c], n, header[c]); };
        LogRow r;
        r.time = num(c_time);
        r.state = std::string(f[c_state]);
        r.plan_id = static_cast<int>(num(c_plan));
        r.position = Vec3(num(c_x), num(c_x + 1), num(c_x + 2));
        r.course = num(c_course);
        if (!f[c_tx].empty()) {
            Pose t;
            t.position = Vec3(num(c_tx), num(c_tx + 1), num(c_tx + 2));
            t.course = num(c_tcourse);
            r.target = t;
        }
        for (std::size_t k = 0; k < kMaxSubjects; ++k) {
            const std::size_t c = c_sub[k];
            if (f[c].empty()) continue;
            SubjectSample s;
            s.screen = Vec2(num(c), num(c + 1));
            s.requested = Vec2(num(c + 2), num(c + 3));
            s.outside = num(c + 4) != 0.0;
            r.subjects.push_back(s);
        }
        if (!rows.empty() && !(r.time > rows.back().time)) {
            throw LogFormatError("line " + std::to_string(n) + ": time not increasing");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

MetricsReport compute_metrics(const std::vector<LogRow>& rows) {
    MetricsReport m;
    m.ticks = static_cast<int>(rows.size());
    for (std::size_t i = 1; i < rows.size(); ++i) m.path_length += (rows[i].position - rows[i - 1].position).norm();
    if (!rows.empty() && rows.back().target) {
        m.final_position_error = (rows.back().position - rows.back().target->position).norm();
        m.final_course_error = std::abs(rad2deg(angle_diff(rows.back().target->course, rows.back().course)));
    }

    // Plans are contiguous runs of one plan_id; only ticks that carry
    // subjects count.
    std::size_t i = 0;
    while (i < rows.size()) {
        std::size_t j = i;
        while (j < rows.size() && rows[j].plan_id == rows[i].plan_id) ++j;
        std::vector<std::pair<double, double>> err;  // time, worst subject error
        PlanMetrics p;
        p.plan_id = rows[i].plan_id;
        double sum = 0.0;
        int count = 0;
        for (std::size_t k = i; k < j; ++k) {
            const auto& r = rows[k];
            if (r.subjects.empty()) continue;
            double worst = 0.0;
            bool outside = false;
            for (const auto& s : r.subjects) {
                const double e = (s.screen - s.requested).norm();
                sum += e;
                ++count;
                worst = std::max(worst, e);
                outside = outside || s.outside;
            }
            if (err.empty()) p.start = r.time;
            p.end = r.time;
            ++p.ticks;
            p.max_screen_error = std::max(p.max_screen_error, worst);
            if (outside) ++p.frustum_violations;
            err.emplace_back(r.time, worst);
        }
        if (p.plan_id != 0 && p.ticks > 0) {
            p.mean_screen_error = sum / count;
            // Earliest tick from which the error stays below the threshold for
            // the hold time, with the whole window inside the plan.
            std::size_t candidate = 0;
            for (std::size_t k = 0; k < err.size(); ++k) {
                if (err[k].second >= kSettleThreshold) {
                    candidate = k + 1;
                    continue;
                }
                if (err[k].first - err[candidate].first >= kSettleHold - 1e-9) {
                    p.settling_time = err[candidate].first - p.start;
                    break;
                }
            }
            m.plans.push_back(p);
        }
        i = j;
    }
    return m;
}

std::string format_metrics(const MetricsReport& report) {
    using nlohmann::ordered_json;
    auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
    ordered_json plans = ordered_json::array();
    for (const auto& p : report.plans) {
        plans.push_back({{"plan_id", p.plan_id},
                         {"start", p.start},
                         {"end", p.end},
                         {"ticks", p.ticks},
                         {"mean_screen_error", p.mean_screen_error},
                         {"max_screen_error", p.max_screen_error},
                         {"settling_time", opt(p.settling_time)},
                         {"frustum_violations", p.frustum_violations}});
    }
    ordered_json root;
    root["ticks"] = report.ticks;
    root["path_length_m"] = report.path_length;
    root["final_position_error_m"] = opt(report.final_position_error);
    root["final_course_error_deg"] = opt(report.final_course_error);
    root["plans"] = plans;
    return root.dump(2) + "\n";
}

}  // namespace dronecine
