// dronecine: headless runs, log metrics and the live service.
//
// Exit codes: 0 ok, 2 invalid input (scenario, log, arguments), 3 runtime
// failure.

#include "dronecine/director.hpp"
#include "dronecine/runlog.hpp"
#include "dronecine/scenario_io.hpp"
#include "dronecine/service.hpp"
#include "dronecine/simulator.hpp"

#include "CLI11.hpp"

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <pthread.h>

#ifndef DRONECINE_SCENARIO_DIR
#define DRONECINE_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;
using namespace dronecine;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitRuntime = 3;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A path, or the name of a bundled scenario.
fs::path find_scenario(const std::string& arg, const fs::path& dir) {
    if (fs::exists(arg)) return arg;
    const fs::path bundled = dir / (arg + ".json");
    if (fs::exists(bundled)) return bundled;
    throw InputError("scenario '" + arg + "' not found (no such file, and no " + bundled.string() + ")");
}

// Console text is checked before running: a script that cannot parse is an
// input error, while plan-time rejections are part of the run.
void check_commands(const Scenario& s) {
    for (std::size_t i = 0; i < s.commands.size(); ++i) {
        const auto& c = s.commands[i];
        std::ostringstream where;
        where << "commands[" << i << "] at t=" << c.time << " s";
        try {
            interpret(c.text);
        } catch (const CommandError& e) {
            throw ValidationError(where.str() + ", position " + std::to_string(e.offset()) + ": " + e.what());
        } catch (const psl::ParseError& e) {
            throw ValidationError(where.str() + ", position " + std::to_string(e.offset()) + ": " + e.detail());
        }
    }
}

void write_file(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InputError("cannot open '" + p.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run(const std::string& scenario_arg, std::optional<std::uint64_t> seed, const fs::path& out_dir,
        const fs::path& scenario_dir) {
    const fs::path path = find_scenario(scenario_arg, scenario_dir);
    Scenario s = load_scenario(path);
    if (seed) s.seed = *seed;
    check_commands(s);

    const RunLog log = run_scenario(s);
    for (const auto& c : log.commands) {
        if (c.accepted) continue;
        std::cerr << "warning: t=" << c.time << " s: '" << c.text << "' rejected: " << c.detail << "\n";
    }
    const std::string csv = format_csv(log);
    // The report is computed from the log text, exactly as `metrics` would.
    const std::string report = format_metrics(compute_metrics(parse_csv(csv)));
    const std::string stem = path.stem().string();
    const fs::path log_path = out_dir / (stem + ".csv");
    const fs::path report_path = out_dir / (stem + ".metrics.json");
    write_file(log_path, csv);
    write_file(report_path, report);
    std::cout << "log: " << log_path.string() << " (" << log.records.size() << " ticks)\n"
              << "metrics: " << report_path.string() << "\n";
    return 0;
}

int metrics(const fs::path& log_path, const std::optional<fs::path>& out) {
    const std::string report = format_metrics(compute_metrics(parse_csv(read_file(log_path))));
    if (out) {
        write_file(*out, report);
    } else {
        std::cout << report;
    }
    return 0;
}

int list(const fs::path& dir) {
    for (const auto& name : list_scenarios(dir)) std::cout << name << "\n";
    return 0;
}

int serve(const ServiceOptions& options, const std::optional<std::string>& scenario_arg,
          std::optional<std::uint64_t> seed) {
    Scenario s;
    if (scenario_arg) {
        s = load_scenario(find_scenario(*scenario_arg, options.scenario_dir));
    } else if (fs::exists(options.scenario_dir / "studio.json")) {
        s = load_scenario(options.scenario_dir / "studio.json");
    }
    if (seed) s.seed = *seed;
    check_commands(s);

    // Signals are taken synchronously on this thread; the service threads
    // inherit the blocked mask.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    LiveService service(std::move(s), {}, options);
    service.start();
    std::cout << "serving on http://" << options.address << ":" << service.port() << "/ (WebSocket /ws)" << std::endl;
    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
    std::cout << "stopped\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Drone cinematography: shot-language director, navigation and simulation"};
    app.require_subcommand(0, 1);
    app.fallthrough();

    std::string scenario_dir = DRONECINE_SCENARIO_DIR;
    app.add_option("--scenarios", scenario_dir, "Directory of bundled scenarios")->capture_default_str();
    bool serve_flag = false;
    app.add_flag("--serve", serve_flag, "Start the live service (same as the serve subcommand)");

    ServiceOptions service_options;
    std::optional<std::string> serve_scenario;
    std::optional<std::uint64_t> seed;
    std::string ui_dir;
    bool headless = false;
    app.add_option("--port", service_options.port, "Service port")->capture_default_str();
    app.add_flag("--headless", headless, "With --serve: API and WebSocket only, no UI pages");

    auto* run_cmd = app.add_subcommand("run", "Run a scenario headless; write the log and metrics");
    std::string run_scenario_arg;
    std::string out_dir = ".";
    run_cmd->add_option("scenario", run_scenario_arg, "Scenario file or bundled name")->required();
    run_cmd->add_option("--seed", seed, "Override the scenario seed");
    run_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
    run_cmd->add_flag("--headless", headless, "Accepted for symmetry; run never paces or serves");

    auto* metrics_cmd = app.add_subcommand("metrics", "Compute framing metrics from a run log");
    std::string log_path;
    std::optional<std::string> metrics_out;
    metrics_cmd->add_option("log", log_path, "Run log (CSV)")->required();
    metrics_cmd->add_option("--out", metrics_out, "Write the report here instead of stdout");

    auto* serve_cmd = app.add_subcommand("serve", "Run the live service");
    serve_cmd->add_option("--port", service_options.port, "Port (0 picks one)")->capture_default_str();
    serve_cmd->add_option("--address", service_options.address, "Bind address")->capture_default_str();
    serve_cmd->add_option("--scenario", serve_scenario, "Initial scenario (default: bundled studio)");
    serve_cmd->add_option("--seed", seed, "Override the scenario seed");
    serve_cmd->add_option("--ui", ui_dir, "Directory holding the UI bundle");
    serve_cmd->add_option("--speed", service_options.speed, "Simulated seconds per second")->capture_default_str();
    serve_cmd->add_flag("--headless", headless, "API and WebSocket only, no UI pages");

    auto* list_cmd = app.add_subcommand("list-scenarios", "List bundled scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInvalid;
    }

    try {
        if (*run_cmd) return run(run_scenario_arg, seed, out_dir, scenario_dir);
        if (*metrics_cmd) return metrics(log_path, metrics_out ? std::optional<fs::path>(*metrics_out) : std::nullopt);
        if (*list_cmd) return list(scenario_dir);
        if (*serve_cmd || serve_flag) {
            service_options.scenario_dir = scenario_dir;
            service_options.ui_dir = ui_dir;
            service_options.serve_ui = !headless;
            return serve(service_options, serve_scenario, seed);
        }
        std::cout << app.help();
        return kExitInvalid;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const LogFormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
