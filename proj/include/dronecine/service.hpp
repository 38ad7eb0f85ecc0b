// Live mode: the simulation paced against the wall clock, served over HTTP
// and WebSocket (frame formats in wire.hpp).
//
//   GET /                  UI bundle index, or a plain status page
//   GET /<file>            file from the UI bundle directory
//   GET /scenarios         JSON list of scenario names
//   GET /scenarios/<name>  the scenario document
//   GET /ws                WebSocket upgrade: state frames at state_rate,
//                          event frames, command replies
//
// One worker thread owns the Simulation. Client commands go through a queue
// and are applied at the start of the next tick, in arrival order; every
// client may command (last writer wins). Network I/O runs on a second thread.
#pragma once

#include "dronecine/simulator.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace dronecine {

struct ServiceOptions {
    std::string address = "127.0.0.1";
    unsigned short port = 8080;  // 0 picks a free port
    std::filesystem::path scenario_dir;
    std::filesystem::path ui_dir;  // empty: built-in status page
    bool serve_ui = true;          // false: API and WebSocket only
    double state_rate = 20.0;      // Hz
    double speed = 1.0;            // simulated seconds per wall-clock second
};

class LiveService {
public:
    LiveService(Scenario scenario, SimulationConfig config, ServiceOptions options);
    ~LiveService();
    LiveService(const LiveService&) = delete;
    LiveService& operator=(const LiveService&) = delete;

    /// Binds the listener and starts both threads.
    void start();
    /// Stops the threads and closes every connection. Idempotent.
    void stop();
    /// Blocks until stop() is called from another thread.
    void wait();
    /// The bound port, valid after start().
    unsigned short port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace dronecine
