// Scenario files: JSON, field names as in the Scenario type.
//
//   {
//     "version": 1, "seed": 7, "duration": 20,
//     "drone_start": {"position": [0, -3, 1], "course": 0, "tilt": 0},
//     "actors": [{"id": "A", "height": 1.8,
//                 "waypoints": [{"time": 0, "position": [0, 0, 0], "facing": 0}]}],
//     "commands": [{"time": 1, "text": "MS on A front"}],
//     "noise": {"measurement_sigma": 0.005, "process_sigma": 0.0}
//   }
//
// An actor without waypoints may give "position" and "facing" and stays put.
// Angles are radians. Optional: "plant_scale", "noise.course_sigma".
#pragma once

#include "dronecine/simulator.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace dronecine {

/// Schema or invariant violation; the message starts with the field path.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kScenarioVersion = 1;

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);
std::string format_scenario(const Scenario& scenario);

/// Names (file stems) of the *.json scenarios in `dir`, sorted.
std::vector<std::string> list_scenarios(const std::filesystem::path& dir);

/// Checks the invariants of an in-memory scenario (the parsers call this).
void validate(const Scenario& scenario);

}  // namespace dronecine
