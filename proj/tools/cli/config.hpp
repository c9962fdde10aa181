#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "anytime/simulation.hpp"
#include "anytime/stability.hpp"

namespace anytime::cli {

using Json = nlohmann::json;

/// Command-line values that take precedence over the config file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    std::optional<int> horizon;
    std::optional<int> threads;
};

/// Reads and parses a JSON document. Throws ConfigError (key "config") when
/// the file is missing or malformed.
Json load_json(const std::filesystem::path& path);

/// Writes the overrides into the top-level keys seed/runs/horizon/threads.
void apply_overrides(Json& doc, const Overrides& overrides);

/// Parses a simulation document. Every error is a ConfigError naming the
/// dotted key, e.g. `availability.tau`.
SimConfig parse_sim_config(const Json& doc);

Availability parse_availability(const Json& node);
PlantModel parse_plant(const Json& node);

/// `rho` and `alpha` may be given directly or taken from a `plant` section.
CertificateInputs parse_certificate_inputs(const Json& doc);

/// Runs listed under `output.trace_runs` (0-based); empty when absent.
std::vector<int> parse_trace_runs(const Json& doc);

struct ExperimentSpec {
    std::string name;            // fig1 | fig2 | fig3 | custom
    std::string variable;        // tau | a | buffer_cap
    std::vector<double> grid;    // nonempty, strictly increasing
    Json base;                   // simulation document applied at every grid point
};

/// Built-in protocol for fig1/fig2/fig3, or an empty document for custom.
Json experiment_template(const std::string& name);

/// Merges the document over the template named by `experiment`
/// (default custom) and validates the grid.
ExperimentSpec parse_experiment(const Json& doc);

/// The simulation document for one grid point and controller.
Json instantiate(const ExperimentSpec& spec, double value, ControllerKind kind);

}  // namespace anytime::cli
