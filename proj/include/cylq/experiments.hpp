#pragma once

#include <string>
#include <vector>

#include "cylq/io.hpp"
#include "cylq/symbols.hpp"

namespace cylq {

struct ExperimentOutcome {
    std::string experiment;
    bool pass = false;
    double worst_value = 0.0;
    CsvTable table{{"empty"}};
    io::json summary;       // {experiment, pass, worst_value, ...}
    std::string worst_row;  // printable diagnostics for the worst grid point
    double seconds = 0.0;   // wall time, not serialized
};

struct ExperimentInfo {
    std::string name;
    std::string description;
};

// One registered experiment per acceptance check, names stable.
const std::vector<ExperimentInfo>& experiment_registry();

// Config: {"experiment": name, "seed"?: int, "out_csv"?: path, "out_json"?:
// path, "params"?: {...}}; unknown keys or params are SchemaErrors.
ExperimentOutcome run_experiment(const io::json& config);

// Loads the config, runs the experiment, writes CSV and summary JSON
// atomically; returns 0 on pass, 1 on numeric failure, 2 on config errors.
int run_config(const std::string& config_path);

// Deterministic random inputs shared by experiments and tests.
Generator random_generator(Rng& rng, int n, int d);
Observable random_observable(Rng& rng, int n, int num_gens, int max_d, int max_shift = 2);

}  // namespace cylq
