#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fleetobs/dynamics.hpp"
#include "fleetobs/gain.hpp"
#include "fleetobs/topology.hpp"

namespace fleetobs {

// One JSON document describes a full experiment; field names carry units.
// See scenarios/ for the bundled presets.

enum class TruthModel { free_flow, car_following };

struct HdvSpec {
    int id = 0;
    TruthModel model = TruthModel::free_flow;
    std::optional<int> front_hdv_id;  // required for car_following
    double initial_position_m = 0.0;
    double initial_speed_mps = 0.0;
    DesiredSpeedProfile desired_speed;  // free_flow only
};

struct NetworkSpec {
    enum class Kind { explicit_adjacency, erdos_renyi } kind =
        Kind::explicit_adjacency;
    Matrix adjacency;           // explicit form (self-loops implied)
    double edge_prob = 0.0;     // erdos_renyi
    bool require_strongly_connected = true;
    int max_attempts = 1000;
};

struct StatefulFdiSpec {
    std::size_t window_steps = 15;
    double target_far = 0.05;
    std::optional<double> decay_weight;  // weighted variant when present
};

struct FdiSpec {
    std::optional<double> stateless_detection_level_m;
    std::vector<StatefulFdiSpec> stateful;
    double measurement_gain_c = 1.0;

    bool enabled() const {
        return stateless_detection_level_m.has_value() || !stateful.empty();
    }
};

struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    int horizon_steps = 0;
    double sampling_dt_s = 0.0;
    ModelKind model_kind = ModelKind::ncv;
    std::vector<double> model_noise_var;       // per model coordinate
    std::vector<double> truth_process_noise_var;  // per model coordinate
    HdvModelParams hdv_params;
    std::vector<HdvSpec> hdvs;
    std::vector<SensorSpec> sensors;  // one per CAV, index == cav_id
    NetworkSpec network;
    ConsensusRule consensus_rule = ConsensusRule::uniform;
    double gain_epsilon = 0.5;
    GainSearchGrid gain_grid;
    FdiSpec fdi;
    double steady_window_fraction = 0.4;

    std::size_t hdv_count() const { return hdvs.size(); }
    std::size_t cav_count() const { return sensors.size(); }
};

struct ValidationError {
    std::string path;     // JSON-pointer-ish location
    std::string message;
};

// Parse and validate. On failure returns the full list of problems (parse
// errors come back as a single entry at path "/").
struct ScenarioLoadResult {
    std::optional<Scenario> scenario;
    std::vector<ValidationError> errors;
    bool ok() const { return scenario.has_value() && errors.empty(); }
};

ScenarioLoadResult load_scenario(const std::string& json_text);
ScenarioLoadResult load_scenario_file(const std::string& path);

// Re-validate an in-memory scenario (load_scenario calls this).
std::vector<ValidationError> validate_scenario(const Scenario& s);

}  // namespace fleetobs
