#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ylr/trajopt.hpp"
#include "ylr/types.hpp"

namespace ylr {

enum class IntentPolicy { ForcePass, ForceStop, DilemmaZone };
enum class FrontVehicleProfile { None, Cruise, Brake };

struct ScenarioConfig {
    std::uint64_t seed{0};
    double approach_speed_min{8.0};    // m/s at yellow onset
    double approach_speed_max{13.0};
    double initial_distance_min{15.0};  // m to the stop bar at yellow onset
    double initial_distance_max{70.0};
    double yellow_duration{3.5};  // s
    double v_lim{13.0};           // m/s
    double lambda_star{0.5};      // ground-truth driver characteristic
    IntentPolicy policy{IntentPolicy::DilemmaZone};
    FrontVehicleProfile fv_profile{FrontVehicleProfile::Cruise};
    double tau{0.1};

    // Rejects degenerate ranges and range/policy combinations that cannot
    // physically realize the forced intent.
    void validate() const;
};

struct ScenarioRecord {
    std::string id;
    Trajectory target;
    EnvironmentState env;
    Intention intention{Intention::Pass};  // ground truth
    double lambda_star{0.5};
};

// One synthetic yellow-light episode, deterministic per seed. The target
// approaches under a bounded-acceleration car-following controller; at yellow
// onset the intent policy decides pass or stop; the rest of the episode is a
// single full-maneuver cost minimization under the lambda_star-reweighted
// maneuver weights, so the recorded style reflects lambda_star through
// exactly the mechanism the predictor adapts online.
ScenarioRecord generate_scenario(const ScenarioConfig& cfg);

// The optimizer settings the synthetic driver plans with (horizon and tau are
// set per record). Training on generated data with the same settings makes
// the demonstrations exactly reproducible by the learner's inner solver.
OptimizerConfig scenario_driver_optimizer();

// The built-in average-driver weights the generator plans with (identity
// scaling); lambda_star styles them through apply_lambda.
WeightVector scenario_driver_weights(Intention maneuver);

// Independent seeds derived from cfg.seed per record; parallel by record.
std::vector<ScenarioRecord> generate_batch(const ScenarioConfig& cfg, std::size_t count,
                                           const std::string& id_prefix = "r");

// Directory layout: manifest.json plus, per record, <id>.scenario.json,
// <id>.target.csv, and <id>.fv.csv.
void save_dataset(const std::filesystem::path& dir, const std::vector<ScenarioRecord>& records);

// Reads a dataset directory (manifest-driven when manifest.json is present,
// otherwise every *.scenario.json). Trajectories are resampled to tau; rows
// with implausible speeds (> 60 m/s) are rejected with their sample named.
// Records without a manifest label are labeled by the end-of-yellow distance
// rule.
std::vector<ScenarioRecord> load_dataset(const std::filesystem::path& dir, double tau = 0.1);

}  // namespace ylr
