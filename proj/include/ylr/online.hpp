#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ylr/intention_bn.hpp"
#include "ylr/irl.hpp"
#include "ylr/trajopt.hpp"
#include "ylr/types.hpp"

namespace ylr {

/// Scalar driving-style knob in [0, 1] (efficiency vs smoothness) adapted
/// online over a fixed grid.
struct DriverCharacteristic {
    double lambda{0.5};
    std::vector<double> grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

    // Grid strictly increasing within [0, 1]; lambda must sit on the grid.
    void validate() const;
};

/// One replan cycle of the rolling predictor. Trajectories carry the anchor
/// state first, then the predicted horizon.
struct PredictionCycle {
    double t{0.0};
    IntentionPosterior posterior;
    Intention maneuver{Intention::Stop};
    double lambda{0.5};
    Trajectory predicted;
    Trajectory baseline;
    std::optional<double> ed_realized;
    bool fallback{false};
};

struct PredictionLog {
    std::string record_id;
    std::vector<PredictionCycle> cycles;
};

struct PredictConfig {
    double replan_interval{0.5};  // s
    int horizon{30};              // steps
    double tau{0.1};              // s
    DriverCharacteristic driver;  // initial lambda and grid
    OptimizerConfig optimizer;    // horizon and tau are overridden per cycle

    void validate() const;
};

// Zero acceleration, heading frozen at the current value.
Trajectory constant_velocity_baseline(const TrajectoryPoint& state, int horizon, double tau);

using LambdaCandidates = std::vector<std::pair<double, Trajectory>>;

// Pick the grid lambda whose candidate prediction from the previous cycle
// tracks the newly observed window best (Euclidean distance over the shared
// samples). Ties prefer the lambda closest to the current value, then the
// smaller one. The observed window must start at the candidates' first point.
DriverCharacteristic update_lambda(const DriverCharacteristic& dc, const LambdaCandidates& candidates,
                                   const Trajectory& observed);

// The rolling-horizon loop: every replan interval infer the intention, pick
// the maneuver weights, solve the trajectory optimization for every grid
// lambda (the current lambda's solution is the published prediction), and
// re-fit lambda against the window observed since the previous cycle. Runs
// from yellow onset until the vehicle clears the stop bar, settles at the
// queue end, or the stream runs out. A failed cycle republishes the previous
// prediction shifted in time; the log never has holes.
PredictionLog rolling_predict(const Trajectory& observed_stream, const EnvironmentState& env,
                              const BnModel& bn, const IrlModel& irl, const PredictConfig& cfg);

// JSON-lines, one cycle per line:
// {t, p_pass, p_stop, maneuver, lambda, pred: [[x,y,v],...], baseline: [...], ed_realized}
// pred and baseline carry the horizon points only (the anchor is the observed
// state and is not repeated).
std::string prediction_log_to_jsonl(const PredictionLog& log);
PredictionLog prediction_log_from_jsonl(const std::string& text, double tau = 0.1);
void save_prediction_log(const std::filesystem::path& path, const PredictionLog& log);
PredictionLog load_prediction_log(const std::filesystem::path& path, double tau = 0.1);

}  // namespace ylr
