#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "ylr/intention_bn.hpp"
#include "ylr/online.hpp"
#include "ylr/scenario.hpp"

namespace ylr {

/// Pointwise intention metrics over every yellow-phase sample, with the
/// elapsed yellow time split into ten equal bins.
struct IntentionEvaluation {
    double bn_accuracy{0.0};
    double naive_accuracy{0.0};
    std::array<double, 10> bn_accuracy_by_decile{};
    std::array<double, 10> naive_accuracy_by_decile{};
    std::array<std::size_t, 10> points_by_decile{};
    // Confusion counts with pass as the positive class.
    std::size_t true_pass{0}, true_stop{0}, false_pass{0}, false_stop{0};
    std::size_t total_points{0};
};

/// Rolling-prediction error metrics, predictions truncated to the realized
/// ground-truth overlap.
struct TrajectoryEvaluation {
    double mean_ed{0.0};
    double baseline_mean_ed{0.0};
    double pass_mean_ed{0.0};
    double stop_mean_ed{0.0};
    std::size_t pass_cycles{0};
    std::size_t stop_cycles{0};
    double win_rate{0.0};  // fraction of cycles with model ED strictly below baseline
    std::size_t cycles_evaluated{0};
    std::size_t cycles_skipped{0};
};

// Labeled evidence from every yellow-phase sample of every record; the
// training set for the intention network.
std::vector<LabeledEvidence> collect_labeled_evidence(const std::vector<ScenarioRecord>& records);

// Pointwise argmax-vs-label accuracy for the network and the naive travel
// baseline over the same samples.
IntentionEvaluation evaluate_intention(const BnModel& bn, const std::vector<ScenarioRecord>& records);

// Per-cycle Euclidean distance of predictions and baselines against the
// recorded trajectories, matched by record id. Cycles without any realized
// overlap are counted as skipped, not failed.
TrajectoryEvaluation evaluate_trajectory(const std::vector<PredictionLog>& logs,
                                         const std::vector<ScenarioRecord>& truth);

std::string intention_report_json(const IntentionEvaluation& e);
std::string trajectory_report_json(const TrajectoryEvaluation& e);

// Tidy per-observation tables for external plotting.
std::string intention_decile_csv(const IntentionEvaluation& e);
std::string cycle_ed_csv(const std::vector<PredictionLog>& logs,
                         const std::vector<ScenarioRecord>& truth);

}  // namespace ylr
