#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ylr/types.hpp"

namespace ylr {

/// Observations feeding the intention network. The first three are causal
/// evidence (environment-driven), the last two diagnostic evidence (the
/// vehicle's response).
struct IntentionEvidence {
    double elapsed_yellow{0.0};  // s since yellow onset, >= 0
    double tti{0.0};             // s to the stop bar at current speed, >= 0
    double rel_speed{0.0};       // m/s, target minus front vehicle (positive = closing)
    double lon_speed{0.0};       // m/s
    double lon_accel{0.0};       // m/s^2
};

struct IntentionPosterior {
    double p_pass{0.5};
    double p_stop{0.5};

    Intention argmax() const { return p_pass > p_stop ? Intention::Pass : Intention::Stop; }
};

constexpr int kNumEvidenceVars = 5;
constexpr int kNumCausalVars = 3;  // evidence variables 0..2 condition the intention
constexpr int kNumDiagnosticVars = 2;

// Variable order is fixed; serialized models rely on it.
const std::array<std::string, kNumEvidenceVars>& evidence_var_names();

double evidence_value(const IntentionEvidence& e, int var);

/// Three-layer discrete network: causal evidence -> intention -> diagnostic
/// evidence. Continuous observations are discretized with per-variable
/// equal-frequency bin edges learned from the training marginals.
struct BnModel {
    int k_bins{5};
    double alpha{1.0};
    // Interior edges per variable; strictly increasing, at most k_bins - 1.
    std::array<std::vector<double>, kNumEvidenceVars> bin_edges;
    // P(intention | causal-evidence bins): one row per CE bin triple
    // (row-major over the triple), columns [pass, stop].
    Eigen::MatrixXd cpt_intention;
    // P(diagnostic bin | intention): per diagnostic variable a 2 x K table,
    // row 0 = pass, row 1 = stop.
    std::array<Eigen::MatrixXd, kNumDiagnosticVars> cpt_de;

    int bins(int var) const { return static_cast<int>(bin_edges[static_cast<std::size_t>(var)].size()) + 1; }
    bool fitted() const { return cpt_intention.size() > 0; }
};

// Bin index per variable; values outside the training range fall into the
// edge bins. Non-finite evidence raises ValidationError.
std::array<int, kNumEvidenceVars> discretize(const IntentionEvidence& e, const BnModel& model);

struct LabeledEvidence {
    IntentionEvidence evidence;
    Intention label{Intention::Pass};
};

// Equal-frequency bin edges from the pooled marginals, then conditional
// tables from Laplace-smoothed counts: P = (count + alpha) / (total + alpha * cells).
BnModel fit_bn(const std::vector<LabeledEvidence>& dataset, int k_bins = 5, double alpha = 1.0);

// Posterior over the intention given all evidence:
//   P(INT | CE, DE) ∝ P(INT | CE bins) * prod_j P(DE_j bin | INT).
IntentionPosterior infer_intention(const BnModel& model, const IntentionEvidence& e);

// A trajectory is labeled Stop when the vehicle is still more than d_label
// meters short of the stop bar at the end of the yellow phase. The trajectory
// must cover that instant.
Intention label_trajectory(const Trajectory& traj, const EnvironmentState& env, double d_label = 3.0);

// Baseline: pass iff the maximum travel distance within the remaining yellow
// time (accelerating at env.a_max_naive, speed capped at v_lim) reaches the
// stop bar. `now` must lie within the yellow phase.
Intention naive_intention(const TrajectoryPoint& state, const EnvironmentState& env, double now);

// Evidence assembled from one observed state. TTI uses a 0.1 m/s speed floor
// and is clamped to [0, 30] s.
IntentionEvidence make_evidence(const TrajectoryPoint& p, const EnvironmentState& env);

// Evidence for every sample inside the yellow phase.
std::vector<IntentionEvidence> yellow_phase_evidence(const Trajectory& traj, const EnvironmentState& env);

std::string bn_to_json(const BnModel& model);
BnModel bn_from_json(const std::string& text);
void save_bn(const std::filesystem::path& path, const BnModel& model);
BnModel load_bn(const std::filesystem::path& path);

}  // namespace ylr
