#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ylr/features.hpp"
#include "ylr/trajopt.hpp"
#include "ylr/types.hpp"

namespace ylr {

/// One observed trajectory together with the scene it was driven in.
struct Demonstration {
    Trajectory trajectory;
    EnvironmentState env;
};

struct TrainConfig {
    double learning_rate{0.8};
    double grad_tol{0.05};  // infinity norm of the feature-expectation gap
    int max_epochs{600};
    OptimizerConfig optimizer;

    void validate() const;
};

struct IrlTrainMeta {
    int epochs{0};
    double grad_inf_norm{0.0};
    bool converged{false};
};

/// Weights, scaling, and training record for one maneuver.
struct ManeuverModel {
    WeightVector theta;
    FeatureScaling scaling;
    IrlTrainMeta meta;
};

/// Separately trained pass and stop models.
struct IrlModel {
    ManeuverModel pass_model;
    ManeuverModel stop_model;

    const ManeuverModel& for_maneuver(Intention m) const {
        return m == Intention::Pass ? pass_model : stop_model;
    }
};

// Softmin distribution over costs, computed with a min-shift so widely spread
// costs neither overflow nor underflow to NaN.
std::vector<double> softmin_distribution(const std::vector<double>& costs);

// P(s_j) = exp(-cost_j) / sum_k exp(-cost_k) over an explicit candidate set.
std::vector<double> maxent_probability(const WeightVector& theta, const FeatureScaling& scaling,
                                       const std::vector<Trajectory>& candidates,
                                       const EnvironmentState& env);

// Dataset log-likelihood over enumerated candidate sets:
// (1/m) sum_j ln P(demo_j | theta, env_j). Every demo must appear in its set.
double log_likelihood(const WeightVector& theta, const FeatureScaling& scaling,
                      const std::vector<Trajectory>& demos,
                      const std::vector<std::vector<Trajectory>>& candidate_sets,
                      const std::vector<EnvironmentState>& envs);

// Exact likelihood gradient over enumerated candidate sets, in scaled feature
// coordinates: (1/m) sum_j E_P[f] - mean_j f(demo_j).
Vec5 exact_likelihood_gradient(const WeightVector& theta, const FeatureScaling& scaling,
                               const std::vector<Trajectory>& demos,
                               const std::vector<std::vector<Trajectory>>& candidate_sets,
                               const std::vector<EnvironmentState>& envs);

// Most-likely-trajectory surrogate of the gradient: the expectation is
// replaced by the features of the per-demo cost minimizer, each demo solved
// over its own horizon. Infeasible demos raise ValidationError naming the
// demo index.
Vec5 likelihood_gradient(const WeightVector& theta, const FeatureScaling& scaling,
                         const std::vector<Demonstration>& demos, const OptimizerConfig& cfg);

// Offline training: fit the feature scaling, start from unit weights, and
// ascend the likelihood in log-space (eta = ln theta, eta += lr * theta ⊙ grad)
// until the feature-expectation gap drops below grad_tol. Weights stay
// strictly positive by construction. A run that exhausts max_epochs returns
// the best iterate seen with converged = false.
ManeuverModel train_maxent_irl(const std::vector<Demonstration>& demos, Intention maneuver,
                               const TrainConfig& cfg);

std::string irl_to_json(const IrlModel& model);
IrlModel irl_from_json(const std::string& text);
void save_irl(const std::filesystem::path& path, const IrlModel& model);
IrlModel load_irl(const std::filesystem::path& path);

}  // namespace ylr
