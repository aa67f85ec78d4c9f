#include "ylr/irl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "ylr/errors.hpp"
#include "ylr/file_util.hpp"
#include "ylr/parallel.hpp"

namespace ylr {

namespace {

bool same_trajectory(const Trajectory& a, const Trajectory& b, double tol = 1e-9) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i].t - b[i].t) > tol || std::abs(a[i].x - b[i].x) > tol ||
            std::abs(a[i].y - b[i].y) > tol || std::abs(a[i].v - b[i].v) > tol)
            return false;
    }
    return true;
}

std::size_t demo_index_in(const std::vector<Trajectory>& candidates, const Trajectory& demo,
                          std::size_t j) {
    for (std::size_t k = 0; k < candidates.size(); ++k)
        if (same_trajectory(candidates[k], demo)) return k;
    throw ValidationError("demo " + std::to_string(j) + " is not a member of its candidate set");
}

std::vector<double> candidate_costs(const WeightVector& theta, const FeatureScaling& scaling,
                                    const std::vector<Trajectory>& candidates,
                                    const EnvironmentState& env) {
    if (candidates.empty()) throw ValidationError("candidate set is empty");
    const std::size_t horizon = candidates.front().size();
    std::vector<double> costs;
    costs.reserve(candidates.size());
    for (const auto& candidate : candidates) {
        if (candidate.size() != horizon)
            throw ValidationError("candidate trajectories differ in length");
        costs.push_back(objective(candidate, theta, env, scaling));
    }
    return costs;
}

// Per-demo most-likely trajectories under theta; the shared entry point for
// the surrogate gradient and the training loop. An optional per-demo cache
// warm-starts each solve from the previous epoch's solution and is refreshed
// in place.
std::vector<Vec5> optimized_scaled_features(const WeightVector& theta, const FeatureScaling& scaling,
                                            const std::vector<Demonstration>& demos,
                                            const OptimizerConfig& cfg,
                                            std::vector<ControlSequence>* warm_cache = nullptr) {
    std::vector<Vec5> features(demos.size());
    std::vector<std::string> failures(demos.size());
    parallel_for_index(demos.size(), [&](std::size_t j) {
        const auto& demo = demos[j];
        if (demo.trajectory.size() < 2) {
            failures[j] = "demo " + std::to_string(j) + " has fewer than two samples";
            return;
        }
        OptimizerConfig local = cfg;
        local.horizon = static_cast<int>(demo.trajectory.size()) - 1;
        local.tau = demo.trajectory.dt;
        const ControlSequence* warm =
            warm_cache && (*warm_cache)[j].size() == local.horizon ? &(*warm_cache)[j] : nullptr;
        try {
            const auto result =
                optimize_trajectory(theta, demo.env, demo.trajectory[0], local, scaling, warm);
            features[j] = apply_scaling(scaling,
                                        compute_features(result.trajectory, demo.env, theta.maneuver).values);
            if (warm_cache) (*warm_cache)[j] = result.controls;
        } catch (const InfeasibleError& e) {
            failures[j] = "demo " + std::to_string(j) + " is infeasible: " + e.what();
        }
    });
    for (const auto& message : failures)
        if (!message.empty()) throw ValidationError(message);
    return features;
}

Vec5 scaled_empirical_mean(const WeightVector& theta, const FeatureScaling& scaling,
                           const std::vector<Demonstration>& demos) {
    Vec5 mean = Vec5::Zero();
    for (const auto& demo : demos)
        mean += apply_scaling(scaling, compute_features(demo.trajectory, demo.env, theta.maneuver).values);
    return mean / static_cast<double>(demos.size());
}

nlohmann::ordered_json maneuver_to_json(const ManeuverModel& model) {
    nlohmann::ordered_json j;
    j["theta"] = std::vector<double>(model.theta.theta.data(), model.theta.theta.data() + kNumFeatures);
    j["scaling"] = std::vector<double>(model.scaling.scale.data(), model.scaling.scale.data() + kNumFeatures);
    j["feature_order"] = feature_names(model.theta.maneuver);
    j["train_meta"] = {{"epochs", model.meta.epochs},
                       {"grad_inf_norm", model.meta.grad_inf_norm},
                       {"converged", model.meta.converged}};
    return j;
}

ManeuverModel maneuver_from_json(const nlohmann::json& j, Intention maneuver) {
    ManeuverModel model;
    model.theta.maneuver = maneuver;
    const auto theta = j.at("theta").get<std::vector<double>>();
    const auto scale = j.at("scaling").get<std::vector<double>>();
    if (theta.size() != kNumFeatures || scale.size() != kNumFeatures)
        throw IngestionError("weight or scaling vector has the wrong length");
    for (int k = 0; k < kNumFeatures; ++k) {
        model.theta.theta[k] = theta[static_cast<std::size_t>(k)];
        model.scaling.scale[k] = scale[static_cast<std::size_t>(k)];
    }
    const auto order = j.at("feature_order").get<std::vector<std::string>>();
    const auto& expected = feature_names(maneuver);
    if (!std::equal(expected.begin(), expected.end(), order.begin(), order.end()))
        throw IngestionError("feature order in model file does not match this build");
    const auto& meta = j.at("train_meta");
    model.meta.epochs = meta.at("epochs").get<int>();
    model.meta.grad_inf_norm = meta.at("grad_inf_norm").get<double>();
    model.meta.converged = meta.at("converged").get<bool>();
    model.theta.validate();
    model.scaling.validate();
    return model;
}

}  // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
    if (!(grad_tol > 0.0)) throw ValidationError("gradient tolerance must be positive");
    if (max_epochs < 1) throw ValidationError("max_epochs must be positive");
    optimizer.validate();
}

std::vector<double> softmin_distribution(const std::vector<double>& costs) {
    if (costs.empty()) throw ValidationError("softmin over an empty cost set");
    const double shift = *std::min_element(costs.begin(), costs.end());
    if (!std::isfinite(shift)) throw ValidationError("softmin needs at least one finite cost");
    std::vector<double> probs(costs.size());
    double total = 0.0;
    for (std::size_t k = 0; k < costs.size(); ++k) {
        probs[k] = std::exp(-(costs[k] - shift));
        total += probs[k];
    }
    for (auto& p : probs) p /= total;
    return probs;
}

std::vector<double> maxent_probability(const WeightVector& theta, const FeatureScaling& scaling,
                                       const std::vector<Trajectory>& candidates,
                                       const EnvironmentState& env) {
    return softmin_distribution(candidate_costs(theta, scaling, candidates, env));
}

double log_likelihood(const WeightVector& theta, const FeatureScaling& scaling,
                      const std::vector<Trajectory>& demos,
                      const std::vector<std::vector<Trajectory>>& candidate_sets,
                      const std::vector<EnvironmentState>& envs) {
    if (demos.empty() || demos.size() != candidate_sets.size() || demos.size() != envs.size())
        throw ValidationError("log_likelihood needs matching demos, candidate sets, and environments");
    double total = 0.0;
    for (std::size_t j = 0; j < demos.size(); ++j) {
        const auto index = demo_index_in(candidate_sets[j], demos[j], j);
        const auto probs = maxent_probability(theta, scaling, candidate_sets[j], envs[j]);
        total += std::log(probs[index]);
    }
    return total / static_cast<double>(demos.size());
}

Vec5 exact_likelihood_gradient(const WeightVector& theta, const FeatureScaling& scaling,
                               const std::vector<Trajectory>& demos,
                               const std::vector<std::vector<Trajectory>>& candidate_sets,
                               const std::vector<EnvironmentState>& envs) {
    if (demos.empty() || demos.size() != candidate_sets.size() || demos.size() != envs.size())
        throw ValidationError("gradient needs matching demos, candidate sets, and environments");
    Vec5 expectation = Vec5::Zero();
    Vec5 empirical = Vec5::Zero();
    for (std::size_t j = 0; j < demos.size(); ++j) {
        demo_index_in(candidate_sets[j], demos[j], j);
        const auto probs = maxent_probability(theta, scaling, candidate_sets[j], envs[j]);
        for (std::size_t k = 0; k < probs.size(); ++k) {
            const auto f = apply_scaling(
                scaling, compute_features(candidate_sets[j][k], envs[j], theta.maneuver).values);
            expectation += probs[k] * f;
        }
        empirical += apply_scaling(scaling,
                                   compute_features(demos[j], envs[j], theta.maneuver).values);
    }
    const auto m = static_cast<double>(demos.size());
    return expectation / m - empirical / m;
}

Vec5 likelihood_gradient(const WeightVector& theta, const FeatureScaling& scaling,
                         const std::vector<Demonstration>& demos, const OptimizerConfig& cfg) {
    if (demos.empty()) throw ValidationError("likelihood gradient needs demonstrations");
    const auto optimized = optimized_scaled_features(theta, scaling, demos, cfg);
    Vec5 expectation = Vec5::Zero();
    for (const auto& f : optimized) expectation += f;
    expectation /= static_cast<double>(demos.size());
    return expectation - scaled_empirical_mean(theta, scaling, demos);
}

ManeuverModel train_maxent_irl(const std::vector<Demonstration>& demos, Intention maneuver,
                               const TrainConfig& cfg) {
    cfg.validate();
    if (demos.size() < 2) throw ValidationError("training needs at least two demonstrations");
    for (const auto& demo : demos)
        if (demo.trajectory.size() < 2)
            throw ValidationError("every demonstration needs at least two samples");

    std::vector<FeatureVector> raw;
    raw.reserve(demos.size());
    for (const auto& demo : demos)
        raw.push_back(compute_features(demo.trajectory, demo.env, maneuver));

    ManeuverModel model;
    model.theta.maneuver = maneuver;
    model.scaling = fit_scaling(raw);

    Vec5 empirical = Vec5::Zero();
    for (const auto& f : raw) empirical += apply_scaling(model.scaling, f.values);
    empirical /= static_cast<double>(demos.size());

    Vec5 eta = Vec5::Zero();
    WeightVector theta;
    theta.maneuver = maneuver;
    theta.theta = Vec5::Ones();

    WeightVector best_theta = theta;
    double best_gap = std::numeric_limits<double>::infinity();
    std::vector<ControlSequence> warm_cache(demos.size());
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const auto optimized =
            optimized_scaled_features(theta, model.scaling, demos, cfg.optimizer, &warm_cache);
        Vec5 expectation = Vec5::Zero();
        for (const auto& f : optimized) expectation += f;
        expectation /= static_cast<double>(demos.size());
        const Vec5 grad = expectation - empirical;
        const double gap = grad.cwiseAbs().maxCoeff();

        if (gap < best_gap) {
            best_gap = gap;
            best_theta = theta;
        }
        if (gap <= cfg.grad_tol) {
            model.theta = theta;
            model.meta = {epoch, gap, true};
            return model;
        }
        eta += cfg.learning_rate * theta.theta.cwiseProduct(grad);
        theta.theta = eta.array().exp().matrix();
    }
    model.theta = best_theta;
    model.meta = {cfg.max_epochs, best_gap, false};
    return model;
}

std::string irl_to_json(const IrlModel& model) {
    nlohmann::ordered_json j;
    j["pass"] = maneuver_to_json(model.pass_model);
    j["stop"] = maneuver_to_json(model.stop_model);
    return j.dump(2) + "\n";
}

IrlModel irl_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IngestionError(std::string("bad IRL model JSON: ") + e.what());
    }
    try {
        IrlModel model;
        model.pass_model = maneuver_from_json(j.at("pass"), Intention::Pass);
        model.stop_model = maneuver_from_json(j.at("stop"), Intention::Stop);
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw IngestionError(std::string("bad IRL model JSON: ") + e.what());
    }
}

void save_irl(const std::filesystem::path& path, const IrlModel& model) {
    write_text_atomic(path, irl_to_json(model));
}

IrlModel load_irl(const std::filesystem::path& path) { return irl_from_json(read_text_file(path)); }

}  // namespace ylr
