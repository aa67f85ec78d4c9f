#include "ylr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ylr/irl.hpp"
#include "ylr/kinematics.hpp"

namespace ylr {

IntentionPosterior bn_joint_table_posterior(const BnModel& model, const IntentionEvidence& e) {
    const auto observed = discretize(e, model);
    const int k0 = model.bins(0), k1 = model.bins(1), k2 = model.bins(2);
    const int k3 = model.bins(3), k4 = model.bins(4);

    // Uniform priors over the causal roots; they cancel in the conditional but
    // belong in the joint.
    const double prior_ce = 1.0 / (static_cast<double>(k0) * k1 * k2);

    double slice[2] = {0.0, 0.0};
    for (int b0 = 0; b0 < k0; ++b0)
        for (int b1 = 0; b1 < k1; ++b1)
            for (int b2 = 0; b2 < k2; ++b2)
                for (int b3 = 0; b3 < k3; ++b3)
                    for (int b4 = 0; b4 < k4; ++b4)
                        for (int intent = 0; intent < 2; ++intent) {
                            const int row = (b0 * k1 + b1) * k2 + b2;
                            const double joint = prior_ce * model.cpt_intention(row, intent) *
                                                 model.cpt_de[0](intent, b3) *
                                                 model.cpt_de[1](intent, b4);
                            if (b0 == observed[0] && b1 == observed[1] && b2 == observed[2] &&
                                b3 == observed[3] && b4 == observed[4])
                                slice[intent] += joint;
                        }
    const double total = slice[0] + slice[1];
    if (!(total > 0.0)) return {0.5, 0.5};
    return {slice[0] / total, slice[1] / total};
}

BnModel random_bn_model(Rng& rng, int max_bins) {
    BnModel model;
    model.k_bins = max_bins;
    model.alpha = 1.0;
    for (int var = 0; var < kNumEvidenceVars; ++var) {
        // 1..max_bins-1 interior edges, i.e. 2..max_bins bins.
        const auto n_edges = 1 + rng.integer(static_cast<std::uint64_t>(max_bins - 1));
        std::vector<double> edges;
        double edge = rng.uniform(-5.0, 0.0);
        for (std::uint64_t i = 0; i < n_edges; ++i) {
            edge += rng.uniform(0.1, 3.0);
            edges.push_back(edge);
        }
        model.bin_edges[static_cast<std::size_t>(var)] = edges;
    }
    const int rows = model.bins(0) * model.bins(1) * model.bins(2);
    model.cpt_intention.resize(rows, 2);
    for (int r = 0; r < rows; ++r) {
        const double p = rng.uniform(0.01, 0.99);
        model.cpt_intention(r, 0) = p;
        model.cpt_intention(r, 1) = 1.0 - p;
    }
    for (int j = 0; j < kNumDiagnosticVars; ++j) {
        const int k = model.bins(kNumCausalVars + j);
        auto& table = model.cpt_de[static_cast<std::size_t>(j)];
        table.resize(2, k);
        for (int r = 0; r < 2; ++r) {
            double total = 0.0;
            for (int c = 0; c < k; ++c) {
                table(r, c) = rng.uniform(0.05, 1.0);
                total += table(r, c);
            }
            for (int c = 0; c < k; ++c) table(r, c) /= total;
        }
    }
    return model;
}

OracleCheck check_bn_inference(std::uint64_t seed, int trials, double tol) {
    Rng rng(seed);
    OracleCheck result;
    result.trials = trials;
    for (int trial = 0; trial < trials; ++trial) {
        const auto model = random_bn_model(rng, 3);
        IntentionEvidence e;
        e.elapsed_yellow = rng.uniform(-2.0, 8.0);
        e.tti = rng.uniform(-2.0, 12.0);
        e.rel_speed = rng.uniform(-8.0, 8.0);
        e.lon_speed = rng.uniform(-2.0, 20.0);
        e.lon_accel = rng.uniform(-5.0, 4.0);
        const auto fast = infer_intention(model, e);
        const auto exact = bn_joint_table_posterior(model, e);
        result.max_error = std::max({result.max_error, std::abs(fast.p_pass - exact.p_pass),
                                     std::abs(fast.p_stop - exact.p_stop)});
    }
    result.passed = result.max_error <= tol;
    return result;
}

OracleCheck check_softmin_normalization(std::uint64_t seed, int trials, double tol) {
    Rng rng(seed);
    OracleCheck result;
    result.trials = trials;
    for (int trial = 0; trial < trials; ++trial) {
        const auto n = 2 + rng.integer(28);
        std::vector<double> costs;
        for (std::uint64_t k = 0; k < n; ++k) costs.push_back(rng.uniform(0.0, 1000.0));
        const auto probs = softmin_distribution(costs);
        double total = 0.0;
        for (double p : probs) {
            if (!std::isfinite(p) || p < 0.0) {
                result.max_error = std::numeric_limits<double>::infinity();
                return result;
            }
            total += p;
        }
        result.max_error = std::max(result.max_error, std::abs(total - 1.0));
    }
    result.passed = result.max_error <= tol;
    return result;
}

namespace {

struct EnumeratedToy {
    std::vector<Trajectory> demos;
    std::vector<std::vector<Trajectory>> candidate_sets;
    std::vector<EnvironmentState> envs;
};

EnumeratedToy make_enumerated_toy(Rng& rng) {
    EnvironmentState env;
    env.yellow_onset = 0.0;
    env.yellow_duration = 3.5;
    env.stop_bar_x = 100.0;
    env.v_lim = 12.0;
    env.x_queue = 95.0;
    env.i_launch = 10000;
    TrajectoryPoint fv{0.0, 300.0, 0.0, 12.0, 0.0, 0.0};
    ControlSequence cruise(60);
    env.fv_trajectory = rollout(fv, cruise, 0.1);

    EnumeratedToy toy;
    for (int j = 0; j < 3; ++j) {
        std::vector<Trajectory> set;
        const double v0 = rng.uniform(6.0, 12.0);
        for (int k = 0; k < 8; ++k) {
            TrajectoryPoint init{0.0, 0.0, 0.0, v0, 0.0, 0.0};
            ControlSequence controls(6);
            controls.accel.setConstant(rng.uniform(-3.0, 2.0));
            controls.heading.setConstant(rng.uniform(-0.15, 0.15));
            set.push_back(rollout(init, controls, 0.1));
        }
        toy.demos.push_back(set[rng.integer(set.size())]);
        toy.candidate_sets.push_back(std::move(set));
        toy.envs.push_back(env);
    }
    return toy;
}

}  // namespace

OracleCheck check_maxent_gradient(std::uint64_t seed, double rel_tol) {
    Rng rng(seed);
    const auto toy = make_enumerated_toy(rng);

    WeightVector theta;
    theta.maneuver = Intention::Pass;
    for (int k = 0; k < kNumFeatures; ++k) theta.theta[k] = rng.uniform(0.3, 2.0);
    FeatureScaling scaling;
    for (int k = 0; k < kNumFeatures; ++k) scaling.scale[k] = rng.uniform(0.5, 2.0);

    const Vec5 grad = exact_likelihood_gradient(theta, scaling, toy.demos, toy.candidate_sets, toy.envs);

    OracleCheck result;
    result.trials = kNumFeatures;
    const double h = 1e-6;
    for (int k = 0; k < kNumFeatures; ++k) {
        WeightVector hi = theta, lo = theta;
        hi.theta[k] += h;
        lo.theta[k] -= h;
        const double fd =
            (log_likelihood(hi, scaling, toy.demos, toy.candidate_sets, toy.envs) -
             log_likelihood(lo, scaling, toy.demos, toy.candidate_sets, toy.envs)) /
            (2.0 * h);
        const double scale = std::max({std::abs(fd), std::abs(grad[k]), 1e-8});
        result.max_error = std::max(result.max_error, std::abs(grad[k] - fd) / scale);
    }
    result.passed = result.max_error <= rel_tol;
    return result;
}

}  // namespace ylr
