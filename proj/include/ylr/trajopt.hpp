#pragma once

#include <vector>

#include "ylr/features.hpp"
#include "ylr/kinematics.hpp"
#include "ylr/types.hpp"

namespace ylr {

struct OptimizerConfig {
    int horizon{30};         // steps
    double tau{0.1};         // s
    int max_iters{200};
    double grad_step{1e-4};  // finite-difference step on controls
    double tol{1e-6};        // relative objective-change stop
    int restarts{3};         // deterministic restart patterns, 1..3
    ControlBounds bounds;

    void validate() const;
};

struct OptimizeResult {
    Trajectory trajectory;
    ControlSequence controls;
    double objective{0.0};
    bool converged{false};
    int restart_index{-1};
    // Accepted objective values per restart; each sequence is non-increasing.
    std::vector<std::vector<double>> objective_traces;
};

// Cost of a trajectory under the maneuver's weights: theta . (scale ⊙ f).
double objective(const Trajectory& traj, const WeightVector& theta, const EnvironmentState& env,
                 const FeatureScaling& scaling = {});

// Projected gradient descent over the control sequence (central
// finite-difference gradients, normalized descent direction, backtracking
// halving line search, controls clamped into the box every step) from up to
// three deterministic starts: zero controls, comfort braking, and
// front-vehicle speed matching. Best restart wins, ties broken by restart
// order. Infeasible scenes at the initial state raise InfeasibleError;
// running out of iterations returns the best point found with
// converged = false.
//
// A warm start, when supplied, replaces the restart set entirely; callers
// iterating on slowly-changing weights (the training loop) use it to descend
// from the previous solution.
OptimizeResult optimize_trajectory(const WeightVector& theta, const EnvironmentState& env,
                                   const TrajectoryPoint& init, const OptimizerConfig& cfg,
                                   const FeatureScaling& scaling = {},
                                   const ControlSequence* warm_start = nullptr);

}  // namespace ylr
