#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ylr/types.hpp"

namespace ylr {

using Vec5 = Eigen::Matrix<double, 5, 1>;

constexpr int kNumFeatures = 5;
constexpr double kVehicleLength = 4.5;    // m, convert center gaps to bumper gaps
constexpr double kHeadwaySpeedMin = 1.0;  // m/s, below this the space headway is used

// Each maneuver uses five of the six features. The ordering is fixed and
// serialized with trained models so weight indices never drift.
//   pass: speed_limit, accel, headway, heading, lat_accel
//   stop: accel, headway, heading, lat_accel, stop_position
const std::array<std::string, kNumFeatures>& feature_names(Intention maneuver);

// Index of the smoothness (acceleration) feature for the maneuver.
int accel_feature_index(Intention maneuver);
// Index of the efficiency feature reweighted by lambda: speed limit for pass,
// stop position for stop.
int efficiency_feature_index(Intention maneuver);

/// Raw (unscaled) feature values for one trajectory; all entries are means of
/// squares and therefore nonnegative.
struct FeatureVector {
    Vec5 values = Vec5::Zero();
    Intention maneuver{Intention::Pass};
};

/// Per-feature positive factors that bring dataset means to one.
struct FeatureScaling {
    Vec5 scale = Vec5::Ones();

    void validate() const;
};

/// Nonnegative weights over the maneuver's feature vector.
struct WeightVector {
    Vec5 theta = Vec5::Ones();
    Intention maneuver{Intention::Pass};

    void validate() const;
};

// Features of a trajectory against the scene:
//   speed_limit   mean (v_i - v_lim)^2
//   accel         mean a_i^2
//   headway       mean 1/h_i^2 with h_i the time headway above
//                 kHeadwaySpeedMin and the space headway below it
//   heading       mean psi_i^2
//   lat_accel     mean (a_i sin psi_i)^2
//   stop_position mean (x_i - x_queue)^2 over steps up to the queue launch
// The front-vehicle gap d_i = fv_x(t_i) - x_i - kVehicleLength must stay
// positive; overlap raises InfeasibleError.
FeatureVector compute_features(const Trajectory& traj, const EnvironmentState& env,
                               Intention maneuver);

// scale_k = 1 / mean_k over the dataset (1 when the column is all zero), so
// the scaled empirical mean is one in every live coordinate.
FeatureScaling fit_scaling(const std::vector<FeatureVector>& dataset);

inline Vec5 apply_scaling(const FeatureScaling& scaling, const Vec5& raw) {
    return scaling.scale.cwiseProduct(raw);
}

// Driver-characteristic reweighting: the efficiency feature weight becomes
// 2*lambda*theta_eff and the acceleration weight 2*(1-lambda)*theta_accel, so
// lambda = 0.5 reproduces the offline-trained weights exactly.
WeightVector apply_lambda(const WeightVector& theta, double lambda);

}  // namespace ylr
