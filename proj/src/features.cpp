#include "ylr/features.hpp"

#include <cmath>

#include "ylr/errors.hpp"

namespace ylr {

const std::array<std::string, kNumFeatures>& feature_names(Intention maneuver) {
    static const std::array<std::string, kNumFeatures> pass_names = {
        "speed_limit", "accel", "headway", "heading", "lat_accel"};
    static const std::array<std::string, kNumFeatures> stop_names = {
        "accel", "headway", "heading", "lat_accel", "stop_position"};
    return maneuver == Intention::Pass ? pass_names : stop_names;
}

int accel_feature_index(Intention maneuver) { return maneuver == Intention::Pass ? 1 : 0; }

int efficiency_feature_index(Intention maneuver) { return maneuver == Intention::Pass ? 0 : 4; }

void FeatureScaling::validate() const {
    if (!(scale.array() > 0.0).all() || !scale.allFinite())
        throw ValidationError("feature scaling must be strictly positive");
}

void WeightVector::validate() const {
    if (!(theta.array() >= 0.0).all() || !theta.allFinite())
        throw ValidationError("weight vector must be nonnegative and finite");
}

FeatureVector compute_features(const Trajectory& traj, const EnvironmentState& env,
                               Intention maneuver) {
    if (traj.empty()) throw ValidationError("cannot featurize an empty trajectory");
    const auto n = static_cast<double>(traj.size());

    // Trajectory samples are time-ordered, so the front-vehicle lookup walks
    // a cursor instead of searching per point.
    const auto& fv = env.fv_trajectory.points;
    if (fv.empty()) throw ValidationError("front-vehicle trajectory is empty");
    std::size_t seg = 0;

    double sum_speed = 0.0, sum_accel = 0.0, sum_headway = 0.0, sum_heading = 0.0, sum_lat = 0.0;
    for (const auto& p : traj.points) {
        const double dv = p.v - env.v_lim;
        sum_speed += dv * dv;
        sum_accel += p.a * p.a;
        sum_heading += p.psi * p.psi;
        const double lat = p.a * (p.psi == 0.0 ? 0.0 : std::sin(p.psi));
        sum_lat += lat * lat;

        if (p.t < fv.front().t - 1e-6 || p.t > fv.back().t + 1e-6)
            throw ValidationError("front-vehicle trajectory does not cover the sample time");
        while (seg + 2 < fv.size() && fv[seg + 1].t <= p.t) ++seg;
        double fv_x = fv[seg].x;
        if (fv.size() > 1) {
            const double span = fv[seg + 1].t - fv[seg].t;
            const double u = span > 0.0 ? std::clamp((p.t - fv[seg].t) / span, 0.0, 1.0) : 0.0;
            fv_x += u * (fv[seg + 1].x - fv[seg].x);
        }

        const double gap = fv_x - p.x - kVehicleLength;
        if (gap <= 0.0) throw InfeasibleError("target overlaps the front vehicle");
        const double headway = p.v > kHeadwaySpeedMin ? gap / p.v : gap;
        if (headway == 0.0) throw ValidationError("zero headway");
        sum_headway += 1.0 / (headway * headway);
    }

    FeatureVector f;
    f.maneuver = maneuver;
    if (maneuver == Intention::Pass) {
        f.values << sum_speed / n, sum_accel / n, sum_headway / n, sum_heading / n, sum_lat / n;
        return f;
    }

    // Stop: distance to the queue end counts only until the queue launches.
    const double t_launch = env.yellow_onset + static_cast<double>(env.i_launch) * traj.dt;
    double sum_queue = 0.0;
    double count = 0.0;
    for (const auto& p : traj.points) {
        if (p.t > t_launch + 1e-9) break;
        const double dq = p.x - env.x_queue;
        sum_queue += dq * dq;
        count += 1.0;
    }
    const double stop_position = count > 0.0 ? sum_queue / count : 0.0;
    f.values << sum_accel / n, sum_headway / n, sum_heading / n, sum_lat / n, stop_position;
    return f;
}

FeatureScaling fit_scaling(const std::vector<FeatureVector>& dataset) {
    if (dataset.empty()) throw ValidationError("fit_scaling needs a non-empty dataset");
    const Intention maneuver = dataset.front().maneuver;
    Vec5 mean = Vec5::Zero();
    for (const auto& f : dataset) {
        if (f.maneuver != maneuver)
            throw ValidationError("fit_scaling needs a single-maneuver dataset");
        mean += f.values;
    }
    mean /= static_cast<double>(dataset.size());

    FeatureScaling scaling;
    for (int k = 0; k < kNumFeatures; ++k) scaling.scale[k] = mean[k] > 0.0 ? 1.0 / mean[k] : 1.0;
    return scaling;
}

WeightVector apply_lambda(const WeightVector& theta, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw ValidationError("driver characteristic lambda must lie in [0, 1]");
    theta.validate();
    WeightVector out = theta;
    out.theta[efficiency_feature_index(theta.maneuver)] *= 2.0 * lambda;
    out.theta[accel_feature_index(theta.maneuver)] *= 2.0 * (1.0 - lambda);
    return out;
}

}  // namespace ylr
