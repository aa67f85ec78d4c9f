#include "ylr/types.hpp"

#include <algorithm>
#include <cmath>

namespace ylr {

bool is_finite(const TrajectoryPoint& p) {
    return std::isfinite(p.t) && std::isfinite(p.x) && std::isfinite(p.y) &&
           std::isfinite(p.v) && std::isfinite(p.a) && std::isfinite(p.psi);
}

void validate_point(const TrajectoryPoint& p) {
    if (!is_finite(p)) throw ValidationError("trajectory point has non-finite fields");
    if (p.v < 0.0) throw ValidationError("trajectory point has negative speed");
    if (std::abs(p.psi) > M_PI / 2.0) throw ValidationError("trajectory point heading exceeds pi/2");
}

void Trajectory::validate() const {
    if (points.empty()) throw ValidationError("trajectory is empty");
    if (!(dt > 0.0)) throw ValidationError("trajectory step must be positive");
    for (const auto& p : points) validate_point(p);
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double gap = points[i].t - points[i - 1].t;
        if (std::abs(gap - dt) > 1e-9) {
            throw ValidationError("trajectory timestamps are not uniform at sample " +
                                  std::to_string(i));
        }
    }
}

void ControlBounds::validate() const {
    if (!(a_min < a_max)) throw ValidationError("control bounds need a_min < a_max");
    if (!(psi_max >= 0.0)) throw ValidationError("control bounds need psi_max >= 0");
}

void ControlSequence::project() {
    accel = accel.max(bounds.a_min).min(bounds.a_max);
    heading = heading.max(-bounds.psi_max).min(bounds.psi_max);
}

void ControlSequence::validate() const {
    bounds.validate();
    if (accel.size() != heading.size()) throw ValidationError("control sequence arrays differ in length");
    if (accel.size() == 0) throw ValidationError("control sequence is empty");
    if (!accel.isFinite().all() || !heading.isFinite().all())
        throw ValidationError("control sequence has non-finite entries");
    if ((accel < bounds.a_min).any() || (accel > bounds.a_max).any())
        throw ValidationError("acceleration control out of bounds");
    if ((heading.abs() > bounds.psi_max).any())
        throw ValidationError("heading control out of bounds");
}

void EnvironmentState::validate() const {
    if (!(yellow_duration > 0.0)) throw ValidationError("yellow duration must be positive");
    if (!(v_lim > 0.0)) throw ValidationError("speed limit must be positive");
    if (!(x_queue <= stop_bar_x)) throw ValidationError("queue end must not be past the stop bar");
    if (!std::isfinite(yellow_onset) || !std::isfinite(stop_bar_x) || !std::isfinite(x_queue))
        throw ValidationError("environment state has non-finite fields");
}

namespace {

// Index of the segment [t_i, t_{i+1}] containing t, and the blend factor.
struct SegmentPos {
    std::size_t i;
    double u;
};

SegmentPos locate(const Trajectory& traj, double t) {
    constexpr double kTol = 1e-6;
    if (traj.empty()) throw ValidationError("cannot interpolate an empty trajectory");
    if (t < traj.start_time() - kTol || t > traj.end_time() + kTol)
        throw ValidationError("interpolation time outside trajectory span");
    if (traj.size() == 1) return {0, 0.0};
    auto it = std::upper_bound(traj.points.begin(), traj.points.end(), t,
                               [](double value, const TrajectoryPoint& p) { return value < p.t; });
    std::size_t hi = static_cast<std::size_t>(std::distance(traj.points.begin(), it));
    hi = std::clamp<std::size_t>(hi, 1, traj.size() - 1);
    const std::size_t lo = hi - 1;
    const double span = traj.points[hi].t - traj.points[lo].t;
    const double u = span > 0.0 ? std::clamp((t - traj.points[lo].t) / span, 0.0, 1.0) : 0.0;
    return {lo, u};
}

}  // namespace

double position_at(const Trajectory& traj, double t) {
    const auto [i, u] = locate(traj, t);
    if (traj.size() == 1) return traj.points[0].x;
    return traj.points[i].x + u * (traj.points[i + 1].x - traj.points[i].x);
}

double speed_at(const Trajectory& traj, double t) {
    const auto [i, u] = locate(traj, t);
    if (traj.size() == 1) return traj.points[0].v;
    return traj.points[i].v + u * (traj.points[i + 1].v - traj.points[i].v);
}

}  // namespace ylr
