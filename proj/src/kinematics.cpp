#include "ylr/kinematics.hpp"

#include <algorithm>
#include <cmath>

namespace ylr {

TrajectoryPoint kinematic_step(const TrajectoryPoint& p, double accel, double heading, double tau) {
    if (!(tau > 0.0)) throw ValidationError("kinematic step needs tau > 0");
    if (!is_finite(p) || !std::isfinite(accel) || !std::isfinite(heading))
        throw ValidationError("kinematic step on non-finite state or controls");
    // heading == 0 keeps the exact cos/sin values and skips the libm calls;
    // the optimizer probes mostly zero headings.
    const double cos_psi = heading == 0.0 ? 1.0 : std::cos(heading);
    const double sin_psi = heading == 0.0 ? 0.0 : std::sin(heading);
    TrajectoryPoint next;
    next.t = p.t + tau;
    next.x = p.x + p.v * tau * cos_psi;
    next.y = p.y + p.v * tau * sin_psi;
    next.v = std::max(0.0, p.v + accel * tau);
    next.a = accel;
    next.psi = heading;
    return next;
}

Trajectory rollout(const TrajectoryPoint& initial, const ControlSequence& controls, double tau) {
    if (controls.size() == 0) throw ValidationError("rollout needs a non-empty control sequence");
    Trajectory traj;
    traj.dt = tau;
    traj.points.reserve(static_cast<std::size_t>(controls.size()) + 1);
    traj.points.push_back(initial);
    for (Eigen::Index i = 0; i < controls.size(); ++i)
        traj.points.push_back(kinematic_step(traj.points.back(), controls.accel[i], controls.heading[i], tau));
    return traj;
}

double euclidean_distance(const Trajectory& t1, const Trajectory& t2) {
    if (t1.size() != t2.size())
        throw ValidationError("euclidean distance needs equal-length trajectories");
    if (t1.empty()) throw ValidationError("euclidean distance needs at least one point");
    double sum = 0.0;
    for (std::size_t i = 0; i < t1.size(); ++i) {
        const double dx = t1[i].x - t2[i].x;
        const double dy = t1[i].y - t2[i].y;
        sum += std::sqrt(dx * dx + dy * dy);
    }
    return sum / static_cast<double>(t1.size());
}

Trajectory resample_trajectory(const Trajectory& traj, double tau) {
    if (!(tau > 0.0)) throw ValidationError("resample needs tau > 0");
    if (traj.empty()) throw ValidationError("resample needs a non-empty trajectory");
    for (std::size_t i = 1; i < traj.size(); ++i)
        if (traj.points[i].t <= traj.points[i - 1].t)
            throw ValidationError("resample needs strictly increasing timestamps");

    const double t0 = traj.start_time();
    const double span = traj.end_time() - t0;
    const auto steps = static_cast<std::size_t>(std::floor(span / tau + 1e-9));
    if (steps < 1) throw ValidationError("trajectory span shorter than one resample step");

    Trajectory out;
    out.dt = tau;
    out.points.resize(steps + 1);
    std::size_t seg = 0;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = t0 + static_cast<double>(k) * tau;
        while (seg + 2 < traj.size() && traj.points[seg + 1].t <= t) ++seg;
        const auto& lo = traj.points[seg];
        const auto& hi = traj.points[std::min(seg + 1, traj.size() - 1)];
        const double gap = hi.t - lo.t;
        const double u = gap > 0.0 ? std::clamp((t - lo.t) / gap, 0.0, 1.0) : 0.0;
        auto& p = out.points[k];
        p.t = t;
        p.x = lo.x + u * (hi.x - lo.x);
        p.y = lo.y + u * (hi.y - lo.y);
        p.v = lo.v + u * (hi.v - lo.v);
        p.psi = lo.psi + u * (hi.psi - lo.psi);
    }
    // Accel from the resampled speed profile, central differences inside.
    for (std::size_t k = 0; k <= steps; ++k) {
        if (k == 0)
            out.points[k].a = (out.points[1].v - out.points[0].v) / tau;
        else if (k == steps)
            out.points[k].a = (out.points[k].v - out.points[k - 1].v) / tau;
        else
            out.points[k].a = (out.points[k + 1].v - out.points[k - 1].v) / (2.0 * tau);
    }
    return out;
}

ControlSequence extract_controls(const Trajectory& traj, ControlBounds bounds) {
    if (traj.size() < 2) throw ValidationError("need at least two points to extract controls");
    const auto n = static_cast<Eigen::Index>(traj.size() - 1);
    ControlSequence controls(n, bounds);
    for (Eigen::Index i = 0; i < n; ++i) {
        controls.accel[i] = traj.points[static_cast<std::size_t>(i) + 1].a;
        controls.heading[i] = traj.points[static_cast<std::size_t>(i) + 1].psi;
    }
    return controls;
}

bool satisfies_dynamics(const Trajectory& traj) {
    if (traj.size() < 2) return true;
    const Trajectory rebuilt = rollout(traj.points[0], extract_controls(traj), traj.dt);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& a = traj.points[i];
        const auto& b = rebuilt.points[i];
        if (a.t != b.t || a.x != b.x || a.y != b.y || a.v != b.v || a.a != b.a || a.psi != b.psi)
            return false;
    }
    return true;
}

}  // namespace ylr
