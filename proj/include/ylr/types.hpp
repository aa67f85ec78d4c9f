#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ylr/errors.hpp"

namespace ylr {

/// Discrete maneuver at a yellow light: clear the intersection or stop.
enum class Intention { Pass, Stop };

inline const char* to_string(Intention m) { return m == Intention::Pass ? "pass" : "stop"; }

inline Intention intention_from_string(const std::string& s) {
    if (s == "pass") return Intention::Pass;
    if (s == "stop") return Intention::Stop;
    throw ValidationError("unknown intention label: " + s);
}

/// One kinematic sample. x is longitudinal (increasing toward the stop bar),
/// y lateral, psi the heading between the vehicle axis and the road axis.
struct TrajectoryPoint {
    double t{0.0};    // s
    double x{0.0};    // m
    double y{0.0};    // m
    double v{0.0};    // m/s, never negative
    double a{0.0};    // m/s^2, control applied over the step that produced this point
    double psi{0.0};  // rad, |psi| <= pi/2
};

bool is_finite(const TrajectoryPoint& p);
void validate_point(const TrajectoryPoint& p);

/// Uniformly sampled sequence of TrajectoryPoints (step dt).
struct Trajectory {
    std::vector<TrajectoryPoint> points;
    double dt{0.1};

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    const TrajectoryPoint& front() const { return points.front(); }
    const TrajectoryPoint& back() const { return points.back(); }
    const TrajectoryPoint& operator[](std::size_t i) const { return points[i]; }
    TrajectoryPoint& operator[](std::size_t i) { return points[i]; }

    double start_time() const { return points.front().t; }
    double end_time() const { return points.back().t; }

    // Throws ValidationError unless non-empty and timestamps advance by dt
    // within 1e-9 s.
    void validate() const;
};

/// Box bounds on the per-step controls.
struct ControlBounds {
    double a_min{-4.0};   // m/s^2
    double a_max{3.0};    // m/s^2
    double psi_max{0.2};  // rad

    void validate() const;
};

/// Decision variables of the trajectory optimization: one (accel, heading)
/// pair per step.
struct ControlSequence {
    Eigen::ArrayXd accel;
    Eigen::ArrayXd heading;
    ControlBounds bounds;

    ControlSequence() = default;
    ControlSequence(Eigen::Index n, ControlBounds b = {})
        : accel(Eigen::ArrayXd::Zero(n)), heading(Eigen::ArrayXd::Zero(n)), bounds(b) {}

    Eigen::Index size() const { return accel.size(); }

    // Clamp every entry into the box.
    void project();
    // Throws ValidationError if lengths differ or any entry is out of bounds.
    void validate() const;
};

/// Everything about the scene that is not the target vehicle: signal timing,
/// road limits, the front vehicle's (given or predicted) trajectory, and the
/// queue geometry used by the stop maneuver.
struct EnvironmentState {
    double yellow_onset{0.0};     // s, absolute time the signal turns yellow
    double yellow_duration{3.5};  // s
    double stop_bar_x{100.0};     // m
    double v_lim{13.0};           // m/s
    Trajectory fv_trajectory;     // front vehicle, must cover the prediction horizon
    double x_queue{95.0};         // m, end-of-queue stop position, <= stop_bar_x
    std::int64_t i_launch{1000};  // steps after yellow onset until the queue launches
    double a_max_naive{2.0};      // m/s^2, naive intention baseline accel

    double yellow_end() const { return yellow_onset + yellow_duration; }
    void validate() const;
};

// Linear interpolation on the front-vehicle (or any) trajectory. Throws
// ValidationError when t is outside the covered span (1e-6 s tolerance).
double position_at(const Trajectory& traj, double t);
double speed_at(const Trajectory& traj, double t);

}  // namespace ylr
