#pragma once

#include "ylr/types.hpp"

namespace ylr {

// One step of the discrete kinematics:
//   x' = x + v*tau*cos(psi),  y' = y + v*tau*sin(psi),  v' = max(0, v + a*tau).
// The returned point stores the applied controls in its a and psi fields.
// Speed is clamped at zero; vehicles at a yellow light do not reverse.
TrajectoryPoint kinematic_step(const TrajectoryPoint& p, double accel, double heading, double tau);

// Repeated kinematic_step. Output has controls.size() + 1 points and starts
// at `initial` unchanged.
Trajectory rollout(const TrajectoryPoint& initial, const ControlSequence& controls, double tau);

// Mean pointwise position gap between two equal-length trajectories:
// (1/N) * sum_i sqrt(dx_i^2 + dy_i^2).
double euclidean_distance(const Trajectory& t1, const Trajectory& t2);

// Linear interpolation of x, y, v, psi onto a uniform grid with step tau
// anchored at the first sample; accel recomputed from the resampled speeds by
// central differences (one-sided at the ends). Input needs monotone
// timestamps spanning at least one output step.
Trajectory resample_trajectory(const Trajectory& traj, double tau);

// Controls recovered from the stored per-point (a, psi) fields of points
// 1..N. rollout(traj.points[0], extract_controls(traj), traj.dt) reproduces a
// dynamically feasible trajectory bit-for-bit.
ControlSequence extract_controls(const Trajectory& traj, ControlBounds bounds = {});

// True when the trajectory is exactly a rollout of its own stored controls.
bool satisfies_dynamics(const Trajectory& traj);

}  // namespace ylr
