#include "ylr/trajopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ylr/errors.hpp"

namespace ylr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInitialStep = 1.0;
constexpr double kMaxStep = 8.0;
constexpr int kMaxHalvings = 20;

// Objective evaluation tuned for the finite-difference loop. Per-point
// feature contributions are accumulated strictly left to right, exactly as
// compute_features does, so values agree with objective() bit for bit. A
// probe that perturbs control i reuses the unchanged points 0..i and their
// running feature sums and re-simulates only the suffix.
class EvalEngine {
public:
    EvalEngine(const WeightVector& theta, const EnvironmentState& env, const TrajectoryPoint& init,
               const OptimizerConfig& cfg, const FeatureScaling& scaling)
        : theta_(theta), scaling_(scaling), env_(env), init_(init), cfg_(cfg) {
        const auto n = static_cast<std::size_t>(cfg.horizon);
        fv_x_.resize(n + 1);
        const auto& fv = env.fv_trajectory.points;
        std::size_t seg = 0;
        for (std::size_t i = 0; i <= n; ++i) {
            const double t = time_at(i);
            while (seg + 2 < fv.size() && fv[seg + 1].t <= t) ++seg;
            double x = fv[seg].x;
            if (fv.size() > 1) {
                const double span = fv[seg + 1].t - fv[seg].t;
                const double u = span > 0.0 ? std::clamp((t - fv[seg].t) / span, 0.0, 1.0) : 0.0;
                x += u * (fv[seg + 1].x - fv[seg].x);
            }
            fv_x_[i] = x;
        }
        t_launch_ = env.yellow_onset + static_cast<double>(env.i_launch) * cfg.tau;
        points_.resize(n + 1);
        sums_.resize(n + 1);
        scratch_points_.resize(n + 1);
        scratch_sums_.resize(n + 1);
    }

    // Full evaluation that also records the per-index state for later probes.
    double rebase(const ControlSequence& controls) {
        const double value = run(controls, 0, nullptr, 0.0, 0.0, points_, sums_);
        based_ = std::isfinite(value);
        return value;
    }

    // Full evaluation without touching the cached base.
    double eval(const ControlSequence& controls) {
        return run(controls, 0, nullptr, 0.0, 0.0, scratch_points_, scratch_sums_);
    }

    // controls with coordinate `index` of accel (or heading) replaced;
    // only the suffix from that step onward is recomputed.
    double eval_perturbed(const ControlSequence& controls, Eigen::Index index, bool accel_coord,
                          double value) {
        if (!based_) return eval_with_override(controls, index, accel_coord, value);
        const auto from = static_cast<std::size_t>(index);
        scratch_points_[from] = points_[from];
        scratch_sums_[from] = sums_[from];
        return run(controls, from, &index, accel_coord ? value : controls.accel[index],
                   accel_coord ? controls.heading[index] : value, scratch_points_, scratch_sums_);
    }

private:
    struct RunningSums {
        double speed{0.0}, accel{0.0}, headway{0.0}, heading{0.0}, lat{0.0};
        double queue{0.0};
        double queue_count{0.0};
    };

    double time_at(std::size_t i) const {
        // Matches the accumulation rollout performs step by step.
        double t = init_.t;
        for (std::size_t k = 0; k < i; ++k) t += cfg_.tau;
        return t;
    }

    double eval_with_override(const ControlSequence& controls, Eigen::Index index, bool accel_coord,
                              double value) {
        return run(controls, 0, &index, accel_coord ? value : controls.accel[index],
                   accel_coord ? controls.heading[index] : value, scratch_points_, scratch_sums_);
    }

    void accumulate(const TrajectoryPoint& p, double fv_x, RunningSums& sums, bool& feasible) const {
        const double dv = p.v - env_.v_lim;
        sums.speed += dv * dv;
        sums.accel += p.a * p.a;
        sums.heading += p.psi * p.psi;
        const double lat = p.a * (p.psi == 0.0 ? 0.0 : std::sin(p.psi));
        sums.lat += lat * lat;
        const double gap = fv_x - p.x - kVehicleLength;
        if (gap <= 0.0) {
            feasible = false;
            return;
        }
        const double headway = p.v > kHeadwaySpeedMin ? gap / p.v : gap;
        sums.headway += 1.0 / (headway * headway);
        if (p.t <= t_launch_ + 1e-9) {
            const double dq = p.x - env_.x_queue;
            sums.queue += dq * dq;
            sums.queue_count += 1.0;
        }
    }

    // Simulate from point `from`, optionally overriding one control
    // coordinate, maintaining the running feature sums. `points[from]` and
    // `sums[from]` must be valid on entry when from > 0.
    double run(const ControlSequence& controls, std::size_t from, const Eigen::Index* override_index,
               double override_accel, double override_heading, std::vector<TrajectoryPoint>& points,
               std::vector<RunningSums>& sums) {
        const auto n = static_cast<std::size_t>(cfg_.horizon);
        bool feasible = true;
        if (from == 0) {
            points[0] = init_;
            sums[0] = RunningSums{};
            accumulate(points[0], fv_x_[0], sums[0], feasible);
            if (!feasible) return kInf;
        }
        for (std::size_t i = from; i < n; ++i) {
            const bool overridden = override_index && static_cast<std::size_t>(*override_index) == i;
            const double a = overridden ? override_accel : controls.accel[static_cast<Eigen::Index>(i)];
            const double psi =
                overridden ? override_heading : controls.heading[static_cast<Eigen::Index>(i)];
            points[i + 1] = kinematic_step(points[i], a, psi, cfg_.tau);
            sums[i + 1] = sums[i];
            accumulate(points[i + 1], fv_x_[i + 1], sums[i + 1], feasible);
            if (!feasible) return kInf;
        }
        return compose(sums[n]);
    }

    double compose(const RunningSums& s) const {
        const auto n = static_cast<double>(cfg_.horizon + 1);
        const double stop_position = s.queue_count > 0.0 ? s.queue / s.queue_count : 0.0;
        FeatureVector f;
        f.maneuver = theta_.maneuver;
        if (theta_.maneuver == Intention::Pass)
            f.values << s.speed / n, s.accel / n, s.headway / n, s.heading / n, s.lat / n;
        else
            f.values << s.accel / n, s.headway / n, s.heading / n, s.lat / n, stop_position;
        return theta_.theta.dot(apply_scaling(scaling_, f.values));
    }

    const WeightVector& theta_;
    const FeatureScaling& scaling_;
    const EnvironmentState& env_;
    const TrajectoryPoint& init_;
    const OptimizerConfig& cfg_;
    std::vector<double> fv_x_;
    double t_launch_{0.0};
    bool based_{false};
    std::vector<TrajectoryPoint> points_, scratch_points_;
    std::vector<RunningSums> sums_, scratch_sums_;
};

ControlSequence start_zero(const OptimizerConfig& cfg) {
    ControlSequence controls(cfg.horizon, cfg.bounds);
    controls.project();
    return controls;
}

ControlSequence start_comfort_brake(const OptimizerConfig& cfg) {
    ControlSequence controls(cfg.horizon, cfg.bounds);
    controls.accel.setConstant(-2.0);
    controls.project();
    return controls;
}

ControlSequence start_follow_front(const OptimizerConfig& cfg, const EnvironmentState& env,
                                   const TrajectoryPoint& init) {
    ControlSequence controls(cfg.horizon, cfg.bounds);
    double v = init.v;
    double t = init.t;
    for (int i = 0; i < cfg.horizon; ++i) {
        const double v_front = speed_at(env.fv_trajectory, t + cfg.tau);
        const double a = std::clamp((v_front - v) / cfg.tau, cfg.bounds.a_min, cfg.bounds.a_max);
        controls.accel[i] = a;
        v = std::max(0.0, v + a * cfg.tau);
        t += cfg.tau;
    }
    return controls;
}

struct RestartOutcome {
    ControlSequence controls;
    double objective{kInf};
    bool converged{false};
    std::vector<double> trace;
};

RestartOutcome descend(EvalEngine& engine, const OptimizerConfig& cfg, ControlSequence controls) {
    RestartOutcome out;
    out.controls = std::move(controls);
    out.controls.project();
    double obj = engine.rebase(out.controls);
    out.trace.push_back(obj);
    if (!std::isfinite(obj)) return out;  // start itself infeasible; keep as-is
    const double obj_ref = std::max(obj, 1e-12);

    const auto n = out.controls.size();
    Eigen::ArrayXd grad_a(n), grad_psi(n);
    double trial_step = kInitialStep;

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        // Central differences, one coordinate at a time; the engine
        // re-simulates only the affected suffix.
        const double h = cfg.grad_step;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double saved = out.controls.accel[i];
            const double hi = engine.eval_perturbed(out.controls, i, true, saved + h);
            const double lo = engine.eval_perturbed(out.controls, i, true, saved - h);
            grad_a[i] = std::isfinite(hi) && std::isfinite(lo) ? (hi - lo) / (2.0 * h) : 0.0;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const double saved = out.controls.heading[i];
            const double hi = engine.eval_perturbed(out.controls, i, false, saved + h);
            const double lo = engine.eval_perturbed(out.controls, i, false, saved - h);
            grad_psi[i] = std::isfinite(hi) && std::isfinite(lo) ? (hi - lo) / (2.0 * h) : 0.0;
        }

        const double gmax = std::max(grad_a.abs().maxCoeff(), grad_psi.abs().maxCoeff());
        if (gmax == 0.0) {
            out.converged = true;
            break;
        }
        const Eigen::ArrayXd dir_a = grad_a / gmax;
        const Eigen::ArrayXd dir_psi = grad_psi / gmax;

        // Line search along the normalized direction: halve until the
        // objective drops, then keep doubling while it keeps dropping, so one
        // gradient moves as far as it usefully can.
        ControlSequence candidate = out.controls;
        const auto probe_step = [&](double s, ControlSequence& c) {
            c.accel = out.controls.accel - s * dir_a;
            c.heading = out.controls.heading - s * dir_psi;
            c.project();
            return engine.eval(c);
        };
        double step = trial_step;
        bool accepted = false;
        double obj_new = obj;
        for (int halving = 0; halving < kMaxHalvings; ++halving) {
            const double value = probe_step(step, candidate);
            if (value < obj) {
                obj_new = value;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            out.converged = true;  // no descent along the gradient
            break;
        }
        ControlSequence grown = candidate;
        while (step < kMaxStep) {
            const double value = probe_step(2.0 * step, grown);
            if (!(value < obj_new)) break;
            step *= 2.0;
            obj_new = value;
            std::swap(candidate, grown);
        }
        trial_step = std::min(2.0 * step, kMaxStep);

        const double improvement = obj - obj_new;
        out.controls = candidate;
        obj = engine.rebase(out.controls);
        out.trace.push_back(obj);
        if (improvement <= cfg.tol * obj_ref) {
            out.converged = true;
            break;
        }
    }
    out.objective = obj;
    return out;
}

}  // namespace

void OptimizerConfig::validate() const {
    if (horizon < 1) throw ValidationError("optimizer horizon must be at least one step");
    if (!(tau > 0.0)) throw ValidationError("optimizer tau must be positive");
    if (max_iters < 1) throw ValidationError("optimizer max_iters must be positive");
    if (!(grad_step > 0.0)) throw ValidationError("optimizer grad_step must be positive");
    if (!(tol > 0.0)) throw ValidationError("optimizer tol must be positive");
    if (restarts < 1 || restarts > 3) throw ValidationError("optimizer restarts must be 1..3");
    bounds.validate();
}

double objective(const Trajectory& traj, const WeightVector& theta, const EnvironmentState& env,
                 const FeatureScaling& scaling) {
    const FeatureVector f = compute_features(traj, env, theta.maneuver);
    return theta.theta.dot(apply_scaling(scaling, f.values));
}

OptimizeResult optimize_trajectory(const WeightVector& theta, const EnvironmentState& env,
                                   const TrajectoryPoint& init, const OptimizerConfig& cfg,
                                   const FeatureScaling& scaling, const ControlSequence* warm_start) {
    cfg.validate();
    theta.validate();
    scaling.validate();
    validate_point(init);

    const double horizon_end = init.t + cfg.horizon * cfg.tau;
    if (env.fv_trajectory.empty() || env.fv_trajectory.start_time() > init.t + 1e-9 ||
        env.fv_trajectory.end_time() < horizon_end - 1e-9)
        throw ValidationError("front-vehicle trajectory does not cover the prediction horizon");
    if (position_at(env.fv_trajectory, init.t) - init.x - kVehicleLength <= 0.0)
        throw InfeasibleError("initial state overlaps the front vehicle");
    if (warm_start && warm_start->size() != cfg.horizon)
        throw ValidationError("warm start length does not match the horizon");

    EvalEngine engine(theta, env, init, cfg, scaling);

    OptimizeResult best;
    best.objective = kInf;
    const int starts = warm_start ? 1 : cfg.restarts;
    for (int r = 0; r < starts; ++r) {
        ControlSequence start = warm_start ? *warm_start
                                : r == 0   ? start_zero(cfg)
                                : r == 1   ? start_comfort_brake(cfg)
                                           : start_follow_front(cfg, env, init);
        start.bounds = cfg.bounds;
        RestartOutcome outcome = descend(engine, cfg, std::move(start));
        best.objective_traces.push_back(std::move(outcome.trace));
        if (outcome.objective < best.objective) {
            best.objective = outcome.objective;
            best.controls = std::move(outcome.controls);
            best.converged = outcome.converged;
            best.restart_index = r;
        }
    }
    if (!std::isfinite(best.objective))
        throw InfeasibleError("no feasible trajectory found from any restart");
    best.trajectory = rollout(init, best.controls, cfg.tau);
    best.objective = objective(best.trajectory, theta, env, scaling);
    return best;
}

}  // namespace ylr
