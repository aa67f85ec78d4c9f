#include "ylr/online.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "ylr/errors.hpp"
#include "ylr/file_util.hpp"
#include "ylr/parallel.hpp"

namespace ylr {

namespace {

constexpr double kAlignTol = 1e-6;
constexpr double kStopSpeed = 0.1;    // m/s, episode termination
constexpr double kStopWindow = 1.0;   // m around the queue end

// Mean position gap over the shared window, skipping the common anchor.
double window_distance(const Trajectory& candidate, const Trajectory& observed, std::size_t count) {
    double sum = 0.0;
    for (std::size_t i = 1; i <= count; ++i) {
        const double dx = candidate[i].x - observed[i].x;
        const double dy = candidate[i].y - observed[i].y;
        sum += std::sqrt(dx * dx + dy * dy);
    }
    return sum / static_cast<double>(count);
}

}  // namespace

void DriverCharacteristic::validate() const {
    if (grid.empty()) throw ValidationError("lambda grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0 && grid[i] <= 1.0))
            throw ValidationError("lambda grid values must lie in [0, 1]");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw ValidationError("lambda grid must be strictly increasing");
    }
    const bool on_grid = std::any_of(grid.begin(), grid.end(),
                                     [&](double g) { return std::abs(g - lambda) <= 1e-12; });
    if (!on_grid) throw ValidationError("current lambda must be one of the grid values");
}

void PredictConfig::validate() const {
    if (!(replan_interval > 0.0)) throw ValidationError("replan interval must be positive");
    if (horizon < 1) throw ValidationError("prediction horizon must be at least one step");
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");
    const double steps = replan_interval / tau;
    if (std::abs(steps - std::round(steps)) > 1e-6)
        throw ValidationError("replan interval must be a whole number of steps");
    driver.validate();
}

Trajectory constant_velocity_baseline(const TrajectoryPoint& state, int horizon, double tau) {
    if (horizon < 1) throw ValidationError("baseline horizon must be at least one step");
    ControlSequence controls(horizon);
    controls.heading.setConstant(state.psi);
    return rollout(state, controls, tau);
}

DriverCharacteristic update_lambda(const DriverCharacteristic& dc, const LambdaCandidates& candidates,
                                   const Trajectory& observed) {
    dc.validate();
    if (candidates.size() != dc.grid.size())
        throw ValidationError("need one candidate prediction per grid lambda");
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (std::abs(candidates[i].first - dc.grid[i]) > 1e-12)
            throw ValidationError("candidate lambdas do not match the grid");
    if (observed.size() < 2) throw ValidationError("observed window needs at least two samples");

    const std::size_t count = observed.size() - 1;
    double best_ed = std::numeric_limits<double>::infinity();
    double best_lambda = dc.lambda;
    for (const auto& [lambda, candidate] : candidates) {
        if (candidate.size() < observed.size())
            throw ValidationError("candidate prediction shorter than the observed window");
        if (std::abs(candidate.front().t - observed.front().t) > kAlignTol)
            throw ValidationError("candidate and observed windows are misaligned");
        const double ed = window_distance(candidate, observed, count);
        const bool better =
            ed < best_ed ||
            (ed == best_ed && (std::abs(lambda - dc.lambda) < std::abs(best_lambda - dc.lambda) ||
                               (std::abs(lambda - dc.lambda) == std::abs(best_lambda - dc.lambda) &&
                                lambda < best_lambda)));
        if (better) {
            best_ed = ed;
            best_lambda = lambda;
        }
    }
    DriverCharacteristic out = dc;
    out.lambda = best_lambda;
    return out;
}

namespace {

Trajectory slice_stream(const Trajectory& stream, std::size_t from, std::size_t to) {
    Trajectory window;
    window.dt = stream.dt;
    window.points.assign(stream.points.begin() + static_cast<std::ptrdiff_t>(from),
                         stream.points.begin() + static_cast<std::ptrdiff_t>(to) + 1);
    return window;
}

// Previous prediction re-anchored at t_c: drop what already elapsed, extend
// with constant velocity to keep the horizon length.
Trajectory shift_prediction(const Trajectory& previous, double t_c, int horizon, double tau) {
    Trajectory shifted;
    shifted.dt = tau;
    for (const auto& p : previous.points)
        if (p.t >= t_c - kAlignTol) shifted.points.push_back(p);
    if (shifted.points.empty()) shifted.points.push_back(previous.points.back());
    while (shifted.points.size() < static_cast<std::size_t>(horizon) + 1) {
        const auto& last = shifted.points.back();
        shifted.points.push_back(kinematic_step(last, 0.0, last.psi, tau));
    }
    return shifted;
}

}  // namespace

PredictionLog rolling_predict(const Trajectory& observed_stream, const EnvironmentState& env,
                              const BnModel& bn, const IrlModel& irl, const PredictConfig& cfg) {
    cfg.validate();
    env.validate();
    observed_stream.validate();
    if (std::abs(observed_stream.dt - cfg.tau) > 1e-9)
        throw ValidationError("stream sample rate does not match the predictor tau");

    const auto replan_steps = static_cast<std::size_t>(std::llround(cfg.replan_interval / cfg.tau));
    const std::size_t last = observed_stream.size() - 1;

    // First cycle at the first sample inside the yellow phase.
    std::size_t start = 0;
    while (start < observed_stream.size() &&
           observed_stream[start].t < env.yellow_onset - kAlignTol)
        ++start;

    OptimizerConfig opt = cfg.optimizer;
    opt.horizon = cfg.horizon;
    opt.tau = cfg.tau;

    PredictionLog log;
    DriverCharacteristic dc = cfg.driver;
    LambdaCandidates previous_candidates;
    std::size_t previous_index = 0;

    for (std::size_t i_c = start; i_c < last; i_c += replan_steps) {
        const TrajectoryPoint& state = observed_stream[i_c];
        if (state.x > env.stop_bar_x) break;
        if (state.v < kStopSpeed && std::abs(state.x - env.x_queue) < kStopWindow) break;

        if (!previous_candidates.empty())
            dc = update_lambda(dc, previous_candidates, slice_stream(observed_stream, previous_index, i_c));

        PredictionCycle cycle;
        cycle.t = state.t;
        cycle.lambda = dc.lambda;
        cycle.baseline = constant_velocity_baseline(state, cfg.horizon, cfg.tau);
        try {
            cycle.posterior = infer_intention(bn, make_evidence(state, env));
            cycle.maneuver = cycle.posterior.argmax();
            const ManeuverModel& model = irl.for_maneuver(cycle.maneuver);

            LambdaCandidates candidates(dc.grid.size());
            std::vector<std::string> failures(dc.grid.size());
            parallel_for_index(dc.grid.size(), [&](std::size_t g) {
                try {
                    const WeightVector reweighted = apply_lambda(model.theta, dc.grid[g]);
                    candidates[g] = {dc.grid[g],
                                     optimize_trajectory(reweighted, env, state, opt, model.scaling)
                                         .trajectory};
                } catch (const Error& e) {
                    failures[g] = e.what();
                }
            });
            for (const auto& message : failures)
                if (!message.empty()) throw ValidationError(message);

            const auto current = std::find_if(candidates.begin(), candidates.end(), [&](const auto& c) {
                return std::abs(c.first - dc.lambda) <= 1e-12;
            });
            cycle.predicted = current->second;
            previous_candidates = std::move(candidates);
            previous_index = i_c;
        } catch (const Error&) {
            // Keep the log gap-free: republish the previous prediction
            // shifted to now, or fall back to constant velocity on the first
            // cycle.
            cycle.fallback = true;
            if (log.cycles.empty()) {
                cycle.posterior = {0.5, 0.5};
                cycle.maneuver = cycle.posterior.argmax();
                cycle.predicted = cycle.baseline;
            } else {
                const auto& prev = log.cycles.back();
                cycle.posterior = prev.posterior;
                cycle.maneuver = prev.maneuver;
                cycle.predicted = shift_prediction(prev.predicted, state.t, cfg.horizon, cfg.tau);
            }
            previous_candidates.clear();
        }
        log.cycles.push_back(std::move(cycle));
    }

    // Realized error once the stream has caught up with each prediction.
    for (auto& cycle : log.cycles) {
        const auto anchor = static_cast<std::size_t>(
            std::llround((cycle.t - observed_stream.start_time()) / cfg.tau));
        const std::size_t available = last - anchor;
        const std::size_t count = std::min<std::size_t>(cfg.horizon, available);
        if (count < 1 || cycle.predicted.size() < count + 1) continue;
        double sum = 0.0;
        for (std::size_t k = 1; k <= count; ++k) {
            const double dx = cycle.predicted[k].x - observed_stream[anchor + k].x;
            const double dy = cycle.predicted[k].y - observed_stream[anchor + k].y;
            sum += std::sqrt(dx * dx + dy * dy);
        }
        cycle.ed_realized = sum / static_cast<double>(count);
    }
    return log;
}

std::string prediction_log_to_jsonl(const PredictionLog& log) {
    std::string out;
    for (const auto& cycle : log.cycles) {
        nlohmann::ordered_json j;
        j["t"] = cycle.t;
        j["p_pass"] = cycle.posterior.p_pass;
        j["p_stop"] = cycle.posterior.p_stop;
        j["maneuver"] = to_string(cycle.maneuver);
        j["lambda"] = cycle.lambda;
        const auto points_of = [&](const Trajectory& traj) {
            nlohmann::ordered_json arr = nlohmann::ordered_json::array();
            // Skip the anchor when present (logs loaded from disk carry only
            // the horizon points).
            const std::size_t begin =
                !traj.empty() && std::abs(traj.front().t - cycle.t) <= 1e-9 ? 1 : 0;
            for (std::size_t i = begin; i < traj.size(); ++i)
                arr.push_back({traj[i].x, traj[i].y, traj[i].v});
            return arr;
        };
        j["pred"] = points_of(cycle.predicted);
        j["baseline"] = points_of(cycle.baseline);
        if (cycle.ed_realized)
            j["ed_realized"] = *cycle.ed_realized;
        else
            j["ed_realized"] = nullptr;
        out += j.dump() + "\n";
    }
    return out;
}

PredictionLog prediction_log_from_jsonl(const std::string& text, double tau) {
    PredictionLog log;
    std::istringstream in(text);
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IngestionError("prediction log line " + std::to_string(row) + ": " + e.what());
        }
        try {
            PredictionCycle cycle;
            cycle.t = j.at("t").get<double>();
            cycle.posterior.p_pass = j.at("p_pass").get<double>();
            cycle.posterior.p_stop = j.at("p_stop").get<double>();
            cycle.maneuver = intention_from_string(j.at("maneuver").get<std::string>());
            cycle.lambda = j.at("lambda").get<double>();
            const auto points_from = [&](const nlohmann::json& arr) {
                Trajectory traj;
                traj.dt = tau;
                std::size_t k = 1;
                for (const auto& entry : arr) {
                    TrajectoryPoint p;
                    p.t = cycle.t + static_cast<double>(k++) * tau;
                    p.x = entry.at(0).get<double>();
                    p.y = entry.at(1).get<double>();
                    p.v = entry.at(2).get<double>();
                    traj.points.push_back(p);
                }
                return traj;
            };
            cycle.predicted = points_from(j.at("pred"));
            cycle.baseline = points_from(j.at("baseline"));
            if (!j.at("ed_realized").is_null()) cycle.ed_realized = j.at("ed_realized").get<double>();
            log.cycles.push_back(std::move(cycle));
        } catch (const nlohmann::json::exception& e) {
            throw IngestionError("prediction log line " + std::to_string(row) + ": " + e.what());
        }
    }
    return log;
}

void save_prediction_log(const std::filesystem::path& path, const PredictionLog& log) {
    write_text_atomic(path, prediction_log_to_jsonl(log));
}

PredictionLog load_prediction_log(const std::filesystem::path& path, double tau) {
    auto log = prediction_log_from_jsonl(read_text_file(path), tau);
    log.record_id = path.stem().string();
    return log;
}

}  // namespace ylr
