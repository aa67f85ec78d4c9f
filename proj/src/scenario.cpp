#include "ylr/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

#include "ylr/errors.hpp"
#include "ylr/features.hpp"
#include "ylr/file_util.hpp"
#include "ylr/intention_bn.hpp"
#include "ylr/kinematics.hpp"
#include "ylr/parallel.hpp"
#include "ylr/rng.hpp"
#include "ylr/trajectory_csv.hpp"
#include "ylr/trajopt.hpp"

namespace ylr {

namespace {

constexpr double kStopBarX = 100.0;
constexpr double kWarmup = 1.0;        // s of pre-yellow driving
constexpr double kQueueOffset = 5.0;   // m upstream of the bar without a queued leader
constexpr double kFvStopCenter = kStopBarX - 3.0;
constexpr double kQueueStandstillGap = 3.5;  // m bumper gap behind a queued leader
constexpr double kComfortDecel = 3.2;  // m/s^2 a driver is willing to plan with
constexpr double kMaxSpeed = 60.0;     // m/s ingestion plausibility bound
constexpr int kMaxManeuverSteps = 200;  // cap on the post-onset planning horizon



double max_travel(double v, double accel, double v_cap, double horizon) {
    if (accel > 0.0 && v < v_cap) {
        const double t_acc = std::min(horizon, (v_cap - v) / accel);
        return v * t_acc + 0.5 * accel * t_acc * t_acc + v_cap * (horizon - t_acc);
    }
    return v * horizon;
}

double following_accel(double v, double v_des, double x, double t, const Trajectory& fv,
                       const ControlBounds& bounds) {
    double a = 0.8 * (v_des - v);
    const double gap = position_at(fv, t) - x - kVehicleLength;
    const double a_gap = 0.4 * (gap - (2.0 + 1.5 * v)) + 0.8 * (speed_at(fv, t) - v);
    a = std::min(a, a_gap);
    return std::clamp(a, bounds.a_min, bounds.a_max);
}

double brake_to_point_accel(double v, double x, double x_stop, const ControlBounds& bounds) {
    const double dist = x_stop - x;
    if (dist <= 0.3 || v <= 0.0) return std::clamp(-v / 0.1, bounds.a_min, 0.0);
    return std::clamp(-v * v / (2.0 * dist), bounds.a_min, 0.0);
}

Trajectory simulate_front_vehicle(double x0, double v0, double tau, int steps, bool brake_after,
                                  double brake_start_time) {
    TrajectoryPoint p{0.0, x0, 0.0, v0, 0.0, 0.0};
    Trajectory traj;
    traj.dt = tau;
    traj.points.push_back(p);
    ControlBounds bounds;
    for (int i = 0; i < steps; ++i) {
        double a = 0.0;
        if (brake_after && p.t >= brake_start_time - 1e-9)
            a = brake_to_point_accel(p.v, p.x, kFvStopCenter, bounds);
        p = kinematic_step(p, a, 0.0, tau);
        traj.points.push_back(p);
    }
    return traj;
}

struct IntentDecision {
    Intention intention;
    bool fv_brakes{false};
};

IntentDecision decide_intent(const ScenarioConfig& cfg, Rng& rng, const TrajectoryPoint& onset_state,
                             const Trajectory& fv, bool fv_can_brake) {
    const double dist_bar = kStopBarX - onset_state.x;
    const double onset_t = onset_state.t;

    // The leader joins the queue only when it is still short of its stop point
    // and the follower can physically stop behind it.
    bool fv_brakes = false;
    if (fv_can_brake) {
        const double fv_x = position_at(fv, onset_t);
        const double queue_if_braking = kFvStopCenter - kVehicleLength - kQueueStandstillGap;
        const double dist_queue = queue_if_braking - onset_state.x;
        fv_brakes = fv_x < kFvStopCenter - 2.0 && dist_queue > 1.0 &&
                    onset_state.v * onset_state.v / (2.0 * dist_queue) <= 4.0;
    }
    const double x_queue =
        fv_brakes ? kFvStopCenter - kVehicleLength - kQueueStandstillGap : kStopBarX - kQueueOffset;

    if (cfg.policy == IntentPolicy::ForcePass) return {Intention::Pass, false};
    if (cfg.policy == IntentPolicy::ForceStop) return {Intention::Stop, fv_brakes};
    if (fv_brakes) return {Intention::Stop, true};

    const double dist_queue = x_queue - onset_state.x;
    const bool feasible_stop =
        dist_queue > 1.0 && onset_state.v * onset_state.v / (2.0 * dist_queue) <= kComfortDecel;
    // Conservative pass check: gentle acceleration, and the leader must clear
    // the bar within the yellow.
    const double yellow_end = onset_t + cfg.yellow_duration;
    bool feasible_pass =
        max_travel(onset_state.v, 1.0, std::max(onset_state.v, cfg.v_lim), cfg.yellow_duration) >=
        dist_bar + 2.0;
    if (feasible_pass) {
        const double fv_x_end = position_at(fv, std::min(yellow_end, fv.end_time()));
        feasible_pass = fv_x_end - kVehicleLength - 2.0 >= kStopBarX - 2.0;
    }

    if (!feasible_stop) return {Intention::Pass, false};
    if (!feasible_pass) return {Intention::Stop, false};
    const double tti = dist_bar / std::max(onset_state.v, 0.1);
    const double p_stop = 1.0 / (1.0 + std::exp(-(tti - cfg.yellow_duration)));
    return {rng.bernoulli(p_stop) ? Intention::Stop : Intention::Pass, false};
}

std::string record_id(const std::string& prefix, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%04zu", prefix.c_str(), index);
    return buf;
}

}  // namespace

OptimizerConfig scenario_driver_optimizer() {
    OptimizerConfig cfg;
    cfg.tol = 1e-5;
    return cfg;
}

WeightVector scenario_driver_weights(Intention maneuver) {
    WeightVector theta;
    theta.maneuver = maneuver;
    if (maneuver == Intention::Pass)
        theta.theta << 0.08, 0.5, 2.0, 60.0, 60.0;
    else
        theta.theta << 0.5, 0.3, 60.0, 60.0, 0.55;
    return theta;
}

void ScenarioConfig::validate() const {
    if (!(approach_speed_min > 0.0) || approach_speed_min > approach_speed_max ||
        approach_speed_max > kMaxSpeed)
        throw ValidationError("approach speed range is degenerate");
    if (!(initial_distance_min > kQueueOffset + 3.0) || initial_distance_min > initial_distance_max)
        throw ValidationError("initial distance range is degenerate");
    if (!(yellow_duration > 0.0)) throw ValidationError("yellow duration must be positive");
    if (!(v_lim > 0.0) || v_lim > kMaxSpeed) throw ValidationError("speed limit is implausible");
    if (!(lambda_star >= 0.0 && lambda_star <= 1.0))
        throw ValidationError("lambda_star must lie in [0, 1]");
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");

    if (policy == IntentPolicy::ForceStop) {
        const double queue_offset =
            fv_profile == FrontVehicleProfile::Brake
                ? kStopBarX - (kFvStopCenter - kVehicleLength - kQueueStandstillGap)
                                                     : kQueueOffset;
        const double worst_dist = initial_distance_min - queue_offset;
        if (worst_dist <= 1.0 ||
            approach_speed_max * approach_speed_max / (2.0 * worst_dist) > kComfortDecel)
            throw ValidationError("ForceStop ranges cannot brake to the queue comfortably");
    }
    if (policy == IntentPolicy::ForcePass) {
        if (fv_profile == FrontVehicleProfile::Brake)
            throw ValidationError("ForcePass behind a braking front vehicle is contradictory");
        if (max_travel(approach_speed_min, 1.0, std::max(approach_speed_min, v_lim), yellow_duration) <
            initial_distance_max + 2.0)
            throw ValidationError("ForcePass ranges cannot clear the stop bar within the yellow");
        if (fv_profile == FrontVehicleProfile::Cruise &&
            (initial_distance_max - 15.0) / (0.95 * v_lim) > yellow_duration - 0.5)
            throw ValidationError("ForcePass ranges leave the front vehicle blocking the bar");
    }
}

ScenarioRecord generate_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const double tau = cfg.tau;
    const ControlBounds bounds;

    const double v0 = rng.uniform(cfg.approach_speed_min, cfg.approach_speed_max);
    const double d0 = rng.uniform(cfg.initial_distance_min, cfg.initial_distance_max);

    const double x_onset = kStopBarX - d0;
    const double x0 = x_onset - v0 * kWarmup;
    const double yellow_onset = kWarmup;

    // Front vehicle: first a full cruise trajectory; rebuilt with a braking
    // tail if the scene calls for it once the onset state is known. Must
    // cover the longest possible maneuver horizon.
    const int fv_steps = static_cast<int>(
        std::ceil((kWarmup + (kMaxManeuverSteps + 10) * tau + 1.0) / tau));
    double fv_x0 = x0 + 300.0;
    double fv_v0 = cfg.v_lim;
    if (cfg.fv_profile != FrontVehicleProfile::None) {
        const double gap0 = std::clamp(rng.uniform(1.2, 2.2) * v0 + rng.uniform(4.0, 10.0), 8.0, 60.0);
        fv_x0 = x0 + gap0;
        fv_v0 = cfg.policy == IntentPolicy::ForcePass
                    ? rng.uniform(0.95, 1.08) * cfg.v_lim
                    : std::clamp(rng.uniform(0.9, 1.1) * v0, 3.0, 1.08 * cfg.v_lim);
    }
    Trajectory fv = simulate_front_vehicle(fv_x0, fv_v0, tau, fv_steps, false, 0.0);

    // Warmup: car following toward the drawn approach speed.
    Trajectory target;
    target.dt = tau;
    target.points.push_back({0.0, x0, 0.0, v0, 0.0, 0.0});
    const int warmup_steps = static_cast<int>(std::round(kWarmup / tau));
    for (int i = 0; i < warmup_steps; ++i) {
        const auto& p = target.points.back();
        const double a = following_accel(p.v, v0, p.x, p.t, fv, bounds);
        target.points.push_back(kinematic_step(p, a, 0.0, tau));
    }

    const auto decision = decide_intent(cfg, rng, target.points.back(), fv,
                                        cfg.fv_profile == FrontVehicleProfile::Brake);
    if (decision.fv_brakes)
        fv = simulate_front_vehicle(fv_x0, fv_v0, tau, fv_steps, true, yellow_onset);

    EnvironmentState env;
    env.yellow_onset = yellow_onset;
    env.yellow_duration = cfg.yellow_duration;
    env.stop_bar_x = kStopBarX;
    env.v_lim = cfg.v_lim;
    env.fv_trajectory = fv;
    env.x_queue = decision.fv_brakes ? kFvStopCenter - kVehicleLength - kQueueStandstillGap
                                     : kStopBarX - kQueueOffset;
    env.i_launch = static_cast<std::int64_t>(std::llround((kMaxManeuverSteps + 60) * 1.0));
    env.a_max_naive = 2.0;
    env.validate();

    const WeightVector styled =
        apply_lambda(scenario_driver_weights(decision.intention), cfg.lambda_star);

    // Post-onset behavior is one full-horizon cost minimization: long enough
    // to cover the whole maneuver (clearing the bar or parking at the queue)
    // and in any case the end of the yellow, so the labeling rule applies.
    const auto& onset_state = target.points.back();
    const double label_span = cfg.yellow_duration + 0.6;
    double span;
    if (decision.intention == Intention::Pass) {
        const double dist_bar = kStopBarX - onset_state.x;
        span = std::max(dist_bar / std::max(onset_state.v, 1.0) + 1.5, label_span);
    } else {
        const double dist_queue = env.x_queue - onset_state.x;
        // Enough parked samples after the brake that the queue term pins the
        // stop position; long approaches need proportionally more.
        const double approach = dist_queue / std::max(0.85 * onset_state.v, 1.0);
        span = std::max(approach + onset_state.v / 2.0 + 2.5 + 0.5 * approach, label_span);
    }
    OptimizerConfig plan_cfg = scenario_driver_optimizer();
    plan_cfg.tau = tau;
    plan_cfg.horizon = std::clamp(static_cast<int>(std::ceil(span / tau)),
                                  static_cast<int>(std::ceil(label_span / tau)), kMaxManeuverSteps);
    const auto plan = optimize_trajectory(styled, env, onset_state, plan_cfg);
    target.points.insert(target.points.end(), plan.trajectory.points.begin() + 1,
                         plan.trajectory.points.end());

    ScenarioRecord record;
    record.target = std::move(target);
    record.env = std::move(env);
    record.intention = decision.intention;
    record.lambda_star = cfg.lambda_star;
    return record;
}

std::vector<ScenarioRecord> generate_batch(const ScenarioConfig& cfg, std::size_t count,
                                           const std::string& id_prefix) {
    cfg.validate();
    std::vector<ScenarioRecord> records(count);
    parallel_for_index(count, [&](std::size_t i) {
        ScenarioConfig local = cfg;
        local.seed = Rng::derive(cfg.seed, i);
        records[i] = generate_scenario(local);
        records[i].id = record_id(id_prefix, i);
    });
    return records;
}

void save_dataset(const std::filesystem::path& dir, const std::vector<ScenarioRecord>& records) {
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json manifest;
    manifest["records"] = nlohmann::ordered_json::array();
    for (const auto& record : records) {
        const std::string id = record.id.empty() ? record_id("r", manifest["records"].size()) : record.id;
        const std::string scenario_name = id + ".scenario.json";
        const std::string target_name = id + ".target.csv";
        const std::string fv_name = id + ".fv.csv";

        nlohmann::ordered_json scenario;
        scenario["yellow_onset"] = record.env.yellow_onset;
        scenario["yellow_duration"] = record.env.yellow_duration;
        scenario["stop_bar_x"] = record.env.stop_bar_x;
        scenario["v_lim"] = record.env.v_lim;
        scenario["x_queue"] = record.env.x_queue;
        scenario["i_launch"] = record.env.i_launch;
        scenario["fv_csv_path"] = fv_name;
        scenario["a_max_naive"] = record.env.a_max_naive;
        write_text_atomic(dir / scenario_name, scenario.dump(2) + "\n");

        write_trajectory_csv(dir / target_name, {{"target", record.target}});
        write_trajectory_csv(dir / fv_name, {{"fv", record.env.fv_trajectory}});

        manifest["records"].push_back({{"id", id},
                                       {"scenario", scenario_name},
                                       {"target_csv", target_name},
                                       {"label", to_string(record.intention)},
                                       {"lambda_star", record.lambda_star}});
    }
    write_text_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

namespace {

void check_plausible_speeds(const CsvVehicle& vehicle, const std::filesystem::path& path) {
    for (std::size_t i = 0; i < vehicle.trajectory.size(); ++i) {
        if (vehicle.trajectory[i].v > kMaxSpeed)
            throw IngestionError(path.string() + ": vehicle '" + vehicle.vehicle_id + "' sample " +
                                 std::to_string(i) + " has implausible speed " +
                                 std::to_string(vehicle.trajectory[i].v) + " m/s");
    }
}

Trajectory load_single_vehicle(const std::filesystem::path& path, double tau) {
    const auto vehicles = read_trajectory_csv(path);
    if (vehicles.empty()) throw IngestionError(path.string() + ": no samples");
    if (vehicles.size() != 1)
        throw IngestionError(path.string() + ": expected exactly one vehicle, found " +
                             std::to_string(vehicles.size()));
    check_plausible_speeds(vehicles.front(), path);
    return resample_trajectory(vehicles.front().trajectory, tau);
}

ScenarioRecord load_record(const std::filesystem::path& dir, const std::string& id,
                           const std::string& scenario_name, const std::string& target_name,
                           const std::optional<Intention>& label, double lambda_star, double tau) {
    nlohmann::json scenario;
    try {
        scenario = nlohmann::json::parse(read_text_file(dir / scenario_name));
    } catch (const nlohmann::json::exception& e) {
        throw IngestionError(scenario_name + ": bad scenario JSON: " + e.what());
    }
    ScenarioRecord record;
    record.id = id;
    record.lambda_star = lambda_star;
    try {
        record.env.yellow_onset = scenario.at("yellow_onset").get<double>();
        record.env.yellow_duration = scenario.at("yellow_duration").get<double>();
        record.env.stop_bar_x = scenario.at("stop_bar_x").get<double>();
        record.env.v_lim = scenario.at("v_lim").get<double>();
        record.env.x_queue = scenario.at("x_queue").get<double>();
        record.env.i_launch = scenario.at("i_launch").get<std::int64_t>();
        record.env.a_max_naive = scenario.value("a_max_naive", 2.0);
        const auto fv_name = scenario.at("fv_csv_path").get<std::string>();
        record.env.fv_trajectory = load_single_vehicle(dir / fv_name, tau);
    } catch (const nlohmann::json::exception& e) {
        throw IngestionError(scenario_name + ": bad scenario JSON: " + e.what());
    }
    record.env.validate();
    record.target = load_single_vehicle(dir / target_name, tau);
    record.intention = label ? *label : label_trajectory(record.target, record.env);
    return record;
}

}  // namespace

std::vector<ScenarioRecord> load_dataset(const std::filesystem::path& dir, double tau) {
    if (!std::filesystem::is_directory(dir))
        throw IngestionError("dataset directory does not exist: " + dir.string());

    std::vector<ScenarioRecord> records;
    const auto manifest_path = dir / "manifest.json";
    if (std::filesystem::exists(manifest_path)) {
        nlohmann::json manifest;
        try {
            manifest = nlohmann::json::parse(read_text_file(manifest_path));
            for (const auto& entry : manifest.at("records")) {
                std::optional<Intention> label;
                if (entry.contains("label"))
                    label = intention_from_string(entry.at("label").get<std::string>());
                records.push_back(load_record(dir, entry.at("id").get<std::string>(),
                                              entry.at("scenario").get<std::string>(),
                                              entry.at("target_csv").get<std::string>(), label,
                                              entry.value("lambda_star",
                                                          std::numeric_limits<double>::quiet_NaN()),
                                              tau));
            }
        } catch (const nlohmann::json::exception& e) {
            throw IngestionError("manifest.json: " + std::string(e.what()));
        }
        return records;
    }

    // No manifest: every *.scenario.json with the conventional file names.
    std::vector<std::string> ids;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        const std::string suffix = ".scenario.json";
        if (name.size() > suffix.size() && name.ends_with(suffix))
            ids.push_back(name.substr(0, name.size() - suffix.size()));
    }
    std::sort(ids.begin(), ids.end());
    if (ids.empty()) throw IngestionError("no manifest.json or *.scenario.json in " + dir.string());
    for (const auto& id : ids)
        records.push_back(load_record(dir, id, id + ".scenario.json", id + ".target.csv", {},
                                      std::numeric_limits<double>::quiet_NaN(), tau));
    return records;
}

}  // namespace ylr
