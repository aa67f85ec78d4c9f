// Command-line surface: dataset simulation, model training, rolling-horizon
// prediction, evaluation, and the brute-force oracle checks.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ylr/evaluation.hpp"
#include "ylr/file_util.hpp"
#include "ylr/online.hpp"
#include "ylr/oracle.hpp"
#include "ylr/parallel.hpp"
#include "ylr/rng.hpp"
#include "ylr/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIngestion = 3;
constexpr int kExitNotConverged = 4;

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    try {
        return json::parse(ylr::read_text_file(path));
    } catch (const json::exception& e) {
        throw ylr::IngestionError("config file " + path + ": " + e.what());
    }
}

void apply_scenario_config(const json& j, ylr::ScenarioConfig& cfg) {
    if (j.contains("approach_speed")) {
        cfg.approach_speed_min = j["approach_speed"].at(0).get<double>();
        cfg.approach_speed_max = j["approach_speed"].at(1).get<double>();
    }
    if (j.contains("initial_distance")) {
        cfg.initial_distance_min = j["initial_distance"].at(0).get<double>();
        cfg.initial_distance_max = j["initial_distance"].at(1).get<double>();
    }
    cfg.yellow_duration = j.value("yellow_duration", cfg.yellow_duration);
    cfg.v_lim = j.value("v_lim", cfg.v_lim);
    cfg.lambda_star = j.value("lambda_star", cfg.lambda_star);
    cfg.tau = j.value("tau", cfg.tau);
}

void apply_optimizer_config(const json& j, ylr::OptimizerConfig& cfg) {
    cfg.max_iters = j.value("max_iters", cfg.max_iters);
    cfg.grad_step = j.value("grad_step", cfg.grad_step);
    cfg.tol = j.value("tol", cfg.tol);
    cfg.restarts = j.value("restarts", cfg.restarts);
    if (j.contains("bounds")) {
        cfg.bounds.a_min = j["bounds"].value("a_min", cfg.bounds.a_min);
        cfg.bounds.a_max = j["bounds"].value("a_max", cfg.bounds.a_max);
        cfg.bounds.psi_max = j["bounds"].value("psi_max", cfg.bounds.psi_max);
    }
}

// Demo windows for offline training: the whole maneuver from yellow onset to
// the end of the record, each demo solved over its own horizon.
std::vector<ylr::Demonstration> training_windows(const std::vector<ylr::ScenarioRecord>& records,
                                                 ylr::Intention maneuver, int max_steps = 250) {
    std::vector<ylr::Demonstration> demos;
    for (const auto& record : records) {
        if (record.intention != maneuver) continue;
        const auto& traj = record.target;
        auto start = static_cast<std::ptrdiff_t>(
            std::llround((record.env.yellow_onset - traj.start_time()) / traj.dt));
        start = std::clamp<std::ptrdiff_t>(start, 0, static_cast<std::ptrdiff_t>(traj.size()) - 2);
        const auto count = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(traj.size()) - start,
                                                    max_steps + 1);
        ylr::Demonstration demo;
        demo.env = record.env;
        demo.trajectory.dt = traj.dt;
        demo.trajectory.points.assign(traj.points.begin() + start, traj.points.begin() + start + count);
        demos.push_back(std::move(demo));
    }
    return demos;
}

int cmd_simulate(const std::string& out_dir, std::uint64_t seed, const std::string& preset,
                 int count, const std::string& config_path) {
    const json config = load_config(config_path);

    ylr::ScenarioConfig base;
    base.seed = seed;
    apply_scenario_config(config, base);

    std::vector<ylr::ScenarioRecord> records;
    const auto add_forced = [&](ylr::IntentPolicy policy, int n, std::uint64_t stream) {
        ylr::ScenarioConfig cfg = base;
        cfg.policy = policy;
        if (policy == ylr::IntentPolicy::ForcePass && !config.contains("initial_distance")) {
            cfg.initial_distance_min = 12.0;
            cfg.initial_distance_max = 32.0;
        }
        if (policy == ylr::IntentPolicy::ForceStop && !config.contains("initial_distance")) {
            cfg.initial_distance_min = 32.0;
            cfg.initial_distance_max = 50.0;
            if (!config.contains("approach_speed")) {
                cfg.approach_speed_min = 7.0;
                cfg.approach_speed_max = 11.0;
            }
        }
        const std::size_t offset = records.size();
        records.resize(offset + static_cast<std::size_t>(n));
        ylr::parallel_for_index(static_cast<std::size_t>(n), [&](std::size_t i) {
            ylr::ScenarioConfig local = cfg;
            local.seed = ylr::Rng::derive(seed, stream * 100000 + i);
            // Cycle the leader profile so headway features see variety. Stops
            // behind a braking leader stay out of the training mix: their
            // parked headway is pinned by x_queue, which prediction receives
            // as an input.
            local.fv_profile = i % 2 == 0 ? ylr::FrontVehicleProfile::Cruise
                                          : ylr::FrontVehicleProfile::None;
            records[offset + i] = ylr::generate_scenario(local);
        });
    };
    const auto add_dilemma = [&](int n, bool vary_lambda, std::uint64_t stream) {
        const std::size_t offset = records.size();
        records.resize(offset + static_cast<std::size_t>(n));
        ylr::parallel_for_index(static_cast<std::size_t>(n), [&](std::size_t i) {
            ylr::ScenarioConfig local = base;
            local.policy = ylr::IntentPolicy::DilemmaZone;
            local.seed = ylr::Rng::derive(seed, stream * 100000 + i);
            local.fv_profile = i % 3 == 0   ? ylr::FrontVehicleProfile::None
                               : i % 3 == 1 ? ylr::FrontVehicleProfile::Cruise
                                            : ylr::FrontVehicleProfile::Brake;
            if (vary_lambda && !config.contains("lambda_star")) {
                ylr::Rng style(ylr::Rng::derive(seed, stream * 100000 + 50000 + i));
                local.lambda_star = 0.15 + 0.7 * style.uniform();
            }
            records[offset + i] = ylr::generate_scenario(local);
        });
    };

    if (preset == "train") {
        const int half = count > 0 ? count / 2 : 30;
        add_forced(ylr::IntentPolicy::ForcePass, half, 1);
        add_forced(ylr::IntentPolicy::ForceStop, half, 2);
    } else if (preset == "test") {
        add_dilemma(count > 0 ? count : 60, true, 3);
    } else if (preset == "intent") {
        add_dilemma(count > 0 ? count : 361, false, 4);
    } else {
        throw ylr::ValidationError("unknown preset '" + preset + "' (train, test, intent)");
    }

    for (std::size_t i = 0; i < records.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "r%04zu", i);
        records[i].id = buf;
    }
    ylr::save_dataset(out_dir, records);
    std::printf("simulate: wrote %zu records to %s\n", records.size(), out_dir.c_str());
    return kExitOk;
}

int cmd_train_bn(const std::string& data_dir, const std::string& out_file, int k_bins, double alpha) {
    const auto records = ylr::load_dataset(data_dir);
    const auto samples = ylr::collect_labeled_evidence(records);
    const auto model = ylr::fit_bn(samples, k_bins, alpha);
    ylr::save_bn(out_file, model);
    std::printf("train-bn: %zu samples from %zu records -> %s\n", samples.size(), records.size(),
                out_file.c_str());
    return kExitOk;
}

int cmd_train_irl(const std::string& data_dir, const std::string& out_file,
                  const std::string& config_path) {
    const json config = load_config(config_path);
    ylr::TrainConfig cfg;
    cfg.optimizer = ylr::scenario_driver_optimizer();
    cfg.learning_rate = config.value("learning_rate", cfg.learning_rate);
    cfg.grad_tol = config.value("grad_tol", cfg.grad_tol);
    cfg.max_epochs = config.value("max_epochs", cfg.max_epochs);
    if (config.contains("optimizer")) apply_optimizer_config(config["optimizer"], cfg.optimizer);

    const auto records = ylr::load_dataset(data_dir);
    ylr::IrlModel model;
    bool converged = true;
    for (const auto maneuver : {ylr::Intention::Pass, ylr::Intention::Stop}) {
        const auto demos = training_windows(records, maneuver);
        auto trained = ylr::train_maxent_irl(demos, maneuver, cfg);
        std::printf("train-irl: %s on %zu demos, %d epochs, gap %.4f, %s\n",
                    ylr::to_string(maneuver), demos.size(), trained.meta.epochs,
                    trained.meta.grad_inf_norm, trained.meta.converged ? "converged" : "NOT converged");
        converged = converged && trained.meta.converged;
        (maneuver == ylr::Intention::Pass ? model.pass_model : model.stop_model) = std::move(trained);
    }
    ylr::save_irl(out_file, model);
    std::printf("train-irl: wrote %s\n", out_file.c_str());
    return converged ? kExitOk : kExitNotConverged;
}

ylr::PredictConfig predict_config(const json& config) {
    ylr::PredictConfig cfg;
    cfg.replan_interval = config.value("replan_interval", cfg.replan_interval);
    cfg.horizon = config.value("horizon", cfg.horizon);
    cfg.tau = config.value("tau", cfg.tau);
    if (config.contains("lambda_grid"))
        cfg.driver.grid = config["lambda_grid"].get<std::vector<double>>();
    cfg.driver.lambda = config.value("initial_lambda", cfg.driver.lambda);
    if (config.contains("optimizer")) apply_optimizer_config(config["optimizer"], cfg.optimizer);
    return cfg;
}

int cmd_predict(const std::string& data_dir, const std::string& bn_file, const std::string& irl_file,
                const std::string& out_dir, const std::string& config_path) {
    const auto cfg = predict_config(load_config(config_path));
    const auto records = ylr::load_dataset(data_dir, cfg.tau);
    const auto bn = ylr::load_bn(bn_file);
    const auto irl = ylr::load_irl(irl_file);

    fs::create_directories(out_dir);
    for (const auto& record : records) {
        auto log = ylr::rolling_predict(record.target, record.env, bn, irl, cfg);
        log.record_id = record.id;
        ylr::save_prediction_log(fs::path(out_dir) / (record.id + ".jsonl"), log);
    }
    std::printf("predict: wrote %zu logs to %s\n", records.size(), out_dir.c_str());
    return kExitOk;
}

int cmd_evaluate(const std::string& data_dir, const std::string& bn_file, const std::string& irl_file,
                 const std::string& logs_dir, const std::string& out_dir,
                 const std::string& config_path) {
    const auto cfg = predict_config(load_config(config_path));
    const auto records = ylr::load_dataset(data_dir, cfg.tau);
    fs::create_directories(out_dir);

    nlohmann::ordered_json report;
    std::vector<ylr::PredictionLog> logs;

    if (!bn_file.empty()) {
        const auto bn = ylr::load_bn(bn_file);
        const auto intention = ylr::evaluate_intention(bn, records);
        report["intention"] = nlohmann::ordered_json::parse(ylr::intention_report_json(intention));
        ylr::write_text_atomic(fs::path(out_dir) / "intention_by_decile.csv",
                               ylr::intention_decile_csv(intention));

        if (!logs_dir.empty()) {
            for (const auto& record : records) {
                const auto path = fs::path(logs_dir) / (record.id + ".jsonl");
                if (fs::exists(path)) logs.push_back(ylr::load_prediction_log(path, cfg.tau));
            }
        } else if (!irl_file.empty()) {
            const auto irl = ylr::load_irl(irl_file);
            for (const auto& record : records) {
                auto log = ylr::rolling_predict(record.target, record.env, bn, irl, cfg);
                log.record_id = record.id;
                logs.push_back(std::move(log));
            }
        }
    }
    if (!logs.empty()) {
        const auto trajectory = ylr::evaluate_trajectory(logs, records);
        report["trajectory"] = nlohmann::ordered_json::parse(ylr::trajectory_report_json(trajectory));
        ylr::write_text_atomic(fs::path(out_dir) / "cycle_ed.csv", ylr::cycle_ed_csv(logs, records));
    }
    if (report.empty())
        throw ylr::ValidationError("evaluate needs --bn (and --irl or --logs for trajectories)");

    ylr::write_text_atomic(fs::path(out_dir) / "report.json", report.dump(2) + "\n");
    std::printf("evaluate: wrote %s/report.json\n", out_dir.c_str());
    return kExitOk;
}

int cmd_oracle(std::uint64_t seed, int trials) {
    const auto report = [](const char* name, const ylr::OracleCheck& check) {
        std::printf("[%s] %-28s max error %.3e over %d trials\n", check.passed ? "PASS" : "FAIL",
                    name, check.max_error, check.trials);
        return check.passed;
    };
    bool ok = true;
    ok &= report("bn joint-table equivalence", ylr::check_bn_inference(seed, trials));
    ok &= report("softmin normalization", ylr::check_softmin_normalization(seed + 1, trials));
    ok &= report("likelihood gradient vs FD", ylr::check_maxent_gradient(seed + 2));
    return ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-phase vehicle behavior prediction at signalized intersections"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string config_path;
    std::string out;
    std::string data_dir, bn_file, irl_file, logs_dir, preset = "test";
    int count = 0, k_bins = 5, trials = 100;
    double alpha = 1.0;

    auto* simulate = app.add_subcommand("simulate", "generate a synthetic scenario dataset");
    simulate->add_option("--out", out, "output dataset directory")->required();
    simulate->add_option("--seed", seed, "base seed");
    simulate->add_option("--preset", preset, "train | test | intent");
    simulate->add_option("--count", count, "record count override");
    simulate->add_option("--config", config_path, "scenario config JSON");

    auto* train_bn = app.add_subcommand("train-bn", "fit the intention network");
    train_bn->add_option("--data", data_dir, "dataset directory")->required();
    train_bn->add_option("--out", out, "output model file")->required();
    train_bn->add_option("--k-bins", k_bins, "bins per evidence variable");
    train_bn->add_option("--alpha", alpha, "Laplace smoothing count");
    train_bn->add_option("--seed", seed, "unused; accepted for uniformity");
    train_bn->add_option("--config", config_path, "unused; accepted for uniformity");

    auto* train_irl = app.add_subcommand("train-irl", "train the maneuver cost weights");
    train_irl->add_option("--data", data_dir, "dataset directory")->required();
    train_irl->add_option("--out", out, "output model file")->required();
    train_irl->add_option("--config", config_path, "training config JSON");
    train_irl->add_option("--seed", seed, "unused; accepted for uniformity");

    auto* predict = app.add_subcommand("predict", "rolling-horizon prediction over a dataset");
    predict->add_option("--data", data_dir, "dataset directory")->required();
    predict->add_option("--bn", bn_file, "intention model file")->required();
    predict->add_option("--irl", irl_file, "cost model file")->required();
    predict->add_option("--out", out, "output log directory")->required();
    predict->add_option("--config", config_path, "prediction config JSON");
    predict->add_option("--seed", seed, "unused; accepted for uniformity");

    auto* evaluate = app.add_subcommand("evaluate", "score models against a dataset");
    evaluate->add_option("--data", data_dir, "dataset directory")->required();
    evaluate->add_option("--bn", bn_file, "intention model file");
    evaluate->add_option("--irl", irl_file, "cost model file (predictions run in-process)");
    evaluate->add_option("--logs", logs_dir, "directory of prediction logs from `predict`");
    evaluate->add_option("--out", out, "output report directory")->required();
    evaluate->add_option("--config", config_path, "prediction config JSON");
    evaluate->add_option("--seed", seed, "unused; accepted for uniformity");

    auto* oracle = app.add_subcommand("oracle", "run the brute-force reference checks");
    oracle->add_option("--seed", seed, "seed for the random instances");
    oracle->add_option("--trials", trials, "trials per check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(out, seed, preset, count, config_path);
        if (train_bn->parsed()) return cmd_train_bn(data_dir, out, k_bins, alpha);
        if (train_irl->parsed()) return cmd_train_irl(data_dir, out, config_path);
        if (predict->parsed()) return cmd_predict(data_dir, bn_file, irl_file, out, config_path);
        if (evaluate->parsed())
            return cmd_evaluate(data_dir, bn_file, irl_file, logs_dir, out, config_path);
        if (oracle->parsed()) return cmd_oracle(seed, trials);
    } catch (const ylr::IngestionError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIngestion;
    } catch (const ylr::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    }
    return kExitOk;
}
