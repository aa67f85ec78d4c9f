#include "ylr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "ylr/errors.hpp"

namespace ylr {

namespace {

constexpr double kPhaseTol = 1e-9;

int decile_of(double elapsed, double duration) {
    const int d = static_cast<int>(std::floor(10.0 * elapsed / duration));
    return std::clamp(d, 0, 9);
}

struct CycleError {
    double model;
    double baseline;
};

// ED of one logged cycle against the recorded truth, truncated to the
// realized overlap. Logs loaded from disk carry horizon points only; logs
// straight out of the predictor also carry the anchor.
std::optional<CycleError> cycle_error(const PredictionCycle& cycle, const Trajectory& truth) {
    const auto anchor = static_cast<std::ptrdiff_t>(
        std::llround((cycle.t - truth.start_time()) / truth.dt));
    if (anchor < 0 || anchor >= static_cast<std::ptrdiff_t>(truth.size())) return std::nullopt;
    const std::size_t available = truth.size() - 1 - static_cast<std::size_t>(anchor);

    const auto ed_over = [&](const Trajectory& pred) -> std::optional<double> {
        if (pred.empty()) return std::nullopt;
        const bool anchored = std::abs(pred.front().t - cycle.t) <= 1e-9;
        const std::size_t horizon = anchored ? pred.size() - 1 : pred.size();
        const std::size_t count = std::min(horizon, available);
        if (count < 1) return std::nullopt;
        double sum = 0.0;
        for (std::size_t k = 1; k <= count; ++k) {
            const auto& p = pred[anchored ? k : k - 1];
            const auto& q = truth[static_cast<std::size_t>(anchor) + k];
            sum += std::sqrt((p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y));
        }
        return sum / static_cast<double>(count);
    };

    const auto model = ed_over(cycle.predicted);
    const auto baseline = ed_over(cycle.baseline);
    if (!model || !baseline) return std::nullopt;
    return CycleError{*model, *baseline};
}

const ScenarioRecord& record_for(const std::vector<ScenarioRecord>& truth, const std::string& id) {
    const auto it = std::find_if(truth.begin(), truth.end(),
                                 [&](const ScenarioRecord& r) { return r.id == id; });
    if (it == truth.end()) throw ValidationError("no ground-truth record with id '" + id + "'");
    return *it;
}

}  // namespace

std::vector<LabeledEvidence> collect_labeled_evidence(const std::vector<ScenarioRecord>& records) {
    std::vector<LabeledEvidence> out;
    for (const auto& record : records) {
        for (const auto& e : yellow_phase_evidence(record.target, record.env))
            out.push_back({e, record.intention});
    }
    return out;
}

IntentionEvaluation evaluate_intention(const BnModel& bn, const std::vector<ScenarioRecord>& records) {
    IntentionEvaluation eval;
    std::array<std::size_t, 10> bn_hits{};
    std::array<std::size_t, 10> naive_hits{};
    std::size_t bn_total = 0, naive_total = 0;

    for (const auto& record : records) {
        const auto& env = record.env;
        for (const auto& p : record.target.points) {
            if (p.t < env.yellow_onset - kPhaseTol || p.t > env.yellow_end() + kPhaseTol) continue;
            const double elapsed = std::max(0.0, p.t - env.yellow_onset);
            const int d = decile_of(elapsed, env.yellow_duration);

            const Intention bn_pred = infer_intention(bn, make_evidence(p, env)).argmax();
            const Intention naive_pred = naive_intention(p, env, p.t);

            ++eval.points_by_decile[static_cast<std::size_t>(d)];
            ++eval.total_points;
            if (bn_pred == record.intention) {
                ++bn_hits[static_cast<std::size_t>(d)];
                ++bn_total;
            }
            if (naive_pred == record.intention) {
                ++naive_hits[static_cast<std::size_t>(d)];
                ++naive_total;
            }
            if (bn_pred == Intention::Pass && record.intention == Intention::Pass) ++eval.true_pass;
            if (bn_pred == Intention::Stop && record.intention == Intention::Stop) ++eval.true_stop;
            if (bn_pred == Intention::Pass && record.intention == Intention::Stop) ++eval.false_pass;
            if (bn_pred == Intention::Stop && record.intention == Intention::Pass) ++eval.false_stop;
        }
    }
    if (eval.total_points == 0)
        throw ValidationError("no yellow-phase samples to evaluate");

    eval.bn_accuracy = static_cast<double>(bn_total) / static_cast<double>(eval.total_points);
    eval.naive_accuracy = static_cast<double>(naive_total) / static_cast<double>(eval.total_points);
    for (std::size_t d = 0; d < 10; ++d) {
        const auto n = eval.points_by_decile[d];
        eval.bn_accuracy_by_decile[d] = n ? static_cast<double>(bn_hits[d]) / static_cast<double>(n) : 0.0;
        eval.naive_accuracy_by_decile[d] =
            n ? static_cast<double>(naive_hits[d]) / static_cast<double>(n) : 0.0;
    }
    return eval;
}

TrajectoryEvaluation evaluate_trajectory(const std::vector<PredictionLog>& logs,
                                         const std::vector<ScenarioRecord>& truth) {
    TrajectoryEvaluation eval;
    double sum_model = 0.0, sum_baseline = 0.0, sum_pass = 0.0, sum_stop = 0.0;
    std::size_t wins = 0;

    for (const auto& log : logs) {
        const auto& record = record_for(truth, log.record_id);
        for (const auto& cycle : log.cycles) {
            const auto err = cycle_error(cycle, record.target);
            if (!err) {
                ++eval.cycles_skipped;
                continue;
            }
            ++eval.cycles_evaluated;
            sum_model += err->model;
            sum_baseline += err->baseline;
            if (err->model < err->baseline) ++wins;
            if (cycle.maneuver == Intention::Pass) {
                sum_pass += err->model;
                ++eval.pass_cycles;
            } else {
                sum_stop += err->model;
                ++eval.stop_cycles;
            }
        }
    }
    if (eval.cycles_evaluated > 0) {
        const auto n = static_cast<double>(eval.cycles_evaluated);
        eval.mean_ed = sum_model / n;
        eval.baseline_mean_ed = sum_baseline / n;
        eval.win_rate = static_cast<double>(wins) / n;
    }
    if (eval.pass_cycles > 0) eval.pass_mean_ed = sum_pass / static_cast<double>(eval.pass_cycles);
    if (eval.stop_cycles > 0) eval.stop_mean_ed = sum_stop / static_cast<double>(eval.stop_cycles);
    return eval;
}

std::string intention_report_json(const IntentionEvaluation& e) {
    nlohmann::ordered_json j;
    j["bn_accuracy"] = e.bn_accuracy;
    j["naive_accuracy"] = e.naive_accuracy;
    j["bn_accuracy_by_decile"] = e.bn_accuracy_by_decile;
    j["naive_accuracy_by_decile"] = e.naive_accuracy_by_decile;
    j["points_by_decile"] = e.points_by_decile;
    j["confusion"] = {{"true_pass", e.true_pass},
                      {"true_stop", e.true_stop},
                      {"false_pass", e.false_pass},
                      {"false_stop", e.false_stop}};
    j["total_points"] = e.total_points;
    return j.dump(2);
}

std::string trajectory_report_json(const TrajectoryEvaluation& e) {
    nlohmann::ordered_json j;
    j["mean_ed"] = e.mean_ed;
    j["baseline_mean_ed"] = e.baseline_mean_ed;
    j["pass_mean_ed"] = e.pass_mean_ed;
    j["stop_mean_ed"] = e.stop_mean_ed;
    j["pass_cycles"] = e.pass_cycles;
    j["stop_cycles"] = e.stop_cycles;
    j["win_rate"] = e.win_rate;
    j["cycles_evaluated"] = e.cycles_evaluated;
    j["cycles_skipped"] = e.cycles_skipped;
    return j.dump(2);
}

std::string intention_decile_csv(const IntentionEvaluation& e) {
    std::string out = "decile,points,bn_accuracy,naive_accuracy\n";
    char buf[128];
    for (std::size_t d = 0; d < 10; ++d) {
        std::snprintf(buf, sizeof(buf), "%zu,%zu,%.6f,%.6f\n", d, e.points_by_decile[d],
                      e.bn_accuracy_by_decile[d], e.naive_accuracy_by_decile[d]);
        out += buf;
    }
    return out;
}

std::string cycle_ed_csv(const std::vector<PredictionLog>& logs,
                         const std::vector<ScenarioRecord>& truth) {
    std::string out = "record_id,t,maneuver,lambda,ed_model,ed_baseline\n";
    char buf[256];
    for (const auto& log : logs) {
        const auto& record = record_for(truth, log.record_id);
        for (const auto& cycle : log.cycles) {
            const auto err = cycle_error(cycle, record.target);
            if (!err) continue;
            std::snprintf(buf, sizeof(buf), "%s,%.1f,%s,%.1f,%.6f,%.6f\n", log.record_id.c_str(),
                          cycle.t, to_string(cycle.maneuver), cycle.lambda, err->model, err->baseline);
            out += buf;
        }
    }
    return out;
}

}  // namespace ylr
