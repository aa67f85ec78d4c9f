#include "ylr/intention_bn.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "ylr/errors.hpp"
#include "ylr/file_util.hpp"

namespace ylr {

namespace {

constexpr double kTtiSpeedFloor = 0.1;  // m/s
constexpr double kTtiCap = 30.0;        // s
constexpr double kPhaseTol = 1e-9;

// Equal-frequency interior edges (type-7 quantiles), deduplicated so the
// sequence stays strictly increasing. Heavy ties can shrink the bin count.
std::vector<double> quantile_edges(std::vector<double> values, int k_bins) {
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    std::vector<double> edges;
    for (int i = 1; i < k_bins; ++i) {
        const double pos = static_cast<double>(i) / k_bins * static_cast<double>(n - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const double frac = pos - static_cast<double>(lo);
        const double edge = lo + 1 < n ? values[lo] + frac * (values[lo + 1] - values[lo])
                                       : values[lo];
        if (edges.empty() || edge > edges.back()) edges.push_back(edge);
    }
    return edges;
}

int bin_of(const std::vector<double>& edges, double value) {
    return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), value) - edges.begin());
}

int ce_row(const BnModel& m, const std::array<int, kNumEvidenceVars>& bins) {
    return (bins[0] * m.bins(1) + bins[1]) * m.bins(2) + bins[2];
}

Eigen::MatrixXd smoothed_rows(const Eigen::MatrixXd& counts, double alpha) {
    Eigen::MatrixXd table(counts.rows(), counts.cols());
    const auto cells = static_cast<double>(counts.cols());
    for (Eigen::Index r = 0; r < counts.rows(); ++r) {
        const double total = counts.row(r).sum();
        const double denom = total + alpha * cells;
        if (denom > 0.0)
            table.row(r) = (counts.row(r).array() + alpha) / denom;
        else
            table.row(r).setConstant(1.0 / cells);
    }
    return table;
}

}  // namespace

const std::array<std::string, kNumEvidenceVars>& evidence_var_names() {
    static const std::array<std::string, kNumEvidenceVars> names = {
        "elapsed_yellow", "tti", "rel_speed", "lon_speed", "lon_accel"};
    return names;
}

double evidence_value(const IntentionEvidence& e, int var) {
    switch (var) {
        case 0: return e.elapsed_yellow;
        case 1: return e.tti;
        case 2: return e.rel_speed;
        case 3: return e.lon_speed;
        case 4: return e.lon_accel;
        default: throw ValidationError("evidence variable index out of range");
    }
}

std::array<int, kNumEvidenceVars> discretize(const IntentionEvidence& e, const BnModel& model) {
    if (!model.fitted()) throw ValidationError("Bayesian network model is not fitted");
    std::array<int, kNumEvidenceVars> bins{};
    for (int var = 0; var < kNumEvidenceVars; ++var) {
        const double value = evidence_value(e, var);
        if (!std::isfinite(value))
            throw ValidationError("non-finite evidence for " + evidence_var_names()[static_cast<std::size_t>(var)]);
        bins[static_cast<std::size_t>(var)] = bin_of(model.bin_edges[static_cast<std::size_t>(var)], value);
    }
    return bins;
}

BnModel fit_bn(const std::vector<LabeledEvidence>& dataset, int k_bins, double alpha) {
    if (dataset.empty()) throw ValidationError("fit_bn needs a non-empty dataset");
    if (k_bins < 2) throw ValidationError("fit_bn needs k_bins >= 2");
    if (alpha < 0.0) throw ValidationError("fit_bn needs alpha >= 0");
    const auto n_pass = std::count_if(dataset.begin(), dataset.end(),
                                      [](const LabeledEvidence& s) { return s.label == Intention::Pass; });
    if (n_pass == 0 || n_pass == static_cast<long>(dataset.size()))
        throw ValidationError("fit_bn needs both pass and stop samples (degenerate dataset)");

    BnModel model;
    model.k_bins = k_bins;
    model.alpha = alpha;
    for (int var = 0; var < kNumEvidenceVars; ++var) {
        std::vector<double> values;
        values.reserve(dataset.size());
        for (const auto& s : dataset) {
            const double value = evidence_value(s.evidence, var);
            if (!std::isfinite(value)) throw ValidationError("non-finite evidence in training data");
            values.push_back(value);
        }
        model.bin_edges[static_cast<std::size_t>(var)] = quantile_edges(std::move(values), k_bins);
    }

    const int rows = model.bins(0) * model.bins(1) * model.bins(2);
    Eigen::MatrixXd intention_counts = Eigen::MatrixXd::Zero(rows, 2);
    std::array<Eigen::MatrixXd, kNumDiagnosticVars> de_counts;
    for (int j = 0; j < kNumDiagnosticVars; ++j)
        de_counts[static_cast<std::size_t>(j)] = Eigen::MatrixXd::Zero(2, model.bins(kNumCausalVars + j));

    // Needed only for discretize(); tables are filled below.
    model.cpt_intention = Eigen::MatrixXd::Zero(rows, 2);

    for (const auto& s : dataset) {
        const auto bins = discretize(s.evidence, model);
        const int intent = s.label == Intention::Pass ? 0 : 1;
        intention_counts(ce_row(model, bins), intent) += 1.0;
        for (int j = 0; j < kNumDiagnosticVars; ++j)
            de_counts[static_cast<std::size_t>(j)](intent, bins[static_cast<std::size_t>(kNumCausalVars + j)]) += 1.0;
    }

    model.cpt_intention = smoothed_rows(intention_counts, alpha);
    for (int j = 0; j < kNumDiagnosticVars; ++j)
        model.cpt_de[static_cast<std::size_t>(j)] = smoothed_rows(de_counts[static_cast<std::size_t>(j)], alpha);
    return model;
}

IntentionPosterior infer_intention(const BnModel& model, const IntentionEvidence& e) {
    const auto bins = discretize(e, model);
    const int row = ce_row(model, bins);
    double num_pass = model.cpt_intention(row, 0);
    double num_stop = model.cpt_intention(row, 1);
    for (int j = 0; j < kNumDiagnosticVars; ++j) {
        const auto& table = model.cpt_de[static_cast<std::size_t>(j)];
        const int bin = bins[static_cast<std::size_t>(kNumCausalVars + j)];
        num_pass *= table(0, bin);
        num_stop *= table(1, bin);
    }
    const double total = num_pass + num_stop;
    if (!(total > 0.0)) return {0.5, 0.5};
    return {num_pass / total, num_stop / total};
}

Intention label_trajectory(const Trajectory& traj, const EnvironmentState& env, double d_label) {
    const double t_end_of_yellow = env.yellow_end();
    if (traj.empty() || traj.start_time() > t_end_of_yellow + kPhaseTol ||
        traj.end_time() < t_end_of_yellow - kPhaseTol)
        throw ValidationError("trajectory does not cover the end of the yellow phase");
    const double x = position_at(traj, t_end_of_yellow);
    return (env.stop_bar_x - x) > d_label ? Intention::Stop : Intention::Pass;
}

Intention naive_intention(const TrajectoryPoint& state, const EnvironmentState& env, double now) {
    if (now < env.yellow_onset - kPhaseTol || now > env.yellow_end() + kPhaseTol)
        throw ValidationError("naive intention queried outside the yellow phase");
    const double remaining = std::max(0.0, env.yellow_end() - now);
    const double accel = std::max(0.0, env.a_max_naive);
    const double v_cap = std::max(state.v, env.v_lim);

    double travel = 0.0;
    if (accel > 0.0 && state.v < v_cap) {
        const double t_acc = std::min(remaining, (v_cap - state.v) / accel);
        travel = state.v * t_acc + 0.5 * accel * t_acc * t_acc;
        travel += v_cap * (remaining - t_acc);
    } else {
        travel = state.v * remaining;
    }
    return travel >= env.stop_bar_x - state.x ? Intention::Pass : Intention::Stop;
}

IntentionEvidence make_evidence(const TrajectoryPoint& p, const EnvironmentState& env) {
    IntentionEvidence e;
    e.elapsed_yellow = std::max(0.0, p.t - env.yellow_onset);
    const double distance = env.stop_bar_x - p.x;
    e.tti = std::clamp(distance / std::max(p.v, kTtiSpeedFloor), 0.0, kTtiCap);
    e.rel_speed = p.v - speed_at(env.fv_trajectory, p.t);
    e.lon_speed = p.v;
    e.lon_accel = p.a;
    return e;
}

std::vector<IntentionEvidence> yellow_phase_evidence(const Trajectory& traj, const EnvironmentState& env) {
    std::vector<IntentionEvidence> out;
    for (const auto& p : traj.points) {
        if (p.t < env.yellow_onset - kPhaseTol || p.t > env.yellow_end() + kPhaseTol) continue;
        out.push_back(make_evidence(p, env));
    }
    return out;
}

std::string bn_to_json(const BnModel& model) {
    nlohmann::ordered_json j;
    j["k_bins"] = model.k_bins;
    j["alpha"] = model.alpha;
    nlohmann::ordered_json edges;
    for (int var = 0; var < kNumEvidenceVars; ++var)
        edges[evidence_var_names()[static_cast<std::size_t>(var)]] = model.bin_edges[static_cast<std::size_t>(var)];
    j["bin_edges"] = edges;
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(model.cpt_intention.size()));
    for (Eigen::Index r = 0; r < model.cpt_intention.rows(); ++r)
        for (Eigen::Index c = 0; c < 2; ++c) flat.push_back(model.cpt_intention(r, c));
    j["cpt_intention"] = flat;
    nlohmann::ordered_json de;
    for (int var = 0; var < kNumDiagnosticVars; ++var) {
        const auto& table = model.cpt_de[static_cast<std::size_t>(var)];
        std::vector<std::vector<double>> rows(2);
        for (int r = 0; r < 2; ++r)
            for (Eigen::Index c = 0; c < table.cols(); ++c) rows[static_cast<std::size_t>(r)].push_back(table(r, c));
        de[evidence_var_names()[static_cast<std::size_t>(kNumCausalVars + var)]] = rows;
    }
    j["cpt_de"] = de;
    return j.dump(2) + "\n";
}

BnModel bn_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IngestionError(std::string("bad Bayesian network JSON: ") + e.what());
    }
    try {
        BnModel model;
        model.k_bins = j.at("k_bins").get<int>();
        model.alpha = j.at("alpha").get<double>();
        for (int var = 0; var < kNumEvidenceVars; ++var)
            model.bin_edges[static_cast<std::size_t>(var)] =
                j.at("bin_edges").at(evidence_var_names()[static_cast<std::size_t>(var)]).get<std::vector<double>>();
        const auto flat = j.at("cpt_intention").get<std::vector<double>>();
        const int rows = model.bins(0) * model.bins(1) * model.bins(2);
        if (flat.size() != static_cast<std::size_t>(rows) * 2)
            throw IngestionError("cpt_intention size does not match bin edges");
        model.cpt_intention.resize(rows, 2);
        for (int r = 0; r < rows; ++r) {
            model.cpt_intention(r, 0) = flat[static_cast<std::size_t>(r) * 2];
            model.cpt_intention(r, 1) = flat[static_cast<std::size_t>(r) * 2 + 1];
        }
        for (int var = 0; var < kNumDiagnosticVars; ++var) {
            const auto rows_json =
                j.at("cpt_de").at(evidence_var_names()[static_cast<std::size_t>(kNumCausalVars + var)])
                    .get<std::vector<std::vector<double>>>();
            const int k = model.bins(kNumCausalVars + var);
            if (rows_json.size() != 2 || rows_json[0].size() != static_cast<std::size_t>(k) ||
                rows_json[1].size() != static_cast<std::size_t>(k))
                throw IngestionError("cpt_de shape does not match bin edges");
            auto& table = model.cpt_de[static_cast<std::size_t>(var)];
            table.resize(2, k);
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < k; ++c) table(r, c) = rows_json[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw IngestionError(std::string("bad Bayesian network JSON: ") + e.what());
    }
}

void save_bn(const std::filesystem::path& path, const BnModel& model) {
    write_text_atomic(path, bn_to_json(model));
}

BnModel load_bn(const std::filesystem::path& path) { return bn_from_json(read_text_file(path)); }

}  // namespace ylr
