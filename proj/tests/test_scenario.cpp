#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "ylr/intention_bn.hpp"
#include "ylr/kinematics.hpp"
#include "ylr/scenario.hpp"

using namespace ylr;
namespace fs = std::filesystem;

namespace {

ScenarioConfig pass_config(std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.seed = seed;
    cfg.policy = IntentPolicy::ForcePass;
    cfg.initial_distance_min = 12.0;
    cfg.initial_distance_max = 30.0;
    cfg.approach_speed_min = 9.0;
    cfg.approach_speed_max = 13.0;
    return cfg;
}

ScenarioConfig stop_config(std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.seed = seed;
    cfg.policy = IntentPolicy::ForceStop;
    cfg.initial_distance_min = 32.0;
    cfg.initial_distance_max = 50.0;
    cfg.approach_speed_min = 7.0;
    cfg.approach_speed_max = 11.0;
    return cfg;
}

fs::path temp_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "ylr_scenario_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("forced pass crosses the stop bar") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
        const auto record = generate_scenario(pass_config(seed));
        CHECK(record.intention == Intention::Pass);
        CHECK(record.target.back().x > record.env.stop_bar_x);
        CHECK(label_trajectory(record.target, record.env) == Intention::Pass);
    }
}

TEST_CASE("forced stop settles at the queue end") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
        const auto record = generate_scenario(stop_config(seed));
        CHECK(record.intention == Intention::Stop);
        CHECK(record.target.back().v < 0.1);
        CHECK(std::abs(record.target.back().x - record.env.x_queue) < 1.0);
        CHECK(label_trajectory(record.target, record.env) == Intention::Stop);
    }
}

TEST_CASE("generation is deterministic per seed") {
    const auto a = generate_scenario(stop_config(42));
    const auto b = generate_scenario(stop_config(42));
    REQUIRE(a.target.size() == b.target.size());
    for (std::size_t i = 0; i < a.target.size(); ++i) {
        CHECK(a.target[i].x == b.target[i].x);
        CHECK(a.target[i].v == b.target[i].v);
        CHECK(a.target[i].psi == b.target[i].psi);
    }
    const auto c = generate_scenario(stop_config(43));
    CHECK(a.target.back().x != c.target.back().x);
}

TEST_CASE("generated trajectories satisfy the dynamics") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        ScenarioConfig cfg;
        cfg.seed = seed;
        const auto record = generate_scenario(cfg);
        CHECK(satisfies_dynamics(record.target));
        CHECK_NOTHROW(record.target.validate());
        // Episode covers the yellow end with room for labeling.
        CHECK(record.target.end_time() >= record.env.yellow_end());
    }
}

// A fast draw; the full thousand-record version runs in the acceptance suite.
TEST_CASE("dilemma-zone labels agree with the distance rule") {
    ScenarioConfig cfg;
    cfg.policy = IntentPolicy::DilemmaZone;
    cfg.seed = 99;
    const auto records = generate_batch(cfg, 150);
    int agree = 0;
    for (const auto& record : records)
        if (label_trajectory(record.target, record.env) == record.intention) ++agree;
    CHECK(agree >= static_cast<int>(records.size()) * 99 / 100);
}

TEST_CASE("dilemma zone produces both labels and able-to-pass stoppers") {
    ScenarioConfig cfg;
    cfg.seed = 123;
    const auto records = generate_batch(cfg, 150);
    int stops = 0, passes = 0, able_but_stopped = 0;
    for (const auto& record : records) {
        if (record.intention == Intention::Stop) {
            ++stops;
            const auto onset_index = static_cast<std::size_t>(
                std::llround(record.env.yellow_onset / record.target.dt));
            const auto naive =
                naive_intention(record.target[onset_index], record.env, record.env.yellow_onset);
            if (naive == Intention::Pass) ++able_but_stopped;
        } else {
            ++passes;
        }
    }
    CHECK(stops > 15);
    CHECK(passes > 15);
    CHECK(able_but_stopped > 0);  // the naive baseline must err on someone
}

TEST_CASE("batch generation is parallel-stable") {
    ScenarioConfig cfg;
    cfg.seed = 7;
    const auto batch1 = generate_batch(cfg, 6);
    const auto batch2 = generate_batch(cfg, 6);
    REQUIRE(batch1.size() == 6);
    CHECK(batch1[0].id == "r0000");
    for (std::size_t i = 0; i < batch1.size(); ++i) {
        CHECK(batch1[i].target.back().x == batch2[i].target.back().x);
        CHECK(batch1[i].target.size() == batch2[i].target.size());
    }
}

TEST_CASE("dataset round trip") {
    const auto dir = temp_dir("roundtrip");
    ScenarioConfig cfg;
    cfg.seed = 11;
    auto records = generate_batch(cfg, 3);
    save_dataset(dir, records);

    const auto loaded = load_dataset(dir);
    REQUIRE(loaded.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(loaded[i].id == records[i].id);
        CHECK(loaded[i].intention == records[i].intention);
        CHECK(loaded[i].lambda_star == doctest::Approx(records[i].lambda_star));
        REQUIRE(loaded[i].target.size() == records[i].target.size());
        for (std::size_t k = 0; k < records[i].target.size(); ++k) {
            CHECK(loaded[i].target[k].x == doctest::Approx(records[i].target[k].x).epsilon(1e-9));
            CHECK(loaded[i].target[k].v == doctest::Approx(records[i].target[k].v).epsilon(1e-9));
        }
        CHECK(loaded[i].env.x_queue == doctest::Approx(records[i].env.x_queue));
        CHECK(loaded[i].env.i_launch == records[i].env.i_launch);
    }
}

TEST_CASE("load_dataset rejects malformed inputs") {
    SUBCASE("implausible speed names the sample") {
        const auto dir = temp_dir("fast");
        ScenarioConfig cfg;
        auto records = generate_batch(cfg, 1);
        save_dataset(dir, records);
        // Corrupt the target CSV with a 200 m/s sample.
        const auto csv = dir / "r0000.target.csv";
        std::ofstream out(csv, std::ios::app);
        out << "target,99.0,0.0,0.0,200.0,0.0,0.0\n";
        out.close();
        CHECK_THROWS_WITH_AS(load_dataset(dir), doctest::Contains("implausible speed"),
                             IngestionError);
    }
    SUBCASE("missing directory") {
        CHECK_THROWS_AS(load_dataset(temp_dir("empty") / "nope"), IngestionError);
    }
    SUBCASE("empty directory") {
        CHECK_THROWS_AS(load_dataset(temp_dir("bare")), IngestionError);
    }
}

TEST_CASE("config validation rejects impossible policies") {
    ScenarioConfig cfg;
    cfg.policy = IntentPolicy::ForceStop;
    cfg.initial_distance_min = 10.0;  // cannot stop from 13 m/s in 5 m
    cfg.initial_distance_max = 20.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);

    ScenarioConfig far_pass;
    far_pass.policy = IntentPolicy::ForcePass;
    far_pass.initial_distance_min = 60.0;
    far_pass.initial_distance_max = 90.0;
    CHECK_THROWS_AS(far_pass.validate(), ValidationError);

    ScenarioConfig contradictory;
    contradictory.policy = IntentPolicy::ForcePass;
    contradictory.fv_profile = FrontVehicleProfile::Brake;
    contradictory.initial_distance_min = 12.0;
    contradictory.initial_distance_max = 30.0;
    CHECK_THROWS_AS(contradictory.validate(), ValidationError);
}
