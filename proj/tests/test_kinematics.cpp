#include <doctest.h>

#include <cmath>

#include "ylr/kinematics.hpp"
#include "ylr/rng.hpp"

using namespace ylr;

namespace {

Trajectory random_trajectory(Rng& rng, std::size_t n, double tau = 0.1) {
    TrajectoryPoint p;
    p.x = rng.uniform(-10.0, 10.0);
    p.y = rng.uniform(-2.0, 2.0);
    p.v = rng.uniform(0.0, 20.0);
    ControlSequence controls(static_cast<Eigen::Index>(n - 1));
    for (Eigen::Index i = 0; i < controls.size(); ++i) {
        controls.accel[i] = rng.uniform(-4.0, 3.0);
        controls.heading[i] = rng.uniform(-0.2, 0.2);
    }
    return rollout(p, controls, tau);
}

}  // namespace

TEST_CASE("kinematic_step matches the discrete dynamics") {
    TrajectoryPoint p{0.0, 0.0, 0.0, 10.0, 0.0, 0.0};

    SUBCASE("zero heading, zero accel") {
        const auto next = kinematic_step(p, 0.0, 0.0, 0.1);
        CHECK(next.x == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(next.y == doctest::Approx(0.0));
        CHECK(next.v == doctest::Approx(10.0));
        CHECK(next.t == doctest::Approx(0.1));
    }
    SUBCASE("pure lateral at psi = pi/2") {
        p.psi = M_PI / 2.0;
        const auto next = kinematic_step(p, 0.0, M_PI / 2.0, 0.1);
        CHECK(next.x == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(next.y == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(next.v == doctest::Approx(10.0));
    }
    SUBCASE("speed update") {
        const auto next = kinematic_step(p, 2.0, 0.0, 0.1);
        CHECK(next.v == doctest::Approx(10.2).epsilon(1e-12));
        CHECK(next.a == 2.0);
    }
    SUBCASE("non-finite input is rejected") {
        p.v = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(kinematic_step(p, 0.0, 0.0, 0.1), ValidationError);
    }
    SUBCASE("speed never goes negative") {
        p.v = 0.2;
        const auto next = kinematic_step(p, -4.0, 0.0, 0.1);
        CHECK(next.v == 0.0);
    }
}

TEST_CASE("rollout applies the dynamics repeatedly") {
    TrajectoryPoint p{0.0, 0.0, 0.0, 10.0, 0.0, 0.0};

    SUBCASE("zero controls advance x linearly") {
        ControlSequence controls(3);
        const auto traj = rollout(p, controls, 0.1);
        REQUIRE(traj.size() == 4);
        CHECK(traj[0].x == doctest::Approx(0.0));
        CHECK(traj[1].x == doctest::Approx(1.0));
        CHECK(traj[2].x == doctest::Approx(2.0));
        CHECK(traj[3].x == doctest::Approx(3.0));
    }
    SUBCASE("single step equals kinematic_step") {
        ControlSequence controls(1);
        controls.accel[0] = 1.5;
        controls.heading[0] = 0.1;
        const auto traj = rollout(p, controls, 0.1);
        const auto step = kinematic_step(p, 1.5, 0.1, 0.1);
        REQUIRE(traj.size() == 2);
        CHECK(traj[1].x == step.x);
        CHECK(traj[1].y == step.y);
        CHECK(traj[1].v == step.v);
    }
    SUBCASE("hard braking clamps speed at zero") {
        p.v = 0.2;
        ControlSequence controls(3);
        controls.accel.setConstant(-4.0);
        const auto traj = rollout(p, controls, 0.1);
        CHECK(traj[0].v == doctest::Approx(0.2));
        CHECK(traj[1].v == 0.0);
        CHECK(traj[2].v == 0.0);
    }
    SUBCASE("empty control sequence is rejected") {
        ControlSequence controls(0);
        CHECK_THROWS_AS(rollout(p, controls, 0.1), ValidationError);
    }
    SUBCASE("length is always controls + 1") {
        Rng rng(7);
        for (int trial = 0; trial < 20; ++trial) {
            const auto n = 2 + rng.integer(20);
            const auto traj = random_trajectory(rng, static_cast<std::size_t>(n));
            CHECK(traj.size() == n);
        }
    }
}

TEST_CASE("euclidean_distance is the mean pointwise gap") {
    Trajectory a;
    a.points = {{0.0, 0.0, 0.0, 1.0, 0.0, 0.0}, {0.1, 1.0, 0.0, 1.0, 0.0, 0.0}};
    Trajectory b = a;

    SUBCASE("identical trajectories give zero") { CHECK(euclidean_distance(a, b) == 0.0); }
    SUBCASE("constant lateral offset gives the offset") {
        for (auto& p : b.points) p.y += 1.0;
        CHECK(euclidean_distance(a, b) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("mixed case averages over points") {
        b.points[1].y = 1.0;  // {(0,0),(1,0)} vs {(0,0),(1,1)}
        CHECK(euclidean_distance(a, b) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("length mismatch is a shape error") {
        b.points.push_back(b.points.back());
        CHECK_THROWS_AS(euclidean_distance(a, b), ValidationError);
    }
}

TEST_CASE("euclidean_distance is a pseudo-metric") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.integer(15);
        const auto a = random_trajectory(rng, n);
        const auto b = random_trajectory(rng, n);
        const auto c = random_trajectory(rng, n);
        const double ab = euclidean_distance(a, b);
        const double ba = euclidean_distance(b, a);
        const double ac = euclidean_distance(a, c);
        const double cb = euclidean_distance(c, b);
        CHECK(ab >= 0.0);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
        CHECK(ab <= ac + cb + 1e-9);
    }
}

TEST_CASE("resample_trajectory") {
    SUBCASE("resampling to own dt reproduces the points") {
        TrajectoryPoint p{0.0, 0.0, 0.0, 5.0, 1.0, 0.05};
        ControlSequence controls(10);
        controls.accel.setConstant(1.0);
        controls.heading.setConstant(0.05);
        auto traj = rollout(p, controls, 0.1);
        const auto out = resample_trajectory(traj, 0.1);
        REQUIRE(out.size() == traj.size());
        for (std::size_t i = 0; i < traj.size(); ++i) {
            CHECK(out[i].t == doctest::Approx(traj[i].t).epsilon(1e-9));
            CHECK(out[i].x == doctest::Approx(traj[i].x).epsilon(1e-9));
            CHECK(out[i].v == doctest::Approx(traj[i].v).epsilon(1e-9));
            CHECK(out[i].a == doctest::Approx(traj[i].a).epsilon(1e-9));
            CHECK(out[i].psi == doctest::Approx(traj[i].psi).epsilon(1e-9));
        }
    }
    SUBCASE("constant speed survives any step") {
        TrajectoryPoint p{0.0, 0.0, 0.0, 8.0, 0.0, 0.0};
        ControlSequence controls(20);
        const auto traj = rollout(p, controls, 0.1);
        const auto out = resample_trajectory(traj, 0.3);
        for (const auto& q : out.points) {
            CHECK(q.v == doctest::Approx(8.0).epsilon(1e-12));
            CHECK(q.a == doctest::Approx(0.0));
        }
    }
    SUBCASE("linear speed interpolates to the midpoint mean") {
        Trajectory traj;
        traj.dt = 0.2;
        traj.points = {{0.0, 0.0, 0.0, 4.0, 0.0, 0.0}, {0.2, 1.0, 0.0, 6.0, 10.0, 0.0}};
        const auto out = resample_trajectory(traj, 0.1);
        REQUIRE(out.size() == 3);
        CHECK(out[1].v == doctest::Approx(5.0).epsilon(1e-12));
    }
    SUBCASE("bad tau is rejected") {
        Trajectory traj;
        traj.points = {{0.0, 0, 0, 1, 0, 0}, {0.1, 0.1, 0, 1, 0, 0}};
        CHECK_THROWS_AS(resample_trajectory(traj, 0.0), ValidationError);
        CHECK_THROWS_AS(resample_trajectory(traj, -0.1), ValidationError);
    }
    SUBCASE("span shorter than one step is rejected") {
        Trajectory traj;
        traj.points = {{0.0, 0, 0, 1, 0, 0}, {0.05, 0.05, 0, 1, 0, 0}};
        CHECK_THROWS_AS(resample_trajectory(traj, 0.1), ValidationError);
    }
}

TEST_CASE("trajectories reconstruct from their stored controls") {
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const auto traj = random_trajectory(rng, 12);
        CHECK(satisfies_dynamics(traj));
    }
}

TEST_CASE("trajectory validation catches bad containers") {
    Trajectory traj;
    CHECK_THROWS_AS(traj.validate(), ValidationError);
    traj.dt = 0.1;
    traj.points = {{0.0, 0, 0, 1, 0, 0}, {0.1, 0.1, 0, 1, 0, 0}, {0.25, 0.2, 0, 1, 0, 0}};
    CHECK_THROWS_AS(traj.validate(), ValidationError);  // non-uniform step
    traj.points[2].t = 0.2;
    CHECK_NOTHROW(traj.validate());
}
