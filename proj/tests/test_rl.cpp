#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <set>

#include "pegdyn/errors.hpp"
#include "pegdyn/rl.hpp"
#include "pegdyn/rng.hpp"

using namespace pegdyn;
using namespace pegdyn::rl;
using data::GridTable;
using geometry::HoleSpec;
using geometry::ShapeKind;
using geometry::Vec2;
using sim::ContactSim;
using sim::ForceState;
using Eigen::VectorXd;

namespace {

const ContactSim& round20_sim() {
    static ContactSim sim(HoleSpec{ShapeKind::Round, 20.0, 5.0});
    return sim;
}

const GridTable& round20_grid() {
    static GridTable grid = data::sample_grid(round20_sim(), 9, {4.0, 4.0});
    return grid;
}

// Stats fitted the same way the dynamics model would fit them.
const dyn::NormStats& shared_stats() {
    static dyn::NormStats stats = [] {
        auto trajs = data::generate_trajectories(round20_grid(), 40, 10, {0.25, 0.25}, 3);
        dyn::DynamicsModel m(dyn::DynConfig{}, 0);
        m.train(trajs, 1, 2, 1);
        return m.stats();
    }();
    return stats;
}

VectorXd random_vec(uint64_t seed, double scale) {
    Rng rng(seed);
    VectorXd v(30);
    for (int i = 0; i < 30; ++i) v[i] = rng.gaussian(0.0, scale);
    return v;
}

RlConfig desk_config() {
    RlConfig cfg;
    cfg.hidden = 32;
    cfg.learning_rate = 1e-3;
    return cfg;
}

}  // namespace

TEST_CASE("similarity") {
    VectorXd a = random_vec(1, 1.0);
    CHECK(similarity(a, a, 2.0) == 1.0);

    SUBCASE("squared distance equal to sigma gives 1/e") {
        VectorXd b = a;
        b[0] += std::sqrt(2.0);
        CHECK(similarity(a, b, 2.0) == doctest::Approx(std::exp(-1.0)));
    }
    SUBCASE("sigma must be positive") {
        CHECK_THROWS_AS(similarity(a, a, 0.0), std::invalid_argument);
    }
}

TEST_CASE("reward boundary algebra") {
    RewardConfig cfg;
    cfg.eps = 0.9;
    Rng rng(2);
    int checked = 0;
    while (checked < 1000) {
        cfg.sigma = rng.uniform(0.1, 10.0);
        double threshold = cfg.sigma * std::log(1.0 / cfg.eps);
        double d2 = threshold * rng.uniform(0.25, 1.75);
        if (std::abs(d2 - threshold) < 1e-9) continue;
        VectorXd a = random_vec(3000 + checked, 1.0);
        VectorXd dir = random_vec(4000 + checked, 1.0);
        dir.normalize();
        VectorXd b = a + std::sqrt(d2) * dir;
        double r = reward(b, a, cfg);
        bool expect_goal = (b - a).squaredNorm() < threshold;
        CHECK(r == (expect_goal ? cfg.goal_reward : cfg.step_reward));
        ++checked;
    }
}

TEST_CASE("reward cases") {
    RewardConfig cfg;
    cfg.sigma = 1.0;
    VectorXd a = random_vec(5, 1.0);
    CHECK(reward(a, a, cfg) == 1.0);

    VectorXd far = a;
    far[0] += 100.0;
    CHECK(reward(far, a, cfg) == -0.02);

    SUBCASE("similarity exactly at the threshold is not a goal") {
        // eps chosen as exp(-1) so G lands on it bitwise when |d|^2 == sigma.
        RewardConfig edge;
        edge.sigma = 1.0;
        edge.eps = std::exp(-1.0);
        VectorXd b = a;
        b[7] += 1.0;
        CHECK(similarity(b, a, edge.sigma) == edge.eps);
        CHECK(reward(b, a, edge) == edge.step_reward);
    }
}

TEST_CASE("discrete action map") {
    const double s = 0.5;
    std::set<std::pair<double, double>> seen;
    for (int i = 0; i < kNumActions; ++i) {
        Vec2 v = action_vector(i, s);
        seen.insert({v.x, v.y});
        CHECK((v.x == 0.0 || std::abs(v.x) == s));
        CHECK((v.y == 0.0 || std::abs(v.y) == s));
        CHECK((v.x != 0.0 || v.y != 0.0));
    }
    CHECK(seen.size() == kNumActions);  // all sign combos except (0,0)
    CHECK(action_vector(0, s).x == s);   // E
    CHECK(action_vector(3, s).y == s);   // N
    CHECK_THROWS_AS(action_vector(8, s), std::invalid_argument);
}

TEST_CASE("policy forward") {
    PolicyModel policy(desk_config(), shared_stats(), 7);
    Rng rng(8);
    for (int rep = 0; rep < 50; ++rep) {
        ForceState s;
        for (double& v : s.v) v = rng.gaussian(0.0, 3.0);
        PolicyModel::Output out = policy.forward(s);
        CHECK(out.probs.sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(out.probs.minCoeff() > 0.0);
        CHECK(out.probs.maxCoeff() / out.probs.minCoeff() < 3.0);
        CHECK(std::isfinite(out.value));
    }
}

TEST_CASE("offline training") {
    const GridTable& g = round20_grid();
    ForceState goal = round20_sim().goal_state();
    RewardConfig rc;
    rc.sigma = auto_sigma(g, goal, shared_stats());

    SUBCASE("zero learning rate leaves the policy unchanged") {
        RlConfig cfg = desk_config();
        cfg.learning_rate = 0.0;
        PolicyModel policy(cfg, shared_stats(), 9);
        PolicyModel before = policy;
        mpc::OracleGridDynamics oracle(g);
        train_offline(policy, oracle, g, goal, 50, 10, rc, 10);
        CHECK(policy == before);
    }
    SUBCASE("returns trend upward and the policy points at the hole") {
        PolicyModel policy(desk_config(), shared_stats(), 11);
        mpc::OracleGridDynamics oracle(g);
        TrainReport rep = train_offline(policy, oracle, g, goal, 2000, 10, rc, 12);
        REQUIRE(rep.episodes_run == 2000);
        double early = 0, late = 0;
        for (int i = 0; i < 200; ++i) {
            early += rep.returns[i];
            late += rep.returns[rep.returns.size() - 1 - i];
        }
        CHECK(late / 200.0 > early / 200.0 + 0.2);

        int a = policy.argmax_action(data::nearest_grid_state(g, {2.0, 0.0}));
        CHECK(action_vector(a, 0.5).x < 0.0);  // westward
    }
    SUBCASE("huge entropy bonus keeps the policy uniform") {
        RlConfig cfg = desk_config();
        cfg.entropy_weight = 5.0;
        PolicyModel policy(cfg, shared_stats(), 13);
        mpc::OracleGridDynamics oracle(g);
        train_offline(policy, oracle, g, goal, 800, 10, rc, 14);
        double worst_max = 0;
        for (size_t i = 0; i < g.states.size(); i += 5)
            worst_max = std::max(worst_max, policy.forward(g.states[i]).probs.maxCoeff());
        CHECK(worst_max < 0.3);
    }
    SUBCASE("training never probes the simulator") {
        PolicyModel policy(desk_config(), shared_stats(), 15);
        mpc::OracleGridDynamics oracle(g);
        uint64_t before = sim::probe_count();
        train_offline(policy, oracle, g, goal, 300, 10, rc, 16);
        CHECK(sim::probe_count() == before);
    }
    SUBCASE("identical seeds produce identical parameters") {
        PolicyModel a(desk_config(), shared_stats(), 17);
        PolicyModel b(desk_config(), shared_stats(), 17);
        mpc::OracleGridDynamics oracle(g);
        train_offline(a, oracle, g, goal, 100, 10, rc, 18);
        train_offline(b, oracle, g, goal, 100, 10, rc, 18);
        CHECK(a == b);
    }
}

TEST_CASE("policy evaluation") {
    const GridTable& g = round20_grid();
    ForceState goal = round20_sim().goal_state();
    PolicyModel policy(desk_config(), shared_stats(), 19);

    SUBCASE("starting at the center succeeds with zero steps") {
        EvalConfig cfg;
        cfg.trials = 3;
        cfg.ring_radius = 0.0;
        cfg.ring_width = 0.0;
        EvalResult res = eval_policy(round20_sim(), policy, goal, cfg, 20);
        CHECK(res.success_rate == 1.0);
        for (const auto& tr : res.trials) CHECK(tr.steps_taken == 0);
    }
    SUBCASE("trained policy succeeds from the ring") {
        RewardConfig rc;
        rc.sigma = auto_sigma(g, goal, shared_stats());
        PolicyModel trained(desk_config(), shared_stats(), 21);
        mpc::OracleGridDynamics oracle(g);
        train_offline(trained, oracle, g, goal, 2500, 10, rc, 22);
        EvalConfig cfg;
        cfg.trials = 40;
        EvalResult res = eval_policy(round20_sim(), trained, goal, cfg, 23);
        CHECK(res.success_rate > 0.6);
    }
}

TEST_CASE("policy files") {
    PolicyModel policy(desk_config(), shared_stats(), 25);
    const std::string path = "/tmp/pegdyn_test_policy.txt";
    save_policy(policy, path);
    PolicyModel loaded = load_policy(path);
    CHECK(loaded == policy);
    Rng rng(26);
    for (int rep = 0; rep < 20; ++rep) {
        ForceState s;
        for (double& v : s.v) v = rng.gaussian(0.0, 2.0);
        PolicyModel::Output a = policy.forward(s);
        PolicyModel::Output b = loaded.forward(s);
        for (int i = 0; i < kNumActions; ++i) CHECK(a.probs[i] == b.probs[i]);
        CHECK(a.value == b.value);
    }
    SUBCASE("wrong version raises VersionError") {
        std::ofstream out(path);
        out << "PEGDYN_POLICY 999\n";
        out.close();
        CHECK_THROWS_AS(load_policy(path), VersionError);
    }
    std::remove(path.c_str());
}
