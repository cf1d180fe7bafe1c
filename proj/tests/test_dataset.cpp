#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "pegdyn/dataset.hpp"
#include "pegdyn/errors.hpp"
#include "pegdyn/rng.hpp"

using namespace pegdyn;
using namespace pegdyn::data;
using geometry::HoleSpec;
using geometry::ShapeKind;
using geometry::Vec2;
using sim::ContactSim;

namespace {

const ContactSim& round20_sim() {
    static ContactSim sim(HoleSpec{ShapeKind::Round, 20.0, 5.0});
    return sim;
}

const GridTable& round20_grid() {
    static GridTable grid = sample_grid(round20_sim(), 9, {4.0, 4.0});
    return grid;
}

// Reverse-order scan; disagrees with nearest_index only on exact ties.
size_t reverse_argmin(const GridTable& g, Vec2 p) {
    size_t best = g.positions.size() - 1;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t i = g.positions.size(); i-- > 0;) {
        Vec2 d = g.positions[i] - p;
        double dd = d.dot(d);
        if (dd < best_d) {
            best_d = dd;
            best = i;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("grid sampling") {
    const GridTable& g = round20_grid();
    CHECK(g.positions.size() == 81);
    CHECK(g.states.size() == 81);
    CHECK(g.spacing_x() == doctest::Approx(0.5));
    CHECK(g.spacing_y() == doctest::Approx(0.5));
    CHECK(g.positions.front().x == doctest::Approx(-2.0));
    CHECK(g.positions.back().x == doctest::Approx(2.0));

    SUBCASE("center point of an odd grid reads the canonical inserted state") {
        size_t center = g.nearest_index({0, 0});
        CHECK(g.positions[center].x == doctest::Approx(0.0));
        const sim::ForceState& st = g.states[center];
        for (int pose = 0; pose < 5; ++pose) {
            CHECK(st.force(pose, 0) == doctest::Approx(0.0));
            CHECK(st.force(pose, 2) == doctest::Approx(10.0));
            CHECK(st.torque(pose, 0) == doctest::Approx(0.0));
        }
    }
    SUBCASE("a 4x4 grid has 16 states") {
        GridTable g4 = sample_grid(round20_sim(), 4, {4.0, 4.0});
        CHECK(g4.states.size() == 16);
    }
    SUBCASE("sampling twice gives identical tables") {
        GridTable again = sample_grid(round20_sim(), 9, {4.0, 4.0});
        for (size_t i = 0; i < g.states.size(); ++i) {
            CHECK(g.positions[i].x == again.positions[i].x);
            for (int d = 0; d < 30; ++d) CHECK(g.states[i].v[d] == again.states[i].v[d]);
        }
    }
}

TEST_CASE("nearest grid state") {
    const GridTable& g = round20_grid();
    SUBCASE("lattice points map to themselves") {
        for (size_t i = 0; i < g.positions.size(); i += 7)
            CHECK(g.nearest_index(g.positions[i]) == i);
    }
    SUBCASE("midpoint ties break to the lower index") {
        // Exactly between index (0,0) at (-2,-2) and (0,1) at (-2,-1.5).
        CHECK(g.nearest_index({-2.0, -1.75}) == 0);
        // Between (0,0) and (1,0): x midpoint.
        CHECK(g.nearest_index({-1.75, -2.0}) == 0);
    }
    SUBCASE("matches an exhaustive argmin on random points") {
        Rng rng(derive_seed(21, "nearest"));
        for (int i = 0; i < 1000; ++i) {
            Vec2 p{rng.uniform(-2, 2), rng.uniform(-2, 2)};
            CHECK(g.nearest_index(p) == reverse_argmin(g, p));
        }
    }
}

TEST_CASE("subsampling keeps metadata and is deterministic") {
    const GridTable& g = round20_grid();
    GridTable s = subsample_grid(g, 0.2, 99);
    CHECK(s.positions.size() == 16);  // round(0.2 * 81)
    GridTable s2 = subsample_grid(g, 0.2, 99);
    for (size_t i = 0; i < s.positions.size(); ++i) {
        CHECK(s.positions[i].x == s2.positions[i].x);
        CHECK(s.positions[i].y == s2.positions[i].y);
    }
    CHECK(subsample_grid(g, 0.02, 7).positions.size() == 2);
    CHECK(subsample_grid(g, 1.0, 7).positions.size() == 81);
}

TEST_CASE("trajectory generation") {
    const GridTable& g = round20_grid();
    SUBCASE("shape: T actions, T+1 states") {
        auto trajs = generate_trajectories(g, 5, 10, {0.25, 0.25}, 1);
        CHECK(trajs.size() == 5);
        for (const auto& tr : trajs) {
            CHECK(tr.actions.size() == 10);
            CHECK(tr.states.size() == 11);
            CHECK(tr.positions.size() == 11);
        }
    }
    SUBCASE("zero action std keeps the state constant") {
        auto trajs = generate_trajectories(g, 3, 6, {0.0, 0.0}, 2);
        for (const auto& tr : trajs)
            for (const auto& st : tr.states)
                for (int d = 0; d < 30; ++d) CHECK(st.v[d] == tr.states.front().v[d]);
    }
    SUBCASE("states agree with the nearest-grid oracle and stay in range") {
        auto trajs = generate_trajectories(g, 40, 10, {0.6, 0.6}, 3);
        for (const auto& tr : trajs) {
            for (size_t t = 0; t < tr.positions.size(); ++t) {
                Vec2 p = tr.positions[t];
                CHECK(std::abs(p.x) <= 2.0 + 1e-12);
                CHECK(std::abs(p.y) <= 2.0 + 1e-12);
                size_t idx = reverse_argmin(g, p);
                for (int d = 0; d < 30; ++d) CHECK(tr.states[t].v[d] == g.states[idx].v[d]);
                if (t < tr.actions.size()) {
                    Vec2 next = g.clamp(p + tr.actions[t]);
                    CHECK(tr.positions[t + 1].x == doctest::Approx(next.x));
                    CHECK(tr.positions[t + 1].y == doctest::Approx(next.y));
                }
            }
        }
    }
    SUBCASE("action distribution is centered") {
        auto trajs = generate_trajectories(g, 1000, 10, {0.25, 0.25}, 4);
        double sx = 0, sy = 0;
        long n = 0;
        for (const auto& tr : trajs)
            for (Vec2 a : tr.actions) {
                sx += a.x;
                sy += a.y;
                ++n;
            }
        CHECK(n == 10000);
        double bound = 3.0 * 0.25 / std::sqrt(static_cast<double>(n));
        CHECK(std::abs(sx / n) < bound);
        CHECK(std::abs(sy / n) < bound);
    }
    SUBCASE("deterministic given seed") {
        auto a = generate_trajectories(g, 4, 5, {0.25, 0.25}, 77);
        auto b = generate_trajectories(g, 4, 5, {0.25, 0.25}, 77);
        for (size_t k = 0; k < a.size(); ++k)
            for (size_t t = 0; t < a[k].actions.size(); ++t)
                CHECK(a[k].actions[t].x == b[k].actions[t].x);
    }
}

TEST_CASE("dataset files") {
    const GridTable& g = round20_grid();
    auto trajs = generate_trajectories(g, 6, 10, {0.25, 0.25}, 5);
    const std::string path = "/tmp/pegdyn_test_dataset.txt";

    SUBCASE("round trip is bitwise exact") {
        save_dataset(trajs, path);
        auto loaded = load_dataset(path);
        REQUIRE(loaded.size() == trajs.size());
        for (size_t k = 0; k < trajs.size(); ++k) {
            CHECK(loaded[k].start.x == trajs[k].start.x);
            for (size_t t = 0; t < trajs[k].actions.size(); ++t) {
                CHECK(loaded[k].actions[t].x == trajs[k].actions[t].x);
                CHECK(loaded[k].actions[t].y == trajs[k].actions[t].y);
            }
            for (size_t t = 0; t < trajs[k].states.size(); ++t) {
                CHECK(loaded[k].positions[t].x == trajs[k].positions[t].x);
                for (int d = 0; d < 30; ++d)
                    CHECK(loaded[k].states[t].v[d] == trajs[k].states[t].v[d]);
            }
        }
    }
    SUBCASE("truncated file raises FormatError") {
        save_dataset(trajs, path);
        std::ifstream in(path);
        std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        in.close();
        std::ofstream out(path);
        out << all.substr(0, all.size() * 2 / 3);
        out.close();
        CHECK_THROWS_AS(load_dataset(path), FormatError);
    }
    SUBCASE("empty list round trips") {
        save_dataset({}, path);
        CHECK(load_dataset(path).empty());
    }
    SUBCASE("missing file raises IoError") {
        CHECK_THROWS_AS(load_dataset("/tmp/pegdyn_does_not_exist.txt"), IoError);
    }
    std::remove(path.c_str());
}

TEST_CASE("grid files round trip") {
    GridTable g4 = sample_grid(round20_sim(), 4, {4.0, 4.0});
    const std::string path = "/tmp/pegdyn_test_grid.txt";
    save_grid(g4, path);
    GridTable loaded = load_grid(path);
    CHECK(loaded.spec_id == g4.spec_id);
    CHECK(loaded.n == g4.n);
    REQUIRE(loaded.states.size() == g4.states.size());
    for (size_t i = 0; i < g4.states.size(); ++i) {
        CHECK(loaded.positions[i].x == g4.positions[i].x);
        for (int d = 0; d < 30; ++d) CHECK(loaded.states[i].v[d] == g4.states[i].v[d]);
    }
    std::remove(path.c_str());
}
