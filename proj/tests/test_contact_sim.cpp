#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pegdyn/contact_sim.hpp"
#include "pegdyn/errors.hpp"
#include "pegdyn/rng.hpp"

using namespace pegdyn;
using namespace pegdyn::sim;
using geometry::HoleSpec;
using geometry::ShapeKind;
using geometry::Vec2;

namespace {

const HoleSpec kRound20{ShapeKind::Round, 20.0, 5.0};
const HoleSpec kSquare20{ShapeKind::Square, 20.0, 5.0};

bool is_canonical(const ForceState& st, double f_max, double tol = 1e-9) {
    for (int pose = 0; pose < 5; ++pose) {
        if (std::abs(st.force(pose, 0)) > tol) return false;
        if (std::abs(st.force(pose, 1)) > tol) return false;
        if (std::abs(st.force(pose, 2) - f_max) > tol) return false;
        for (int axis = 0; axis < 3; ++axis)
            if (std::abs(st.torque(pose, axis)) > tol) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("force state layout") {
    ForceState st;
    for (int i = 0; i < 30; ++i) st.v[i] = i;
    auto f = st.force_part();
    auto t = st.torque_part();
    CHECK(f.size() == 15);
    CHECK(t.size() == 15);
    CHECK(f[0] == 0.0);
    CHECK(f[14] == 14.0);
    CHECK(t[0] == 15.0);
    CHECK(t[14] == 29.0);
    CHECK(st.force(1, 2) == 5.0);
    CHECK(st.torque(4, 2) == 29.0);

    CHECK(pose_order()[0].rx == 0.0);
    CHECK(pose_order()[1].rx == +kTiltDelta);
    CHECK(pose_order()[2].rx == -kTiltDelta);
    CHECK(pose_order()[3].ry == +kTiltDelta);
    CHECK(pose_order()[4].ry == -kTiltDelta);

    ForceState parsed = ForceState::from_csv(st.to_csv());
    for (int i = 0; i < 30; ++i) CHECK(parsed.v[i] == st.v[i]);
}

TEST_CASE("contact wrench basics") {
    ContactSim sim(kRound20);
    SUBCASE("no penetration at zero depth and zero tilt") {
        ForceTorque w = sim.contact_wrench({3.0, 0.0}, {0, 0}, 0.0);
        CHECK(w.fx == 0.0);
        CHECK(w.fz == 0.0);
        CHECK(w.ty == 0.0);
    }
    SUBCASE("centered peg never touches the plate") {
        for (const Tilt& tilt : pose_order()) {
            ForceTorque w = sim.contact_wrench({0.0, 0.0}, tilt, 2.5);
            CHECK(w.fz == 0.0);
            CHECK(w.fx == 0.0);
        }
    }
    SUBCASE("normal force equals the per-point summation oracle") {
        const double depth = 0.2;
        ForceTorque w = sim.contact_wrench({3.0, 0.0}, {0, 0}, depth);
        long contact_points = 0;
        for (Vec2 p : sim.footprint().points)
            if (geometry::sdf(kRound20, p + Vec2{3.0, 0.0}) > 0.0) ++contact_points;
        double expected =
            kRound20.elasticity * sim.footprint().point_area * depth * contact_points;
        CHECK(w.fz == doctest::Approx(expected).epsilon(1e-12));
        CHECK(contact_points > 0);
    }
}

TEST_CASE("descent solver") {
    SUBCASE("centered peg inserts with the canonical reading") {
        for (const HoleSpec& spec : {kRound20, kSquare20}) {
            ContactSim sim(spec);
            for (const Tilt& tilt : pose_order()) {
                ProbeResult pr = sim.solve_descent({0.0, 0.0}, tilt);
                CHECK(pr.inserted);
                CHECK(pr.descent_depth > spec.plate_thickness);
                CHECK(pr.reading.fx == 0.0);
                CHECK(pr.reading.fy == 0.0);
                CHECK(pr.reading.fz == doctest::Approx(sim.params().f_max));
                CHECK(pr.reading.tx == 0.0);
                CHECK(pr.reading.ty == 0.0);
                CHECK(pr.reading.tz == 0.0);
            }
        }
    }
    SUBCASE("full plate contact stops at the threshold") {
        ContactSim sim(kRound20);
        ProbeResult pr = sim.solve_descent({30.0, 0.0}, {0, 0});
        CHECK_FALSE(pr.inserted);
        double area = sim.footprint().point_area * sim.footprint().points.size();
        double bound = sim.params().descent_tol * kRound20.elasticity * area;
        CHECK(std::abs(pr.reading.fz - sim.params().f_max) <= bound);
    }
    SUBCASE("rim contact reading matches an independent wrench recomputation") {
        ContactSim sim(kRound20);
        ProbeResult pr = sim.solve_descent({3.0, 0.0}, {0, 0});
        REQUIRE_FALSE(pr.inserted);
        // Independent accumulation straight from the footprint definition.
        const auto& fp = sim.footprint();
        const double ka = kRound20.elasticity * fp.point_area;
        double fx = 0, fy = 0, fz = 0, tx = 0, ty = 0, tz = 0;
        for (Vec2 p : fp.points) {
            Vec2 world = p + Vec2{3.0, 0.0};
            double s = geometry::sdf(kRound20, world);
            if (s <= 0.0) continue;
            double pen = pr.descent_depth;  // zero tilt: uniform penetration
            if (pen <= 0) continue;
            double f_n = ka * pen;
            double lx = 0, ly = 0;
            if (s < sim.params().edge_band) {
                Vec2 g = geometry::sdf_gradient(kRound20, world);
                lx = sim.params().mu * f_n * g.x;
                ly = sim.params().mu * f_n * g.y;
            }
            Vec2 rel = p - fp.centroid;
            fx += lx;
            fy += ly;
            fz += f_n;
            tx += rel.y * 1e-3 * f_n;
            ty += -rel.x * 1e-3 * f_n;
            tz += rel.x * 1e-3 * ly - rel.y * 1e-3 * lx;
        }
        CHECK(pr.reading.fz == doctest::Approx(fz).epsilon(1e-12));
        CHECK(pr.reading.fx == doctest::Approx(fx).epsilon(1e-12));
        CHECK(pr.reading.ty == doctest::Approx(ty).epsilon(1e-12));
        // Symmetry about the x axis kills tx; rim on +x makes ty nonzero.
        CHECK(std::abs(pr.reading.tx) < 1e-12);
        CHECK(std::abs(pr.reading.ty) > 1e-6);
    }
    SUBCASE("fz is non-decreasing in depth") {
        Rng rng(derive_seed(3, "monotone"));
        for (const HoleSpec& spec : {kRound20, kSquare20,
                                     HoleSpec{ShapeKind::Triangle, 20.0, 5.0},
                                     HoleSpec{ShapeKind::XShape, 15.0, 50.0}}) {
            ContactSim sim(spec);
            for (int rep = 0; rep < 25; ++rep) {
                Vec2 off{rng.uniform(-4, 4), rng.uniform(-4, 4)};
                Tilt tilt = pose_order()[rng.index(5)];
                double prev = -1.0;
                for (double depth = -6.0; depth <= 3.0; depth += 0.25) {
                    double fz = sim.contact_wrench(off, tilt, depth).fz;
                    CHECK(fz >= prev - 1e-12);
                    prev = fz;
                }
            }
        }
    }
    SUBCASE("stop threshold residual is bounded whenever not inserted") {
        Rng rng(derive_seed(5, "stop-threshold"));
        ContactSim sim(kSquare20);
        double area = sim.footprint().point_area * sim.footprint().points.size();
        double bound = sim.params().descent_tol * kSquare20.elasticity * area;
        for (int rep = 0; rep < 40; ++rep) {
            Vec2 off{rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5)};
            Tilt tilt = pose_order()[rng.index(5)];
            ProbeResult pr = sim.solve_descent(off, tilt);
            CHECK(pr.inserted == (pr.descent_depth > kSquare20.plate_thickness));
            if (!pr.inserted)
                CHECK(std::abs(pr.reading.fz - sim.params().f_max) <= bound);
        }
    }
}

TEST_CASE("multi-pose probe") {
    ContactSim sim(kRound20);
    SUBCASE("centered probe is canonical in every pose") {
        ForceState st = sim.probe_multipose({0, 0}, NoiseStd{0, 0}, 0);
        CHECK(is_canonical(st, sim.params().f_max));
    }
    SUBCASE("deterministic given the seed") {
        ForceState a = sim.probe_multipose({1.3, -0.7}, sim.params().noise, 42);
        ForceState b = sim.probe_multipose({1.3, -0.7}, sim.params().noise, 42);
        for (int i = 0; i < 30; ++i) CHECK(a.v[i] == b.v[i]);
        ForceState c = sim.probe_multipose({1.3, -0.7}, sim.params().noise, 43);
        CHECK(a.distance(c) > 0.0);
    }
    SUBCASE("mirrored offsets flip the lateral force") {
        ForceState plus = sim.probe_multipose({3, 0}, NoiseStd{0, 0}, 0);
        ForceState minus = sim.probe_multipose({-3, 0}, NoiseStd{0, 0}, 0);
        CHECK(plus.force(0, 0) == doctest::Approx(-minus.force(0, 0)).epsilon(1e-9));
        CHECK(std::abs(plus.force(0, 0)) > 1e-6);
    }
    SUBCASE("180-degree rotation negates lateral terms and keeps fz") {
        Rng rng(derive_seed(9, "mirror"));
        for (int rep = 0; rep < 10; ++rep) {
            Vec2 off{rng.uniform(-3, 3), rng.uniform(-3, 3)};
            ProbeResult a = sim.solve_descent(off, {0, 0});
            ProbeResult b = sim.solve_descent({-off.x, -off.y}, {0, 0});
            CHECK(a.reading.fz == doctest::Approx(b.reading.fz).epsilon(1e-6));
            CHECK(a.reading.fx == doctest::Approx(-b.reading.fx).epsilon(1e-6));
            CHECK(a.reading.fy == doctest::Approx(-b.reading.fy).epsilon(1e-6));
            CHECK(a.reading.tx == doctest::Approx(-b.reading.tx).epsilon(1e-6));
            CHECK(a.reading.ty == doctest::Approx(-b.reading.ty).epsilon(1e-6));
        }
    }
    SUBCASE("probe counter advances once per probe") {
        uint64_t before = probe_count();
        sim.probe_multipose({1, 1}, NoiseStd{0, 0}, 0);
        sim.probe_multipose({1, 1}, NoiseStd{0, 0}, 1);
        CHECK(probe_count() == before + 2);
    }
}

TEST_CASE("goal state") {
    ContactSim sim(kRound20);
    SUBCASE("canonical in all five poses") {
        CHECK(is_canonical(sim.goal_state(), sim.params().f_max));
    }
    SUBCASE("matches a zero-noise centered probe") {
        ForceState g = sim.goal_state();
        ForceState p = sim.probe_multipose({0, 0}, NoiseStd{0, 0}, 1234);
        for (int i = 0; i < 30; ++i) CHECK(g.v[i] == p.v[i]);
    }
    SUBCASE("independent of elasticity") {
        HoleSpec soft = kRound20;
        HoleSpec hard = kRound20;
        hard.elasticity = 50.0;
        ForceState a = ContactSim(soft).goal_state();
        ForceState b = ContactSim(hard).goal_state();
        for (int i = 0; i < 30; ++i) CHECK(a.v[i] == b.v[i]);
    }
}

TEST_CASE("multi-pose states distinguish grid positions better than single readings") {
    for (const HoleSpec& spec : {kRound20, kSquare20}) {
        ContactSim sim(spec);
        std::vector<ForceState> states;
        for (int i = 0; i < 9; ++i)
            for (int j = 0; j < 9; ++j)
                states.push_back(
                    sim.probe_multipose({-2.0 + 0.5 * i, -2.0 + 0.5 * j}, NoiseStd{0, 0}, 0));

        auto six_dim_distance = [](const ForceState& a, const ForceState& b) {
            double s = 0;
            for (int idx : {0, 1, 2, 15, 16, 17}) {
                double d = a.v[idx] - b.v[idx];
                s += d * d;
            }
            return std::sqrt(s);
        };
        double min30 = std::numeric_limits<double>::infinity();
        double min6 = std::numeric_limits<double>::infinity();
        for (size_t a = 0; a < states.size(); ++a) {
            for (size_t b = a + 1; b < states.size(); ++b) {
                min30 = std::min(min30, states[a].distance(states[b]));
                min6 = std::min(min6, six_dim_distance(states[a], states[b]));
            }
        }
        CAPTURE(spec.id());
        CHECK(min30 > 0.0);
        CHECK(min30 > min6);
    }
}
