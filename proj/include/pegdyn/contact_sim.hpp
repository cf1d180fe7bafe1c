#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pegdyn/geometry.hpp"

namespace pegdyn::sim {

using geometry::HoleSpec;
using geometry::PegFootprint;
using geometry::Vec2;

struct ForceTorque {
    double fx = 0, fy = 0, fz = 0;  // N
    double tx = 0, ty = 0, tz = 0;  // N*m
};

// End-effector tilt about x and y, degrees.
struct Tilt {
    double rx = 0.0;
    double ry = 0.0;
};

constexpr double kTiltDelta = 30.0;

// Fixed pose order used everywhere: (0,0), (+d,0), (-d,0), (0,+d), (0,-d).
const std::array<Tilt, 5>& pose_order();

// 30-d multi-pose state: dims 0..14 are fx,fy,fz for poses 1..5, dims 15..29
// the matching torques.
struct ForceState {
    static constexpr int kDim = 30;
    std::array<double, kDim> v{};

    double& force(int pose, int axis) { return v[pose * 3 + axis]; }
    double force(int pose, int axis) const { return v[pose * 3 + axis]; }
    double& torque(int pose, int axis) { return v[15 + pose * 3 + axis]; }
    double torque(int pose, int axis) const { return v[15 + pose * 3 + axis]; }

    std::array<double, 15> force_part() const;
    std::array<double, 15> torque_part() const;

    double distance(const ForceState& o) const;

    std::string to_csv() const;  // 30 comma-separated decimals
    static ForceState from_csv(const std::string& line);
};

struct ProbeResult {
    ForceTorque reading;
    double descent_depth = 0.0;  // mm
    bool inserted = false;
};

struct MultiProbe {
    ForceState state;
    std::array<bool, 5> inserted{};
    bool all_inserted() const;
};

struct NoiseStd {
    double force = 0.05;    // N
    double torque = 0.002;  // N*m
};

struct SimParams {
    double f_max = 10.0;               // N, descent stop threshold
    double mu = 0.3;                   // rim friction coefficient
    double edge_band = 0.5;            // mm, rim band producing lateral force
    double wall_margin = 0.1;          // mm of centered play before wall graze
    double wall_gain = 0.001;          // wall stiffness relative to elasticity
    double descent_tol = 1e-4;         // mm, bisection tolerance
    double footprint_resolution = 2.0; // points per mm
    NoiseStd noise;
};

// Simulates the probe of one hole: descend each of the five poses until the
// z force reaches f_max and read the wrench. Wraps one footprint, so keep the
// instance around when probing the same hole repeatedly.
class ContactSim {
public:
    explicit ContactSim(HoleSpec spec, SimParams params = {});

    ForceTorque contact_wrench(Vec2 offset, Tilt tilt, double depth) const;
    ProbeResult solve_descent(Vec2 offset, Tilt tilt) const;

    // Zero-mean Gaussian noise per channel; deterministic given seed.
    ForceState probe_multipose(Vec2 offset, NoiseStd noise, uint64_t seed) const;
    MultiProbe probe_detailed(Vec2 offset, NoiseStd noise, uint64_t seed) const;
    ForceState goal_state() const;

    const HoleSpec& spec() const { return spec_; }
    const SimParams& params() const { return params_; }
    const PegFootprint& footprint() const { return footprint_; }

private:
    struct FieldPoint {
        Vec2 rel;   // mm, relative to footprint centroid
        double s;   // sdf at the world position
        Vec2 grad;  // unit outward sdf gradient (zero if degenerate)
    };
    struct Field {
        std::vector<FieldPoint> contact;  // s > 0: plate-top contact candidates
        std::vector<FieldPoint> wall;     // -wall_band < s <= 0: wall graze
    };

    Field build_field(Vec2 offset) const;
    double total_fz(const Field& f, double tan_rx, double tan_ry, double depth) const;
    ForceTorque wrench_at(const Field& f, double tan_rx, double tan_ry, double depth) const;
    ForceTorque inserted_reading(const Field& f) const;
    ProbeResult descend(const Field& f, Tilt tilt) const;

    HoleSpec spec_;
    SimParams params_;
    PegFootprint footprint_;
    double wall_band_;
};

// Total multi-pose probes performed in this process; the sample budget
// instrumentation used by the offline-vs-online comparisons.
uint64_t probe_count();
void reset_probe_count();

// Convenience wrappers matching the one-shot call style (footprint rebuilt
// each call; prefer ContactSim in loops).
ForceTorque contact_wrench(const HoleSpec& spec, Vec2 offset, Tilt tilt, double depth,
                           const SimParams& params = {});
ProbeResult solve_descent(const HoleSpec& spec, Vec2 offset, Tilt tilt, double f_max);
ForceState probe_multipose(const HoleSpec& spec, Vec2 offset, double f_max, NoiseStd noise,
                           uint64_t seed);
ForceState goal_state(const HoleSpec& spec, double f_max);

}  // namespace pegdyn::sim
