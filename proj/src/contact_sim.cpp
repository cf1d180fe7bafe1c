#include "pegdyn/contact_sim.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "pegdyn/errors.hpp"
#include "pegdyn/rng.hpp"

namespace pegdyn::sim {

namespace {
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
constexpr double kMmToM = 1e-3;
std::atomic<uint64_t> g_probe_count{0};
}  // namespace

const std::array<Tilt, 5>& pose_order() {
    static const std::array<Tilt, 5> poses = {{
        {0.0, 0.0},
        {+kTiltDelta, 0.0},
        {-kTiltDelta, 0.0},
        {0.0, +kTiltDelta},
        {0.0, -kTiltDelta},
    }};
    return poses;
}

std::array<double, 15> ForceState::force_part() const {
    std::array<double, 15> out;
    std::copy(v.begin(), v.begin() + 15, out.begin());
    return out;
}

std::array<double, 15> ForceState::torque_part() const {
    std::array<double, 15> out;
    std::copy(v.begin() + 15, v.end(), out.begin());
    return out;
}

double ForceState::distance(const ForceState& o) const {
    double s = 0;
    for (int i = 0; i < kDim; ++i) {
        double d = v[i] - o.v[i];
        s += d * d;
    }
    return std::sqrt(s);
}

std::string ForceState::to_csv() const {
    std::string out;
    char buf[32];
    for (int i = 0; i < kDim; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
        if (i) out += ',';
        out += buf;
    }
    return out;
}

ForceState ForceState::from_csv(const std::string& line) {
    ForceState st;
    std::istringstream in(line);
    std::string field;
    for (int i = 0; i < kDim; ++i) {
        if (!std::getline(in, field, ',')) throw FormatError("ForceState: expected 30 values");
        st.v[i] = std::stod(field);
    }
    return st;
}

bool MultiProbe::all_inserted() const {
    for (bool b : inserted)
        if (!b) return false;
    return true;
}

ContactSim::ContactSim(HoleSpec spec, SimParams params)
    : spec_(spec),
      params_(params),
      footprint_(geometry::make_footprint(spec, params.footprint_resolution)) {
    // Lateral play of the centered peg; the wall band starts wall_margin
    // short of it so the canonical centered reading stays exactly zero.
    double max_sdf = -std::numeric_limits<double>::infinity();
    for (const Vec2& p : footprint_.points)
        max_sdf = std::max(max_sdf, geometry::sdf(spec_, p));
    wall_band_ = std::max(0.0, -max_sdf - params_.wall_margin);
}

ContactSim::Field ContactSim::build_field(Vec2 offset) const {
    Field f;
    for (const Vec2& p : footprint_.points) {
        Vec2 world = p + offset;
        double s = geometry::sdf(spec_, world);
        if (s > 0.0) {
            Vec2 g = s < params_.edge_band ? geometry::sdf_gradient(spec_, world) : Vec2{};
            f.contact.push_back({p - footprint_.centroid, s, g});
        } else if (s > -wall_band_) {
            f.wall.push_back({p - footprint_.centroid, s, geometry::sdf_gradient(spec_, world)});
        }
    }
    return f;
}

double ContactSim::total_fz(const Field& f, double tan_rx, double tan_ry, double depth) const {
    const double ka = spec_.elasticity * footprint_.point_area;
    double fz = 0;
    for (const FieldPoint& pt : f.contact) {
        double pen = depth + tan_ry * pt.rel.x - tan_rx * pt.rel.y;
        if (pen > 0) fz += ka * pen;
    }
    return fz;
}

ForceTorque ContactSim::wrench_at(const Field& f, double tan_rx, double tan_ry,
                                  double depth) const {
    const double ka = spec_.elasticity * footprint_.point_area;
    ForceTorque w;
    for (const FieldPoint& pt : f.contact) {
        double pen = depth + tan_ry * pt.rel.x - tan_rx * pt.rel.y;
        if (pen <= 0) continue;
        double fz = ka * pen;
        double fx = 0, fy = 0;
        if (pt.s < params_.edge_band) {
            // Rim contact: the peg slides off toward rising sdf.
            fx = params_.mu * fz * pt.grad.x;
            fy = params_.mu * fz * pt.grad.y;
        }
        double rx = pt.rel.x * kMmToM, ry = pt.rel.y * kMmToM;
        w.fx += fx;
        w.fy += fy;
        w.fz += fz;
        w.tx += ry * fz;
        w.ty += -rx * fz;
        w.tz += rx * fy - ry * fx;
    }
    return w;
}

// Reading for a pose that passed through the plate: the floor supplies f_max
// straight up; the hole wall adds a lateral graze wrench that vanishes when
// the peg sits centered. Keeps distinct near-center offsets distinguishable.
ForceTorque ContactSim::inserted_reading(const Field& f) const {
    const double k_wall = params_.wall_gain * spec_.elasticity * footprint_.point_area;
    const double lever = -(spec_.plate_thickness / 2.0) * kMmToM;  // below TCP
    ForceTorque w;
    w.fz = params_.f_max;
    for (const FieldPoint& pt : f.wall) {
        double overlap = wall_band_ + pt.s;
        if (overlap <= 0) continue;
        double mag = k_wall * overlap;
        double fx = -mag * pt.grad.x;  // pushed back from the wall
        double fy = -mag * pt.grad.y;
        double rx = pt.rel.x * kMmToM, ry = pt.rel.y * kMmToM;
        w.fx += fx;
        w.fy += fy;
        w.tx += -lever * fy;
        w.ty += lever * fx;
        w.tz += rx * fy - ry * fx;
    }
    return w;
}

ProbeResult ContactSim::descend(const Field& f, Tilt tilt) const {
    const double tan_rx = std::tan(tilt.rx * kDegToRad);
    const double tan_ry = std::tan(tilt.ry * kDegToRad);

    if (!f.contact.empty()) {
        // Depth at which the lowest point first touches; can be negative for
        // tilted poses whose leading edge reaches below the TCP plane.
        double h_max = -std::numeric_limits<double>::infinity();
        for (const FieldPoint& pt : f.contact)
            h_max = std::max(h_max, tan_ry * pt.rel.x - tan_rx * pt.rel.y);
        double lo = std::min(0.0, -h_max);
        double hi = spec_.plate_thickness;
        double f_lo = total_fz(f, tan_rx, tan_ry, lo);
        double f_hi = total_fz(f, tan_rx, tan_ry, hi);
        if (f_lo > f_hi + 1e-9)
            throw NonMonotoneFieldError("descend: fz decreased with depth for " + spec_.id());
        if (f_hi >= params_.f_max) {
            while (hi - lo > params_.descent_tol) {
                double mid = 0.5 * (lo + hi);
                if (total_fz(f, tan_rx, tan_ry, mid) >= params_.f_max)
                    hi = mid;
                else
                    lo = mid;
            }
            double z = 0.5 * (lo + hi);
            return {wrench_at(f, tan_rx, tan_ry, z), z, false};
        }
    }
    // Threshold not reached by plate contact: the peg passes through and the
    // floor stops it.
    return {inserted_reading(f), spec_.floor_depth, true};
}

ForceTorque ContactSim::contact_wrench(Vec2 offset, Tilt tilt, double depth) const {
    Field f = build_field(offset);
    return wrench_at(f, std::tan(tilt.rx * kDegToRad), std::tan(tilt.ry * kDegToRad), depth);
}

ProbeResult ContactSim::solve_descent(Vec2 offset, Tilt tilt) const {
    return descend(build_field(offset), tilt);
}

MultiProbe ContactSim::probe_detailed(Vec2 offset, NoiseStd noise, uint64_t seed) const {
    g_probe_count.fetch_add(1, std::memory_order_relaxed);
    Field f = build_field(offset);
    MultiProbe out;
    for (int i = 0; i < 5; ++i) {
        ProbeResult pr = descend(f, pose_order()[i]);
        out.inserted[i] = pr.inserted;
        out.state.force(i, 0) = pr.reading.fx;
        out.state.force(i, 1) = pr.reading.fy;
        out.state.force(i, 2) = pr.reading.fz;
        out.state.torque(i, 0) = pr.reading.tx;
        out.state.torque(i, 1) = pr.reading.ty;
        out.state.torque(i, 2) = pr.reading.tz;
    }
    if (noise.force > 0 || noise.torque > 0) {
        Rng rng(seed);
        for (int d = 0; d < ForceState::kDim; ++d)
            out.state.v[d] += rng.gaussian(0.0, d < 15 ? noise.force : noise.torque);
    }
    return out;
}

ForceState ContactSim::probe_multipose(Vec2 offset, NoiseStd noise, uint64_t seed) const {
    return probe_detailed(offset, noise, seed).state;
}

ForceState ContactSim::goal_state() const {
    return probe_multipose({0.0, 0.0}, NoiseStd{0.0, 0.0}, 0);
}

uint64_t probe_count() { return g_probe_count.load(std::memory_order_relaxed); }
void reset_probe_count() { g_probe_count.store(0, std::memory_order_relaxed); }

ForceTorque contact_wrench(const HoleSpec& spec, Vec2 offset, Tilt tilt, double depth,
                           const SimParams& params) {
    return ContactSim(spec, params).contact_wrench(offset, tilt, depth);
}

ProbeResult solve_descent(const HoleSpec& spec, Vec2 offset, Tilt tilt, double f_max) {
    SimParams p;
    p.f_max = f_max;
    return ContactSim(spec, p).solve_descent(offset, tilt);
}

ForceState probe_multipose(const HoleSpec& spec, Vec2 offset, double f_max, NoiseStd noise,
                           uint64_t seed) {
    SimParams p;
    p.f_max = f_max;
    return ContactSim(spec, p).probe_multipose(offset, noise, seed);
}

ForceState goal_state(const HoleSpec& spec, double f_max) {
    SimParams p;
    p.f_max = f_max;
    return ContactSim(spec, p).goal_state();
}

}  // namespace pegdyn::sim
