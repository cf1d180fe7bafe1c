#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pegdyn/contact_sim.hpp"

namespace pegdyn::data {

using geometry::Vec2;
using sim::ContactSim;
using sim::ForceState;

// Probed lattice over the hole. Full grids from sample_grid are row-major with
// index = ix*n + iy (x varying slowest); subsampled tables keep the parent
// metadata but hold only the selected points.
struct GridTable {
    std::string spec_id;
    int n = 0;
    Vec2 range;  // (Rx, Ry); lattice spans [-Rx/2, Rx/2] x [-Ry/2, Ry/2]
    double f_max = 10.0;
    std::vector<Vec2> positions;
    std::vector<ForceState> states;

    double spacing_x() const { return range.x / (n - 1); }
    double spacing_y() const { return range.y / (n - 1); }
    Vec2 clamp(Vec2 p) const;
    // Euclidean argmin; ties resolve to the smallest index.
    size_t nearest_index(Vec2 p) const;
};

// Probes every lattice point with zero sensor noise.
GridTable sample_grid(const ContactSim& sim, int n, Vec2 range);

const ForceState& nearest_grid_state(const GridTable& grid, Vec2 p);

// Keeps round(fraction * count) points (at least 1), chosen uniformly without
// replacement; deterministic given seed.
GridTable subsample_grid(const GridTable& grid, double fraction, uint64_t seed);

struct Trajectory {
    Vec2 start;
    std::vector<Vec2> actions;      // length T, raw Gaussian draws
    std::vector<Vec2> positions;    // length T+1, clamped to the grid range
    std::vector<ForceState> states; // length T+1, nearest-grid ground truth
};

// Starts are uniform over the grid points; actions i.i.d. Gaussian per axis.
std::vector<Trajectory> generate_trajectories(const GridTable& grid, int count, int steps,
                                              Vec2 action_std, uint64_t seed);

// Text format: header "T=<int> dim=30", then one line per step:
// traj_id,step,px,py,ax,ay,f0..f29 (terminal steps leave ax/ay empty).
void save_dataset(const std::vector<Trajectory>& trajectories, const std::string& path);
std::vector<Trajectory> load_dataset(const std::string& path);

void save_grid(const GridTable& grid, const std::string& path);
GridTable load_grid(const std::string& path);

}  // namespace pegdyn::data
