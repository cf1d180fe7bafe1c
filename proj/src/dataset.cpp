#include "pegdyn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pegdyn/errors.hpp"
#include "pegdyn/rng.hpp"

namespace pegdyn::data {

Vec2 GridTable::clamp(Vec2 p) const {
    return {std::clamp(p.x, -range.x / 2, range.x / 2),
            std::clamp(p.y, -range.y / 2, range.y / 2)};
}

size_t GridTable::nearest_index(Vec2 p) const {
    size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < positions.size(); ++i) {
        Vec2 d = positions[i] - p;
        double dd = d.dot(d);
        if (dd < best_d) {
            best_d = dd;
            best = i;
        }
    }
    return best;
}

GridTable sample_grid(const ContactSim& sim, int n, Vec2 range) {
    if (n < 2) throw std::invalid_argument("sample_grid: n must be >= 2");
    GridTable g;
    g.spec_id = sim.spec().id();
    g.n = n;
    g.range = range;
    g.f_max = sim.params().f_max;
    g.positions.reserve(static_cast<size_t>(n) * n);
    g.states.reserve(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Vec2 p{-range.x / 2 + i * range.x / (n - 1), -range.y / 2 + j * range.y / (n - 1)};
            g.positions.push_back(p);
            g.states.push_back(sim.probe_multipose(p, sim::NoiseStd{0.0, 0.0}, 0));
        }
    }
    return g;
}

const ForceState& nearest_grid_state(const GridTable& grid, Vec2 p) {
    return grid.states[grid.nearest_index(p)];
}

GridTable subsample_grid(const GridTable& grid, double fraction, uint64_t seed) {
    size_t total = grid.positions.size();
    size_t keep = std::max<size_t>(1, std::llround(fraction * static_cast<double>(total)));
    keep = std::min(keep, total);

    std::vector<size_t> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (size_t i = 0; i < keep; ++i) {
        size_t j = i + rng.index(total - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());

    GridTable out;
    out.spec_id = grid.spec_id;
    out.n = grid.n;
    out.range = grid.range;
    out.f_max = grid.f_max;
    for (size_t i : idx) {
        out.positions.push_back(grid.positions[i]);
        out.states.push_back(grid.states[i]);
    }
    return out;
}

std::vector<Trajectory> generate_trajectories(const GridTable& grid, int count, int steps,
                                              Vec2 action_std, uint64_t seed) {
    if (steps < 1) throw std::invalid_argument("generate_trajectories: steps must be >= 1");
    std::vector<Trajectory> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
        Rng rng(derive_seed(seed, "trajectory", static_cast<uint64_t>(k)));
        Trajectory tr;
        size_t start_idx = rng.index(grid.positions.size());
        tr.start = grid.positions[start_idx];
        tr.positions.push_back(tr.start);
        tr.states.push_back(grid.states[start_idx]);
        for (int t = 0; t < steps; ++t) {
            Vec2 a{rng.gaussian(0.0, action_std.x), rng.gaussian(0.0, action_std.y)};
            tr.actions.push_back(a);
            Vec2 next = grid.clamp(tr.positions.back() + a);
            tr.positions.push_back(next);
            tr.states.push_back(nearest_grid_state(grid, next));
        }
        out.push_back(std::move(tr));
    }
    return out;
}

namespace {

void append_number(std::string& line, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    line += buf;
}

}  // namespace

void save_dataset(const std::vector<Trajectory>& trajectories, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("save_dataset: cannot open " + path);
    int steps = trajectories.empty() ? 0 : static_cast<int>(trajectories.front().actions.size());
    out << "T=" << steps << " dim=" << ForceState::kDim << "\n";
    for (size_t id = 0; id < trajectories.size(); ++id) {
        const Trajectory& tr = trajectories[id];
        for (size_t t = 0; t < tr.states.size(); ++t) {
            std::string line = std::to_string(id) + "," + std::to_string(t) + ",";
            append_number(line, tr.positions[t].x);
            line += ',';
            append_number(line, tr.positions[t].y);
            line += ',';
            if (t < tr.actions.size()) {
                append_number(line, tr.actions[t].x);
                line += ',';
                append_number(line, tr.actions[t].y);
            } else {
                line += ',';
            }
            line += ',';
            line += tr.states[t].to_csv();
            out << line << "\n";
        }
    }
    if (!out) throw IoError("save_dataset: write failed for " + path);
}

std::vector<Trajectory> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_dataset: cannot open " + path);
    std::string line;
    long line_no = 1;
    if (!std::getline(in, line)) throw FormatError("dataset: missing header", line_no);
    int steps = -1, dim = -1;
    if (std::sscanf(line.c_str(), "T=%d dim=%d", &steps, &dim) != 2 || steps < 0 ||
        dim != ForceState::kDim)
        throw FormatError("dataset: bad header '" + line + "'", line_no);

    std::vector<Trajectory> out;
    long expected_id = 0;
    long expected_step = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string f_id, f_step, f_px, f_py, f_ax, f_ay;
        if (!std::getline(ls, f_id, ',') || !std::getline(ls, f_step, ',') ||
            !std::getline(ls, f_px, ',') || !std::getline(ls, f_py, ',') ||
            !std::getline(ls, f_ax, ',') || !std::getline(ls, f_ay, ','))
            throw FormatError("dataset: short row", line_no);
        std::string rest;
        std::getline(ls, rest);
        try {
            long id = std::stol(f_id);
            long step = std::stol(f_step);
            if (id == expected_id && step == 0 && expected_step == 0) {
                out.emplace_back();
            } else if (id != expected_id || step != expected_step) {
                throw FormatError("dataset: rows out of order", line_no);
            }
            Trajectory& tr = out.back();
            Vec2 pos{std::stod(f_px), std::stod(f_py)};
            tr.positions.push_back(pos);
            if (step == 0) tr.start = pos;
            bool terminal = step == steps;
            if (terminal != (f_ax.empty() && f_ay.empty()))
                throw FormatError("dataset: action fields inconsistent with step", line_no);
            if (!terminal) tr.actions.push_back({std::stod(f_ax), std::stod(f_ay)});
            tr.states.push_back(ForceState::from_csv(rest));
            if (terminal) {
                ++expected_id;
                expected_step = 0;
            } else {
                ++expected_step;
            }
        } catch (const std::invalid_argument&) {
            throw FormatError("dataset: unparsable number", line_no);
        } catch (const std::out_of_range&) {
            throw FormatError("dataset: number out of range", line_no);
        }
    }
    if (expected_step != 0) throw FormatError("dataset: truncated trajectory", line_no);
    return out;
}

void save_grid(const GridTable& grid, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("save_grid: cannot open " + path);
    char head[256];
    std::snprintf(head, sizeof(head), "spec=%s n=%d rx=%.17g ry=%.17g fmax=%.17g count=%zu\n",
                  grid.spec_id.c_str(), grid.n, grid.range.x, grid.range.y, grid.f_max,
                  grid.positions.size());
    out << head;
    for (size_t i = 0; i < grid.positions.size(); ++i) {
        std::string line;
        append_number(line, grid.positions[i].x);
        line += ',';
        append_number(line, grid.positions[i].y);
        line += ',';
        line += grid.states[i].to_csv();
        out << line << "\n";
    }
    if (!out) throw IoError("save_grid: write failed for " + path);
}

GridTable load_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_grid: cannot open " + path);
    std::string line;
    long line_no = 1;
    if (!std::getline(in, line)) throw FormatError("grid: missing header", line_no);
    GridTable g;
    char spec_buf[128];
    size_t count = 0;
    if (std::sscanf(line.c_str(), "spec=%127s n=%d rx=%lg ry=%lg fmax=%lg count=%zu", spec_buf,
                    &g.n, &g.range.x, &g.range.y, &g.f_max, &count) != 6)
        throw FormatError("grid: bad header '" + line + "'", line_no);
    g.spec_id = spec_buf;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string f_px, f_py, rest;
        if (!std::getline(ls, f_px, ',') || !std::getline(ls, f_py, ','))
            throw FormatError("grid: short row", line_no);
        std::getline(ls, rest);
        try {
            g.positions.push_back({std::stod(f_px), std::stod(f_py)});
            g.states.push_back(ForceState::from_csv(rest));
        } catch (const std::invalid_argument&) {
            throw FormatError("grid: unparsable number", line_no);
        }
    }
    if (g.positions.size() != count) throw FormatError("grid: row count mismatch", line_no);
    return g;
}

}  // namespace pegdyn::data
