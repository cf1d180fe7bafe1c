#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pegdyn/contact_sim.hpp"
#include "pegdyn/dynamics.hpp"
#include "pegdyn/mpc.hpp"
#include "pegdyn/rl.hpp"

namespace pegdyn::cli {

// Flat key/value configuration with section headers; every knob of every
// module. A run's config is serialized verbatim into its output directory.
struct ExperimentConfig {
    sim::SimParams sim_params;

    int grid_n = 9;
    geometry::Vec2 grid_range{4.0, 4.0};
    int trajectories_per_hole = 400;
    int finetune_trajectories = 100;  // synthetic pool per adapted hole
    int trajectory_steps = 10;
    double action_std = -1.0;  // <=0: use the planning range, grid_range.x / 2

    dyn::DynConfig dyn_config;
    int pretrain_episodes = 4000;
    int finetune_episodes = 2000;
    int scratch_episodes = 6000;
    int batch = 20;

    mpc::PlanConfig plan;
    int mpc_trials = 100;
    int max_steps = 6;
    double success_radius = 1.0;
    double ring_radius = 2.0;
    double ring_width = 0.5;

    rl::RlConfig rl_config;
    int rl_episodes = 3000;
    double reward_eps = 0.9;
    double sigma_scale = 0.5;  // sigma = scale * median squared distance
    bool rl_online = false;
    int online_episodes = 20000;

    uint64_t seed = 0;
    std::string out_dir = "runs/out";
    std::string target_hole = "round_15";
    double finetune_fraction = 0.2;
    double benchmark_fraction = 1.0;
    std::vector<std::string> holes = {"round_15",   "square_15",  "triangle_15",
                                      "ellipse_15", "hexagon_15", "xshape_15"};
    std::vector<double> fractions = {0.02, 0.2, 0.4, 0.6, 0.8, 1.0};

    // Lattice spacing over two, unless overridden.
    double effective_action_std() const;
    // Couples the normalization noise floor to the sensor model.
    dyn::DynConfig effective_dyn_config() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);
// key is "section.key"; throws ConfigError for unknown keys or bad values.
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::string serialize_config(const ExperimentConfig& cfg);

uint64_t content_hash(const std::string& bytes);
uint64_t file_hash(const std::string& path);

struct RunManifest {
    std::string command;
    uint64_t config_hash = 0;
    uint64_t seed = 0;
    std::vector<std::pair<std::string, uint64_t>> inputs;   // path, content hash
    std::vector<std::pair<std::string, uint64_t>> outputs;  // path, content hash

    std::string to_text() const;
};

}  // namespace pegdyn::cli
