#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pegdyn/config.hpp"

namespace pegdyn::cli {

using data::GridTable;
using data::Trajectory;
using dyn::DynamicsModel;
using geometry::HoleSpec;
using sim::ContactSim;
using sim::ForceState;

// Looks through both catalogs; throws ConfigError for unknown ids.
HoleSpec spec_by_id(const std::string& id);

ContactSim make_sim(const HoleSpec& spec, const ExperimentConfig& cfg);
GridTable build_grid(const ExperimentConfig& cfg, const ContactSim& sim);

// Offline trajectory synthesis with a purpose-tagged child seed.
std::vector<Trajectory> synthesize(const ExperimentConfig& cfg, const GridTable& grid, int count,
                                   const std::string& purpose);

DynamicsModel pretrain_model(const ExperimentConfig& cfg, const std::vector<Trajectory>& pool,
                             uint64_t seed, dyn::TrainReport* report = nullptr);

struct FinetuneResult {
    DynamicsModel model;
    GridTable subgrid;
    std::vector<Trajectory> eval_set;            // 20 trajectories of the pool
    std::vector<std::pair<int, double>> curve;   // (episode, Err) checkpoints
    double final_err = 0.0;          // Err on eval_set (20 pool trajectories)
    double final_err_heldout = 0.0;  // Err on 20 unseen action sequences
};

// Subsamples the grid to `fraction`, synthesizes the finetune pool and adapts
// the base model (or trains from scratch when base is null). The adaptation
// runs two phases: the bulk at the training rate, the remainder at the 0.1x
// finetune rate to settle. Err follows the evaluation convention of the
// experiments: 20 trajectories drawn from the synthesized pool.
FinetuneResult adapt_to_hole(const ExperimentConfig& cfg, const DynamicsModel* base,
                             const GridTable& full_grid, double fraction, int episodes,
                             uint64_t seed, int checkpoint_every = 0);

struct BenchmarkResult {
    double success_rate = 0.0;
    double mean_steps = 0.0;
    std::vector<double> mean_distance;  // per step 0..max_steps
    int trials = 0;
};

enum class Controller { Mpc, Random, Rl };

BenchmarkResult benchmark_mpc(const ExperimentConfig& cfg, const ContactSim& sim,
                              mpc::RolloutDynamics& model, const ForceState& goal, int trials,
                              uint64_t seed);
BenchmarkResult benchmark_random(const ExperimentConfig& cfg, const ContactSim& sim,
                                 const ForceState& goal, int trials, uint64_t seed);
BenchmarkResult benchmark_policy(const ExperimentConfig& cfg, const ContactSim& sim,
                                 const rl::PolicyModel& policy, const ForceState& goal, int trials,
                                 uint64_t seed);

rl::PolicyModel train_policy_offline(const ExperimentConfig& cfg, const DynamicsModel& dynamics,
                                     const GridTable& grid, const ForceState& goal, uint64_t seed,
                                     rl::TrainReport* report = nullptr);

// Output-directory layout helpers.
struct RunPaths {
    std::string root;
    explicit RunPaths(std::string dir) : root(std::move(dir)) {}
    std::string grid(const std::string& hole) const { return root + "/data/grids/" + hole + ".grid"; }
    std::string dataset(const std::string& hole) const { return root + "/data/train/" + hole + ".traj"; }
    std::string pretrained() const { return root + "/models/pretrained.model"; }
    std::string finetuned(const std::string& hole, double fraction) const;
    std::string policy(const std::string& hole) const { return root + "/policies/" + hole + ".policy"; }
    std::string csv(const std::string& name) const { return root + "/" + name; }
    void ensure_dirs() const;
};

void write_text_file(const std::string& path, const std::string& content);

// Serializes the config into the run dir and writes manifest.txt.
void finalize_run(const ExperimentConfig& cfg, const std::string& command,
                  const std::vector<std::string>& inputs, std::vector<std::string> outputs);

// Subcommand bodies; throw ConfigError (exit 1) or other exceptions (exit 2).
void cmd_gen_data(const ExperimentConfig& cfg, const std::string& command);
void cmd_train_dynamics(const ExperimentConfig& cfg, const std::string& command);
void cmd_finetune(const ExperimentConfig& cfg, const std::string& command);
void cmd_eval_dynamics(const ExperimentConfig& cfg, const std::string& command);
void cmd_run_mpc(const ExperimentConfig& cfg, const std::string& command);
void cmd_train_rl(const ExperimentConfig& cfg, const std::string& command);
void cmd_eval_policy(const ExperimentConfig& cfg, const std::string& command);
void cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir,
                const std::string& command);

}  // namespace pegdyn::cli
