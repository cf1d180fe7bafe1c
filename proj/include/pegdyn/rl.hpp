#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pegdyn/mpc.hpp"
#include "pegdyn/rng.hpp"

namespace pegdyn::rl {

using data::GridTable;
using geometry::Vec2;
using sim::ForceState;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr int kNumActions = 8;

// Fixed index order E, S, W, N, NE, SW, SE, NW; diagonals move step_size on
// both axes (one unit per axis, not normalized).
Vec2 action_vector(int index, double step_size);

struct RewardConfig {
    double sigma = 1.0;         // similarity bandwidth, normalized units
    double eps = 0.9;           // success threshold on G
    double goal_reward = 1.0;
    double step_reward = -0.02;

    void validate() const;
};

// G = exp(-|a - b|^2 / sigma); callers pass normalized 30-d states.
double similarity(const VectorXd& a, const VectorXd& b, double sigma);

// goal_reward when similarity strictly exceeds eps, step_reward otherwise.
double reward(const VectorXd& state, const VectorXd& goal, const RewardConfig& cfg);

// sigma = 0.5 * median squared normalized distance between grid states and
// the goal; keeps G spread over (0,1) across the hole.
double auto_sigma(const GridTable& grid, const ForceState& goal, const dyn::NormStats& stats);

struct RlConfig {
    int hidden = 64;
    double learning_rate = 3e-4;
    double discount = 0.95;
    double entropy_weight = 0.01;
    double value_weight = 0.5;
    int horizon = 10;
    double step_size = 0.5;  // mm per unit move
    uint64_t seed = 0;
};

// Discrete 8-way policy (30 -> hidden -> 8 logits) with a separate value head
// (30 -> hidden -> 1); shares the dynamics model's normalization.
class PolicyModel {
public:
    PolicyModel() = default;
    PolicyModel(const RlConfig& cfg, const dyn::NormStats& stats, uint64_t seed);

    struct Output {
        VectorXd probs;   // 8, strictly positive
        VectorXd logits;  // 8
        double value;
    };
    Output forward(const ForceState& raw_state) const;
    Output forward_normalized(const VectorXd& state) const;
    int argmax_action(const ForceState& raw_state) const;

    const RlConfig& config() const { return cfg_; }
    const dyn::NormStats& stats() const { return stats_; }

    std::vector<std::pair<double*, long>> param_blocks();
    std::vector<std::pair<const double*, long>> param_blocks() const;
    bool operator==(const PolicyModel& o) const;

    friend void save_policy(const PolicyModel& policy, const std::string& path);
    friend PolicyModel load_policy(const std::string& path);
    friend struct A2cTrainer;

private:
    RlConfig cfg_;
    dyn::NormStats stats_;
    MatrixXd pw1_, pw2_;  // policy net
    VectorXd pb1_, pb2_;
    MatrixXd vw1_, vw2_;  // value net
    VectorXd vb1_, vb2_;
};

struct TrainReport {
    int episodes_run = 0;
    std::vector<double> returns;  // undiscounted episode return
    double seconds = 0.0;
};

// Offline actor-critic: initial states come from the grid, transitions from
// the frozen rollout dynamics; the simulator is never touched. Episodes stop
// early once the goal reward fires.
TrainReport train_offline(PolicyModel& policy, mpc::RolloutDynamics& dynamics,
                          const GridTable& grid, const ForceState& goal, int episodes,
                          int horizon, const RewardConfig& cfg, uint64_t seed);

struct EvalConfig {
    int trials = 100;
    int max_steps = 6;
    double success_radius = 1.0;
    double env_bound = 2.0;
    double ring_radius = 2.0;  // start offsets uniform on ring_radius +- ring_width
    double ring_width = 0.5;
};

struct EvalResult {
    double success_rate = 0.0;
    std::vector<mpc::TrialResult> trials;
};

// Greedy policy evaluation in the simulator with sensor noise on.
EvalResult eval_policy(const sim::ContactSim& sim, const PolicyModel& policy,
                       const ForceState& goal, const EvalConfig& cfg, uint64_t seed);

// Start offset uniform on the 2 +- 0.5 mm ring (or as configured).
Vec2 sample_start_offset(Rng& rng, double ring_radius, double ring_width);

// Online counterpart for the sample-efficiency comparison: every transition
// probes the simulator. Returns the probe count consumed.
TrainReport train_online(PolicyModel& policy, const sim::ContactSim& sim, const ForceState& goal,
                         int episodes, int horizon, const RewardConfig& cfg, uint64_t seed,
                         double ring_radius, double ring_width, double env_bound);

void save_policy(const PolicyModel& policy, const std::string& path);
PolicyModel load_policy(const std::string& path);

}  // namespace pegdyn::rl
