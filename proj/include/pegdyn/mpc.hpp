#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pegdyn/rollout.hpp"

namespace pegdyn::mpc {

struct PlanConfig {
    int n_samples = 200;
    int horizon = 6;
    int cem_iters = 5;
    double elite_frac = 0.1;
    Vec2 init_std{2.0, 2.0};  // mm
    double alpha = 0.05;
    double beta = 1.0;
    double std_floor = 0.01;        // mm, refit std lower bound
    double action_clip_mult = 3.0;  // samples clipped at mult * init_std
    bool common_random_numbers = false;

    int elite_count() const;
    void validate() const;
};

// alpha |dF_force|^2 + beta |dF_torque|^2 over the 15/15 split, raw units.
double state_cost(const ForceState& predicted, const ForceState& goal, double alpha, double beta);

// Free-running unroll from `start` (fresh hidden state); sum of per-step costs.
double rollout_cost(RolloutDynamics& model, const ForceState& start,
                    const std::vector<Vec2>& actions, const ForceState& goal,
                    const PlanConfig& config);

struct PlanOutput {
    Vec2 first_action;
    std::vector<double> elite_mean_costs;  // one per CEM iteration
};

// Generic CEM over action sequences; evaluator returns one cost per candidate.
using CostEvaluator = std::function<std::vector<double>(const std::vector<std::vector<Vec2>>&)>;
PlanOutput cem_optimize(const CostEvaluator& evaluator, const PlanConfig& config, uint64_t seed);

// Production entry: plans against the rollout model and returns the first
// action of the final mean sequence. Deterministic per seed.
Vec2 cem_plan(RolloutDynamics& model, const ForceState& current, const ForceState& goal,
              const PlanConfig& config, uint64_t seed);
PlanOutput cem_plan_detailed(RolloutDynamics& model, const ForceState& current,
                             const ForceState& goal, const PlanConfig& config, uint64_t seed);

struct TrialResult {
    int steps_taken = 0;
    bool success = false;
    double final_distance = 0.0;          // mm
    std::vector<double> step_costs;       // state_cost of each probed state
    std::vector<double> distances;        // |offset| after 0..steps_taken actions
};

struct EpisodeConfig {
    int max_steps = 6;
    double success_radius = 1.0;  // mm, true-offset criterion
    double env_bound = 2.0;       // mm, positions clamp to the grid box in eval
};

// Closed loop: probe (noisy) -> plan -> execute first action -> repeat.
// Succeeds when the true offset is inside success_radius or all five poses
// report inserted.
TrialResult run_mpc_episode(const sim::ContactSim& sim, RolloutDynamics& model, Vec2 start_offset,
                            const ForceState& goal, const PlanConfig& plan,
                            const EpisodeConfig& episode, uint64_t seed);

// Negative-control planner: uniform random action in the clip box.
TrialResult run_random_episode(const sim::ContactSim& sim, Vec2 start_offset,
                               const PlanConfig& plan, const EpisodeConfig& episode,
                               uint64_t seed, const ForceState& goal);

}  // namespace pegdyn::mpc
