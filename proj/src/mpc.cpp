#include "pegdyn/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pegdyn/rng.hpp"

namespace pegdyn::mpc {

int PlanConfig::elite_count() const {
    int e = static_cast<int>(std::ceil(elite_frac * n_samples));
    return std::clamp(e, 1, n_samples);
}

void PlanConfig::validate() const {
    if (n_samples < 1 || horizon < 1 || cem_iters < 1)
        throw std::invalid_argument("PlanConfig: counts must be >= 1");
    if (!(elite_frac > 0.0 && elite_frac <= 1.0))
        throw std::invalid_argument("PlanConfig: elite_frac in (0, 1]");
}

double state_cost(const ForceState& predicted, const ForceState& goal, double alpha, double beta) {
    double force = 0, torque = 0;
    for (int i = 0; i < 15; ++i) {
        double df = goal.v[i] - predicted.v[i];
        force += df * df;
        double dt = goal.v[15 + i] - predicted.v[15 + i];
        torque += dt * dt;
    }
    return alpha * force + beta * torque;
}

double rollout_cost(RolloutDynamics& model, const ForceState& start,
                    const std::vector<Vec2>& actions, const ForceState& goal,
                    const PlanConfig& config) {
    model.reset(start);
    double c = 0.0;
    for (Vec2 a : actions) c += state_cost(model.step(a), goal, config.alpha, config.beta);
    return c;
}

PlanOutput cem_optimize(const CostEvaluator& evaluator, const PlanConfig& config, uint64_t seed) {
    config.validate();
    const int n = config.n_samples;
    const int T = config.horizon;
    const int elites = config.elite_count();
    const Vec2 clip{config.action_clip_mult * config.init_std.x,
                    config.action_clip_mult * config.init_std.y};

    Rng rng(derive_seed(seed, "cem"));
    std::vector<Vec2> mean(T, Vec2{0.0, 0.0});
    std::vector<Vec2> stdev(T, config.init_std);

    // Standard-normal draws; refreshed each iteration unless common random
    // numbers are requested.
    std::vector<std::vector<Vec2>> z(n, std::vector<Vec2>(T));
    auto draw = [&]() {
        for (auto& row : z)
            for (auto& v : row) v = {rng.gaussian(0.0, 1.0), rng.gaussian(0.0, 1.0)};
    };
    draw();

    std::vector<std::vector<Vec2>> samples(n, std::vector<Vec2>(T));
    std::vector<int> order(n);
    PlanOutput out;
    for (int iter = 0; iter < config.cem_iters; ++iter) {
        if (iter > 0 && !config.common_random_numbers) draw();
        for (int s = 0; s < n; ++s) {
            for (int t = 0; t < T; ++t) {
                samples[s][t] = {
                    std::clamp(mean[t].x + stdev[t].x * z[s][t].x, -clip.x, clip.x),
                    std::clamp(mean[t].y + stdev[t].y * z[s][t].y, -clip.y, clip.y)};
            }
        }
        std::vector<double> costs = evaluator(samples);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return costs[a] < costs[b]; });

        double elite_cost = 0.0;
        for (int t = 0; t < T; ++t) {
            double mx = 0, my = 0;
            for (int e = 0; e < elites; ++e) {
                mx += samples[order[e]][t].x;
                my += samples[order[e]][t].y;
            }
            mx /= elites;
            my /= elites;
            double vx = 0, vy = 0;
            for (int e = 0; e < elites; ++e) {
                double dx = samples[order[e]][t].x - mx;
                double dy = samples[order[e]][t].y - my;
                vx += dx * dx;
                vy += dy * dy;
            }
            mean[t] = {mx, my};
            stdev[t] = {std::max(config.std_floor, std::sqrt(vx / elites)),
                        std::max(config.std_floor, std::sqrt(vy / elites))};
        }
        for (int e = 0; e < elites; ++e) elite_cost += costs[order[e]];
        out.elite_mean_costs.push_back(elite_cost / elites);
    }
    out.first_action = mean[0];
    return out;
}

PlanOutput cem_plan_detailed(RolloutDynamics& model, const ForceState& current,
                             const ForceState& goal, const PlanConfig& config, uint64_t seed) {
    CostEvaluator evaluator = [&](const std::vector<std::vector<Vec2>>& seqs) {
        return model.rollout_costs(current, seqs, goal, config.alpha, config.beta);
    };
    return cem_optimize(evaluator, config, seed);
}

Vec2 cem_plan(RolloutDynamics& model, const ForceState& current, const ForceState& goal,
              const PlanConfig& config, uint64_t seed) {
    return cem_plan_detailed(model, current, goal, config, seed).first_action;
}

namespace {

Vec2 clamp_box(Vec2 p, double bound) {
    return {std::clamp(p.x, -bound, bound), std::clamp(p.y, -bound, bound)};
}

struct ProbeStep {
    sim::MultiProbe probe;
    bool success;
};

ProbeStep probe_and_check(const sim::ContactSim& sim, Vec2 pos, double success_radius,
                          uint64_t seed) {
    sim::MultiProbe mp = sim.probe_detailed(pos, sim.params().noise, seed);
    bool success = pos.norm() <= success_radius || mp.all_inserted();
    return {mp, success};
}

}  // namespace

TrialResult run_mpc_episode(const sim::ContactSim& sim, RolloutDynamics& model, Vec2 start_offset,
                            const ForceState& goal, const PlanConfig& plan,
                            const EpisodeConfig& episode, uint64_t seed) {
    TrialResult result;
    Vec2 pos = start_offset;
    ProbeStep cur = probe_and_check(sim, pos, episode.success_radius,
                                    derive_seed(seed, "probe", 0));
    result.distances.push_back(pos.norm());
    result.step_costs.push_back(state_cost(cur.probe.state, goal, plan.alpha, plan.beta));
    for (int step = 0; step < episode.max_steps && !cur.success; ++step) {
        Vec2 a = cem_plan(model, cur.probe.state, goal, plan, derive_seed(seed, "plan", step));
        pos = clamp_box(pos + a, episode.env_bound);
        ++result.steps_taken;
        cur = probe_and_check(sim, pos, episode.success_radius,
                              derive_seed(seed, "probe", result.steps_taken));
        result.distances.push_back(pos.norm());
        result.step_costs.push_back(state_cost(cur.probe.state, goal, plan.alpha, plan.beta));
    }
    result.success = cur.success;
    result.final_distance = pos.norm();
    return result;
}

TrialResult run_random_episode(const sim::ContactSim& sim, Vec2 start_offset,
                               const PlanConfig& plan, const EpisodeConfig& episode,
                               uint64_t seed, const ForceState& goal) {
    TrialResult result;
    Rng rng(derive_seed(seed, "random-planner"));
    Vec2 pos = start_offset;
    ProbeStep cur = probe_and_check(sim, pos, episode.success_radius,
                                    derive_seed(seed, "probe", 0));
    result.distances.push_back(pos.norm());
    result.step_costs.push_back(state_cost(cur.probe.state, goal, plan.alpha, plan.beta));
    const Vec2 clip{plan.action_clip_mult * plan.init_std.x,
                    plan.action_clip_mult * plan.init_std.y};
    for (int step = 0; step < episode.max_steps && !cur.success; ++step) {
        Vec2 a{rng.uniform(-clip.x, clip.x), rng.uniform(-clip.y, clip.y)};
        pos = clamp_box(pos + a, episode.env_bound);
        ++result.steps_taken;
        cur = probe_and_check(sim, pos, episode.success_radius,
                              derive_seed(seed, "probe", result.steps_taken));
        result.distances.push_back(pos.norm());
        result.step_costs.push_back(state_cost(cur.probe.state, goal, plan.alpha, plan.beta));
    }
    result.success = cur.success;
    result.final_distance = pos.norm();
    return result;
}

}  // namespace pegdyn::mpc
