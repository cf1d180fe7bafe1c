#pragma once

#include <memory>
#include <vector>

#include "pegdyn/dynamics.hpp"

namespace pegdyn::mpc {

using data::GridTable;
using dyn::DynamicsModel;
using geometry::Vec2;
using sim::ForceState;

// Free-running transition model used by the planners: start from a probed
// state, then predict successor states for candidate actions.
class RolloutDynamics {
public:
    virtual ~RolloutDynamics() = default;
    virtual void reset(const ForceState& start) = 0;
    virtual ForceState step(Vec2 action) = 0;

    // Cost of each candidate sequence starting from `start`:
    // sum_t state_cost(F_hat_t, goal). Base implementation loops reset/step.
    virtual std::vector<double> rollout_costs(const ForceState& start,
                                              const std::vector<std::vector<Vec2>>& sequences,
                                              const ForceState& goal, double alpha, double beta);
};

// Wraps the learned recurrent model; rollout_costs runs all candidates in
// lockstep as one batched matrix recursion.
class LearnedDynamics : public RolloutDynamics {
public:
    explicit LearnedDynamics(const DynamicsModel& model);

    void reset(const ForceState& start) override;
    ForceState step(Vec2 action) override;
    std::vector<double> rollout_costs(const ForceState& start,
                                      const std::vector<std::vector<Vec2>>& sequences,
                                      const ForceState& goal, double alpha, double beta) override;

private:
    const DynamicsModel* model_;
    DynamicsModel::Hidden hid_;
    Eigen::VectorXd state_;  // normalized
};

// Ground-truth stand-in: tracks a position estimate and answers with the
// nearest grid state. reset() locates the start state in the table.
class OracleGridDynamics : public RolloutDynamics {
public:
    explicit OracleGridDynamics(const GridTable& grid);

    void reset(const ForceState& start) override;
    ForceState step(Vec2 action) override;

private:
    const GridTable* grid_;
    Vec2 position_;
};

}  // namespace pegdyn::mpc
