#include "pegdyn/rollout.hpp"

#include "pegdyn/mpc.hpp"

namespace pegdyn::mpc {

std::vector<double> RolloutDynamics::rollout_costs(const ForceState& start,
                                                   const std::vector<std::vector<Vec2>>& sequences,
                                                   const ForceState& goal, double alpha,
                                                   double beta) {
    std::vector<double> costs;
    costs.reserve(sequences.size());
    for (const auto& seq : sequences) {
        reset(start);
        double c = 0.0;
        for (Vec2 a : seq) c += state_cost(step(a), goal, alpha, beta);
        costs.push_back(c);
    }
    return costs;
}

LearnedDynamics::LearnedDynamics(const DynamicsModel& model) : model_(&model) {
    hid_ = model_->make_hidden(1);
    state_ = Eigen::VectorXd::Zero(dyn::kStateDim);
}

void LearnedDynamics::reset(const ForceState& start) {
    hid_ = model_->make_hidden(1);
    state_ = model_->stats().normalize_state(start);
}

ForceState LearnedDynamics::step(Vec2 action) {
    Eigen::MatrixXd x(dyn::kInputDim, 1);
    x.col(0).head(dyn::kStateDim) = state_;
    Vec2 na = model_->stats().normalize_action(action);
    x(dyn::kStateDim, 0) = na.x;
    x(dyn::kStateDim + 1, 0) = na.y;
    Eigen::MatrixXd y = model_->step_normalized(x, hid_);
    state_ = y.col(0);
    return model_->stats().denormalize_state(state_);
}

std::vector<double> LearnedDynamics::rollout_costs(const ForceState& start,
                                                   const std::vector<std::vector<Vec2>>& sequences,
                                                   const ForceState& goal, double alpha,
                                                   double beta) {
    const int B = static_cast<int>(sequences.size());
    if (B == 0) return {};
    const size_t T = sequences.front().size();
    const dyn::NormStats& st = model_->stats();

    Eigen::VectorXd weights(dyn::kStateDim);
    weights.head(15).setConstant(alpha);
    weights.tail(15).setConstant(beta);
    Eigen::VectorXd goal_v(dyn::kStateDim);
    for (int i = 0; i < dyn::kStateDim; ++i) goal_v[i] = goal.v[i];

    DynamicsModel::Hidden hid = model_->make_hidden(B);
    Eigen::MatrixXd x(dyn::kInputDim, B);
    Eigen::VectorXd s0 = st.normalize_state(start);
    Eigen::MatrixXd state = s0.replicate(1, B);

    Eigen::VectorXd costs = Eigen::VectorXd::Zero(B);
    for (size_t t = 0; t < T; ++t) {
        x.topRows(dyn::kStateDim) = state;
        for (int b = 0; b < B; ++b) {
            Vec2 na = st.normalize_action(sequences[b][t]);
            x(dyn::kStateDim, b) = na.x;
            x(dyn::kStateDim + 1, b) = na.y;
        }
        state = model_->step_normalized(x, hid);
        // De-normalize and accumulate the weighted squared distance to goal.
        Eigen::MatrixXd raw = (state.array().colwise() * st.state_std.array()).matrix();
        raw.colwise() += st.state_mean - goal_v;
        costs += raw.array().square().matrix().transpose() * weights;
    }
    return {costs.data(), costs.data() + B};
}

OracleGridDynamics::OracleGridDynamics(const GridTable& grid) : grid_(&grid) {}

void OracleGridDynamics::reset(const ForceState& start) {
    size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < grid_->states.size(); ++i) {
        double d = grid_->states[i].distance(start);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    position_ = grid_->positions[best];
}

ForceState OracleGridDynamics::step(Vec2 action) {
    position_ = grid_->clamp(position_ + action);
    return data::nearest_grid_state(*grid_, position_);
}

}  // namespace pegdyn::mpc
