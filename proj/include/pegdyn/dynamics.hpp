#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pegdyn/dataset.hpp"

namespace pegdyn::dyn {

using data::Trajectory;
using geometry::Vec2;
using sim::ForceState;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr int kStateDim = 30;
constexpr int kActionDim = 2;
constexpr int kInputDim = kStateDim + kActionDim;

struct DynConfig {
    int hidden = 64;
    double learning_rate = 1e-3;
    double finetune_lr_scale = 0.1;  // finetune runs at 0.1x the pretrain rate
    double grad_clip = 5.0;
    uint64_t seed = 0;
    // Sensor resolution folded into the state stds in quadrature so that
    // near-constant channels do not blow up measurement noise at eval time.
    double noise_floor_force = 0.05;
    double noise_floor_torque = 0.002;
};

struct NormStats {
    VectorXd state_mean, state_std;    // 30
    VectorXd action_mean, action_std;  // 2
    bool initialized = false;

    VectorXd normalize_state(const ForceState& f) const;
    ForceState denormalize_state(const VectorXd& v) const;
    Vec2 normalize_action(Vec2 a) const;
};

struct TrainReport {
    int episodes_run = 0;
    std::vector<double> losses;  // per-episode training loss, normalized units
    double seconds = 0.0;
};

struct LstmLayer {
    MatrixXd w_in;   // 4H x in, gate row order i,f,g,o
    MatrixXd w_rec;  // 4H x H
    VectorXd bias;   // 4H
};

// Two stacked LSTM layers with a linear head predicting the normalized next
// force state from the normalized (state, action) input.
class DynamicsModel {
public:
    DynamicsModel() = default;
    DynamicsModel(const DynConfig& cfg, uint64_t seed);

    struct StepCache;
    struct Gradients;

    struct Hidden {
        MatrixXd h1, c1, h2, c2;  // H x batch
    };
    Hidden make_hidden(int batch = 1) const;

    // One step in normalized space; x is kInputDim x batch.
    MatrixXd step_normalized(const MatrixXd& x, Hidden& hid) const;

    // Raw-unit single step: normalize, advance, de-normalize.
    ForceState forward(const ForceState& state, Vec2 action, Hidden& hid) const;

    // Supervised teacher-forced training; computes norm_stats from the data on
    // the first call. Deterministic given seed.
    TrainReport train(const std::vector<Trajectory>& trajectories, int episodes,
                      int trajs_per_episode, uint64_t seed,
                      const std::function<void(int, const DynamicsModel&)>& checkpoint = {},
                      int checkpoint_every = 0);

    // Same loop with existing norm_stats and the reduced learning rate.
    TrainReport finetune(const std::vector<Trajectory>& trajectories, int episodes,
                         int trajs_per_episode, uint64_t seed,
                         const std::function<void(int, const DynamicsModel&)>& checkpoint = {},
                         int checkpoint_every = 0);

    // Teacher-forced evaluation in raw units:
    //   Err = (1/20) sum_traj sum_t (|df|^2 + 100 |dtau|^2)
    double eval_error(const std::vector<Trajectory>& heldout) const;

    const DynConfig& config() const { return cfg_; }
    const NormStats& stats() const { return stats_; }
    NormStats& mutable_stats() { return stats_; }
    int hidden_size() const { return cfg_.hidden; }

    // Flat views over every trainable block, save order.
    std::vector<std::pair<double*, long>> param_blocks();
    std::vector<std::pair<const double*, long>> param_blocks() const;

    bool operator==(const DynamicsModel& o) const;

    friend void save_model(const DynamicsModel& model, const std::string& path);
    friend DynamicsModel load_model(const std::string& path);
    friend double gradient_check(DynamicsModel& model, int steps, int batch, uint64_t seed,
                                 bool corrupt_head_gradient);

private:
    void compute_norm_stats(const std::vector<Trajectory>& trajectories);
    TrainReport run_training(const std::vector<Trajectory>& trajectories, int episodes,
                             int trajs_per_episode, double lr, uint64_t seed,
                             const std::function<void(int, const DynamicsModel&)>& checkpoint,
                             int checkpoint_every);
    // Forward with caches + BPTT; returns the loss. Sequences are normalized
    // inputs xs[t] (kInputDim x B) and targets ys[t] (kStateDim x B).
    double loss_and_gradients(const std::vector<MatrixXd>& xs, const std::vector<MatrixXd>& ys,
                              Gradients& grads) const;

    DynConfig cfg_;
    LstmLayer l1_, l2_;
    MatrixXd w_head_;  // 30 x H
    VectorXd b_head_;  // 30
    NormStats stats_;
};

DynamicsModel init_model(const DynConfig& cfg, uint64_t seed);

// Per-step term of the evaluation metric, raw units.
double eq3_step_error(const ForceState& predicted, const ForceState& truth);

// Analytic BPTT gradients vs central finite differences (step 1e-5) for every
// parameter on a short random sequence; returns the max relative error.
// corrupt_head_gradient scales the analytic head gradient as a negative
// control for the check itself.
double gradient_check(DynamicsModel& model, int steps = 3, int batch = 2, uint64_t seed = 0,
                      bool corrupt_head_gradient = false);

void save_model(const DynamicsModel& model, const std::string& path);
DynamicsModel load_model(const std::string& path);

}  // namespace pegdyn::dyn
