#include "pegdyn/rl.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "pegdyn/errors.hpp"
#include "pegdyn/rng.hpp"

namespace pegdyn::rl {

Vec2 action_vector(int index, double step_size) {
    static const int dirs[kNumActions][2] = {
        {+1, 0}, {0, -1}, {-1, 0}, {0, +1},  // E, S, W, N
        {+1, +1}, {-1, -1}, {+1, -1}, {-1, +1},  // NE, SW, SE, NW
    };
    if (index < 0 || index >= kNumActions)
        throw std::invalid_argument("action_vector: index out of range");
    return {dirs[index][0] * step_size, dirs[index][1] * step_size};
}

void RewardConfig::validate() const {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("RewardConfig: eps in (0,1)");
    if (!(sigma > 0.0)) throw std::invalid_argument("RewardConfig: sigma > 0");
}

double similarity(const VectorXd& a, const VectorXd& b, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("similarity: sigma must be > 0");
    return std::exp(-(a - b).squaredNorm() / sigma);
}

double reward(const VectorXd& state, const VectorXd& goal, const RewardConfig& cfg) {
    return similarity(state, goal, cfg.sigma) > cfg.eps ? cfg.goal_reward : cfg.step_reward;
}

double auto_sigma(const GridTable& grid, const ForceState& goal, const dyn::NormStats& stats) {
    VectorXd g = stats.normalize_state(goal);
    std::vector<double> d2;
    d2.reserve(grid.states.size());
    for (const ForceState& s : grid.states) d2.push_back((stats.normalize_state(s) - g).squaredNorm());
    std::sort(d2.begin(), d2.end());
    size_t n = d2.size();
    double median = n % 2 == 1 ? d2[n / 2] : 0.5 * (d2[n / 2 - 1] + d2[n / 2]);
    return std::max(1e-9, 0.5 * median);
}

PolicyModel::PolicyModel(const RlConfig& cfg, const dyn::NormStats& stats, uint64_t seed)
    : cfg_(cfg), stats_(stats) {
    if (cfg.hidden < 1) throw std::invalid_argument("PolicyModel: hidden must be >= 1");
    if (!stats.initialized)
        throw std::invalid_argument("PolicyModel: needs the dynamics model's norm_stats");
    Rng rng(seed);
    auto uniform_matrix = [&rng](int rows, int cols, double bound) {
        MatrixXd m(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-bound, bound);
        return m;
    };
    const int H = cfg.hidden;
    const double in_bound = 1.0 / std::sqrt(static_cast<double>(dyn::kStateDim));
    // Small head weights keep the fresh policy near uniform.
    pw1_ = uniform_matrix(H, dyn::kStateDim, in_bound);
    pb1_ = VectorXd::Zero(H);
    pw2_ = uniform_matrix(kNumActions, H, 0.01);
    pb2_ = VectorXd::Zero(kNumActions);
    vw1_ = uniform_matrix(H, dyn::kStateDim, in_bound);
    vb1_ = VectorXd::Zero(H);
    vw2_ = uniform_matrix(1, H, 0.01);
    vb2_ = VectorXd::Zero(1);
}

PolicyModel::Output PolicyModel::forward_normalized(const VectorXd& state) const {
    Output out;
    VectorXd h = (pw1_ * state + pb1_).array().tanh();
    out.logits = pw2_ * h + pb2_;
    VectorXd shifted = out.logits.array() - out.logits.maxCoeff();
    out.probs = shifted.array().exp();
    out.probs /= out.probs.sum();
    VectorXd hv = (vw1_ * state + vb1_).array().tanh();
    out.value = (vw2_ * hv + vb2_)(0);
    return out;
}

PolicyModel::Output PolicyModel::forward(const ForceState& raw_state) const {
    return forward_normalized(stats_.normalize_state(raw_state));
}

int PolicyModel::argmax_action(const ForceState& raw_state) const {
    Output out = forward(raw_state);
    int best = 0;
    out.probs.maxCoeff(&best);
    return best;
}

std::vector<std::pair<double*, long>> PolicyModel::param_blocks() {
    return {{pw1_.data(), pw1_.size()}, {pb1_.data(), pb1_.size()}, {pw2_.data(), pw2_.size()},
            {pb2_.data(), pb2_.size()}, {vw1_.data(), vw1_.size()}, {vb1_.data(), vb1_.size()},
            {vw2_.data(), vw2_.size()}, {vb2_.data(), vb2_.size()}};
}

std::vector<std::pair<const double*, long>> PolicyModel::param_blocks() const {
    return {{pw1_.data(), pw1_.size()}, {pb1_.data(), pb1_.size()}, {pw2_.data(), pw2_.size()},
            {pb2_.data(), pb2_.size()}, {vw1_.data(), vw1_.size()}, {vb1_.data(), vb1_.size()},
            {vw2_.data(), vw2_.size()}, {vb2_.data(), vb2_.size()}};
}

bool PolicyModel::operator==(const PolicyModel& o) const {
    auto a = param_blocks();
    auto b = o.param_blocks();
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].second != b[i].second) return false;
        for (long j = 0; j < a[i].second; ++j)
            if (a[i].first[j] != b[i].first[j]) return false;
    }
    return true;
}

// Shared A2C machinery for the offline and online variants.
struct A2cTrainer {
    PolicyModel& policy;
    RewardConfig reward_cfg;
    MatrixXd g_pw1, g_pw2, g_vw1, g_vw2;
    VectorXd g_pb1, g_pb2, g_vb1, g_vb2;
    MatrixXd m_pw1, m_pw2, m_vw1, m_vw2, v_pw1, v_pw2, v_vw1, v_vw2;
    VectorXd m_pb1, m_pb2, m_vb1, m_vb2, v_pb1, v_pb2, v_vb1, v_vb2;
    long adam_t = 0;

    explicit A2cTrainer(PolicyModel& p, const RewardConfig& rc) : policy(p), reward_cfg(rc) {
        auto zero_like_m = [](const MatrixXd& m) { return MatrixXd::Zero(m.rows(), m.cols()); };
        auto zero_like_v = [](const VectorXd& v) { return VectorXd::Zero(v.size()); };
        g_pw1 = zero_like_m(p.pw1_); g_pw2 = zero_like_m(p.pw2_);
        g_vw1 = zero_like_m(p.vw1_); g_vw2 = zero_like_m(p.vw2_);
        g_pb1 = zero_like_v(p.pb1_); g_pb2 = zero_like_v(p.pb2_);
        g_vb1 = zero_like_v(p.vb1_); g_vb2 = zero_like_v(p.vb2_);
        m_pw1 = g_pw1; m_pw2 = g_pw2; m_vw1 = g_vw1; m_vw2 = g_vw2;
        v_pw1 = g_pw1; v_pw2 = g_pw2; v_vw1 = g_vw1; v_vw2 = g_vw2;
        m_pb1 = g_pb1; m_pb2 = g_pb2; m_vb1 = g_vb1; m_vb2 = g_vb2;
        v_pb1 = g_pb1; v_pb2 = g_pb2; v_vb1 = g_vb1; v_vb2 = g_vb2;
    }

    // One episode given a transition closure; returns the undiscounted return.
    template <typename TransitionFn>
    double episode(const VectorXd& start, const VectorXd& goal, int horizon, Rng& rng,
                   TransitionFn&& transition) {
        std::vector<VectorXd> states;
        std::vector<int> actions;
        std::vector<double> rewards;
        VectorXd s = start;
        bool reached = false;
        for (int t = 0; t < horizon && !reached; ++t) {
            PolicyModel::Output out = policy.forward_normalized(s);
            double u = rng.uniform(0.0, 1.0);
            int a = kNumActions - 1;
            double acc = 0.0;
            for (int k = 0; k < kNumActions; ++k) {
                acc += out.probs[k];
                if (u < acc) {
                    a = k;
                    break;
                }
            }
            VectorXd next = transition(s, a);
            double r = reward(next, goal, reward_cfg);
            states.push_back(s);
            actions.push_back(a);
            rewards.push_back(r);
            reached = r == reward_cfg.goal_reward;
            s = next;
        }

        const RlConfig& cfg = policy.cfg_;
        double bootstrap = reached ? 0.0 : policy.forward_normalized(s).value;
        std::vector<double> returns(rewards.size());
        double run = bootstrap;
        for (int t = static_cast<int>(rewards.size()) - 1; t >= 0; --t) {
            run = rewards[t] + cfg.discount * run;
            returns[t] = run;
        }

        g_pw1.setZero(); g_pw2.setZero(); g_pb1.setZero(); g_pb2.setZero();
        g_vw1.setZero(); g_vw2.setZero(); g_vb1.setZero(); g_vb2.setZero();
        for (size_t t = 0; t < states.size(); ++t) {
            const VectorXd& st = states[t];
            VectorXd h = (policy.pw1_ * st + policy.pb1_).array().tanh();
            VectorXd logits = policy.pw2_ * h + policy.pb2_;
            VectorXd shifted = logits.array() - logits.maxCoeff();
            VectorXd p = shifted.array().exp();
            p /= p.sum();
            VectorXd hv = (policy.vw1_ * st + policy.vb1_).array().tanh();
            double value = (policy.vw2_ * hv + policy.vb2_)(0);

            double advantage = returns[t] - value;
            double entropy = 0.0;
            for (int k = 0; k < kNumActions; ++k) entropy -= p[k] * std::log(p[k]);
            VectorXd dlogits = advantage * p;
            dlogits[actions[t]] -= advantage;
            for (int k = 0; k < kNumActions; ++k)
                dlogits[k] += cfg.entropy_weight * p[k] * (std::log(p[k]) + entropy);
            if (!dlogits.allFinite()) throw DivergenceError("train_offline: non-finite gradient");

            g_pw2.noalias() += dlogits * h.transpose();
            g_pb2 += dlogits;
            VectorXd dh = policy.pw2_.transpose() * dlogits;
            VectorXd dz = dh.cwiseProduct((1.0 - h.array().square()).matrix());
            g_pw1.noalias() += dz * st.transpose();
            g_pb1 += dz;

            double dv = 2.0 * cfg.value_weight * (value - returns[t]);
            g_vw2.noalias() += dv * hv.transpose();
            g_vb2[0] += dv;
            VectorXd dhv = policy.vw2_.transpose() * dv;
            VectorXd dzv = dhv.cwiseProduct((1.0 - hv.array().square()).matrix());
            g_vw1.noalias() += dzv * st.transpose();
            g_vb1 += dzv;
        }
        adam_step();

        double total = 0.0;
        for (double r : rewards) total += r;
        return total;
    }

    void adam_step() {
        const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
        ++adam_t;
        const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t));
        const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t));
        const double lr = policy.cfg_.learning_rate;
        auto update = [&](auto& p, auto& g, auto& m, auto& v) {
            m = beta1 * m + (1 - beta1) * g;
            v = beta2 * v + (1 - beta2) * g.cwiseProduct(g);
            p -= (lr / corr1) * m.cwiseQuotient(((v / corr2).cwiseSqrt().array() + eps).matrix());
        };
        update(policy.pw1_, g_pw1, m_pw1, v_pw1);
        update(policy.pb1_, g_pb1, m_pb1, v_pb1);
        update(policy.pw2_, g_pw2, m_pw2, v_pw2);
        update(policy.pb2_, g_pb2, m_pb2, v_pb2);
        update(policy.vw1_, g_vw1, m_vw1, v_vw1);
        update(policy.vb1_, g_vb1, m_vb1, v_vb1);
        update(policy.vw2_, g_vw2, m_vw2, v_vw2);
        update(policy.vb2_, g_vb2, m_vb2, v_vb2);
    }
};

TrainReport train_offline(PolicyModel& policy, mpc::RolloutDynamics& dynamics,
                          const GridTable& grid, const ForceState& goal, int episodes,
                          int horizon, const RewardConfig& cfg, uint64_t seed) {
    cfg.validate();
    const auto t_start = std::chrono::steady_clock::now();
    const dyn::NormStats& stats = policy.stats();
    VectorXd goal_n = stats.normalize_state(goal);
    A2cTrainer trainer(policy, cfg);
    TrainReport report;
    for (int ep = 0; ep < episodes; ++ep) {
        Rng rng(derive_seed(seed, "rl-episode", static_cast<uint64_t>(ep)));
        size_t idx = rng.index(grid.states.size());
        dynamics.reset(grid.states[idx]);
        VectorXd s0 = stats.normalize_state(grid.states[idx]);
        double ret = trainer.episode(s0, goal_n, horizon, rng, [&](const VectorXd&, int a) {
            ForceState next = dynamics.step(action_vector(a, policy.config().step_size));
            return stats.normalize_state(next);
        });
        report.returns.push_back(ret);
        ++report.episodes_run;
    }
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

Vec2 sample_start_offset(Rng& rng, double ring_radius, double ring_width) {
    double r = rng.uniform(ring_radius - ring_width, ring_radius + ring_width);
    double a = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    return {r * std::cos(a), r * std::sin(a)};
}

TrainReport train_online(PolicyModel& policy, const sim::ContactSim& sim, const ForceState& goal,
                         int episodes, int horizon, const RewardConfig& cfg, uint64_t seed,
                         double ring_radius, double ring_width, double env_bound) {
    cfg.validate();
    const auto t_start = std::chrono::steady_clock::now();
    const dyn::NormStats& stats = policy.stats();
    VectorXd goal_n = stats.normalize_state(goal);
    A2cTrainer trainer(policy, cfg);
    TrainReport report;
    for (int ep = 0; ep < episodes; ++ep) {
        Rng rng(derive_seed(seed, "rl-online-episode", static_cast<uint64_t>(ep)));
        Vec2 pos = sample_start_offset(rng, ring_radius, ring_width);
        ForceState probe = sim.probe_multipose(pos, sim.params().noise, rng.raw());
        VectorXd s0 = stats.normalize_state(probe);
        double ret = trainer.episode(s0, goal_n, horizon, rng, [&](const VectorXd&, int a) {
            Vec2 av = action_vector(a, policy.config().step_size);
            pos = {std::clamp(pos.x + av.x, -env_bound, env_bound),
                   std::clamp(pos.y + av.y, -env_bound, env_bound)};
            ForceState next = sim.probe_multipose(pos, sim.params().noise, rng.raw());
            return stats.normalize_state(next);
        });
        report.returns.push_back(ret);
        ++report.episodes_run;
    }
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

EvalResult eval_policy(const sim::ContactSim& sim, const PolicyModel& policy,
                       const ForceState& goal, const EvalConfig& cfg, uint64_t seed) {
    (void)goal;
    EvalResult result;
    int successes = 0;
    for (int trial = 0; trial < cfg.trials; ++trial) {
        Rng rng(derive_seed(seed, "rl-eval", static_cast<uint64_t>(trial)));
        Vec2 pos = sample_start_offset(rng, cfg.ring_radius, cfg.ring_width);
        mpc::TrialResult tr;
        sim::MultiProbe probe = sim.probe_detailed(pos, sim.params().noise, rng.raw());
        bool success = pos.norm() <= cfg.success_radius || probe.all_inserted();
        tr.distances.push_back(pos.norm());
        for (int step = 0; step < cfg.max_steps && !success; ++step) {
            int a = policy.argmax_action(probe.state);
            Vec2 av = action_vector(a, policy.config().step_size);
            pos = {std::clamp(pos.x + av.x, -cfg.env_bound, cfg.env_bound),
                   std::clamp(pos.y + av.y, -cfg.env_bound, cfg.env_bound)};
            ++tr.steps_taken;
            probe = sim.probe_detailed(pos, sim.params().noise, rng.raw());
            success = pos.norm() <= cfg.success_radius || probe.all_inserted();
            tr.distances.push_back(pos.norm());
        }
        tr.success = success;
        tr.final_distance = pos.norm();
        if (success) ++successes;
        result.trials.push_back(std::move(tr));
    }
    result.success_rate = cfg.trials > 0 ? static_cast<double>(successes) / cfg.trials : 0.0;
    return result;
}

namespace {
constexpr const char* kPolicyMagic = "PEGDYN_POLICY";
constexpr int kPolicyVersion = 1;

void write_array(std::ostream& out, const char* name, const double* data, long n) {
    out << name << ' ' << n << '\n';
    out << std::setprecision(17);
    for (long i = 0; i < n; ++i) out << data[i] << (i + 1 == n ? '\n' : ' ');
}

void read_array(std::istream& in, const char* name, double* data, long n) {
    std::string label;
    long count = -1;
    if (!(in >> label >> count) || label != name || count != n)
        throw FormatError(std::string("policy: expected array ") + name);
    for (long i = 0; i < n; ++i)
        if (!(in >> data[i])) throw FormatError(std::string("policy: corrupt array ") + name);
}
}  // namespace

void save_policy(const PolicyModel& policy, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("save_policy: cannot open " + path);
    out << kPolicyMagic << ' ' << kPolicyVersion << '\n';
    out << std::setprecision(17);
    const RlConfig& c = policy.cfg_;
    out << "config " << c.hidden << ' ' << c.learning_rate << ' ' << c.discount << ' '
        << c.entropy_weight << ' ' << c.value_weight << ' ' << c.horizon << ' ' << c.step_size
        << ' ' << c.seed << '\n';
    write_array(out, "state_mean", policy.stats_.state_mean.data(), dyn::kStateDim);
    write_array(out, "state_std", policy.stats_.state_std.data(), dyn::kStateDim);
    write_array(out, "action_mean", policy.stats_.action_mean.data(), dyn::kActionDim);
    write_array(out, "action_std", policy.stats_.action_std.data(), dyn::kActionDim);
    static const char* names[8] = {"pw1", "pb1", "pw2", "pb2", "vw1", "vb1", "vw2", "vb2"};
    auto blocks = policy.param_blocks();
    for (size_t i = 0; i < blocks.size(); ++i)
        write_array(out, names[i], blocks[i].first, blocks[i].second);
    if (!out) throw IoError("save_policy: write failed for " + path);
}

PolicyModel load_policy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_policy: cannot open " + path);
    std::string magic;
    int version = -1;
    if (!(in >> magic >> version)) throw FormatError("policy: missing header");
    if (magic != kPolicyMagic || version != kPolicyVersion)
        throw VersionError("policy: unsupported header '" + magic + " " +
                           std::to_string(version) + "'");
    std::string label;
    RlConfig cfg;
    if (!(in >> label >> cfg.hidden >> cfg.learning_rate >> cfg.discount >> cfg.entropy_weight >>
          cfg.value_weight >> cfg.horizon >> cfg.step_size >> cfg.seed) ||
        label != "config" || cfg.hidden < 1)
        throw FormatError("policy: bad config line");
    dyn::NormStats stats;
    stats.state_mean.resize(dyn::kStateDim);
    stats.state_std.resize(dyn::kStateDim);
    stats.action_mean.resize(dyn::kActionDim);
    stats.action_std.resize(dyn::kActionDim);
    read_array(in, "state_mean", stats.state_mean.data(), dyn::kStateDim);
    read_array(in, "state_std", stats.state_std.data(), dyn::kStateDim);
    read_array(in, "action_mean", stats.action_mean.data(), dyn::kActionDim);
    read_array(in, "action_std", stats.action_std.data(), dyn::kActionDim);
    stats.initialized = true;
    PolicyModel policy(cfg, stats, cfg.seed);
    static const char* names[8] = {"pw1", "pb1", "pw2", "pb2", "vw1", "vb1", "vw2", "vb2"};
    auto blocks = policy.param_blocks();
    for (size_t i = 0; i < blocks.size(); ++i)
        read_array(in, names[i], blocks[i].first, blocks[i].second);
    return policy;
}

}  // namespace pegdyn::rl
