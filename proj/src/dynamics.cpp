#include "pegdyn/dynamics.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "pegdyn/errors.hpp"
#include "pegdyn/rng.hpp"

namespace pegdyn::dyn {

namespace {

MatrixXd sigmoid(const MatrixXd& z) {
    return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

}  // namespace

VectorXd NormStats::normalize_state(const ForceState& f) const {
    VectorXd v(kStateDim);
    for (int i = 0; i < kStateDim; ++i) v[i] = (f.v[i] - state_mean[i]) / state_std[i];
    return v;
}

ForceState NormStats::denormalize_state(const VectorXd& v) const {
    ForceState f;
    for (int i = 0; i < kStateDim; ++i) f.v[i] = v[i] * state_std[i] + state_mean[i];
    return f;
}

Vec2 NormStats::normalize_action(Vec2 a) const {
    return {(a.x - action_mean[0]) / action_std[0], (a.y - action_mean[1]) / action_std[1]};
}

struct DynamicsModel::StepCache {
    struct Layer {
        MatrixXd x, h_prev, c_prev, i, f, g, o, c, tc;
        MatrixXd h() const { return o.cwiseProduct(tc); }
    };
    Layer a, b;
};

struct DynamicsModel::Gradients {
    MatrixXd w1, r1, w2, r2, w_head;
    VectorXd b1, b2, b_head;

    void init_like(const DynamicsModel& m) {
        w1 = MatrixXd::Zero(m.l1_.w_in.rows(), m.l1_.w_in.cols());
        r1 = MatrixXd::Zero(m.l1_.w_rec.rows(), m.l1_.w_rec.cols());
        b1 = VectorXd::Zero(m.l1_.bias.size());
        w2 = MatrixXd::Zero(m.l2_.w_in.rows(), m.l2_.w_in.cols());
        r2 = MatrixXd::Zero(m.l2_.w_rec.rows(), m.l2_.w_rec.cols());
        b2 = VectorXd::Zero(m.l2_.bias.size());
        w_head = MatrixXd::Zero(m.w_head_.rows(), m.w_head_.cols());
        b_head = VectorXd::Zero(m.b_head_.size());
    }
};

DynamicsModel::DynamicsModel(const DynConfig& cfg, uint64_t seed) : cfg_(cfg) {
    if (cfg.hidden < 1) throw std::invalid_argument("DynamicsModel: hidden must be >= 1");
    const int H = cfg.hidden;
    Rng rng(seed);
    auto uniform_matrix = [&rng](int rows, int cols, int fan_in) {
        double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        MatrixXd m(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-bound, bound);
        return m;
    };
    l1_.w_in = uniform_matrix(4 * H, kInputDim, kInputDim + H);
    l1_.w_rec = uniform_matrix(4 * H, H, kInputDim + H);
    l1_.bias = VectorXd::Zero(4 * H);
    l1_.bias.segment(H, H).setOnes();  // forget gate bias +1
    l2_.w_in = uniform_matrix(4 * H, H, 2 * H);
    l2_.w_rec = uniform_matrix(4 * H, H, 2 * H);
    l2_.bias = VectorXd::Zero(4 * H);
    l2_.bias.segment(H, H).setOnes();
    w_head_ = uniform_matrix(kStateDim, H, H);
    b_head_ = VectorXd::Zero(kStateDim);

    // Identity normalization until train() fits real statistics.
    stats_.state_mean = VectorXd::Zero(kStateDim);
    stats_.state_std = VectorXd::Ones(kStateDim);
    stats_.action_mean = VectorXd::Zero(kActionDim);
    stats_.action_std = VectorXd::Ones(kActionDim);
}

DynamicsModel init_model(const DynConfig& cfg, uint64_t seed) {
    return DynamicsModel(cfg, seed);
}

DynamicsModel::Hidden DynamicsModel::make_hidden(int batch) const {
    const int H = cfg_.hidden;
    return {MatrixXd::Zero(H, batch), MatrixXd::Zero(H, batch), MatrixXd::Zero(H, batch),
            MatrixXd::Zero(H, batch)};
}

namespace {

void lstm_step(const LstmLayer& L, const MatrixXd& x, MatrixXd& h, MatrixXd& c,
               DynamicsModel::StepCache::Layer* cache, int H) {
    MatrixXd pre = L.w_in * x + L.w_rec * h;
    pre.colwise() += L.bias;
    MatrixXd gi = sigmoid(pre.middleRows(0, H));
    MatrixXd gf = sigmoid(pre.middleRows(H, H));
    MatrixXd gg = pre.middleRows(2 * H, H).array().tanh().matrix();
    MatrixXd go = sigmoid(pre.middleRows(3 * H, H));
    MatrixXd c_new = gf.cwiseProduct(c) + gi.cwiseProduct(gg);
    MatrixXd tc = c_new.array().tanh().matrix();
    if (cache) {
        cache->x = x;
        cache->h_prev = h;
        cache->c_prev = c;
        cache->i = gi;
        cache->f = gf;
        cache->g = gg;
        cache->o = go;
        cache->c = c_new;
        cache->tc = tc;
    }
    c = c_new;
    h = go.cwiseProduct(tc);
}

// Backward through one LSTM step. dh is the gradient w.r.t. this step's h
// output; dc accumulates the cell gradient and is rewritten with the previous
// step's value. Returns dx; dh_prev is written in place of dh.
MatrixXd lstm_backstep(const LstmLayer& L, const DynamicsModel::StepCache::Layer& s, MatrixXd& dh,
                       MatrixXd& dc, MatrixXd& gw, MatrixXd& gr, VectorXd& gb) {
    MatrixXd d_o = dh.cwiseProduct(s.tc);
    MatrixXd dct = dc + dh.cwiseProduct(s.o).cwiseProduct(
                            (1.0 - s.tc.array().square()).matrix());
    MatrixXd d_i = dct.cwiseProduct(s.g);
    MatrixXd d_f = dct.cwiseProduct(s.c_prev);
    MatrixXd d_g = dct.cwiseProduct(s.i);
    dc = dct.cwiseProduct(s.f);

    const int H = static_cast<int>(s.i.rows());
    MatrixXd da(4 * H, s.i.cols());
    da.middleRows(0, H) = d_i.cwiseProduct(s.i).cwiseProduct((1.0 - s.i.array()).matrix());
    da.middleRows(H, H) = d_f.cwiseProduct(s.f).cwiseProduct((1.0 - s.f.array()).matrix());
    da.middleRows(2 * H, H) = d_g.cwiseProduct((1.0 - s.g.array().square()).matrix());
    da.middleRows(3 * H, H) = d_o.cwiseProduct(s.o).cwiseProduct((1.0 - s.o.array()).matrix());

    gw.noalias() += da * s.x.transpose();
    gr.noalias() += da * s.h_prev.transpose();
    gb += da.rowwise().sum();

    MatrixXd dx = L.w_in.transpose() * da;
    dh = L.w_rec.transpose() * da;
    return dx;
}

}  // namespace

MatrixXd DynamicsModel::step_normalized(const MatrixXd& x, Hidden& hid) const {
    const int H = cfg_.hidden;
    lstm_step(l1_, x, hid.h1, hid.c1, nullptr, H);
    lstm_step(l2_, hid.h1, hid.h2, hid.c2, nullptr, H);
    return (w_head_ * hid.h2).colwise() + b_head_;
}

ForceState DynamicsModel::forward(const ForceState& state, Vec2 action, Hidden& hid) const {
    MatrixXd x(kInputDim, 1);
    x.col(0).head(kStateDim) = stats_.normalize_state(state);
    Vec2 na = stats_.normalize_action(action);
    x(kStateDim, 0) = na.x;
    x(kStateDim + 1, 0) = na.y;
    MatrixXd y = step_normalized(x, hid);
    return stats_.denormalize_state(y.col(0));
}

double DynamicsModel::loss_and_gradients(const std::vector<MatrixXd>& xs,
                                         const std::vector<MatrixXd>& ys,
                                         Gradients& grads) const {
    const int H = cfg_.hidden;
    const int T = static_cast<int>(xs.size());
    const int B = T > 0 ? static_cast<int>(xs[0].cols()) : 0;
    if (T == 0) return 0.0;

    MatrixXd h1 = MatrixXd::Zero(H, B), c1 = MatrixXd::Zero(H, B);
    MatrixXd h2 = MatrixXd::Zero(H, B), c2 = MatrixXd::Zero(H, B);
    std::vector<StepCache> caches(T);
    std::vector<MatrixXd> diffs(T);
    double loss = 0.0;
    for (int t = 0; t < T; ++t) {
        lstm_step(l1_, xs[t], h1, c1, &caches[t].a, H);
        lstm_step(l2_, h1, h2, c2, &caches[t].b, H);
        MatrixXd y = (w_head_ * h2).colwise() + b_head_;
        diffs[t] = y - ys[t];
        loss += diffs[t].squaredNorm();
    }
    const double inv = 1.0 / (static_cast<double>(T) * B);
    loss *= inv;

    MatrixXd dh1 = MatrixXd::Zero(H, B), dc1 = MatrixXd::Zero(H, B);
    MatrixXd dh2 = MatrixXd::Zero(H, B), dc2 = MatrixXd::Zero(H, B);
    for (int t = T - 1; t >= 0; --t) {
        MatrixXd dy = (2.0 * inv) * diffs[t];
        grads.w_head.noalias() += dy * caches[t].b.h().transpose();
        grads.b_head += dy.rowwise().sum();
        dh2 += w_head_.transpose() * dy;
        MatrixXd dx2 = lstm_backstep(l2_, caches[t].b, dh2, dc2, grads.w2, grads.r2, grads.b2);
        dh1 += dx2;
        lstm_backstep(l1_, caches[t].a, dh1, dc1, grads.w1, grads.r1, grads.b1);
    }
    return loss;
}

void DynamicsModel::compute_norm_stats(const std::vector<Trajectory>& trajectories) {
    VectorXd s_sum = VectorXd::Zero(kStateDim), s_sq = VectorXd::Zero(kStateDim);
    VectorXd a_sum = VectorXd::Zero(kActionDim), a_sq = VectorXd::Zero(kActionDim);
    long s_count = 0, a_count = 0;
    for (const Trajectory& tr : trajectories) {
        for (const ForceState& st : tr.states) {
            for (int i = 0; i < kStateDim; ++i) {
                s_sum[i] += st.v[i];
                s_sq[i] += st.v[i] * st.v[i];
            }
            ++s_count;
        }
        for (const Vec2& a : tr.actions) {
            a_sum[0] += a.x;
            a_sq[0] += a.x * a.x;
            a_sum[1] += a.y;
            a_sq[1] += a.y * a.y;
            ++a_count;
        }
    }
    if (s_count == 0 || a_count == 0)
        throw std::invalid_argument("compute_norm_stats: empty training set");

    stats_.state_mean = s_sum / s_count;
    stats_.state_std.resize(kStateDim);
    for (int i = 0; i < kStateDim; ++i) {
        double var = std::max(0.0, s_sq[i] / s_count - stats_.state_mean[i] * stats_.state_mean[i]);
        double floor = i < 15 ? cfg_.noise_floor_force : cfg_.noise_floor_torque;
        stats_.state_std[i] = std::max(1e-6, std::sqrt(var + floor * floor));
    }
    stats_.action_mean = a_sum / a_count;
    stats_.action_std.resize(kActionDim);
    for (int i = 0; i < kActionDim; ++i) {
        double var = std::max(0.0, a_sq[i] / a_count - stats_.action_mean[i] * stats_.action_mean[i]);
        stats_.action_std[i] = std::max(1e-6, std::sqrt(var));
    }
    stats_.initialized = true;
}

TrainReport DynamicsModel::train(const std::vector<Trajectory>& trajectories, int episodes,
                                 int trajs_per_episode, uint64_t seed,
                                 const std::function<void(int, const DynamicsModel&)>& checkpoint,
                                 int checkpoint_every) {
    if (!stats_.initialized) compute_norm_stats(trajectories);
    return run_training(trajectories, episodes, trajs_per_episode, cfg_.learning_rate, seed,
                        checkpoint, checkpoint_every);
}

TrainReport DynamicsModel::finetune(const std::vector<Trajectory>& trajectories, int episodes,
                                    int trajs_per_episode, uint64_t seed,
                                    const std::function<void(int, const DynamicsModel&)>& checkpoint,
                                    int checkpoint_every) {
    if (!stats_.initialized)
        throw std::logic_error("finetune: model has no norm_stats; pretrain first");
    return run_training(trajectories, episodes, trajs_per_episode,
                        cfg_.learning_rate * cfg_.finetune_lr_scale, seed, checkpoint,
                        checkpoint_every);
}

TrainReport DynamicsModel::run_training(
    const std::vector<Trajectory>& trajectories, int episodes, int trajs_per_episode, double lr,
    uint64_t seed, const std::function<void(int, const DynamicsModel&)>& checkpoint,
    int checkpoint_every) {
    const auto t_start = std::chrono::steady_clock::now();
    TrainReport report;
    if (episodes <= 0) return report;
    if (trajectories.empty()) throw std::invalid_argument("train: no trajectories");
    const int T = static_cast<int>(trajectories.front().actions.size());
    if (T < 1) throw std::invalid_argument("train: trajectories must have length >= 2");
    for (const Trajectory& tr : trajectories)
        if (static_cast<int>(tr.actions.size()) != T)
            throw std::invalid_argument("train: trajectories must share one length");

    // Normalize the whole pool once.
    std::vector<MatrixXd> inputs(trajectories.size());   // kInputDim x T
    std::vector<MatrixXd> targets(trajectories.size());  // kStateDim x T
    for (size_t k = 0; k < trajectories.size(); ++k) {
        const Trajectory& tr = trajectories[k];
        inputs[k].resize(kInputDim, T);
        targets[k].resize(kStateDim, T);
        for (int t = 0; t < T; ++t) {
            inputs[k].col(t).head(kStateDim) = stats_.normalize_state(tr.states[t]);
            Vec2 na = stats_.normalize_action(tr.actions[t]);
            inputs[k](kStateDim, t) = na.x;
            inputs[k](kStateDim + 1, t) = na.y;
            targets[k].col(t) = stats_.normalize_state(tr.states[t + 1]);
        }
    }

    Gradients grads, adam_m, adam_v;
    grads.init_like(*this);
    adam_m.init_like(*this);
    adam_v.init_like(*this);
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long adam_t = 0;

    Rng rng(derive_seed(seed, "dynamics-train"));
    const int B = trajs_per_episode;
    std::vector<MatrixXd> xs(T, MatrixXd(kInputDim, B));
    std::vector<MatrixXd> ys(T, MatrixXd(kStateDim, B));

    auto blocks = [](Gradients& g) {
        return std::array<std::pair<double*, long>, 8>{{{g.w1.data(), g.w1.size()},
                                                        {g.r1.data(), g.r1.size()},
                                                        {g.b1.data(), g.b1.size()},
                                                        {g.w2.data(), g.w2.size()},
                                                        {g.r2.data(), g.r2.size()},
                                                        {g.b2.data(), g.b2.size()},
                                                        {g.w_head.data(), g.w_head.size()},
                                                        {g.b_head.data(), g.b_head.size()}}};
    };

    for (int ep = 0; ep < episodes; ++ep) {
        for (int b = 0; b < B; ++b) {
            size_t k = rng.index(trajectories.size());
            for (int t = 0; t < T; ++t) {
                xs[t].col(b) = inputs[k].col(t);
                ys[t].col(b) = targets[k].col(t);
            }
        }
        grads.w1.setZero();
        grads.r1.setZero();
        grads.b1.setZero();
        grads.w2.setZero();
        grads.r2.setZero();
        grads.b2.setZero();
        grads.w_head.setZero();
        grads.b_head.setZero();
        double loss = loss_and_gradients(xs, ys, grads);
        if (!std::isfinite(loss))
            throw DivergenceError("train: loss became non-finite at episode " +
                                  std::to_string(ep));
        report.losses.push_back(loss);

        double norm_sq = 0;
        for (auto [ptr, n] : blocks(grads))
            norm_sq += Eigen::Map<VectorXd>(ptr, n).squaredNorm();
        double scale = 1.0;
        if (cfg_.grad_clip > 0 && norm_sq > cfg_.grad_clip * cfg_.grad_clip)
            scale = cfg_.grad_clip / std::sqrt(norm_sq);

        ++adam_t;
        const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t));
        const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t));
        auto params = param_blocks();
        auto gs = blocks(grads);
        auto ms = blocks(adam_m);
        auto vs = blocks(adam_v);
        for (size_t i = 0; i < params.size(); ++i) {
            Eigen::Map<VectorXd> p(params[i].first, params[i].second);
            Eigen::Map<VectorXd> g(gs[i].first, gs[i].second);
            Eigen::Map<VectorXd> m(ms[i].first, ms[i].second);
            Eigen::Map<VectorXd> v(vs[i].first, vs[i].second);
            VectorXd gc = g * scale;
            m = beta1 * m + (1 - beta1) * gc;
            v = beta2 * v + (1 - beta2) * gc.cwiseProduct(gc);
            p -= (lr / corr1) * m.cwiseQuotient(((v / corr2).cwiseSqrt().array() + eps).matrix());
        }
        ++report.episodes_run;
        if (checkpoint && checkpoint_every > 0 &&
            ((ep + 1) % checkpoint_every == 0 || ep + 1 == episodes))
            checkpoint(ep + 1, *this);
    }
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

double eq3_step_error(const ForceState& predicted, const ForceState& truth) {
    double force = 0, torque = 0;
    for (int i = 0; i < 15; ++i) {
        double df = predicted.v[i] - truth.v[i];
        force += df * df;
        double dt = predicted.v[15 + i] - truth.v[15 + i];
        torque += dt * dt;
    }
    return force + 100.0 * torque;
}

double DynamicsModel::eval_error(const std::vector<Trajectory>& heldout) const {
    if (heldout.size() != 20)
        throw std::invalid_argument("eval_error: convention is exactly 20 held-out trajectories");
    double total = 0.0;
    for (const Trajectory& tr : heldout) {
        Hidden hid = make_hidden(1);
        for (size_t t = 0; t < tr.actions.size(); ++t) {
            ForceState pred = forward(tr.states[t], tr.actions[t], hid);
            total += eq3_step_error(pred, tr.states[t + 1]);
        }
    }
    return total / static_cast<double>(heldout.size());
}

std::vector<std::pair<double*, long>> DynamicsModel::param_blocks() {
    return {{l1_.w_in.data(), l1_.w_in.size()},   {l1_.w_rec.data(), l1_.w_rec.size()},
            {l1_.bias.data(), l1_.bias.size()},   {l2_.w_in.data(), l2_.w_in.size()},
            {l2_.w_rec.data(), l2_.w_rec.size()}, {l2_.bias.data(), l2_.bias.size()},
            {w_head_.data(), w_head_.size()},     {b_head_.data(), b_head_.size()}};
}

std::vector<std::pair<const double*, long>> DynamicsModel::param_blocks() const {
    return {{l1_.w_in.data(), l1_.w_in.size()},   {l1_.w_rec.data(), l1_.w_rec.size()},
            {l1_.bias.data(), l1_.bias.size()},   {l2_.w_in.data(), l2_.w_in.size()},
            {l2_.w_rec.data(), l2_.w_rec.size()}, {l2_.bias.data(), l2_.bias.size()},
            {w_head_.data(), w_head_.size()},     {b_head_.data(), b_head_.size()}};
}

bool DynamicsModel::operator==(const DynamicsModel& o) const {
    auto a = param_blocks();
    auto b = o.param_blocks();
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].second != b[i].second) return false;
        for (long j = 0; j < a[i].second; ++j)
            if (a[i].first[j] != b[i].first[j]) return false;
    }
    if (stats_.initialized != o.stats_.initialized) return false;
    if (stats_.initialized) {
        if (stats_.state_mean != o.stats_.state_mean) return false;
        if (stats_.state_std != o.stats_.state_std) return false;
        if (stats_.action_mean != o.stats_.action_mean) return false;
        if (stats_.action_std != o.stats_.action_std) return false;
    }
    return true;
}

double gradient_check(DynamicsModel& model, int steps, int batch, uint64_t seed,
                      bool corrupt_head_gradient) {
    if (steps <= 0) return 0.0;
    Rng rng(derive_seed(seed, "gradient-check"));
    std::vector<MatrixXd> xs(steps), ys(steps);
    for (int t = 0; t < steps; ++t) {
        xs[t].resize(kInputDim, batch);
        ys[t].resize(kStateDim, batch);
        for (int r = 0; r < kInputDim; ++r)
            for (int c = 0; c < batch; ++c) xs[t](r, c) = rng.gaussian(0.0, 1.0);
        for (int r = 0; r < kStateDim; ++r)
            for (int c = 0; c < batch; ++c) ys[t](r, c) = rng.gaussian(0.0, 1.0);
    }

    DynamicsModel::Gradients grads;
    grads.init_like(model);
    model.loss_and_gradients(xs, ys, grads);
    if (corrupt_head_gradient) grads.w_head *= 1.5;

    auto loss_only = [&]() {
        DynamicsModel::Gradients scratch;
        scratch.init_like(model);
        return model.loss_and_gradients(xs, ys, scratch);
    };

    std::array<std::pair<double*, long>, 8> grad_blocks = {
        {{grads.w1.data(), grads.w1.size()},
         {grads.r1.data(), grads.r1.size()},
         {grads.b1.data(), grads.b1.size()},
         {grads.w2.data(), grads.w2.size()},
         {grads.r2.data(), grads.r2.size()},
         {grads.b2.data(), grads.b2.size()},
         {grads.w_head.data(), grads.w_head.size()},
         {grads.b_head.data(), grads.b_head.size()}}};
    auto params = model.param_blocks();

    const double h = 1e-5;
    double max_rel = 0.0;
    for (size_t blk = 0; blk < params.size(); ++blk) {
        for (long j = 0; j < params[blk].second; ++j) {
            double& p = params[blk].first[j];
            const double saved = p;
            p = saved + h;
            double lp = loss_only();
            p = saved - h;
            double lm = loss_only();
            p = saved;
            double fd = (lp - lm) / (2 * h);
            double an = grad_blocks[blk].first[j];
            // Corrected relative error: differences below the finite-difference
            // noise floor do not count.
            const double atol = 1e-8;
            double rel = std::max(0.0, std::abs(an - fd) - atol) /
                         (std::abs(an) + std::abs(fd) + atol);
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

namespace {

constexpr const char* kMagic = "PEGDYN_DYNAMICS";
constexpr int kVersion = 1;

void write_array(std::ostream& out, const char* name, const double* data, long n) {
    out << name << ' ' << n << '\n';
    out << std::setprecision(17);
    for (long i = 0; i < n; ++i) out << data[i] << (i + 1 == n ? '\n' : ' ');
}

void read_array(std::istream& in, const char* name, double* data, long n) {
    std::string label;
    long count = -1;
    if (!(in >> label >> count) || label != name || count != n)
        throw FormatError(std::string("model: expected array ") + name);
    for (long i = 0; i < n; ++i)
        if (!(in >> data[i])) throw FormatError(std::string("model: corrupt array ") + name);
}

}  // namespace

void save_model(const DynamicsModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("save_model: cannot open " + path);
    out << kMagic << ' ' << kVersion << '\n';
    out << std::setprecision(17);
    const DynConfig& c = model.cfg_;
    out << "config " << c.hidden << ' ' << c.learning_rate << ' ' << c.finetune_lr_scale << ' '
        << c.grad_clip << ' ' << c.seed << ' ' << c.noise_floor_force << ' '
        << c.noise_floor_torque << '\n';
    out << "stats " << (model.stats_.initialized ? 1 : 0) << '\n';
    if (model.stats_.initialized) {
        write_array(out, "state_mean", model.stats_.state_mean.data(), kStateDim);
        write_array(out, "state_std", model.stats_.state_std.data(), kStateDim);
        write_array(out, "action_mean", model.stats_.action_mean.data(), kActionDim);
        write_array(out, "action_std", model.stats_.action_std.data(), kActionDim);
    }
    static const char* names[8] = {"w1", "r1", "b1", "w2", "r2", "b2", "w_head", "b_head"};
    auto blocks = model.param_blocks();
    for (size_t i = 0; i < blocks.size(); ++i)
        write_array(out, names[i], blocks[i].first, blocks[i].second);
    if (!out) throw IoError("save_model: write failed for " + path);
}

DynamicsModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_model: cannot open " + path);
    std::string magic;
    int version = -1;
    if (!(in >> magic >> version)) throw FormatError("model: missing header");
    if (magic != kMagic || version != kVersion)
        throw VersionError("model: unsupported header '" + magic + " " +
                           std::to_string(version) + "'");
    std::string label;
    DynConfig cfg;
    if (!(in >> label >> cfg.hidden >> cfg.learning_rate >> cfg.finetune_lr_scale >>
          cfg.grad_clip >> cfg.seed >> cfg.noise_floor_force >> cfg.noise_floor_torque) ||
        label != "config" || cfg.hidden < 1)
        throw FormatError("model: bad config line");

    DynamicsModel model(cfg, cfg.seed);
    int has_stats = 0;
    if (!(in >> label >> has_stats) || label != "stats")
        throw FormatError("model: bad stats line");
    if (has_stats) {
        model.stats_.state_mean.resize(kStateDim);
        model.stats_.state_std.resize(kStateDim);
        model.stats_.action_mean.resize(kActionDim);
        model.stats_.action_std.resize(kActionDim);
        read_array(in, "state_mean", model.stats_.state_mean.data(), kStateDim);
        read_array(in, "state_std", model.stats_.state_std.data(), kStateDim);
        read_array(in, "action_mean", model.stats_.action_mean.data(), kActionDim);
        read_array(in, "action_std", model.stats_.action_std.data(), kActionDim);
        model.stats_.initialized = true;
    }
    static const char* names[8] = {"w1", "r1", "b1", "w2", "r2", "b2", "w_head", "b_head"};
    auto blocks = model.param_blocks();
    for (size_t i = 0; i < blocks.size(); ++i)
        read_array(in, names[i], blocks[i].first, blocks[i].second);
    return model;
}

}  // namespace pegdyn::dyn
