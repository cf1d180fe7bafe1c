#include "pegdyn/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "pegdyn/errors.hpp"
#include "pegdyn/rng.hpp"

namespace pegdyn::cli {

namespace fs = std::filesystem;

HoleSpec spec_by_id(const std::string& id) {
    for (auto role : {geometry::CatalogRole::Training, geometry::CatalogRole::Testing})
        for (const HoleSpec& spec : geometry::catalog(role))
            if (spec.id() == id) return spec;
    throw ConfigError("unknown hole id: " + id);
}

ContactSim make_sim(const HoleSpec& spec, const ExperimentConfig& cfg) {
    return ContactSim(spec, cfg.sim_params);
}

GridTable build_grid(const ExperimentConfig& cfg, const ContactSim& sim) {
    return data::sample_grid(sim, cfg.grid_n, cfg.grid_range);
}

std::vector<Trajectory> synthesize(const ExperimentConfig& cfg, const GridTable& grid, int count,
                                   const std::string& purpose) {
    double s = cfg.effective_action_std();
    return data::generate_trajectories(grid, count, cfg.trajectory_steps, {s, s},
                                       derive_seed(cfg.seed, purpose));
}

DynamicsModel pretrain_model(const ExperimentConfig& cfg, const std::vector<Trajectory>& pool,
                             uint64_t seed, dyn::TrainReport* report) {
    DynamicsModel model(cfg.effective_dyn_config(), derive_seed(seed, "dyn-init"));
    dyn::TrainReport rep = model.train(pool, cfg.pretrain_episodes, cfg.batch,
                                       derive_seed(seed, "dyn-train"));
    if (report) *report = std::move(rep);
    return model;
}

FinetuneResult adapt_to_hole(const ExperimentConfig& cfg, const DynamicsModel* base,
                             const GridTable& full_grid, double fraction, int episodes,
                             uint64_t seed, int checkpoint_every) {
    char tag[64];
    std::snprintf(tag, sizeof(tag), "%s/%g", full_grid.spec_id.c_str(), fraction);
    FinetuneResult out;
    out.subgrid = data::subsample_grid(full_grid, fraction,
                                       derive_seed(seed, std::string("subsample/") + tag));
    int pool_size = std::max(20, cfg.finetune_trajectories);
    std::vector<Trajectory> pool =
        synthesize(cfg, out.subgrid, pool_size, std::string("ft-data/") + tag);
    out.eval_set.assign(pool.begin(), pool.begin() + 20);
    std::vector<Trajectory> held_out;
    {
        double s = cfg.effective_action_std();
        held_out = data::generate_trajectories(
            out.subgrid, 20, cfg.trajectory_steps, {s, s},
            derive_seed(seed, std::string("heldout-data/") + tag));
    }

    int offset = 0;
    auto checkpoint = [&](int episode, const DynamicsModel& m) {
        out.curve.emplace_back(offset + episode, m.eval_error(out.eval_set));
    };
    int every = checkpoint_every > 0 ? checkpoint_every : 0;
    std::function<void(int, const DynamicsModel&)> cb =
        every ? checkpoint : std::function<void(int, const DynamicsModel&)>{};

    // Bulk phase at the training rate, settle phase at the finetune rate.
    int bulk = 2 * episodes / 3;
    int settle = episodes - bulk;
    if (base) {
        out.model = *base;
        out.model.train(pool, bulk, cfg.batch,
                        derive_seed(seed, std::string("ft-train/") + tag), cb, every);
        offset = bulk;
        out.model.finetune(pool, settle, cfg.batch,
                           derive_seed(seed, std::string("ft-settle/") + tag), cb, every);
    } else {
        out.model = DynamicsModel(cfg.effective_dyn_config(),
                                  derive_seed(seed, std::string("scratch-init/") + tag));
        out.model.train(pool, bulk, cfg.batch,
                        derive_seed(seed, std::string("scratch-train/") + tag), cb, every);
        offset = bulk;
        out.model.finetune(pool, settle, cfg.batch,
                           derive_seed(seed, std::string("scratch-settle/") + tag), cb, every);
    }
    out.final_err = out.model.eval_error(out.eval_set);
    out.final_err_heldout = out.model.eval_error(held_out);
    return out;
}

namespace {

BenchmarkResult fold_trials(const std::vector<mpc::TrialResult>& trials, int max_steps) {
    BenchmarkResult r;
    r.trials = static_cast<int>(trials.size());
    if (trials.empty()) return r;
    r.mean_distance.assign(max_steps + 1, 0.0);
    int successes = 0;
    double steps = 0;
    for (const auto& tr : trials) {
        successes += tr.success ? 1 : 0;
        steps += tr.steps_taken;
        for (int t = 0; t <= max_steps; ++t) {
            double d = t < static_cast<int>(tr.distances.size()) ? tr.distances[t]
                                                                 : tr.distances.back();
            r.mean_distance[t] += d;
        }
    }
    r.success_rate = static_cast<double>(successes) / r.trials;
    r.mean_steps = steps / r.trials;
    for (double& d : r.mean_distance) d /= r.trials;
    return r;
}

}  // namespace

BenchmarkResult benchmark_mpc(const ExperimentConfig& cfg, const ContactSim& sim,
                              mpc::RolloutDynamics& model, const ForceState& goal, int trials,
                              uint64_t seed) {
    mpc::EpisodeConfig ep{cfg.max_steps, cfg.success_radius, cfg.grid_range.x / 2.0};
    std::vector<mpc::TrialResult> results;
    for (int t = 0; t < trials; ++t) {
        uint64_t trial_seed = derive_seed(seed, "mpc-trial", static_cast<uint64_t>(t));
        Rng rng(derive_seed(trial_seed, "start"));
        geometry::Vec2 start = rl::sample_start_offset(rng, cfg.ring_radius, cfg.ring_width);
        results.push_back(mpc::run_mpc_episode(sim, model, start, goal, cfg.plan, ep, trial_seed));
    }
    return fold_trials(results, cfg.max_steps);
}

BenchmarkResult benchmark_random(const ExperimentConfig& cfg, const ContactSim& sim,
                                 const ForceState& goal, int trials, uint64_t seed) {
    mpc::EpisodeConfig ep{cfg.max_steps, cfg.success_radius, cfg.grid_range.x / 2.0};
    std::vector<mpc::TrialResult> results;
    for (int t = 0; t < trials; ++t) {
        uint64_t trial_seed = derive_seed(seed, "random-trial", static_cast<uint64_t>(t));
        Rng rng(derive_seed(trial_seed, "start"));
        geometry::Vec2 start = rl::sample_start_offset(rng, cfg.ring_radius, cfg.ring_width);
        results.push_back(mpc::run_random_episode(sim, start, cfg.plan, ep, trial_seed, goal));
    }
    return fold_trials(results, cfg.max_steps);
}

BenchmarkResult benchmark_policy(const ExperimentConfig& cfg, const ContactSim& sim,
                                 const rl::PolicyModel& policy, const ForceState& goal, int trials,
                                 uint64_t seed) {
    rl::EvalConfig ec;
    ec.trials = trials;
    ec.max_steps = cfg.max_steps;
    ec.success_radius = cfg.success_radius;
    ec.env_bound = cfg.grid_range.x / 2.0;
    ec.ring_radius = cfg.ring_radius;
    ec.ring_width = cfg.ring_width;
    rl::EvalResult res = rl::eval_policy(sim, policy, goal, ec, derive_seed(seed, "rl-eval"));
    BenchmarkResult folded = fold_trials(res.trials, cfg.max_steps);
    folded.success_rate = res.success_rate;
    return folded;
}

rl::PolicyModel train_policy_offline(const ExperimentConfig& cfg, const DynamicsModel& dynamics,
                                     const GridTable& grid, const ForceState& goal, uint64_t seed,
                                     rl::TrainReport* report) {
    rl::RlConfig rc = cfg.rl_config;
    rl::PolicyModel policy(rc, dynamics.stats(), derive_seed(seed, "rl-init"));
    rl::RewardConfig reward;
    reward.eps = cfg.reward_eps;
    reward.sigma = cfg.sigma_scale / 0.5 * rl::auto_sigma(grid, goal, dynamics.stats());
    mpc::LearnedDynamics rollout(dynamics);
    rl::TrainReport rep = rl::train_offline(policy, rollout, grid, goal, cfg.rl_episodes,
                                            cfg.rl_config.horizon, reward,
                                            derive_seed(seed, "rl-train"));
    if (report) *report = std::move(rep);
    return policy;
}

std::string RunPaths::finetuned(const std::string& hole, double fraction) const {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s/models/%s_f%g.model", root.c_str(), hole.c_str(),
                  fraction * 100.0);
    return buf;
}

void RunPaths::ensure_dirs() const {
    fs::create_directories(root + "/data/grids");
    fs::create_directories(root + "/data/train");
    fs::create_directories(root + "/models");
    fs::create_directories(root + "/policies");
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

void finalize_run(const ExperimentConfig& cfg, const std::string& command,
                  const std::vector<std::string>& inputs, std::vector<std::string> outputs) {
    RunPaths paths(cfg.out_dir);
    std::string config_text = serialize_config(cfg);
    write_text_file(paths.csv("config.ini"), config_text);
    outputs.push_back(paths.csv("config.ini"));

    RunManifest manifest;
    manifest.command = command;
    manifest.config_hash = content_hash(config_text);
    manifest.seed = cfg.seed;
    for (const std::string& p : inputs) manifest.inputs.emplace_back(p, file_hash(p));
    std::sort(outputs.begin(), outputs.end());
    for (const std::string& p : outputs) manifest.outputs.emplace_back(p, file_hash(p));
    write_text_file(paths.csv("manifest.txt"), manifest.to_text());
}

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

// success.csv and distance_curve.csv accumulate rows from several commands;
// each command replaces the rows of the controllers it owns.
struct CsvTable {
    std::string header;
    std::vector<std::string> rows;
};

CsvTable read_csv_if_present(const std::string& path, const std::string& expected_header) {
    CsvTable t;
    t.header = expected_header;
    std::ifstream in(path);
    if (!in) return t;
    std::string line;
    if (!std::getline(in, line)) return t;
    if (line != expected_header)
        throw FormatError("unexpected header in " + path + ": '" + line + "'");
    while (std::getline(in, line))
        if (!line.empty()) t.rows.push_back(line);
    return t;
}

void merge_and_write(const std::string& path, const std::string& header,
                     const std::vector<std::string>& fresh_rows,
                     const std::vector<std::string>& owned_controllers) {
    CsvTable existing = read_csv_if_present(path, header);
    std::vector<std::string> kept;
    for (const std::string& row : existing.rows) {
        bool owned = false;
        for (const std::string& c : owned_controllers) {
            std::string token = "," + c + ",";
            if (row.find(token) != std::string::npos) owned = true;
        }
        if (!owned) kept.push_back(row);
    }
    kept.insert(kept.end(), fresh_rows.begin(), fresh_rows.end());
    std::sort(kept.begin(), kept.end());
    std::string out = header + "\n";
    for (const std::string& row : kept) out += row + "\n";
    write_text_file(path, out);
}

constexpr const char* kSuccessHeader = "hole,controller,success_rate,mean_steps";
constexpr const char* kDistanceHeader = "hole,controller,data_fraction,step,mean_distance";

DynamicsModel load_or_adapt(const ExperimentConfig& cfg, const RunPaths& paths,
                            const std::string& hole, double fraction,
                            std::vector<std::string>& inputs, std::vector<std::string>& outputs,
                            GridTable* grid_out) {
    GridTable grid = data::load_grid(paths.grid(hole));
    inputs.push_back(paths.grid(hole));
    if (grid_out) *grid_out = grid;
    std::string model_path = paths.finetuned(hole, fraction);
    if (fs::exists(model_path)) {
        inputs.push_back(model_path);
        return dyn::load_model(model_path);
    }
    DynamicsModel base = dyn::load_model(paths.pretrained());
    inputs.push_back(paths.pretrained());
    FinetuneResult ft =
        adapt_to_hole(cfg, &base, grid, fraction, cfg.finetune_episodes, cfg.seed);
    dyn::save_model(ft.model, model_path);
    outputs.push_back(model_path);
    return ft.model;
}

}  // namespace

void cmd_gen_data(const ExperimentConfig& cfg, const std::string& command) {
    RunPaths paths(cfg.out_dir);
    paths.ensure_dirs();
    std::vector<std::string> outputs;
    for (auto role : {geometry::CatalogRole::Training, geometry::CatalogRole::Testing}) {
        for (const HoleSpec& spec : geometry::catalog(role)) {
            ContactSim sim = make_sim(spec, cfg);
            GridTable grid = build_grid(cfg, sim);
            data::save_grid(grid, paths.grid(spec.id()));
            outputs.push_back(paths.grid(spec.id()));
            if (role == geometry::CatalogRole::Training) {
                auto trajs = synthesize(cfg, grid, cfg.trajectories_per_hole,
                                        std::string("data/") + spec.id());
                data::save_dataset(trajs, paths.dataset(spec.id()));
                outputs.push_back(paths.dataset(spec.id()));
            }
        }
    }
    finalize_run(cfg, command, {}, std::move(outputs));
}

void cmd_train_dynamics(const ExperimentConfig& cfg, const std::string& command) {
    RunPaths paths(cfg.out_dir);
    paths.ensure_dirs();
    std::vector<std::string> inputs;
    std::vector<Trajectory> pool;
    for (const HoleSpec& spec : geometry::catalog(geometry::CatalogRole::Training)) {
        auto part = data::load_dataset(paths.dataset(spec.id()));
        inputs.push_back(paths.dataset(spec.id()));
        pool.insert(pool.end(), part.begin(), part.end());
    }
    dyn::TrainReport report;
    DynamicsModel model = pretrain_model(cfg, pool, cfg.seed, &report);
    dyn::save_model(model, paths.pretrained());

    std::string csv = "episode,loss\n";
    for (size_t i = 0; i < report.losses.size(); ++i)
        csv += std::to_string(i + 1) + "," + num(report.losses[i]) + "\n";
    write_text_file(paths.csv("loss_curve.csv"), csv);
    finalize_run(cfg, command, inputs, {paths.pretrained(), paths.csv("loss_curve.csv")});
}

void cmd_finetune(const ExperimentConfig& cfg, const std::string& command) {
    RunPaths paths(cfg.out_dir);
    paths.ensure_dirs();
    GridTable grid = data::load_grid(paths.grid(cfg.target_hole));
    DynamicsModel base = dyn::load_model(paths.pretrained());
    int every = std::max(1, cfg.finetune_episodes / 20);
    FinetuneResult ft = adapt_to_hole(cfg, &base, grid, cfg.finetune_fraction,
                                      cfg.finetune_episodes, cfg.seed, every);
    std::string model_path = paths.finetuned(cfg.target_hole, cfg.finetune_fraction);
    dyn::save_model(ft.model, model_path);

    std::string csv = "episode,err\n";
    for (auto [ep, err] : ft.curve) csv += std::to_string(ep) + "," + num(err) + "\n";
    write_text_file(paths.csv("finetune_curve.csv"), csv);
    finalize_run(cfg, command, {paths.grid(cfg.target_hole), paths.pretrained()},
                 {model_path, paths.csv("finetune_curve.csv")});
}

void cmd_eval_dynamics(const ExperimentConfig& cfg, const std::string& command) {
    RunPaths paths(cfg.out_dir);
    paths.ensure_dirs();
    GridTable grid = data::load_grid(paths.grid(cfg.target_hole));
    DynamicsModel base = dyn::load_model(paths.pretrained());

    std::string eval_csv = "hole,data_fraction,err\n";
    std::string curve_csv = "hole,variant,episode,err\n";
    int every = std::max(1, cfg.finetune_episodes / 20);
    for (double fraction : cfg.fractions) {
        FinetuneResult ft =
            adapt_to_hole(cfg, &base, grid, fraction, cfg.finetune_episodes, cfg.seed, every);
        eval_csv += cfg.target_hole + "," + num(fraction) + "," + num(ft.final_err) + "\n";
        char variant[64];
        std::snprintf(variant, sizeof(variant), "pretrained_f%g", fraction * 100.0);
        for (auto [ep, err] : ft.curve)
            curve_csv +=
                cfg.target_hole + "," + variant + "," + std::to_string(ep) + "," + num(err) + "\n";
    }
    // Scratch reference on the full data for the paired comparison.
    int scratch_every = std::max(1, cfg.scratch_episodes / 20);
    FinetuneResult scratch = adapt_to_hole(cfg, nullptr, grid, 1.0, cfg.scratch_episodes,
                                           cfg.seed, scratch_every);
    for (auto [ep, err] : scratch.curve)
        curve_csv += cfg.target_hole + ",scratch," + std::to_string(ep) + "," + num(err) + "\n";

    write_text_file(paths.csv("eval.csv"), eval_csv);
    write_text_file(paths.csv("transfer_curve.csv"), curve_csv);
    finalize_run(cfg, command, {paths.grid(cfg.target_hole), paths.pretrained()},
                 {paths.csv("eval.csv"), paths.csv("transfer_curve.csv")});
}

void cmd_run_mpc(const ExperimentConfig& cfg, const std::string& command) {
    RunPaths paths(cfg.out_dir);
    paths.ensure_dirs();
    std::vector<std::string> inputs, outputs;
    std::vector<std::string> success_rows, distance_rows;
    for (const std::string& hole : cfg.holes) {
        HoleSpec spec = spec_by_id(hole);
        ContactSim sim = make_sim(spec, cfg);
        GridTable grid;
        DynamicsModel model =
            load_or_adapt(cfg, paths, hole, cfg.benchmark_fraction, inputs, outputs, &grid);
        ForceState goal = sim.goal_state();
        mpc::LearnedDynamics rollout(model);
        BenchmarkResult mpc_res = benchmark_mpc(cfg, sim, rollout, goal, cfg.mpc_trials,
                                                derive_seed(cfg.seed, "bench-mpc/" + hole));
        BenchmarkResult rnd_res = benchmark_random(cfg, sim, goal, cfg.mpc_trials,
                                                   derive_seed(cfg.seed, "bench-rand/" + hole));
        success_rows.push_back(hole + ",mpc," + num(mpc_res.success_rate) + "," +
                               num(mpc_res.mean_steps));
        success_rows.push_back(hole + ",random," + num(rnd_res.success_rate) + "," +
                               num(rnd_res.mean_steps));
        for (int t = 0; t < static_cast<int>(mpc_res.mean_distance.size()); ++t) {
            distance_rows.push_back(hole + ",mpc," + num(cfg.benchmark_fraction) + "," +
                                    std::to_string(t) + "," + num(mpc_res.mean_distance[t]));
            distance_rows.push_back(hole + ",random," + num(cfg.benchmark_fraction) + "," +
                                    std::to_string(t) + "," + num(rnd_res.mean_distance[t]));
        }
    }
    merge_and_write(paths.csv("success.csv"), kSuccessHeader, success_rows, {"mpc", "random"});
    merge_and_write(paths.csv("distance_curve.csv"), kDistanceHeader, distance_rows,
                    {"mpc", "random"});
    outputs.push_back(paths.csv("success.csv"));
    outputs.push_back(paths.csv("distance_curve.csv"));
    finalize_run(cfg, command, inputs, std::move(outputs));
}

void cmd_train_rl(const ExperimentConfig& cfg, const std::string& command) {
    RunPaths paths(cfg.out_dir);
    paths.ensure_dirs();
    std::vector<std::string> inputs, outputs;
    std::string curve_csv = "hole,episode,mean_return\n";
    std::string probes_csv = "hole,variant,probes,episodes\n";
    for (const std::string& hole : cfg.holes) {
        GridTable grid;
        DynamicsModel model =
            load_or_adapt(cfg, paths, hole, cfg.benchmark_fraction, inputs, outputs, &grid);
        HoleSpec spec = spec_by_id(hole);
        ContactSim sim = make_sim(spec, cfg);
        ForceState goal = sim.goal_state();
        GridTable subgrid = data::subsample_grid(
            grid, cfg.benchmark_fraction,
            derive_seed(cfg.seed, "subsample/" + hole + "/rl"));

        rl::TrainReport report;
        rl::PolicyModel policy;
        uint64_t probes_before = sim::probe_count();
        if (cfg.rl_online) {
            rl::RlConfig rc = cfg.rl_config;
            rl::RewardConfig reward;
            reward.eps = cfg.reward_eps;
            reward.sigma = cfg.sigma_scale / 0.5 * rl::auto_sigma(subgrid, goal, model.stats());
            policy = rl::PolicyModel(rc, model.stats(), derive_seed(cfg.seed, "rl-init/" + hole));
            report = rl::train_online(policy, sim, goal, cfg.online_episodes,
                                      cfg.rl_config.horizon, reward,
                                      derive_seed(cfg.seed, "rl-online/" + hole),
                                      cfg.ring_radius, cfg.ring_width, cfg.grid_range.x / 2.0);
        } else {
            policy = train_policy_offline(cfg, model, subgrid, goal,
                                          derive_seed(cfg.seed, "rl/" + hole), &report);
        }
        uint64_t probes_used = sim::probe_count() - probes_before;
        probes_csv += hole + "," + (cfg.rl_online ? "online" : "offline") + "," +
                      std::to_string(probes_used) + "," + std::to_string(report.episodes_run) +
                      "\n";
        rl::save_policy(policy, paths.policy(hole));
        outputs.push_back(paths.policy(hole));

        const int window = 200;
        for (size_t i = 0; i + window <= report.returns.size(); i += window) {
            double mean = 0;
            for (int k = 0; k < window; ++k) mean += report.returns[i + k];
            curve_csv += hole + "," + std::to_string(i + window) + "," + num(mean / window) + "\n";
        }
    }
    write_text_file(paths.csv("rl_curve.csv"), curve_csv);
    write_text_file(paths.csv("probes.csv"), probes_csv);
    outputs.push_back(paths.csv("rl_curve.csv"));
    outputs.push_back(paths.csv("probes.csv"));
    finalize_run(cfg, command, inputs, std::move(outputs));
}

void cmd_eval_policy(const ExperimentConfig& cfg, const std::string& command) {
    RunPaths paths(cfg.out_dir);
    paths.ensure_dirs();
    std::vector<std::string> inputs;
    std::vector<std::string> success_rows, distance_rows;
    for (const std::string& hole : cfg.holes) {
        HoleSpec spec = spec_by_id(hole);
        ContactSim sim = make_sim(spec, cfg);
        ForceState goal = sim.goal_state();
        rl::PolicyModel policy = rl::load_policy(paths.policy(hole));
        inputs.push_back(paths.policy(hole));
        BenchmarkResult res = benchmark_policy(cfg, sim, policy, goal, cfg.mpc_trials,
                                               derive_seed(cfg.seed, "bench-rl/" + hole));
        success_rows.push_back(hole + ",rl," + num(res.success_rate) + "," +
                               num(res.mean_steps));
        for (int t = 0; t < static_cast<int>(res.mean_distance.size()); ++t)
            distance_rows.push_back(hole + ",rl," + num(cfg.benchmark_fraction) + "," +
                                    std::to_string(t) + "," + num(res.mean_distance[t]));
    }
    merge_and_write(paths.csv("success.csv"), kSuccessHeader, success_rows, {"rl"});
    merge_and_write(paths.csv("distance_curve.csv"), kDistanceHeader, distance_rows, {"rl"});
    finalize_run(cfg, command, inputs,
                 {paths.csv("success.csv"), paths.csv("distance_curve.csv")});
}

void cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir,
                const std::string& command) {
    if (run_dirs.empty()) throw ConfigError("report: at least one run directory is required");
    struct Acc {
        std::vector<double> success, steps;
    };
    std::map<std::pair<std::string, std::string>, Acc> acc;
    for (const std::string& dir : run_dirs) {
        std::ifstream in(dir + "/success.csv");
        if (!in) throw IoError("report: missing " + dir + "/success.csv");
        std::string line;
        if (!std::getline(in, line) || line != kSuccessHeader)
            throw FormatError("report: bad header in " + dir + "/success.csv");
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream ls(line);
            std::string hole, controller, success, steps;
            if (!std::getline(ls, hole, ',') || !std::getline(ls, controller, ',') ||
                !std::getline(ls, success, ',') || !std::getline(ls, steps))
                throw FormatError("report: bad row '" + line + "'");
            Acc& a = acc[{hole, controller}];
            a.success.push_back(std::stod(success));
            a.steps.push_back(std::stod(steps));
        }
    }
    auto mean_std = [](const std::vector<double>& v) {
        double mean = 0;
        for (double x : v) mean += x;
        mean /= v.size();
        double var = 0;
        for (double x : v) var += (x - mean) * (x - mean);
        double std_dev = v.size() > 1 ? std::sqrt(var / (v.size() - 1)) : 0.0;
        return std::pair<double, double>{mean, std_dev};
    };
    std::string csv = "hole,controller,n,success_mean,success_std,steps_mean,steps_std\n";
    for (const auto& [key, a] : acc) {
        auto [sm, ss] = mean_std(a.success);
        auto [tm, ts] = mean_std(a.steps);
        csv += key.first + "," + key.second + "," + std::to_string(a.success.size()) + "," +
               num(sm) + "," + num(ss) + "," + num(tm) + "," + num(ts) + "\n";
    }
    fs::create_directories(out_dir);
    write_text_file(out_dir + "/report.csv", csv);
    std::fputs(csv.c_str(), stdout);

    RunManifest manifest;
    manifest.command = command;
    for (const std::string& dir : run_dirs)
        manifest.inputs.emplace_back(dir + "/success.csv", file_hash(dir + "/success.csv"));
    manifest.outputs.emplace_back(out_dir + "/report.csv", file_hash(out_dir + "/report.csv"));
    write_text_file(out_dir + "/manifest.txt", manifest.to_text());
}

}  // namespace pegdyn::cli
