#include "pegdyn/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "pegdyn/errors.hpp"

namespace pegdyn::cli {

double ExperimentConfig::effective_action_std() const {
    if (action_std > 0.0) return action_std;
    // Same spread the planner samples with (R_x/2 read as the std), so the
    // dynamics model sees the action magnitudes it will be asked to imagine.
    return grid_range.x / 2.0;
}

dyn::DynConfig ExperimentConfig::effective_dyn_config() const {
    dyn::DynConfig c = dyn_config;
    c.noise_floor_force = sim_params.noise.force;
    c.noise_floor_torque = sim_params.noise.torque;
    return c;
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& s) {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
}

long parse_long(const std::string& s) {
    size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw std::invalid_argument("expected true/false");
}

struct KeyBinding {
    std::string key;  // "section.name"
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
};

std::string join_list(const std::vector<std::string>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += v[i];
    }
    return out;
}

std::string join_fractions(const std::vector<double>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_double(v[i]);
    }
    return out;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

#define NUM_KEY(name, field)                                                    \
    {name, [](const ExperimentConfig& c) { return format_double(c.field); },    \
     [](ExperimentConfig& c, const std::string& v) { c.field = parse_double(v); }}
#define INT_KEY(name, field)                                                       \
    {name, [](const ExperimentConfig& c) { return std::to_string(c.field); },      \
     [](ExperimentConfig& c, const std::string& v) {                               \
         c.field = static_cast<decltype(c.field)>(parse_long(v));                  \
     }}
#define BOOL_KEY(name, field)                                                        \
    {name, [](const ExperimentConfig& c) { return c.field ? "true" : "false"; },     \
     [](ExperimentConfig& c, const std::string& v) { c.field = parse_bool(v); }}
#define STR_KEY(name, field)                                       \
    {name, [](const ExperimentConfig& c) { return c.field; },      \
     [](ExperimentConfig& c, const std::string& v) { c.field = v; }}

const std::vector<KeyBinding>& bindings() {
    static const std::vector<KeyBinding> b = {
        NUM_KEY("sim.f_max", sim_params.f_max),
        NUM_KEY("sim.mu", sim_params.mu),
        NUM_KEY("sim.edge_band", sim_params.edge_band),
        NUM_KEY("sim.wall_margin", sim_params.wall_margin),
        NUM_KEY("sim.wall_gain", sim_params.wall_gain),
        NUM_KEY("sim.descent_tol", sim_params.descent_tol),
        NUM_KEY("sim.resolution", sim_params.footprint_resolution),
        NUM_KEY("sim.noise_force", sim_params.noise.force),
        NUM_KEY("sim.noise_torque", sim_params.noise.torque),

        INT_KEY("grid.n", grid_n),
        NUM_KEY("grid.range_x", grid_range.x),
        NUM_KEY("grid.range_y", grid_range.y),
        INT_KEY("grid.trajectories_per_hole", trajectories_per_hole),
        INT_KEY("grid.finetune_trajectories", finetune_trajectories),
        INT_KEY("grid.steps", trajectory_steps),
        NUM_KEY("grid.action_std", action_std),

        INT_KEY("dynamics.hidden", dyn_config.hidden),
        NUM_KEY("dynamics.learning_rate", dyn_config.learning_rate),
        NUM_KEY("dynamics.finetune_lr_scale", dyn_config.finetune_lr_scale),
        NUM_KEY("dynamics.grad_clip", dyn_config.grad_clip),
        INT_KEY("dynamics.pretrain_episodes", pretrain_episodes),
        INT_KEY("dynamics.finetune_episodes", finetune_episodes),
        INT_KEY("dynamics.scratch_episodes", scratch_episodes),
        INT_KEY("dynamics.batch", batch),

        INT_KEY("mpc.samples", plan.n_samples),
        INT_KEY("mpc.horizon", plan.horizon),
        INT_KEY("mpc.iters", plan.cem_iters),
        NUM_KEY("mpc.elite_frac", plan.elite_frac),
        NUM_KEY("mpc.init_std_x", plan.init_std.x),
        NUM_KEY("mpc.init_std_y", plan.init_std.y),
        NUM_KEY("mpc.alpha", plan.alpha),
        NUM_KEY("mpc.beta", plan.beta),
        BOOL_KEY("mpc.common_random_numbers", plan.common_random_numbers),
        INT_KEY("mpc.trials", mpc_trials),
        INT_KEY("mpc.max_steps", max_steps),
        NUM_KEY("mpc.success_radius", success_radius),
        NUM_KEY("mpc.ring_radius", ring_radius),
        NUM_KEY("mpc.ring_width", ring_width),

        INT_KEY("rl.hidden", rl_config.hidden),
        NUM_KEY("rl.learning_rate", rl_config.learning_rate),
        NUM_KEY("rl.discount", rl_config.discount),
        NUM_KEY("rl.entropy_weight", rl_config.entropy_weight),
        NUM_KEY("rl.value_weight", rl_config.value_weight),
        INT_KEY("rl.horizon", rl_config.horizon),
        NUM_KEY("rl.step_size", rl_config.step_size),
        INT_KEY("rl.episodes", rl_episodes),
        NUM_KEY("rl.eps", reward_eps),
        NUM_KEY("rl.sigma_scale", sigma_scale),
        BOOL_KEY("rl.online", rl_online),
        INT_KEY("rl.online_episodes", online_episodes),

        {"experiment.seed",
         [](const ExperimentConfig& c) { return std::to_string(c.seed); },
         [](ExperimentConfig& c, const std::string& v) {
             c.seed = static_cast<uint64_t>(std::stoull(v));
         }},
        STR_KEY("experiment.out", out_dir),
        STR_KEY("experiment.target_hole", target_hole),
        NUM_KEY("experiment.finetune_fraction", finetune_fraction),
        NUM_KEY("experiment.benchmark_fraction", benchmark_fraction),
        {"experiment.holes",
         [](const ExperimentConfig& c) { return join_list(c.holes); },
         [](ExperimentConfig& c, const std::string& v) { c.holes = split_list(v); }},
        {"experiment.fractions",
         [](const ExperimentConfig& c) { return join_fractions(c.fractions); },
         [](ExperimentConfig& c, const std::string& v) {
             c.fractions.clear();
             for (const std::string& item : split_list(v))
                 c.fractions.push_back(parse_double(item));
         }},
    };
    return b;
}

#undef NUM_KEY
#undef INT_KEY
#undef BOOL_KEY
#undef STR_KEY

const KeyBinding* find_binding(const std::string& key) {
    for (const KeyBinding& b : bindings())
        if (b.key == key) return &b;
    return nullptr;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    const KeyBinding* b = find_binding(key);
    if (!b) throw ConfigError("unknown config key: " + key);
    try {
        b->set(cfg, value);
    } catch (const std::exception& e) {
        throw ConfigError("bad value for " + key + ": '" + value + "' (" + e.what() + ")");
    }
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = t.substr(1, t.size() - 2);
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        apply_override(cfg, section.empty() ? key : section + "." + key, value);
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config_text(all);
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::string out;
    std::string section;
    for (const KeyBinding& b : bindings()) {
        std::string sec = b.key.substr(0, b.key.find('.'));
        if (sec != section) {
            if (!out.empty()) out += '\n';
            out += "[" + sec + "]\n";
            section = sec;
        }
        out += b.key.substr(b.key.find('.') + 1) + " = " + b.get(cfg) + "\n";
    }
    return out;
}

uint64_t content_hash(const std::string& bytes) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

uint64_t file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("file_hash: cannot open " + path);
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content_hash(all);
}

std::string RunManifest::to_text() const {
    char buf[64];
    std::string out = "command=" + command + "\n";
    std::snprintf(buf, sizeof(buf), "config_hash=%016llx\n",
                  static_cast<unsigned long long>(config_hash));
    out += buf;
    out += "seed=" + std::to_string(seed) + "\n";
    for (const auto& [path, hash] : inputs) {
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
        out += "input " + path + " " + buf + "\n";
    }
    for (const auto& [path, hash] : outputs) {
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
        out += "output " + path + " " + buf + "\n";
    }
    return out;
}

}  // namespace pegdyn::cli
