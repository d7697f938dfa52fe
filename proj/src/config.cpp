#include "asmp/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "asmp/errors.hpp"

namespace asmp {

NormMode RunConfig::norm_mode() const {
    if (normalization == "rw") return NormMode::rw;
    if (normalization == "sym") return NormMode::sym;
    throw ValidationError("config: asmp.normalization must be rw or sym");
}

StepSizePolicy RunConfig::step_policy() const {
    StepSizePolicy policy;
    if (steps_mode == "theorem_safe") policy.mode = StepMode::theorem_safe;
    else if (steps_mode == "fixed") policy.mode = StepMode::fixed;
    else if (steps_mode == "learned") policy.mode = StepMode::learned;
    else throw ValidationError("config: steps.mode must be theorem_safe, fixed, or learned");
    policy.eta1 = asmp.eta1;
    policy.eta2 = asmp.eta2;
    policy.safety = steps_safety;
    return policy;
}

SolverOptions RunConfig::solver_options() const {
    SolverOptions opts;
    opts.policy = step_policy();
    opts.normalization = norm_mode();
    opts.structure_updates = structure_updates;
    opts.symmetrize = symmetrize;
    opts.degree_floor = degree_floor;
    opts.early_stop = early_stop;
    opts.early_stop_tol = residual_tol;
    return opts;
}

SbmSpec RunConfig::sbm_spec() const {
    SbmSpec spec;
    spec.block_sizes = sbm_blocks;
    spec.p_in = sbm_p_in;
    spec.p_out = sbm_p_out;
    const int n_blocks = static_cast<int>(sbm_blocks.size());
    spec.block_means = separable_block_means(n_blocks, sbm_feature_dim, sbm_mean_sep);
    spec.noise_scale = sbm_noise;
    spec.seed = sbm_seed;
    return spec;
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& value, const std::string& key) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size())
        throw ValidationError("config: bad number for " + key + ": '" + value + "'");
    return v;
}

long to_long(const std::string& value, const std::string& key) {
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size())
        throw ValidationError("config: bad integer for " + key + ": '" + value + "'");
    return v;
}

std::uint64_t to_u64(const std::string& value, const std::string& key) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size())
        throw ValidationError("config: bad seed for " + key + ": '" + value + "'");
    return v;
}

bool to_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ValidationError("config: bad bool for " + key + ": '" + value + "'");
}

template <typename T, typename Fn>
std::vector<T> to_list(const std::string& value, const std::string& key, Fn parse_one) {
    std::vector<T> out;
    if (trim(value).empty()) return out;
    std::string::size_type pos = 0;
    while (true) {
        const auto comma = value.find(',', pos);
        const std::string item =
            trim(comma == std::string::npos ? value.substr(pos) : value.substr(pos, comma - pos));
        out.push_back(parse_one(item, key));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void apply(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "data.source") {
        if (value != "bundle" && value != "sbm")
            throw ValidationError("config: data.source must be bundle or sbm");
        c.data_source = value;
    } else if (key == "split.train") c.split.train = to_double(value, key);
    else if (key == "split.val") c.split.val = to_double(value, key);
    else if (key == "split.test") c.split.test = to_double(value, key);
    else if (key == "split.seed") c.split.seed = to_u64(value, key);
    else if (key == "sbm.blocks")
        c.sbm_blocks = to_list<int>(value, key, [](const std::string& s, const std::string& k) {
            return static_cast<int>(to_long(s, k));
        });
    else if (key == "sbm.p_in") c.sbm_p_in = to_double(value, key);
    else if (key == "sbm.p_out") c.sbm_p_out = to_double(value, key);
    else if (key == "sbm.mean_sep") c.sbm_mean_sep = to_double(value, key);
    else if (key == "sbm.noise") c.sbm_noise = to_double(value, key);
    else if (key == "sbm.feature_dim") c.sbm_feature_dim = static_cast<int>(to_long(value, key));
    else if (key == "sbm.seed") c.sbm_seed = to_u64(value, key);
    else if (key == "asmp.gamma") c.asmp.gamma = to_double(value, key);
    else if (key == "asmp.lambda") c.asmp.lambda = to_double(value, key);
    else if (key == "asmp.mu1") c.asmp.mu1 = to_double(value, key);
    else if (key == "asmp.mu2") c.asmp.mu2 = to_double(value, key);
    else if (key == "asmp.eta1") c.asmp.eta1 = to_double(value, key);
    else if (key == "asmp.eta2") c.asmp.eta2 = to_double(value, key);
    else if (key == "asmp.k_layers") c.asmp.k_layers = static_cast<int>(to_long(value, key));
    else if (key == "asmp.h_steps") c.asmp.h_steps_per_iter = static_cast<int>(to_long(value, key));
    else if (key == "asmp.s_steps") c.asmp.s_steps_per_iter = static_cast<int>(to_long(value, key));
    else if (key == "asmp.normalization") {
        if (value != "rw" && value != "sym")
            throw ValidationError("config: asmp.normalization must be rw or sym");
        c.normalization = value;
    } else if (key == "asmp.structure_updates") c.structure_updates = to_bool(value, key);
    else if (key == "asmp.symmetrize") c.symmetrize = to_bool(value, key);
    else if (key == "asmp.degree_floor") c.degree_floor = to_double(value, key);
    else if (key == "steps.mode") {
        if (value != "theorem_safe" && value != "fixed" && value != "learned")
            throw ValidationError("config: steps.mode must be theorem_safe, fixed, or learned");
        c.steps_mode = value;
    } else if (key == "steps.safety") c.steps_safety = to_double(value, key);
    else if (key == "solver.early_stop") c.early_stop = to_bool(value, key);
    else if (key == "solver.residual_tol") c.residual_tol = to_double(value, key);
    else if (key == "train.epochs") c.train.epochs = static_cast<int>(to_long(value, key));
    else if (key == "train.lr") c.train.learning_rate = to_double(value, key);
    else if (key == "train.weight_decay") c.train.weight_decay = to_double(value, key);
    else if (key == "train.dropout") c.train.dropout = to_double(value, key);
    else if (key == "train.hidden") c.train.hidden = static_cast<int>(to_long(value, key));
    else if (key == "train.hyperparam_mode") {
        if (value == "fixed") c.train.hyperparam_mode = HyperMode::fixed;
        else if (value == "learned_fd") c.train.hyperparam_mode = HyperMode::learned_fd;
        else throw ValidationError("config: train.hyperparam_mode must be fixed or learned_fd");
    } else if (key == "train.fd_step") c.train.fd_step = to_double(value, key);
    else if (key == "train.patience") c.train.patience = static_cast<int>(to_long(value, key));
    else if (key == "train.trials") c.trials = static_cast<int>(to_long(value, key));
    else if (key == "train.baseline") c.baseline = to_bool(value, key);
    else if (key == "perturb.kind") {
        if (value != "global_random" && value != "targeted_random")
            throw ValidationError(
                "config: perturb.kind must be global_random or targeted_random");
        c.perturb_kind = value;
    } else if (key == "perturb.rate") c.perturb_rate = to_double(value, key);
    else if (key == "perturb.mix") c.perturb_mix = to_double(value, key);
    else if (key == "perturb.seed") c.perturb_seed = to_u64(value, key);
    else if (key == "perturb.degree_threshold")
        c.degree_threshold = static_cast<int>(to_long(value, key));
    else if (key == "sweep.global_rates")
        c.sweep_global_rates = to_list<double>(value, key, to_double);
    else if (key == "sweep.targeted_counts")
        c.sweep_targeted_counts =
            to_list<int>(value, key, [](const std::string& s, const std::string& k) {
                return static_cast<int>(to_long(s, k));
            });
    else if (key == "report.extended_layers")
        c.extended_layers = static_cast<int>(to_long(value, key));
    else if (key == "report.checkpoint") c.checkpoint = value;
    else if (key == "run.seed") c.seed = to_u64(value, key);
    else if (key == "run.threads") c.threads = static_cast<int>(to_long(value, key));
    else throw ValidationError("config: unknown key '" + key + "'");
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ValidationError(origin + ":" + std::to_string(line_no) +
                                  ": expected key = value");
        apply(config, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    }
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("missing config file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    out << "data.source = " << c.data_source << '\n';
    out << "split.train = " << fmt_g17(c.split.train) << '\n';
    out << "split.val = " << fmt_g17(c.split.val) << '\n';
    out << "split.test = " << fmt_g17(c.split.test) << '\n';
    out << "split.seed = " << c.split.seed << '\n';
    out << "sbm.blocks = ";
    for (std::size_t i = 0; i < c.sbm_blocks.size(); ++i)
        out << (i ? "," : "") << c.sbm_blocks[i];
    out << '\n';
    out << "sbm.p_in = " << fmt_g17(c.sbm_p_in) << '\n';
    out << "sbm.p_out = " << fmt_g17(c.sbm_p_out) << '\n';
    out << "sbm.mean_sep = " << fmt_g17(c.sbm_mean_sep) << '\n';
    out << "sbm.noise = " << fmt_g17(c.sbm_noise) << '\n';
    out << "sbm.feature_dim = " << c.sbm_feature_dim << '\n';
    out << "sbm.seed = " << c.sbm_seed << '\n';
    out << "asmp.gamma = " << fmt_g17(c.asmp.gamma) << '\n';
    out << "asmp.lambda = " << fmt_g17(c.asmp.lambda) << '\n';
    out << "asmp.mu1 = " << fmt_g17(c.asmp.mu1) << '\n';
    out << "asmp.mu2 = " << fmt_g17(c.asmp.mu2) << '\n';
    out << "asmp.eta1 = " << fmt_g17(c.asmp.eta1) << '\n';
    out << "asmp.eta2 = " << fmt_g17(c.asmp.eta2) << '\n';
    out << "asmp.k_layers = " << c.asmp.k_layers << '\n';
    out << "asmp.h_steps = " << c.asmp.h_steps_per_iter << '\n';
    out << "asmp.s_steps = " << c.asmp.s_steps_per_iter << '\n';
    out << "asmp.normalization = " << c.normalization << '\n';
    out << "asmp.structure_updates = " << (c.structure_updates ? "true" : "false") << '\n';
    out << "asmp.symmetrize = " << (c.symmetrize ? "true" : "false") << '\n';
    out << "asmp.degree_floor = " << fmt_g17(c.degree_floor) << '\n';
    out << "steps.mode = " << c.steps_mode << '\n';
    out << "steps.safety = " << fmt_g17(c.steps_safety) << '\n';
    out << "solver.early_stop = " << (c.early_stop ? "true" : "false") << '\n';
    out << "solver.residual_tol = " << fmt_g17(c.residual_tol) << '\n';
    out << "train.epochs = " << c.train.epochs << '\n';
    out << "train.lr = " << fmt_g17(c.train.learning_rate) << '\n';
    out << "train.weight_decay = " << fmt_g17(c.train.weight_decay) << '\n';
    out << "train.dropout = " << fmt_g17(c.train.dropout) << '\n';
    out << "train.hidden = " << c.train.hidden << '\n';
    out << "train.hyperparam_mode = "
        << (c.train.hyperparam_mode == HyperMode::fixed ? "fixed" : "learned_fd") << '\n';
    out << "train.fd_step = " << fmt_g17(c.train.fd_step) << '\n';
    out << "train.patience = " << c.train.patience << '\n';
    out << "train.trials = " << c.trials << '\n';
    out << "train.baseline = " << (c.baseline ? "true" : "false") << '\n';
    out << "perturb.kind = " << c.perturb_kind << '\n';
    out << "perturb.rate = " << fmt_g17(c.perturb_rate) << '\n';
    out << "perturb.mix = " << fmt_g17(c.perturb_mix) << '\n';
    out << "perturb.seed = " << c.perturb_seed << '\n';
    out << "perturb.degree_threshold = " << c.degree_threshold << '\n';
    out << "sweep.global_rates = ";
    for (std::size_t i = 0; i < c.sweep_global_rates.size(); ++i)
        out << (i ? "," : "") << fmt_g17(c.sweep_global_rates[i]);
    out << '\n';
    out << "sweep.targeted_counts = ";
    for (std::size_t i = 0; i < c.sweep_targeted_counts.size(); ++i)
        out << (i ? "," : "") << c.sweep_targeted_counts[i];
    out << '\n';
    out << "report.extended_layers = " << c.extended_layers << '\n';
    out << "report.checkpoint = " << c.checkpoint << '\n';
    out << "run.seed = " << c.seed << '\n';
    out << "run.threads = " << c.threads << '\n';
    return out.str();
}

}  // namespace asmp
