#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "asmp/data_io.hpp"
#include "asmp/energy.hpp"
#include "asmp/model.hpp"
#include "asmp/perturb.hpp"
#include "asmp/solver.hpp"

namespace asmp {

/// Every knob of the pipeline as a flat key=value config. All keys have
/// defaults; unknown keys are errors; parse(serialize(c)) == c.
struct RunConfig {
    // data
    std::string data_source = "bundle";  // bundle | sbm

    // splits (fractions of labeled nodes)
    SplitSpec split;

    // synthetic instance
    std::vector<int> sbm_blocks = {100, 100};
    double sbm_p_in = 0.1;
    double sbm_p_out = 0.01;
    double sbm_mean_sep = 1.0;
    double sbm_noise = 0.5;
    int sbm_feature_dim = 0;  // 0: one dimension per block
    std::uint64_t sbm_seed = 1;

    // objective weights, step sizes, and layer counts
    AsmpParams asmp;
    std::string normalization = "rw";  // rw | sym
    bool structure_updates = true;
    bool symmetrize = false;
    double degree_floor = kDegreeFloor;

    // step-size policy (fixed/learned take eta1/eta2 from asmp.*)
    std::string steps_mode = "theorem_safe";  // theorem_safe | fixed | learned
    double steps_safety = 0.9;
    bool early_stop = false;
    double residual_tol = 1e-10;

    // training
    TrainConfig train;
    int trials = 10;
    bool baseline = true;

    // perturbation
    std::string perturb_kind = "global_random";  // global_random | targeted_random
    double perturb_rate = 0.0;
    double perturb_mix = 0.5;
    std::uint64_t perturb_seed = 1;
    int degree_threshold = 10;

    // sweep grids
    std::vector<double> sweep_global_rates = {0.0, 0.05, 0.10, 0.15, 0.20, 0.25};
    std::vector<int> sweep_targeted_counts = {0, 1, 2, 3, 4, 5};

    // convergence report
    int extended_layers = 20;
    std::string checkpoint;  // optional path; empty runs from raw features

    // run control
    std::uint64_t seed = 1;
    int threads = 1;

    NormMode norm_mode() const;
    StepSizePolicy step_policy() const;
    SolverOptions solver_options() const;
    SbmSpec sbm_spec() const;
    HyperMode hyper_mode() const { return train.hyperparam_mode; }
};

RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Canonical serialization: every key once, fixed order, %.17g numbers.
std::string serialize_config(const RunConfig& config);

}  // namespace asmp
