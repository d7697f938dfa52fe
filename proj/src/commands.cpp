#include "asmp/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "asmp/errors.hpp"
#include "asmp/log.hpp"
#include "asmp/parallel.hpp"
#include "asmp/rng.hpp"

namespace fs = std::filesystem;

namespace asmp::cmd {

namespace {

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << text;
}

void write_resolved_config(const RunConfig& config, const fs::path& out_dir) {
    write_text(out_dir / "config.resolved", serialize_config(config));
}

void write_dense_csv(const Matrix& m, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    char buf[64];
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out << (j ? "," : "") << buf;
        }
        out << '\n';
    }
}

ClassifierModel make_model(const RunConfig& config, const Graph& g, std::uint64_t seed,
                           bool structure_updates) {
    ClassifierModel model =
        init_model(g.n_features, g.n_classes, config.train, config.asmp, seed);
    model.normalization = config.norm_mode();
    model.structure_updates = structure_updates;
    model.degree_floor = config.degree_floor;
    if (config.steps_mode == "theorem_safe")
        seed_step_sizes_from_theorem(model, g, config.steps_safety);
    return model;
}

struct TrialOutcome {
    double accuracy = 0.0;
    double loss = 0.0;
};

nlohmann::json summarize(const std::vector<TrialOutcome>& outcomes) {
    nlohmann::json per_trial = nlohmann::json::array();
    double acc_sum = 0.0, loss_sum = 0.0;
    for (std::size_t t = 0; t < outcomes.size(); ++t) {
        per_trial.push_back({{"trial", t},
                             {"accuracy", outcomes[t].accuracy},
                             {"loss", outcomes[t].loss}});
        acc_sum += outcomes[t].accuracy;
        loss_sum += outcomes[t].loss;
    }
    const double n = static_cast<double>(outcomes.size());
    const double acc_mean = acc_sum / n;
    const double loss_mean = loss_sum / n;
    double acc_var = 0.0, loss_var = 0.0;
    for (const TrialOutcome& o : outcomes) {
        acc_var += (o.accuracy - acc_mean) * (o.accuracy - acc_mean);
        loss_var += (o.loss - loss_mean) * (o.loss - loss_mean);
    }
    nlohmann::json j;
    j["per_trial"] = per_trial;
    j["mean_accuracy"] = acc_mean;
    j["std_accuracy"] = std::sqrt(acc_var / n);
    j["mean_loss"] = loss_mean;
    j["std_loss"] = std::sqrt(loss_var / n);
    return j;
}

Splits require_splits(const Dataset& ds, const RunConfig& config) {
    if (ds.splits) return *ds.splits;
    return make_splits(ds.graph, config.split);
}

}  // namespace

Dataset resolve_dataset(const RunConfig& config, const fs::path& bundle) {
    if (config.data_source == "sbm") {
        Dataset ds;
        ds.graph = generate_sbm(config.sbm_spec());
        ds.orig_ids.resize(ds.graph.n_nodes);
        for (int i = 0; i < ds.graph.n_nodes; ++i) ds.orig_ids[i] = i;
        return ds;
    }
    if (bundle.empty())
        throw ValidationError("data.source=bundle requires a bundle path argument");
    return load_bundle(bundle);
}

void denoise(const RunConfig& config, const fs::path& bundle, const fs::path& out) {
    const Dataset ds = resolve_dataset(config, bundle);
    validate_graph(ds.graph);
    AsmpParams params = config.asmp;
    const SolverResult result = run_asmp(ds.graph, ds.graph.features, params,
                                         config.solver_options());

    fs::create_directories(out);
    std::ofstream trace(out / "trace.csv", std::ios::binary);
    write_trace_csv(result.trace, trace);
    trace.close();
    write_dense_csv(result.h, out / "h_final.csv");
    write_dense_csv(result.s.values, out / "s_final.csv");
    write_resolved_config(config, out);
}

void train_eval(const RunConfig& config, const fs::path& bundle, const fs::path& out) {
    const Dataset ds = resolve_dataset(config, bundle);
    validate_graph(ds.graph);
    const Splits splits = require_splits(ds, config);
    validate_splits(ds.graph, splits);
    if (config.trials < 1) throw ValidationError("train.trials must be >= 1");

    std::vector<TrialOutcome> asgnn(config.trials), baseline(config.trials);
    ClassifierModel trial0_model;

    parallel_for(config.trials, config.threads, [&](int t) {
        const std::uint64_t seed = mix_seed(config.seed, static_cast<std::uint64_t>(t));
        ClassifierModel model = make_model(config, ds.graph, seed, config.structure_updates);
        train(model, ds.graph, splits, config.train);
        const EvalResult er = evaluate(model, ds.graph, splits.test);
        asgnn[t] = {er.accuracy, er.loss};
        if (t == 0) trial0_model = model;

        if (config.baseline) {
            ClassifierModel base = make_model(config, ds.graph, seed, false);
            train(base, ds.graph, splits, config.train);
            const EvalResult eb = evaluate(base, ds.graph, splits.test);
            baseline[t] = {eb.accuracy, eb.loss};
        }
    });

    nlohmann::json metrics;
    metrics["asgnn"] = summarize(asgnn);
    if (config.baseline) metrics["baseline"] = summarize(baseline);

    fs::create_directories(out);
    write_text(out / "metrics.json", metrics.dump(2) + "\n");
    save_checkpoint(trial0_model, out / "model_trial0.ckpt");
    write_resolved_config(config, out);
}

void attack_sweep(const RunConfig& config, const fs::path& bundle, const fs::path& out) {
    const Dataset ds = resolve_dataset(config, bundle);
    validate_graph(ds.graph);
    const Splits splits = require_splits(ds, config);
    validate_splits(ds.graph, splits);
    const Graph& clean = ds.graph;

    const bool targeted = config.perturb_kind == "targeted_random";
    std::vector<double> levels;
    if (targeted)
        for (int c : config.sweep_targeted_counts) levels.push_back(static_cast<double>(c));
    else
        levels = config.sweep_global_rates;
    if (levels.empty()) throw ValidationError("attack_sweep: empty level grid");

    std::vector<int> targets;
    if (targeted) {
        targets = select_targets(clean, config.degree_threshold, splits.test);
        if (targets.empty())
            throw ValidationError("attack_sweep: no test nodes above the degree threshold");
    }
    const std::vector<int>& eval_split = targeted ? targets : splits.test;

    const int n_levels = static_cast<int>(levels.size());
    const int n_trials = config.trials;
    const int n_cells = n_levels * n_trials;
    // results[level][model][trial]
    std::vector<TrialOutcome> acc(static_cast<std::size_t>(n_cells) * 2);
    std::vector<double> probe(static_cast<std::size_t>(n_cells) * 2, 0.0);

    parallel_for(n_cells, config.threads, [&](int cell) {
        const int level_idx = cell / n_trials;
        const int trial = cell % n_trials;

        PerturbSpec ps;
        ps.kind = targeted ? PerturbKind::targeted_random : PerturbKind::global_random;
        ps.rate = levels[level_idx];
        ps.add_remove_mix = config.perturb_mix;
        ps.seed = mix_seed(config.perturb_seed,
                           static_cast<std::uint64_t>(level_idx) * 10007u +
                               static_cast<std::uint64_t>(trial));
        ps.targets = targets;
        const Graph perturbed = perturb(clean, ps);

        const std::uint64_t seed = mix_seed(config.seed, static_cast<std::uint64_t>(trial));
        for (int which = 0; which < 2; ++which) {
            if (which == 1 && !config.baseline) break;
            ClassifierModel model = make_model(config, perturbed, seed,
                                               which == 0 ? config.structure_updates : false);
            train(model, perturbed, splits, config.train);
            const EvalResult er = evaluate(model, perturbed, eval_split);
            const std::size_t slot =
                (static_cast<std::size_t>(level_idx) * 2 + which) * n_trials + trial;
            acc[slot] = {er.accuracy, er.loss};
            probe[slot] = clean_graph_loss_probe(model, clean, splits.test);
        }
    });

    fs::create_directories(out);
    std::ofstream csv(out / "sweep.csv", std::ios::binary);
    csv << "level,model,trial,accuracy,loss,clean_graph_loss\n";
    char buf[256];
    for (int li = 0; li < n_levels; ++li)
        for (int which = 0; which < (config.baseline ? 2 : 1); ++which)
            for (int t = 0; t < n_trials; ++t) {
                const std::size_t slot =
                    (static_cast<std::size_t>(li) * 2 + which) * n_trials + t;
                std::snprintf(buf, sizeof(buf), "%g,%s,%d,%.12e,%.12e,%.12e\n", levels[li],
                              which == 0 ? "asgnn" : "baseline", t, acc[slot].accuracy,
                              acc[slot].loss, probe[slot]);
                csv << buf;
            }
    csv.close();
    write_resolved_config(config, out);
}

void convergence_report(const RunConfig& config, const fs::path& bundle, const fs::path& out) {
    const Dataset ds = resolve_dataset(config, bundle);
    validate_graph(ds.graph);
    if (config.extended_layers < 1)
        throw ValidationError("report.extended_layers must be >= 1");

    AsmpParams params = config.asmp;
    Matrix x = ds.graph.features;
    SolverOptions opts = config.solver_options();
    if (!config.checkpoint.empty()) {
        const ClassifierModel model = load_checkpoint(config.checkpoint);
        params = model.asmp;
        x = feature_map(model.mlp, ds.graph.features);
        opts.normalization = model.normalization;
        opts.structure_updates = model.structure_updates;
        opts.degree_floor = model.degree_floor;
        opts.policy.mode = StepMode::learned;
        opts.policy.eta1 = params.eta1;
        opts.policy.eta2 = params.eta2;
    }
    params.k_layers = config.extended_layers;
    opts.early_stop = false;

    const SolverResult result = run_asmp(ds.graph, x, params, opts);

    fs::create_directories(out);
    std::ofstream csv(out / "report.csv", std::ios::binary);
    csv << "layer,objective,normalized,non_monotone\n";
    const double denom =
        result.trace.records.empty() || result.trace.records.front().energy.total == 0.0
            ? 1.0
            : result.trace.records.front().energy.total;
    char buf[160];
    double prev = std::numeric_limits<double>::infinity();
    int flagged = 0;
    for (const TraceRecord& r : result.trace.records) {
        const double normalized = r.energy.total / denom;
        const int non_monotone = normalized > prev + 1e-10 ? 1 : 0;
        flagged += non_monotone;
        std::snprintf(buf, sizeof(buf), "%d,%.12e,%.12e,%d\n", r.k, r.energy.total, normalized,
                      non_monotone);
        csv << buf;
        prev = normalized;
    }
    csv.close();
    if (flagged > 0)
        log::warn("convergence_report: %d non-monotone layers flagged", flagged);
    write_resolved_config(config, out);
}

void convert(const fs::path& content, const fs::path& cites, const fs::path& out) {
    const Graph g = load_citation_files(content, cites);
    validate_graph(g);
    save_bundle(g, out, /*lcc_on_load=*/true);
    log::info("convert: wrote bundle with %d nodes, %d edges, %d classes", g.n_nodes,
              g.n_edges(), g.n_classes);
}

}  // namespace asmp::cmd
