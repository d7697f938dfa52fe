#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "asmp/commands.hpp"
#include "asmp/errors.hpp"
#include "asmp/log.hpp"

namespace {

struct CommonOpts {
    std::string bundle;
    std::string config_path;
    std::string out = "out";
    std::uint64_t seed = 0;
    int threads = 0;
    bool seed_set = false;
    bool threads_set = false;
};

void add_common(CLI::App* sub, CommonOpts& opts, bool with_bundle) {
    if (with_bundle)
        sub->add_option("bundle", opts.bundle, "GraphBundle directory (omit with data.source=sbm)");
    sub->add_option("--config", opts.config_path, "run config file (key = value lines)");
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option("--seed", opts.seed, "override run.seed")
        ->each([&](const std::string&) { opts.seed_set = true; });
    sub->add_option("--threads", opts.threads, "override run.threads")
        ->each([&](const std::string&) { opts.threads_set = true; });
}

asmp::RunConfig resolve_config(const CommonOpts& opts) {
    asmp::RunConfig config;
    if (!opts.config_path.empty()) config = asmp::load_config(opts.config_path);
    if (opts.seed_set) config.seed = opts.seed;
    if (opts.threads_set) config.threads = opts.threads;
    if (config.threads < 1) throw asmp::ValidationError("run.threads must be >= 1");
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ASMP graph denoising solver and ASGNN pipeline"};
    app.require_subcommand(1);

    CommonOpts denoise_opts, train_opts, sweep_opts, report_opts;
    std::string convert_content, convert_cites, convert_out = "bundle";

    add_common(app.add_subcommand("denoise", "solve the joint denoising problem"),
               denoise_opts, true);
    add_common(app.add_subcommand("train-eval", "train/evaluate over independent trials"),
               train_opts, true);
    add_common(app.add_subcommand("attack-sweep", "accuracy across perturbation levels"),
               sweep_opts, true);
    add_common(app.add_subcommand("convergence-report", "per-layer objective trace"),
               report_opts, true);
    CLI::App* convert = app.add_subcommand("convert", "citation files -> GraphBundle");
    convert->add_option("content", convert_content, ".content file")->required();
    convert->add_option("cites", convert_cites, ".cites file")->required();
    convert->add_option("--out", convert_out, "bundle directory to write");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand("denoise"))
            asmp::cmd::denoise(resolve_config(denoise_opts), denoise_opts.bundle,
                               denoise_opts.out);
        else if (app.got_subcommand("train-eval"))
            asmp::cmd::train_eval(resolve_config(train_opts), train_opts.bundle, train_opts.out);
        else if (app.got_subcommand("attack-sweep"))
            asmp::cmd::attack_sweep(resolve_config(sweep_opts), sweep_opts.bundle,
                                    sweep_opts.out);
        else if (app.got_subcommand("convergence-report"))
            asmp::cmd::convergence_report(resolve_config(report_opts), report_opts.bundle,
                                          report_opts.out);
        else if (app.got_subcommand("convert"))
            asmp::cmd::convert(convert_content, convert_cites, convert_out);
    } catch (const asmp::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
