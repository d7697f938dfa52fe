#include <doctest.h>

#include <fstream>

#include "asmp/commands.hpp"
#include "asmp/config.hpp"
#include "asmp/errors.hpp"
#include "testutil.hpp"

#include <json.hpp>

using namespace asmp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RunConfig tiny_sbm_config() {
    RunConfig c;
    c.data_source = "sbm";
    c.sbm_blocks = {8, 8};
    c.sbm_p_in = 0.4;
    c.sbm_p_out = 0.05;
    c.sbm_mean_sep = 2.0;
    c.sbm_noise = 0.3;
    c.asmp.eta1 = 0.2;
    c.asmp.eta2 = 0.05;
    c.asmp.k_layers = 2;
    c.steps_mode = "fixed";
    c.train.epochs = 10;
    c.train.hidden = 4;
    c.train.patience = 0;
    c.trials = 1;
    return c;
}

}  // namespace

TEST_SUITE_BEGIN("config");

TEST_CASE("empty text yields the defaults") {
    const RunConfig c = parse_config_text("");
    CHECK(c.data_source == "bundle");
    CHECK(c.split.train == 0.10);
    CHECK(c.asmp.gamma == 1.0);
    CHECK(c.trials == 10);
    CHECK(c.sweep_global_rates.size() == 6);
}

TEST_CASE("comments, blanks, and whitespace are tolerated") {
    const RunConfig c = parse_config_text(
        "# a comment\n"
        "\n"
        "  asmp.gamma   =  2.5 \n"
        "train.hyperparam_mode = learned_fd\n"
        "sbm.blocks = 10, 20,30\n");
    CHECK(c.asmp.gamma == 2.5);
    CHECK(c.train.hyperparam_mode == HyperMode::learned_fd);
    CHECK(c.sbm_blocks == std::vector<int>{10, 20, 30});
}

TEST_CASE("unknown keys and malformed values are errors") {
    CHECK_THROWS_WITH_AS(parse_config_text("nope.key = 1\n"),
                         doctest::Contains("unknown key"), ValidationError);
    CHECK_THROWS_AS(parse_config_text("asmp.gamma = abc\n"), ValidationError);
    CHECK_THROWS_AS(parse_config_text("asmp.gamma 1\n"), ValidationError);
    CHECK_THROWS_AS(parse_config_text("steps.mode = sometimes\n"), ValidationError);
}

TEST_CASE("serialization round-trips") {
    RunConfig c = tiny_sbm_config();
    c.asmp.lambda = -0.375;
    c.split.seed = 987654321;
    c.sweep_global_rates = {0.0, 0.125};
    c.checkpoint = "path/to/model.ckpt";
    const std::string once = serialize_config(c);
    const RunConfig back = parse_config_text(once);
    CHECK(serialize_config(back) == once);
}

TEST_CASE("denoise with K = 0 dumps the inputs") {
    const auto out = test::temp_dir("cmd_denoise");
    RunConfig c = tiny_sbm_config();
    c.asmp.k_layers = 0;
    cmd::denoise(c, "", out);

    const std::string trace = slurp(out / "trace.csv");
    CHECK(trace ==
          "k,total,feature_fidelity,smoothing,structure_fidelity,l1,fro,residual,"
          "min_degree,max_rownorm,n_at_zero,n_at_one\n");

    // the S dump equals the adjacency
    const Graph g = generate_sbm(c.sbm_spec());
    const Matrix a(g.adjacency);
    std::istringstream s_csv(slurp(out / "s_final.csv"));
    std::string line;
    int row = 0;
    while (std::getline(s_csv, line)) {
        std::istringstream cells(line);
        std::string cell;
        int col = 0;
        while (std::getline(cells, cell, ',')) {
            CHECK(std::stod(cell) == a(row, col));
            ++col;
        }
        CHECK(col == g.n_nodes);
        ++row;
    }
    CHECK(row == g.n_nodes);
    CHECK(fs::exists(out / "config.resolved"));
}

TEST_CASE("train-eval reports zero std for a single trial") {
    const auto out = test::temp_dir("cmd_train_eval");
    RunConfig c = tiny_sbm_config();
    cmd::train_eval(c, "", out);
    const auto metrics = nlohmann::json::parse(slurp(out / "metrics.json"));
    CHECK(metrics["asgnn"]["per_trial"].size() == 1);
    CHECK(metrics["asgnn"]["std_accuracy"].get<double>() == 0.0);
    CHECK(metrics.contains("baseline"));
    CHECK(fs::exists(out / "model_trial0.ckpt"));
}

TEST_CASE("convergence report normalizes the first layer to one") {
    const auto out = test::temp_dir("cmd_report");
    RunConfig c = tiny_sbm_config();
    c.steps_mode = "theorem_safe";
    c.extended_layers = 10;
    cmd::convergence_report(c, "", out);

    std::istringstream csv(slurp(out / "report.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "layer,objective,normalized,non_monotone");
    int rows = 0;
    double prev = std::numeric_limits<double>::infinity();
    while (std::getline(csv, line)) {
        ++rows;
        const auto first_comma = line.find(',');
        const auto second_comma = line.find(',', first_comma + 1);
        const auto third_comma = line.find(',', second_comma + 1);
        const double normalized = std::stod(
            line.substr(second_comma + 1, third_comma - second_comma - 1));
        if (rows == 1) CHECK(normalized == 1.0);
        CHECK(normalized <= prev + 1e-10);  // theorem-safe steps descend
        CHECK(line.substr(third_comma + 1) == "0");
        prev = normalized;
    }
    CHECK(rows == 10);
}

TEST_CASE("resolved config is embedded verbatim") {
    const auto out = test::temp_dir("cmd_resolved");
    RunConfig c = tiny_sbm_config();
    c.asmp.k_layers = 1;
    cmd::denoise(c, "", out);
    CHECK(slurp(out / "config.resolved") == serialize_config(c));
}

TEST_SUITE_END();
