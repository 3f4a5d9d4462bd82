#include <algorithm>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "lsu/grid_oracle.hpp"
#include "lsu/harness.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

int cmd_run(const std::string& experiment, const std::string& config_path,
            const std::string& out_dir, int scale, std::uint64_t seed, bool seed_set,
            int workers, const std::string& format, bool trace) {
    lsu::ExperimentConfig cfg;
    try {
        if (!experiment.empty() && experiment != "custom") cfg = lsu::preset(std::stoi(experiment));
        if (!config_path.empty()) cfg = lsu::parse_config_text(read_file(config_path), cfg);
        if (seed_set) cfg.master_seed = seed;
        lsu::apply_scale(cfg, scale);
        auto bad = cfg.validate();
        if (!bad.empty()) throw lsu::ConfigError(std::move(bad));
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    bool csv = format.find("csv") != std::string::npos;
    bool svg = format.find("svg") != std::string::npos;

    lsu::ResultsTable table = lsu::run_experiment(cfg, workers);
    lsu::write_outputs(table, out_dir, csv, svg);
    if (trace) {
        std::ofstream f(out_dir + "/source_trace.csv", std::ios::binary);
        f << lsu::source_trace_csv(cfg);
    }

    bool any_kept = std::any_of(table.rows.begin(), table.rows.end(),
                                [](const lsu::MetricsRecord& r) { return !r.discarded; });
    std::size_t discarded =
        static_cast<std::size_t>(std::count_if(table.rows.begin(), table.rows.end(),
                                               [](const lsu::MetricsRecord& r) { return r.discarded; }));
    std::cout << "wrote " << table.rows.size() << " rows to " << out_dir << " ("
              << discarded << " discarded)\n";
    return any_kept ? 0 : 3;
}

int cmd_oracle(const std::string& system, int steps) {
    lsu::LsuModel model;
    if (system == "system2") {
        model = lsu::builtin_systems().system2;
    } else if (system == "scalar") {
        model.A = Eigen::MatrixXd::Constant(1, 1, 0.9);
        model.B = Eigen::MatrixXd::Zero(1, 1);
        model.C = Eigen::MatrixXd::Identity(1, 1);
    } else {
        std::cerr << "oracle: system must be system2 or scalar\n";
        return 2;
    }
    model.w_half = Eigen::VectorXd::Constant(model.nx(), 1e-3);
    model.v_half = Eigen::VectorXd::Constant(model.ny(), 1e-2);

    std::vector<lsu::ChannelModel> channels{{model.C, model.v_half}};
    lsu::Trajectory tr = lsu::simulate_v(model, channels, steps, {}, 12345,
                                         Eigen::VectorXd::Zero(model.nx()));
    lsu::Orthotope prior =
        lsu::Orthotope::centered(Eigen::VectorXd::Zero(model.nx()), 0.05);
    lsu::RunResult run =
        lsu::run_isolated(model, prior, tr.channel_obs[0], tr.inputs, lsu::EmptyPolicy::Skip);
    std::vector<lsu::Orthotope> oracle =
        lsu::oracle_grid_filter(model, tr, model.nx() == 1 ? 1e-4 : 5e-4, prior);

    int violations = 0;
    for (int t = 0; t < steps; ++t) {
        const lsu::Orthotope& exact = oracle[static_cast<size_t>(t)];
        const lsu::Orthotope& post = *run.steps[static_cast<size_t>(t)].posterior;
        bool subset = lsu::contains(post, exact.lower) && lsu::contains(post, exact.upper);
        if (!subset) ++violations;
        std::cout << "t=" << t + 1 << " exact_vol=" << lsu::volume(exact)
                  << " filter_vol=" << lsu::volume(post)
                  << (subset ? " subset=yes" : " subset=NO") << "\n";
    }
    std::cout << (violations == 0 ? "PASS" : "FAIL") << ": " << violations
              << " containment violations over " << steps << " steps\n";
    return violations == 0 ? 0 : 1;
}

int cmd_validate(const std::string& path) {
    try {
        lsu::ExperimentConfig cfg = lsu::parse_config_text(read_file(path));
        std::cout << "valid\n" << cfg.echo();
        return 0;
    } catch (const lsu::ConfigError& e) {
        for (const auto& v : e.violations) std::cerr << v << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(lsu::kVersion) +
                 " — bounded-noise orthotopic Bayesian filtering experiments"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run an experiment and write results");
    std::string experiment = "custom", config_path, out_dir = "out", format = "csv,svg";
    int scale = 1, workers = 1;
    std::uint64_t seed = 0;
    bool trace = false;
    run->add_option("--experiment", experiment, "Preset 1..5 or custom");
    run->add_option("--config", config_path, "Config file (key = value)");
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--scale", scale, "Divide mc_runs/horizon/t_lo by this factor");
    auto* seed_opt = run->add_option("--seed", seed, "Override master_seed");
    run->add_option("--workers", workers, "Worker threads");
    run->add_option("--format", format, "Comma list of csv,svg");
    run->add_flag("--trace", trace, "Also write the source-predictor trace CSV");

    auto* oracle = app.add_subcommand("oracle", "Grid-oracle containment check");
    std::string system = "scalar";
    int steps = 50;
    oracle->add_option("--system", system, "scalar or system2");
    oracle->add_option("--steps", steps, "Filtering steps");

    auto* validate = app.add_subcommand("validate-config", "Validate a config file");
    std::string vpath;
    validate->add_option("path", vpath, "Config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(experiment, config_path, out_dir, scale, seed,
                           seed_opt->count() > 0, workers, format, trace);
        if (oracle->parsed()) return cmd_oracle(system, steps);
        if (validate->parsed()) return cmd_validate(vpath);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
