// Command-line front end: stage orchestration over a scenario config.
// Exit codes: 0 success, 2 configuration/validation, 3 numerical, 4 I/O,
// 1 anything unexpected.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "mrn/errors.hpp"
#include "mrn/pipeline.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw mrn::IoError("cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct CliOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::string stages = "all";
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--config", opt.config_path, "scenario config file (JSON)")->required();
    cmd->add_option("--out", opt.out_dir, "artifact directory")->capture_default_str();
    cmd->add_option("--seed", opt.seed, "override the config seed")->each([&opt](const std::string&) {
        opt.seed_set = true;
    });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-region traffic simulation and dynamic congestion pricing"};
    app.set_version_flag("--version", mrn::kToolVersion);
    app.require_subcommand(1);

    CliOptions opt;
    CLI::App* sim = app.add_subcommand("simulate-qdue", "run the user-equilibrium simulation");
    CLI::App* dso = app.add_subcommand("solve-dso", "run the rolling-horizon system-optimal simulation");
    CLI::App* train = app.add_subcommand("train-pricing", "fit the cost-prediction models on the qdue run");
    CLI::App* priced = app.add_subcommand("run-priced", "run the tolled closed loop using trained models");
    CLI::App* compare = app.add_subcommand("compare", "compute and compare metrics across completed runs");
    CLI::App* plots = app.add_subcommand("emit-plots", "derive plot-ready data files from run artifacts");
    CLI::App* run = app.add_subcommand("run", "run a stage list in dependency order");
    for (CLI::App* cmd : {sim, dso, train, priced, compare, plots, run}) add_common(cmd, opt);
    run->add_option("--stages", opt.stages, "comma-separated subset of qdue,dso,train,priced,compare or 'all'")
        ->capture_default_str();

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            const int rc = app.exit(e);
            return rc == 0 ? 0 : 2;
        }

        const std::string raw = slurp(opt.config_path);
        mrn::ScenarioConfig cfg = mrn::parse_config(raw, opt.config_path);
        if (opt.seed_set) cfg.seed = opt.seed;

        if (plots->parsed()) {
            mrn::emit_plot_data(cfg, opt.out_dir);
            std::cout << "plot data written to " << opt.out_dir << "\n";
            return 0;
        }

        mrn::StageSet stages;
        if (sim->parsed()) stages.qdue = true;
        if (dso->parsed()) stages.dso = true;
        if (train->parsed()) stages.train = true;
        if (priced->parsed()) stages.priced = true;
        if (compare->parsed()) stages.compare = true;
        if (run->parsed()) stages = mrn::parse_stages(opt.stages);

        mrn::run_pipeline(cfg, raw, opt.out_dir, stages);
        std::cout << "scenario '" << cfg.name << "' (" << cfg.steps() << " steps): artifacts in " << opt.out_dir
                  << "\n";
        return 0;
    } catch (const mrn::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mrn::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mrn::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const mrn::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
