// Command-line driver: vagsim simulate <config> [--ranks N] [--scale S] [--output DIR] [--report FILE]

#include "vagsim/common/errors.hpp"
#include "vagsim/common/log.hpp"
#include "vagsim/sim/simulation.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

int fail(const char* stage, const std::exception& e, int code)
{
    std::cerr << "vagsim [" << stage << "] error: " << e.what() << '\n';
    return code;
}

struct Options {
    std::string config;
    std::optional<int> ranks;
    double scale = 1.0;
    std::string output;
    std::string report;
    bool sequential = false;
    bool verbose = false;
};

int simulate(const Options& opt)
{
    using namespace vagsim;
    if (opt.verbose) set_log_level(LogLevel::info);

    Scenario sc;
    try {
        sc = load_scenario(opt.config);
        if (const char* env = std::getenv("VAGSIM_RANKS")) sc.ranks = std::stoi(env);
        if (opt.ranks) sc.ranks = *opt.ranks;
        if (sc.ranks < 1) throw ConfigError("ranks must be at least 1");
        if (opt.scale != 1.0) apply_scale(sc, opt.scale);
        if (!opt.output.empty()) sc.output.directory = opt.output;
    } catch (const std::invalid_argument& e) {
        return fail("config", e, kExitConfig);
    } catch (const Error& e) {
        return fail("config", e, kExitConfig);
    }

    std::optional<Simulation> sim;
    try {
        sim.emplace(sc, !opt.sequential);
    } catch (const ConfigError& e) {
        return fail("setup", e, kExitConfig);
    } catch (const MeshError& e) {
        return fail("mesh", e, kExitConfig);
    } catch (const ParseError& e) {
        return fail("mesh", e, kExitConfig);
    } catch (const Error& e) {
        return fail("setup", e, kExitSolver);
    }
    std::cout << "vagsim [setup] " << sc.name << ": " << sim->mesh().num_cells() << " cells, "
              << sim->mesh().num_nodes() << " nodes, " << sim->mesh().fracture_faces.size()
              << " fracture faces, " << sc.ranks << " rank(s)\n";

    RunReport report;
    try {
        report = sim->run([&](const Simulation& s, const StepBalance& b) {
            if (opt.verbose)
                std::cout << "vagsim [run] t = " << s.time() / kSecondsPerDay << " d, dt = "
                          << b.dt / kSecondsPerDay << " d, newton " << b.newton_iterations << ", gmres "
                          << b.gmres_iterations << '\n';
            return true;
        });
    } catch (const Error& e) {
        return fail("run", e, kExitSolver);
    }

    const std::string json = report.to_json();
    if (!opt.report.empty()) {
        std::ofstream out(opt.report);
        out << json << '\n';
        if (!out) {
            std::cerr << "vagsim [output] error: cannot write " << opt.report << '\n';
            return kExitSolver;
        }
    }
    std::cout << json << '\n';
    if (!report.completed) {
        std::cerr << "vagsim [run] aborted: "
                  << (report.abort_reason.empty() ? "stopped early" : report.abort_reason) << '\n';
        return kExitSolver;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hybrid-dimensional multiphase Darcy flow simulator"};
    app.require_subcommand(1);
    Options opt;
    auto* cmd = app.add_subcommand("simulate", "Run a scenario");
    cmd->add_option("config", opt.config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--ranks", opt.ranks, "Number of SPMD ranks (overrides VAGSIM_RANKS and the config)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--scale", opt.scale, "Mesh resolution multiplier")->check(CLI::PositiveNumber);
    cmd->add_option("--output", opt.output, "Output directory");
    cmd->add_option("--report", opt.report, "Write the run report JSON here");
    cmd->add_flag("--sequential", opt.sequential, "Run ranks one after another on the calling thread");
    cmd->add_flag("-v,--verbose", opt.verbose, "Per-step progress and info logging");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }
    return simulate(opt);
}
