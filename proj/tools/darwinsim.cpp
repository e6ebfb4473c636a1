#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "darwin/output.hpp"
#include "darwin/run.hpp"
#include "darwin/scenario.hpp"
#include "darwin/solver.hpp"
#include "darwin/verify.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Transient electromagnetic field simulator (Darwin quasistatic model)"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = "out";
    double dt_override = 0.0;
    std::string scheme_str;
    int snap_every = 0;
    long seed = 0;
    bool quiet = false;

    CLI::App* run_cmd =
        app.add_subcommand("run", "Run a scenario, writing CSV diagnostics, VTK field "
                                  "snapshots and a run manifest");
    run_cmd->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    run_cmd->add_option("--out", out_dir, "Output directory (default: out)");
    CLI::Option* dt_opt =
        run_cmd->add_option("--dt", dt_override, "Override the scenario time step (s)");
    CLI::Option* scheme_opt =
        run_cmd->add_option("--scheme", scheme_str, "Override the time integration scheme")
            ->check(CLI::IsMember({"two_step", "gauss_seidel", "monolithic"}));
    CLI::Option* snap_opt = run_cmd->add_option(
        "--snap-every", snap_every, "Override the snapshot cadence (steps, 0 = none)");
    run_cmd->add_option("--seed", seed, "Seed recorded in the manifest");
    run_cmd->add_flag("--quiet", quiet, "Suppress the completion summary");

    std::string suite;
    unsigned long verify_seed = 12345;
    CLI::App* verify_cmd =
        app.add_subcommand("verify", "Run a built-in verification suite and print a "
                                     "machine-readable report");
    verify_cmd->add_option("suite", suite, "operators | conservation | convergence | oracle | all")
        ->required()
        ->check(CLI::IsMember({"operators", "conservation", "convergence", "oracle", "all"}));
    verify_cmd->add_option("--seed", verify_seed, "Seed for the randomized probes");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const darwin::Scenario scn = darwin::load_scenario_file(scenario_path);
            darwin::RunOptions opt;
            opt.out_dir = out_dir;
            opt.seed = seed;
            opt.quiet = quiet;
            if (dt_opt->count() > 0) opt.dt = dt_override;
            if (snap_opt->count() > 0) opt.snap_every = snap_every;
            if (scheme_opt->count() > 0) {
                if (scheme_str == "two_step")
                    opt.scheme = darwin::Scheme::two_step;
                else if (scheme_str == "gauss_seidel")
                    opt.scheme = darwin::Scheme::gauss_seidel;
                else
                    opt.scheme = darwin::Scheme::monolithic;
            }
            darwin::run_scenario(scn, opt);
            return 0;
        }
        if (verify_cmd->parsed()) {
            const std::vector<darwin::SuiteReport> reports =
                darwin::verify_suites(suite, verify_seed);
            std::cout << darwin::report_json(reports);
            bool all_passed = true;
            for (const darwin::SuiteReport& r : reports) all_passed = all_passed && r.passed;
            return all_passed ? 0 : 1;
        }
    } catch (const darwin::ScenarioError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const darwin::SolverError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const darwin::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
