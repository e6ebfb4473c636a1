#include "darwin/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "json.hpp"

namespace darwin {

Simulation::Simulation(const Scenario& scn) : scn_(scn) {
    mat_ = build_materials(scn_);
    ops_ = build_incidence(scn_.grid);
    apply_boundary_masks(ops_, scn_.grid, boundary_config(scn_));
    for (const CoilSpec& c : scn_.coils)
        for (const auto& [e, sign] : coil_edges(scn_.grid, c)) {
            (void)sign;
            if (ops_.pec_edge[e])
                throw ScenarioError("scenario: coil \"" + c.name +
                                    "\" runs along a perfectly conducting wall edge; move the "
                                    "loop off the outer boundary");
        }
    dofs_ = build_dof_maps(scn_.grid, ops_);
    hodge_ = build_hodge(scn_.grid, mat_);
    config_ = make_stepper_config(scn_);
    system_ = std::make_unique<DarwinSystem>(scn_.grid, ops_, dofs_, hodge_, config_);
    state_ = init_state(*system_, source_at(0.0));
    prev_ = state_;
}

void Simulation::step() {
    const SourceSample src = source_at(state_.time + config_.dt);
    SimState next = advance(*system_, state_, src, diag_);
    prev_ = std::move(state_);
    state_ = std::move(next);
}

namespace {

std::string snapshot_name(int step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fields_%06d.vtk", step);
    return buf;
}

}  // namespace

RunResult run_scenario(const Scenario& scn_in, const RunOptions& opt) {
    Scenario scn = scn_in;
    if (opt.dt) {
        if (!(*opt.dt > 0.0)) throw ScenarioError("scenario: dt override must be > 0");
        scn.stepper.dt = *opt.dt;
    }
    if (opt.scheme) scn.stepper.scheme = *opt.scheme;
    if (opt.snap_every) {
        if (*opt.snap_every < 0)
            throw ScenarioError("scenario: snap-every override must be >= 0");
        scn.output.snap_every = *opt.snap_every;
    }

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(opt.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + opt.out_dir + ": " + ec.message());

    {
        std::ofstream echo(fs::path(opt.out_dir) / "scenario.json");
        if (!echo) throw IoError("cannot write scenario echo in " + opt.out_dir);
        echo << serialize_scenario(scn);
    }

    Simulation sim(scn);
    const int steps = scn.stepper.steps;
    const double dt = scn.stepper.dt;

    std::set<int> snap_steps;
    if (scn.output.snap_every > 0)
        for (int n = 0; n <= steps; n += scn.output.snap_every) snap_steps.insert(n);
    for (double t : scn.output.snap_times) {
        const int n = std::clamp(static_cast<int>(std::llround(t / dt)), 0, steps);
        snap_steps.insert(n);
    }

    RunResult result;
    auto snapshot = [&](int step) {
        const std::string name = snapshot_name(step);
        write_vtk_snapshot((fs::path(opt.out_dir) / name).string(), sim.grid(), sim.fields(),
                           scn.name + " t=" + std::to_string(sim.state().time));
        result.snapshots.push_back(name);
    };
    if (snap_steps.count(0)) snapshot(0);

    for (int n = 1; n <= steps; ++n) {
        const auto t0 = std::chrono::steady_clock::now();
        sim.step();
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const Fields f = sim.fields();
        const auto [w_e, w_m] = energies(f, sim.hodge());
        HistoryRow row;
        row.step = n;
        row.t = sim.state().time;
        row.w_e = w_e;
        row.w_m = w_m;
        row.div_residual = sim.last_diag().conservation_residual;
        row.eqs_iters = sim.last_diag().eqs.iterations;
        row.eqs_res = sim.last_diag().eqs.rel_residual;
        row.mqs_iters = sim.last_diag().mqs.iterations;
        row.mqs_res = sim.last_diag().mqs.rel_residual;
        row.wall_s = wall;
        result.history.push_back(row);
        if (snap_steps.count(n)) snapshot(n);
    }

    write_history_csv((fs::path(opt.out_dir) / "history.csv").string(), result.history);

    nlohmann::json manifest;
    manifest["scenario"] = scn.name;
    manifest["scheme"] = scn.stepper.scheme == Scheme::two_step ? "two_step"
                         : scn.stepper.scheme == Scheme::gauss_seidel ? "gauss_seidel"
                                                                      : "monolithic";
    manifest["dt"] = dt;
    manifest["steps"] = steps;
    manifest["seed"] = opt.seed;
    manifest["grid"] = {
        {"nodes", {sim.grid().nodes(Axis::x), sim.grid().nodes(Axis::y),
                   sim.grid().nodes(Axis::z)}},
        {"node_count", sim.grid().node_count()},
        {"edge_count", sim.grid().edge_count()},
        {"face_count", sim.grid().face_count()},
        {"cell_count", sim.grid().cell_count()},
    };
    manifest["dofs"] = {{"a", sim.system().edge_dofs()}, {"phi", sim.system().node_dofs()}};
    manifest["config"] = {
        {"eqs_tol", scn.stepper.eqs_tol},
        {"mqs_tol", scn.stepper.mqs_tol},
        {"exact_solves", scn.stepper.exact_solves},
        {"kappa_reg", sim.config().kappa_reg},
        {"mass_reg", scn.stepper.mass_reg},
        {"wall_phi", scn.wall_phi == WallPhi::ground ? "ground" : "natural"},
    };
    manifest["outputs"] = {{"history", "history.csv"}, {"snapshots", result.snapshots}};
    {
        std::ofstream mf(fs::path(opt.out_dir) / "manifest.json");
        if (!mf) throw IoError("cannot write manifest in " + opt.out_dir);
        mf << manifest.dump(2) << '\n';
    }

    if (!opt.quiet) {
        double w_e = 0.0, w_m = 0.0;
        if (!result.history.empty()) {
            w_e = result.history.back().w_e;
            w_m = result.history.back().w_m;
        }
        std::cout << "completed " << steps << " steps of " << scn.name << " (dofs a="
                  << sim.system().edge_dofs() << " phi=" << sim.system().node_dofs()
                  << "), final W_e=" << w_e << " J, W_m=" << w_m << " J\n";
    }
    return result;
}

}  // namespace darwin
