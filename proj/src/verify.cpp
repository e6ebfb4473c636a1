#include "darwin/verify.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"

#include "darwin/run.hpp"
#include "darwin/scenario.hpp"

namespace darwin {

namespace {

void add_check(SuiteReport& rep, const std::string& name, bool passed,
               const std::string& detail) {
    rep.checks.push_back({name, passed, detail});
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

StaggeredGrid random_grid(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> dim(2, 6);
    std::uniform_real_distribution<double> len(0.2, 1.5);
    std::array<std::vector<double>, 3> planes;
    for (int a = 0; a < 3; ++a) {
        const int n = dim(rng);
        double x = 0.0;
        planes[a].push_back(x);
        for (int i = 0; i < n; ++i) {
            x += len(rng);
            planes[a].push_back(x);
        }
    }
    return StaggeredGrid::from_planes(std::move(planes));
}

MaterialField random_materials(const StaggeredGrid& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> kappa(0.0, 100.0);
    std::uniform_real_distribution<double> eps_r(1.0, 5.0);
    std::uniform_real_distribution<double> mu_r(0.5, 2.0);
    std::bernoulli_distribution conducting(0.5);
    MaterialField mat;
    const long nc = g.cell_count();
    mat.kappa.resize(nc);
    mat.eps.resize(nc);
    mat.nu.resize(nc);
    for (long c = 0; c < nc; ++c) {
        mat.kappa[c] = conducting(rng) ? kappa(rng) : 0.0;
        mat.eps[c] = eps_r(rng) * vacuum_permittivity;
        mat.nu[c] = 1.0 / (mu_r(rng) * vacuum_permeability);
    }
    return mat;
}

SuiteReport run_operators_suite(unsigned long seed) {
    SuiteReport rep{"operators", false, {}};
    std::mt19937_64 rng(seed);
    bool euler_ok = true, cg_ok = true, dc_ok = true, dual_ok = true;
    bool restricted_ok = true, hodge_ok = true, sym_ok = true;
    double max_dual_rel = 0.0, max_sym = 0.0;

    for (int trial = 0; trial < 5; ++trial) {
        const StaggeredGrid grid = random_grid(rng);
        IncidenceOperators ops = build_incidence(grid);

        const long euler = grid.node_count() - grid.edge_count() + grid.face_count() -
                           grid.cell_count();
        euler_ok = euler_ok && euler == 1;

        cg_ok = cg_ok && multiply(ops.curl, ops.gradient).nonzeros() == 0;
        dc_ok = dc_ok && multiply(ops.cell_div, ops.curl).nonzeros() == 0;

        double dual_sum = 0.0;
        const auto next = grid.extents(EntityKind::node);
        for (int k = 0; k < next[2]; ++k)
            for (int j = 0; j < next[1]; ++j)
                for (int i = 0; i < next[0]; ++i) dual_sum += grid.dual_volume({i, j, k});
        const double rel = std::abs(dual_sum - grid.total_volume()) / grid.total_volume();
        max_dual_rel = std::max(max_dual_rel, rel);
        dual_ok = dual_ok && rel < 1e-12;

        apply_boundary_masks(ops, grid, BoundaryConfig{});
        const DofMaps dofs = build_dof_maps(grid, ops);
        const IntMatrix curl_free = ops.curl.select_columns(dofs.edge_dof, dofs.edge_dofs());
        std::vector<int> fe(dofs.free_edges.size());
        for (std::size_t i = 0; i < fe.size(); ++i) fe[i] = static_cast<int>(dofs.free_edges[i]);
        const IntMatrix grad_ff =
            ops.gradient.select_rows(fe).select_columns(dofs.node_dof, dofs.node_dofs());
        const IntMatrix prod = multiply(curl_free, grad_ff);
        for (int r = 0; r < prod.rows() && restricted_ok; ++r)
            for (int k = prod.row_ptr()[r]; k < prod.row_ptr()[r + 1]; ++k)
                if (dofs.free_node_interior[prod.col_idx()[k]]) restricted_ok = false;

        const MaterialField mat = random_materials(grid, rng);
        const HodgeMatrices hodge = build_hodge(grid, mat);
        for (double v : hodge.eps_edge) hodge_ok = hodge_ok && v > 0.0;
        for (double v : hodge.nu_face) hodge_ok = hodge_ok && v > 0.0;
        for (double v : hodge.kappa_edge) hodge_ok = hodge_ok && v >= 0.0;

        StepperConfig cfg;
        cfg.dt = 1e-6;
        const DarwinSystem sys(grid, ops, dofs, hodge, cfg);
        const double sd = std::max(symmetry_defect(sys.eqs_matrix()),
                                   symmetry_defect(sys.mqs_matrix()));
        max_sym = std::max(max_sym, sd);
        sym_ok = sym_ok && sd == 0.0;
    }

    add_check(rep, "euler_relation", euler_ok, "N - E + F - C = 1 on 5 random grids");
    add_check(rep, "curl_grad_zero", cg_ok, "C*G = 0 in integer arithmetic");
    add_check(rep, "div_curl_zero", dc_ok, "D*C = 0 in integer arithmetic");
    add_check(rep, "dual_volume_partition", dual_ok,
              "sum of dual volumes matches domain volume, max rel err " + fmt(max_dual_rel));
    add_check(rep, "restricted_curl_grad_interior", restricted_ok,
              "restricted C*G vanishes on interior free-node columns");
    add_check(rep, "hodge_positivity", hodge_ok, "M_eps, M_nu > 0 and M_kappa >= 0");
    add_check(rep, "assembly_symmetry", sym_ok,
              "EQS/MQS matrices bitwise symmetric, max defect " + fmt(max_sym));
    return rep;
}

const char* conservation_scenario_json = R"JSON({
  "schema": 1,
  "name": "verify-conservation",
  "domain": {"cells": [5, 5, 5], "size": [1.0, 1.0, 1.0]},
  "background": {"kappa": 0.0, "eps_r": 1.0, "mu_r": 1.0},
  "materials": [
    {"name": "conductor", "box": [[0.2, 0.2, 0.2], [0.8, 0.8, 0.8]],
     "kappa": 50.0, "eps_r": 1.0, "mu_r": 1.0}
  ],
  "waveforms": [
    {"name": "drive", "kind": "ramped_sine", "amplitude": 10.0,
     "frequency": 1.0e5, "ramp_periods": 2.0}
  ],
  "electrodes": [
    {"name": "hot", "box": [[0.2, 0.2, 0.2], [0.2, 0.8, 0.8]], "waveform": "drive"},
    {"name": "return", "box": [[0.8, 0.2, 0.2], [0.8, 0.8, 0.8]], "value": 0.0}
  ],
  "stepper": {"dt": 2.0e-7, "steps": 25, "scheme": "two_step",
              "eqs_tol": 1e-12, "mqs_tol": 1e-12},
  "output": {}
})JSON";

SuiteReport run_conservation_suite(unsigned long seed) {
    (void)seed;
    SuiteReport rep{"conservation", false, {}};
    const Scenario scn = parse_scenario(conservation_scenario_json);

    {
        Simulation sim(scn);
        double max_res = 0.0, min_margin = 1e300;
        for (int n = 0; n < scn.stepper.steps; ++n) {
            sim.step();
            max_res = std::max(max_res, sim.last_diag().conservation_residual);
            if (sim.last_diag().conservation_bound > 0.0)
                min_margin = std::min(min_margin, sim.last_diag().conservation_bound -
                                                      sim.last_diag().conservation_residual);
        }
        add_check(rep, "two_step_residual_bounded", min_margin >= 0.0,
                  "max |G^T M_kappa da| = " + fmt(max_res) + " over " +
                      std::to_string(scn.stepper.steps) + " steps (in-bound margin " +
                      fmt(min_margin) + ")");
    }

    {
        Scenario gs = scn;
        gs.stepper.scheme = Scheme::gauss_seidel;
        gs.stepper.gs_max_sweeps = 4;
        gs.stepper.gs_sweep_tol = 1e-7;
        Simulation sim(gs);
        int max_sweeps_used = 0;
        double max_second_inc = 0.0;
        for (int n = 0; n < gs.stepper.steps; ++n) {
            sim.step();
            max_sweeps_used = std::max(max_sweeps_used, sim.last_diag().sweeps);
            if (!sim.last_diag().sweep_increments.empty()) {
                const auto& inc = sim.last_diag().sweep_increments.front();
                max_second_inc = std::max({max_second_inc, inc[0], inc[1]});
            }
        }
        add_check(rep, "gauss_seidel_second_sweep_noop", max_sweeps_used <= 2,
                  "sweeps converge after " + std::to_string(max_sweeps_used) +
                      " sweeps; max second-sweep increment " + fmt(max_second_inc));
    }

    return rep;
}

const char* convergence_scenario_json = R"JSON({
  "schema": 1,
  "name": "verify-convergence",
  "domain": {"cells": [3, 3, 3], "size": [0.3, 0.3, 0.3]},
  "background": {"kappa": 5.0, "eps_r": 1.0, "mu_r": 1.0},
  "materials": [
    {"name": "block", "box": [[0.0, 0.0, 0.0], [0.3, 0.3, 0.1]],
     "kappa": 500.0, "eps_r": 4.0, "mu_r": 1.0}
  ],
  "boundary": {"wall_phi": "ground"},
  "waveforms": [
    {"name": "drive", "kind": "ramped_sine", "amplitude": 5.0,
     "frequency": 2.0e6, "ramp_periods": 1.0}
  ],
  "electrodes": [
    {"name": "hot", "box": [[0.1, 0.1, 0.1], [0.1, 0.1, 0.1]], "waveform": "drive"}
  ],
  "stepper": {"dt": 2.5e-8, "steps": 8, "scheme": "two_step", "exact_solves": true,
              "eqs_tol": 1e-12, "mqs_tol": 1e-12},
  "output": {}
})JSON";

struct EndState {
    std::vector<double> a;
    std::vector<double> phi;
};

EndState run_to_end(const Scenario& scn) {
    Simulation sim(scn);
    for (int n = 0; n < scn.stepper.steps; ++n) sim.step();
    return {sim.state().a, sim.state().phi_full};
}

double end_state_error(const EndState& x, const EndState& ref) {
    double da = 0.0, na = 0.0, dp = 0.0, np = 0.0;
    for (std::size_t i = 0; i < x.a.size(); ++i) {
        da += (x.a[i] - ref.a[i]) * (x.a[i] - ref.a[i]);
        na += ref.a[i] * ref.a[i];
    }
    for (std::size_t i = 0; i < x.phi.size(); ++i) {
        dp += (x.phi[i] - ref.phi[i]) * (x.phi[i] - ref.phi[i]);
        np += ref.phi[i] * ref.phi[i];
    }
    return std::sqrt(da / na) + std::sqrt(dp / np);
}

SuiteReport run_convergence_suite(unsigned long seed) {
    (void)seed;
    SuiteReport rep{"convergence", false, {}};
    const Scenario base = parse_scenario(convergence_scenario_json);

    Scenario ref_scn = base;
    ref_scn.stepper.dt = base.stepper.dt / 64.0;
    ref_scn.stepper.steps = base.stepper.steps * 64;
    ref_scn.stepper.scheme = Scheme::monolithic;
    const EndState ref = run_to_end(ref_scn);

    std::vector<double> dts, errs;
    for (int halvings = 0; halvings < 3; ++halvings) {
        Scenario s = base;
        s.stepper.dt = base.stepper.dt / (1 << halvings);
        s.stepper.steps = base.stepper.steps * (1 << halvings);
        dts.push_back(s.stepper.dt);
        errs.push_back(end_state_error(run_to_end(s), ref));
    }

    // least-squares slope of ln(err) vs ln(dt)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(dts.size());
    for (int i = 0; i < n; ++i) {
        const double x = std::log(dts[i]), y = std::log(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const bool ok = slope >= 0.8 && slope <= 1.2;
    add_check(rep, "bdf1_order", ok,
              "observed order " + fmt(slope) + " (errors " + fmt(errs[0]) + ", " +
                  fmt(errs[1]) + ", " + fmt(errs[2]) + " vs dt/64 reference)");
    return rep;
}

SuiteReport run_oracle_suite(unsigned long seed) {
    SuiteReport rep{"oracle", false, {}};
    std::mt19937_64 rng(seed);
    const Scenario scn = parse_scenario(convergence_scenario_json);
    Simulation sim(scn);
    const DarwinSystem& sys = sim.system();

    {
        std::normal_distribution<double> dist(0.0, 1.0);
        std::vector<double> b(sys.node_dofs());
        for (double& v : b) v = dist(rng);
        const std::vector<double> x_lu = dense_lu_solve(sys.eqs_matrix(), b);
        std::vector<double> x_cg(b.size(), 0.0);
        CgOptions opt;
        opt.tol = 1e-12;
        const SolveReport r = cg_solve(sys.eqs_matrix(), b, x_cg, opt);
        double diff = 0.0, norm = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) {
            diff += (x_cg[i] - x_lu[i]) * (x_cg[i] - x_lu[i]);
            norm += x_lu[i] * x_lu[i];
        }
        const double rel = std::sqrt(diff / norm);
        add_check(rep, "cg_matches_dense_lu", r.converged && rel < 1e-8,
                  "relative difference " + fmt(rel) + " after " +
                      std::to_string(r.iterations) + " CG iterations");
    }

    {
        Scenario mono_scn = scn;
        mono_scn.stepper.scheme = Scheme::monolithic;
        mono_scn.stepper.steps = 4;
        Scenario ts_scn = scn;
        ts_scn.stepper.steps = 4;
        const EndState mono = run_to_end(mono_scn);
        const EndState ts = run_to_end(ts_scn);
        const double err = end_state_error(ts, mono);
        add_check(rep, "two_step_matches_monolithic", err < 1e-8,
                  "relative trajectory difference " + fmt(err) +
                      " on an everywhere-conducting grounded-wall scenario");
    }

    {
        const GeneralizedEigenResult eig =
            generalized_eigenpairs(sys.curl_curl(), sys.m_sigma());
        double max_res = 0.0;
        const int probe = std::min<int>(5, static_cast<int>(eig.eigenvalues.size()));
        for (int q = 0; q < probe; ++q) {
            const Eigen::VectorXd v = eig.eigenvectors.col(q);
            Eigen::VectorXd kv = to_dense(sys.curl_curl()) * v;
            for (int i = 0; i < kv.size(); ++i)
                kv[i] -= eig.eigenvalues[q] * sys.m_sigma()[i] * v[i];
            max_res = std::max(max_res, kv.cwiseAbs().maxCoeff());
        }
        const double scale = sys.curl_curl().max_abs();
        add_check(rep, "generalized_eigen_residual", max_res <= 1e-8 * scale,
                  "max |K v - lambda M v| = " + fmt(max_res) + " against scale " + fmt(scale));
    }

    {
        Eigen::MatrixXd singular(2, 2);
        singular << 1.0, 2.0, 2.0, 4.0;
        bool threw = false;
        try {
            DenseLuOracle lu(singular);
        } catch (const SolverError&) {
            threw = true;
        }
        add_check(rep, "lu_singularity_detection", threw,
                  "rank-deficient matrix rejected by the dense factorization");
    }

    return rep;
}

void finalize(SuiteReport& rep) {
    rep.passed = true;
    for (const CheckResult& c : rep.checks) rep.passed = rep.passed && c.passed;
}

}  // namespace

SuiteReport verify_suite(const std::string& suite, unsigned long seed) {
    SuiteReport rep;
    if (suite == "operators")
        rep = run_operators_suite(seed);
    else if (suite == "conservation")
        rep = run_conservation_suite(seed);
    else if (suite == "convergence")
        rep = run_convergence_suite(seed);
    else if (suite == "oracle")
        rep = run_oracle_suite(seed);
    else
        throw std::invalid_argument(
            "unknown suite \"" + suite +
            "\" (expected operators, conservation, convergence, oracle or all)");
    finalize(rep);
    return rep;
}

std::vector<SuiteReport> verify_suites(const std::string& suite, unsigned long seed) {
    if (suite == "all") {
        std::vector<SuiteReport> out;
        for (const char* s : {"operators", "conservation", "convergence", "oracle"})
            out.push_back(verify_suite(s, seed));
        return out;
    }
    return {verify_suite(suite, seed)};
}

std::string report_json(const std::vector<SuiteReport>& reports) {
    nlohmann::json root = nlohmann::json::array();
    for (const SuiteReport& rep : reports) {
        nlohmann::json checks = nlohmann::json::array();
        for (const CheckResult& c : rep.checks)
            checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        root.push_back(
            {{"suite", rep.suite}, {"passed", rep.passed}, {"checks", std::move(checks)}});
    }
    return root.dump(2) + "\n";
}

}  // namespace darwin
