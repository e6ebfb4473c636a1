#include "darwin/stepper.hpp"

#include <cmath>
#include <sstream>

namespace darwin {
namespace {

std::vector<int> to_int(const std::vector<long>& v) {
    std::vector<int> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<int>(v[i]);
    return out;
}

double norm_inf(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double norm_2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

/// Sweep increment relative to max(current iterate, trajectory scale).  The
/// trajectory scale (field norm at time n) keeps the measure meaningful when a
/// sinusoidal drive passes through zero and the instantaneous field collapses.
double rel_increment(const std::vector<double>& cur, const std::vector<double>& prev,
                     double trajectory_scale) {
    double diff = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
        const double d = cur[i] - prev[i];
        diff += d * d;
        ref += cur[i] * cur[i];
    }
    const double denom = std::max(std::sqrt(ref), trajectory_scale);
    if (denom == 0.0) return diff == 0.0 ? 0.0 : std::sqrt(diff);
    return std::sqrt(diff) / denom;
}

}  // namespace

DarwinSystem::DarwinSystem(const StaggeredGrid& grid, const IncidenceOperators& ops,
                           const DofMaps& dofs, const HodgeMatrices& hodge,
                           const StepperConfig& config)
    : grid_(&grid), ops_(&ops), dofs_(&dofs), hodge_(&hodge), config_(config) {
    if (!(config_.dt > 0.0))
        throw std::invalid_argument("stepper: dt must be positive");
    n_e_ = dofs.edge_dofs();
    n_n_ = dofs.node_dofs();
    const double dt = config_.dt;

    grad_free_ = ops.gradient.select_rows(to_int(dofs.free_edges));
    grad_ff_ = grad_free_.select_columns(dofs.node_dof, n_n_);
    const IntMatrix curl_free_int = ops.curl.select_columns(dofs.edge_dof, n_e_);
    curl_free_ = curl_free_int.cast<double>();
    grad_all_ = ops.gradient.cast<double>();

    m_kappa_.resize(n_e_);
    m_eps_.resize(n_e_);
    m_sigma_.resize(n_e_);
    m_geom_.resize(n_e_);
    for (int i = 0; i < n_e_; ++i) {
        const long e = dofs.free_edges[i];
        m_kappa_[i] = hodge.kappa_edge[e];
        m_eps_[i] = hodge.eps_edge[e];
        m_geom_[i] = hodge.edge_geom[e];
        m_sigma_[i] = m_kappa_[i] + m_eps_[i] / dt;
    }

    curl_curl_ = normal_product(curl_free_int, hodge.nu_face);
    eqs_matrix_ = normal_product(grad_ff_, m_sigma_);
    std::vector<double> mass_diag(n_e_);
    for (int i = 0; i < n_e_; ++i)
        mass_diag[i] = (m_kappa_[i] + config_.mass_reg * m_geom_[i]) / dt;
    mqs_matrix_ = add_diagonal(curl_curl_, mass_diag);

    // Infinity norm of the interior-node rows of G^T M_kappa, for the
    // charge-conservation abort threshold.
    std::vector<double> col_abs(n_n_, 0.0);
    for (int r = 0; r < grad_ff_.rows(); ++r)
        for (int k = grad_ff_.row_ptr()[r]; k < grad_ff_.row_ptr()[r + 1]; ++k)
            col_abs[grad_ff_.col_idx()[k]] += std::abs(m_kappa_[r]);
    for (int i = 0; i < n_n_; ++i)
        if (dofs.free_node_interior[i]) cons_row_norm_ = std::max(cons_row_norm_, col_abs[i]);

    if (config_.exact_solves) {
        if (n_n_ > 0) eqs_lu_ = std::make_unique<DenseLuOracle>(to_dense(eqs_matrix_));
        if (n_e_ > 0) {
            try {
                mqs_lu_ = std::make_unique<DenseLuOracle>(to_dense(mqs_matrix_));
            } catch (const SolverError& err) {
                throw SolverError(std::string(err.what()) +
                                  " (magneto-quasistatic system: the conductivity mass term "
                                  "vanishes on some free edges; set mass_reg > 0 or keep "
                                  "conductors covering the domain)");
            }
        }
    }
}

const Eigen::MatrixXd& DarwinSystem::monolithic_matrix() const {
    if (mono_matrix_) return *mono_matrix_;
    const double dt = config_.dt;
    const std::vector<double> kappa_reg_full = regularized_kappa(*hodge_, config_.kappa_reg);
    m_kappa_mono_.resize(n_e_);
    m_sigma_mono_.resize(n_e_);
    std::vector<double> kappa_mass(n_e_);
    for (int i = 0; i < n_e_; ++i) {
        m_kappa_mono_[i] = kappa_reg_full[dofs_->free_edges[i]];
        m_sigma_mono_[i] = m_kappa_mono_[i] + m_eps_[i] / dt;
        kappa_mass[i] = m_kappa_mono_[i] + config_.mass_reg * m_geom_[i];
    }

    const int n = n_e_ + n_n_;
    auto mono = std::make_unique<Eigen::MatrixXd>(Eigen::MatrixXd::Zero(n, n));
    Eigen::MatrixXd& m = *mono;
    for (int r = 0; r < curl_curl_.rows(); ++r)
        for (int k = curl_curl_.row_ptr()[r]; k < curl_curl_.row_ptr()[r + 1]; ++k)
            m(r, curl_curl_.col_idx()[k]) += curl_curl_.values()[k];
    for (int e = 0; e < n_e_; ++e) m(e, e) += kappa_mass[e] / dt;
    for (int e = 0; e < n_e_; ++e)
        for (int k = grad_ff_.row_ptr()[e]; k < grad_ff_.row_ptr()[e + 1]; ++k) {
            const int c = grad_ff_.col_idx()[k];
            const double g = static_cast<double>(grad_ff_.values()[k]);
            m(e, n_e_ + c) += m_sigma_mono_[e] * g;            // M_sigma G
            m(n_e_ + c, e) += kappa_mass[e] * g / dt;          // (1/dt) G^T M_kappa
        }
    const SparseMatrix br = normal_product(grad_ff_, m_sigma_mono_);
    for (int r = 0; r < br.rows(); ++r)
        for (int k = br.row_ptr()[r]; k < br.row_ptr()[r + 1]; ++k)
            m(n_e_ + r, n_e_ + br.col_idx()[k]) += br.values()[k];

    mono_matrix_ = std::move(mono);

    // The interior node equations are exactly the discrete divergence of the
    // edge equations (the restricted curl-of-gradient vanishes on interior
    // columns), so the literal block matrix is rank-deficient by one row per
    // interior free node no matter the materials.  The solve path replaces
    // those rows with their unique informative content -- the projected
    // potential equation, i.e. the same row with the vector-potential coupling
    // removed.  Any solution of the modified system satisfies the literal
    // blocks exactly, and the modified system is singular precisely when the
    // (regularized) conductivity matrix is.
    Eigen::MatrixXd solve_m = *mono_matrix_;
    for (int c = 0; c < n_n_; ++c)
        if (dofs_->free_node_interior[c]) solve_m.row(n_e_ + c).head(n_e_).setZero();
    try {
        mono_lu_ = std::make_unique<DenseLuOracle>(std::move(solve_m));
    } catch (const SolverError& err) {
        throw SolverError(std::string(err.what()) +
                          " (monolithic system: the conductivity matrix is singular; "
                          "set kappa_reg > 0 to apply an artificial conductivity floor)");
    }
    return *mono_matrix_;
}

std::vector<double> DarwinSystem::grad_full(const std::vector<double>& phi_full) const {
    std::vector<double> out(n_e_, 0.0);
    for (int r = 0; r < grad_free_.rows(); ++r) {
        double acc = 0.0;
        for (int k = grad_free_.row_ptr()[r]; k < grad_free_.row_ptr()[r + 1]; ++k)
            acc += static_cast<double>(grad_free_.values()[k]) * phi_full[grad_free_.col_idx()[k]];
        out[r] = acc;
    }
    return out;
}

std::vector<double> DarwinSystem::div_free(const std::vector<double>& v_free_edges) const {
    std::vector<double> out(n_n_, 0.0);
    for (int r = 0; r < grad_ff_.rows(); ++r) {
        const double vr = v_free_edges[r];
        if (vr == 0.0) continue;
        for (int k = grad_ff_.row_ptr()[r]; k < grad_ff_.row_ptr()[r + 1]; ++k)
            out[grad_ff_.col_idx()[k]] += static_cast<double>(grad_ff_.values()[k]) * vr;
    }
    return out;
}

std::vector<double> DarwinSystem::restrict_edges(const std::vector<double>& full) const {
    if (full.size() != hodge_->kappa_edge.size())
        throw std::invalid_argument("stepper: edge vector size mismatch");
    std::vector<double> out(n_e_);
    for (int i = 0; i < n_e_; ++i) out[i] = full[dofs_->free_edges[i]];
    return out;
}

std::vector<double> DarwinSystem::restrict_nodes(const std::vector<double>& phi_full) const {
    std::vector<double> out(n_n_);
    for (int i = 0; i < n_n_; ++i) out[i] = phi_full[dofs_->free_nodes[i]];
    return out;
}

std::vector<double> DarwinSystem::embed_phi(const std::vector<double>& phi_free,
                                            const SourceSample& src) const {
    std::vector<double> out(ops_->dirichlet_node.size(), 0.0);
    for (std::size_t node = 0; node < out.size(); ++node)
        if (ops_->dirichlet_node[node]) out[node] = src.dirichlet_phi[node];
    for (int i = 0; i < n_n_; ++i) out[dofs_->free_nodes[i]] = phi_free[i];
    return out;
}

std::vector<double> DarwinSystem::embed_edges(const std::vector<double>& a_free) const {
    std::vector<double> out(hodge_->kappa_edge.size(), 0.0);
    for (int i = 0; i < n_e_; ++i) out[dofs_->free_edges[i]] = a_free[i];
    return out;
}

double DarwinSystem::conservation_residual(const std::vector<double>& a_next,
                                           const std::vector<double>& a_prev) const {
    std::vector<double> v(n_e_);
    for (int i = 0; i < n_e_; ++i) v[i] = m_kappa_[i] * (a_next[i] - a_prev[i]);
    const std::vector<double> d = div_free(v);
    double m = 0.0;
    for (int i = 0; i < n_n_; ++i)
        if (dofs_->free_node_interior[i]) m = std::max(m, std::abs(d[i]));
    return m;
}

std::vector<double> DarwinSystem::solve_spd(const SparseMatrix& a, const DenseLuOracle* lu,
                                            const CgOptions& opt, const std::vector<double>& rhs,
                                            std::vector<double> x0, SolveReport& report) const {
    if (lu != nullptr) {
        std::vector<double> x = lu->solve(rhs);
        const std::vector<double> ax = a.apply(x);
        double rn = 0.0, bn = 0.0;
        for (std::size_t i = 0; i < rhs.size(); ++i) {
            const double r = rhs[i] - ax[i];
            rn += r * r;
            bn += rhs[i] * rhs[i];
        }
        report.iterations = 0;
        report.rel_residual = bn > 0.0 ? std::sqrt(rn / bn) : 0.0;
        report.converged = true;
        report.note = "dense_lu";
        return x;
    }
    report = cg_solve(a, rhs, x0, opt);
    return x0;
}

namespace {
void check_source(const SourceSample& src, std::size_t edges, std::size_t nodes) {
    if (src.j_s.size() != edges || src.dirichlet_phi.size() != nodes)
        throw std::invalid_argument("stepper: source sample size mismatch");
}
}  // namespace

std::vector<double> DarwinSystem::lift_vector(const SourceSample& src) const {
    std::vector<double> lift(ops_->dirichlet_node.size(), 0.0);
    for (std::size_t node = 0; node < lift.size(); ++node)
        if (ops_->dirichlet_node[node]) lift[node] = src.dirichlet_phi[node];
    return lift;
}

std::vector<double> DarwinSystem::eqs_step(const SimState& state, const SourceSample& src_next,
                                           SolveReport& report,
                                           const std::vector<double>* coupling,
                                           const std::vector<double>* warm_phi_full) const {
    check_source(src_next, hodge_->kappa_edge.size(), ops_->dirichlet_node.size());
    const double dt = config_.dt;
    const std::vector<double> g_lift = grad_full(lift_vector(src_next));
    const std::vector<double> g_prev = grad_full(state.phi_full);
    const std::vector<double> js = restrict_edges(src_next.j_s);

    std::vector<double> rhs_edge(n_e_);
    for (int e = 0; e < n_e_; ++e)
        rhs_edge[e] = js[e] + (m_eps_[e] / dt) * g_prev[e] - m_sigma_[e] * g_lift[e];
    std::vector<double> rhs = div_free(rhs_edge);
    if (coupling != nullptr)
        for (int i = 0; i < n_n_; ++i) rhs[i] += (*coupling)[i];

    std::vector<double> x =
        solve_spd(eqs_matrix_, eqs_lu_.get(), config_.eqs_cg, rhs,
                  restrict_nodes(warm_phi_full != nullptr ? *warm_phi_full : state.phi_full),
                  report);
    if (!report.converged)
        throw SolverError("electro-quasistatic solve failed to converge (rel residual " +
                          std::to_string(report.rel_residual) +
                          (report.note.empty() ? "" : ", " + report.note) + ")");
    return x;
}

std::vector<double> DarwinSystem::mqs_step(const SimState& state, const SourceSample& src_next,
                                           const std::vector<double>& phi_next_full,
                                           SolveReport& report,
                                           const std::vector<double>* warm_a) const {
    check_source(src_next, hodge_->kappa_edge.size(), ops_->dirichlet_node.size());
    const double dt = config_.dt;
    const std::vector<double> g_next = grad_full(phi_next_full);
    const std::vector<double> g_prev = grad_full(state.phi_full);
    const std::vector<double> js = restrict_edges(src_next.j_s);

    std::vector<double> rhs(n_e_);
    for (int e = 0; e < n_e_; ++e) {
        const double mass = (m_kappa_[e] + config_.mass_reg * m_geom_[e]) / dt;
        rhs[e] = js[e] + mass * state.a[e] - m_sigma_[e] * g_next[e] +
                 (m_eps_[e] / dt) * g_prev[e];
    }

    std::vector<double> x = solve_spd(mqs_matrix_, mqs_lu_.get(), config_.mqs_cg, rhs,
                                      warm_a != nullptr ? *warm_a : state.a, report);
    if (!report.converged)
        throw SolverError("magneto-quasistatic solve failed to converge (rel residual " +
                          std::to_string(report.rel_residual) +
                          (report.note.empty() ? "" : ", " + report.note) + ")");
    return x;
}

SimState init_state(const DarwinSystem& sys, const SourceSample& src_t0, double t0) {
    SimState zero;
    zero.a.assign(sys.edge_dofs(), 0.0);
    zero.phi_full.assign(src_t0.dirichlet_phi.size(), 0.0);
    zero.time = t0;
    zero.step = 0;
    SolveReport rep;
    const std::vector<double> phi_free = sys.eqs_step(zero, src_t0, rep);
    zero.phi_full = sys.embed_phi(phi_free, src_t0);
    return zero;
}

namespace {

void check_conservation(const DarwinSystem& sys, const SimState& state,
                        const std::vector<double>& a_next, StepDiagnostics& diag) {
    diag.conservation_residual = sys.conservation_residual(a_next, state.a);
    const double tol =
        sys.config().exact_solves ? 1e-12 : sys.config().mqs_cg.tol;
    diag.conservation_bound =
        10.0 * tol * sys.conservation_row_norm() * norm_inf(a_next);
    if (diag.conservation_residual > diag.conservation_bound) {
        std::ostringstream msg;
        msg << "discrete charge conservation violated: |G^T M_kappa da| = "
            << diag.conservation_residual << " exceeds " << diag.conservation_bound
            << " at t = " << state.time + sys.config().dt
            << " (solver tolerances too loose for this scenario)";
        throw SolverError(msg.str());
    }
}

SimState finish(const DarwinSystem& sys, const SimState& state, std::vector<double> a,
                std::vector<double> phi_full) {
    SimState next;
    next.a = std::move(a);
    next.phi_full = std::move(phi_full);
    next.time = state.time + sys.config().dt;
    next.step = state.step + 1;
    return next;
}

}  // namespace

SimState advance_two_step(const DarwinSystem& sys, const SimState& state,
                          const SourceSample& src_next, StepDiagnostics& diag) {
    const std::vector<double> phi_free = sys.eqs_step(state, src_next, diag.eqs);
    const std::vector<double> phi_full = sys.embed_phi(phi_free, src_next);
    const std::vector<double> a_next = sys.mqs_step(state, src_next, phi_full, diag.mqs);
    diag.sweeps = 1;
    check_conservation(sys, state, a_next, diag);
    return finish(sys, state, std::move(a_next), std::move(phi_full));
}

SimState advance_gauss_seidel(const DarwinSystem& sys, const SimState& state,
                              const SourceSample& src_next, StepDiagnostics& diag) {
    const double dt = sys.config().dt;
    const int max_sweeps = sys.config().gs_max_sweeps;
    if (max_sweeps < 1)
        throw std::invalid_argument("stepper: gs_max_sweeps must be >= 1");

    std::vector<double> cur_a = state.a;
    std::vector<double> cur_phi_full = state.phi_full;
    const double phi_scale = norm_2(state.phi_full);
    const double a_scale = norm_2(state.a);
    bool converged = false;
    diag.sweep_increments.clear();

    for (int m = 1; m <= max_sweeps; ++m) {
        std::vector<double> coupling;
        const std::vector<double>* coupling_ptr = nullptr;
        if (m > 1) {
            // Lagged inter-field term -(1/dt) G^T M_kappa (a_{m-1} - a^n); for
            // the first sweep a_{m-1} = a^n makes it exactly zero, so it is
            // skipped and sweep 1 reproduces the two-step scheme bit for bit.
            std::vector<double> v(sys.edge_dofs());
            for (int e = 0; e < sys.edge_dofs(); ++e)
                v[e] = sys.m_kappa()[e] * (cur_a[e] - state.a[e]) / dt;
            coupling = sys.div_free(v);
            for (double& c : coupling) c = -c;
            coupling_ptr = &coupling;
        }

        // BDF1 history comes from state (time n); warm starts track the sweep.
        const std::vector<double> phi_free =
            sys.eqs_step(state, src_next, diag.eqs, coupling_ptr, &cur_phi_full);
        const std::vector<double> phi_full = sys.embed_phi(phi_free, src_next);
        std::vector<double> a_next =
            sys.mqs_step(state, src_next, phi_full, diag.mqs, &cur_a);

        if (m > 1) {
            // Cross-field scale floors keep the measure meaningful when one
            // field is degenerate for the drive at hand (a divergence-free
            // coil source leaves phi exactly zero, an electrode-only drive
            // leaves a near zero). a/dt is an edge voltage, so it is
            // commensurable with phi, and dt*phi with a; increments below the
            // level at which the field can influence e = -da/dt - grad phi
            // count as converged.
            std::vector<double> da(sys.edge_dofs());
            for (int e = 0; e < sys.edge_dofs(); ++e) da[e] = a_next[e] - state.a[e];
            const double phi_floor = std::max(phi_scale, norm_2(da) / dt);
            const double a_floor =
                std::max(a_scale, dt * std::max(norm_2(phi_full), phi_scale));
            diag.sweep_increments.push_back({rel_increment(phi_full, cur_phi_full, phi_floor),
                                             rel_increment(a_next, cur_a, a_floor)});
        }
        cur_phi_full = phi_full;
        cur_a = std::move(a_next);
        diag.sweeps = m;

        if (m > 1) {
            const auto& inc = diag.sweep_increments.back();
            if (inc[0] <= sys.config().gs_sweep_tol && inc[1] <= sys.config().gs_sweep_tol) {
                converged = true;
                break;
            }
        }
    }
    if (!converged && max_sweeps > 1)
        throw SolverError("block Gauss-Seidel sweeps did not converge within " +
                          std::to_string(max_sweeps) + " sweeps");

    check_conservation(sys, state, cur_a, diag);
    return finish(sys, state, std::move(cur_a), std::move(cur_phi_full));
}

SimState advance_monolithic(const DarwinSystem& sys, const SimState& state,
                            const SourceSample& src_next, StepDiagnostics& diag) {
    check_source(src_next, sys.hodge().kappa_edge.size(), state.phi_full.size());
    sys.monolithic_matrix();  // ensure assembly + factorization
    const double dt = sys.config().dt;
    const int n_e = sys.edge_dofs();
    const int n_n = sys.node_dofs();

    const std::vector<double> g_lift = sys.grad_full(sys.lift_vector(src_next));
    const std::vector<double> g_prev = sys.grad_full(state.phi_full);
    const std::vector<double> js = sys.restrict_edges(src_next.j_s);

    std::vector<double> r_edge(n_e), r_edge_static(n_e);
    for (int e = 0; e < n_e; ++e) {
        const double kappa_mass =
            sys.m_kappa_mono_[e] + sys.config().mass_reg * sys.m_geom_[e];
        r_edge_static[e] = js[e] + (sys.m_eps()[e] / dt) * g_prev[e] -
                           sys.m_sigma_mono_[e] * g_lift[e];
        r_edge[e] = r_edge_static[e] + (kappa_mass / dt) * state.a[e];
    }
    const std::vector<double> r_node = sys.div_free(r_edge);
    // Interior node rows of the solve matrix drop the vector-potential
    // coupling (see monolithic_matrix), so their rhs drops the a^n term too.
    const std::vector<double> r_node_static = sys.div_free(r_edge_static);

    std::vector<double> rhs(n_e + n_n);
    std::copy(r_edge.begin(), r_edge.end(), rhs.begin());
    for (int c = 0; c < n_n; ++c)
        rhs[n_e + c] = sys.dofs().free_node_interior[c] ? r_node_static[c] : r_node[c];
    const std::vector<double> sol = sys.mono_lu_->solve(rhs);

    std::vector<double> a_next(sol.begin(), sol.begin() + n_e);
    std::vector<double> phi_free(sol.begin() + n_e, sol.end());
    diag.eqs.note = diag.mqs.note = "monolithic_lu";
    diag.eqs.converged = diag.mqs.converged = true;
    diag.sweeps = 1;
    diag.conservation_residual = sys.conservation_residual(a_next, state.a);
    diag.conservation_bound = 0.0;  // not an identity of the monolithic scheme
    return finish(sys, state, std::move(a_next), sys.embed_phi(phi_free, src_next));
}

SimState advance(const DarwinSystem& sys, const SimState& state,
                 const SourceSample& src_next, StepDiagnostics& diag) {
    switch (sys.config().scheme) {
        case Scheme::two_step:
            return advance_two_step(sys, state, src_next, diag);
        case Scheme::gauss_seidel:
            return advance_gauss_seidel(sys, state, src_next, diag);
        case Scheme::monolithic:
            return advance_monolithic(sys, state, src_next, diag);
    }
    throw std::logic_error("stepper: unknown scheme");
}

Fields reconstruct_fields(const DarwinSystem& sys, const SimState& next,
                          const SimState& prev) {
    const double dt = sys.config().dt;
    Fields f;
    const std::vector<double> a_full_next = sys.embed_edges(next.a);
    const std::vector<double> a_full_prev = sys.embed_edges(prev.a);
    const std::size_t ne_full = a_full_next.size();
    f.e_rem.resize(ne_full);
    for (std::size_t e = 0; e < ne_full; ++e)
        f.e_rem[e] = -(a_full_next[e] - a_full_prev[e]) / dt;
    f.e_irr = sys.grad_all().apply(next.phi_full);
    for (double& v : f.e_irr) v = -v;
    f.e.resize(ne_full);
    for (std::size_t e = 0; e < ne_full; ++e) f.e[e] = f.e_rem[e] + f.e_irr[e];
    f.b = sys.curl_free().apply(next.a);
    return f;
}

std::pair<double, double> energies(const Fields& f, const HodgeMatrices& hodge) {
    double we = 0.0, wm = 0.0;
    for (std::size_t e = 0; e < f.e.size(); ++e) we += hodge.eps_edge[e] * f.e[e] * f.e[e];
    for (std::size_t b = 0; b < f.b.size(); ++b) wm += hodge.nu_face[b] * f.b[b] * f.b[b];
    return {0.5 * we, 0.5 * wm};
}

double div_b_residual(const IncidenceOperators& ops, const std::vector<double>& b) {
    const std::vector<double> d = ops.cell_div.cast<double>().apply(b);
    return norm_inf(d);
}

}  // namespace darwin
