#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "darwin/grid.hpp"
#include "darwin/hodge.hpp"
#include "darwin/operators.hpp"
#include "darwin/solver.hpp"
#include "darwin/sparse.hpp"

namespace darwin {

/// Time integration schemes. two_step solves the electro-quasistatic (EQS)
/// potential system and then the magneto-quasistatic (MQS) vector-potential
/// system once per step; gauss_seidel iterates that pair as a block sweep with
/// the inter-field coupling term on the right-hand side; monolithic solves the
/// full coupled block system with dense LU (reference/oracle path).
enum class Scheme { two_step, gauss_seidel, monolithic };

/// Per-step source data sampled from the scenario at a given time.
struct SourceSample {
    std::vector<double> j_s;            // source current per edge (full set), A
    std::vector<double> dirichlet_phi;  // prescribed potential per node (full set), V
};

struct StepperConfig {
    double dt = 0.0;
    Scheme scheme = Scheme::two_step;
    CgOptions eqs_cg;
    CgOptions mqs_cg;
    int gs_max_sweeps = 8;
    double gs_sweep_tol = 1e-8;
    double kappa_reg = 0.0;   // artificial conductivity floor, monolithic path only
    double mass_reg = 0.0;    // optional (1/dt)*mass_reg*geom regularization of the MQS block
    bool exact_solves = false;  // dense-LU subsystem solves instead of CG
};

/// Discrete state: line-integrated vector potential on free edges and the
/// scalar potential on all nodes (prescribed electrode values embedded).
struct SimState {
    std::vector<double> a;
    std::vector<double> phi_full;
    double time = 0.0;
    int step = 0;
};

struct StepDiagnostics {
    SolveReport eqs;
    SolveReport mqs;
    double conservation_residual = 0.0;  // max interior |G^T M_kappa (a^{n+1}-a^n)|
    double conservation_bound = 0.0;     // abort threshold (0 = not enforced)
    int sweeps = 1;
    std::vector<std::array<double, 2>> sweep_increments;  // per sweep: rel (phi, a)
};

/// Reconstructed physical fields on the full entity sets.
/// e = e_rem + e_irr with e_rem = -(a^{n+1}-a^n)/dt and e_irr = -grad phi^{n+1}
/// (edge voltages, V); b = curl a (face fluxes, Wb).
struct Fields {
    std::vector<double> e, e_irr, e_rem;  // per edge
    std::vector<double> b;                // per face
};

/// Assembled Darwin operators on the free DOFs. The referenced grid, incidence
/// operators, DOF maps and Hodge matrices must outlive this object.
///
/// eqs_matrix = G^T M_sigma G and mqs_matrix = C^T M_nu C + (1/dt) M_kappa,
/// both restricted to free DOFs; the gradient is restricted to free edges on
/// both sides, which is what keeps the restricted div(curl .) identically zero
/// on interior-node rows (the discrete charge-conservation mechanism).
class DarwinSystem {
public:
    DarwinSystem(const StaggeredGrid& grid, const IncidenceOperators& ops,
                 const DofMaps& dofs, const HodgeMatrices& hodge,
                 const StepperConfig& config);

    int edge_dofs() const { return n_e_; }
    int node_dofs() const { return n_n_; }
    const StepperConfig& config() const { return config_; }
    const SparseMatrix& eqs_matrix() const { return eqs_matrix_; }
    const SparseMatrix& mqs_matrix() const { return mqs_matrix_; }
    const SparseMatrix& curl_curl() const { return curl_curl_; }
    const std::vector<double>& m_kappa() const { return m_kappa_; }
    const std::vector<double>& m_eps() const { return m_eps_; }
    const std::vector<double>& m_sigma() const { return m_sigma_; }
    const SparseMatrix& grad_all() const { return grad_all_; }
    const SparseMatrix& curl_free() const { return curl_free_; }
    const DofMaps& dofs() const { return *dofs_; }
    const StaggeredGrid& grid() const { return *grid_; }
    const HodgeMatrices& hodge() const { return *hodge_; }

    /// Monolithic block matrix in Eq-(8) layout, [[A_mqs, M_sigma G],
    /// [(1/dt) G^T M_kappa, G^T M_sigma G]], with the regularized conductivity.
    const Eigen::MatrixXd& monolithic_matrix() const;

    // -- restricted operator applications -------------------------------------
    std::vector<double> grad_full(const std::vector<double>& phi_full) const;
    std::vector<double> div_free(const std::vector<double>& v_free_edges) const;
    std::vector<double> restrict_edges(const std::vector<double>& full) const;
    std::vector<double> restrict_nodes(const std::vector<double>& phi_full) const;
    std::vector<double> embed_phi(const std::vector<double>& phi_free,
                                  const SourceSample& src) const;
    std::vector<double> embed_edges(const std::vector<double>& a_free) const;

    /// Interior-node rows of G^T M_kappa (a_next - a_prev), infinity norm.
    double conservation_residual(const std::vector<double>& a_next,
                                 const std::vector<double>& a_prev) const;
    double conservation_row_norm() const { return cons_row_norm_; }

    // -- solver steps ----------------------------------------------------------
    /// EQS solve for phi at t+dt. The BDF1 history terms read state (time n).
    /// `coupling` (optional, free-node sized) is added to the right-hand side;
    /// the Gauss-Seidel sweeps pass the lagged -(1/dt) G^T M_kappa (a_m - a^n)
    /// term through it. `warm_phi_full` (optional) overrides the CG starting
    /// guess, which otherwise is the potential from state.
    std::vector<double> eqs_step(const SimState& state, const SourceSample& src_next,
                                 SolveReport& report,
                                 const std::vector<double>* coupling = nullptr,
                                 const std::vector<double>* warm_phi_full = nullptr) const;

    /// MQS solve for a at t+dt given the already-updated full potential.
    /// `warm_a` (optional) overrides the CG starting guess (default: a from
    /// state, the scheme's a^n warm start).
    std::vector<double> mqs_step(const SimState& state, const SourceSample& src_next,
                                 const std::vector<double>& phi_next_full,
                                 SolveReport& report,
                                 const std::vector<double>* warm_a = nullptr) const;

private:
    friend SimState advance_monolithic(const DarwinSystem&, const SimState&,
                                       const SourceSample&, StepDiagnostics&);
    std::vector<double> solve_spd(const SparseMatrix& m, const DenseLuOracle* lu,
                                  const CgOptions& opt, const std::vector<double>& rhs,
                                  std::vector<double> x0, SolveReport& report) const;
    std::vector<double> lift_vector(const SourceSample& src) const;

    const StaggeredGrid* grid_;
    const IncidenceOperators* ops_;
    const DofMaps* dofs_;
    const HodgeMatrices* hodge_;
    StepperConfig config_;
    int n_e_ = 0, n_n_ = 0;

    IntMatrix grad_free_;   // free edges x all nodes
    IntMatrix grad_ff_;     // free edges x free nodes
    SparseMatrix curl_free_;  // all faces x free edges
    SparseMatrix grad_all_;   // all edges x all nodes (field reconstruction)
    std::vector<double> m_kappa_, m_eps_, m_sigma_, m_geom_;  // free-edge diagonals
    SparseMatrix curl_curl_, eqs_matrix_, mqs_matrix_;
    double cons_row_norm_ = 0.0;

    std::unique_ptr<DenseLuOracle> eqs_lu_, mqs_lu_;
    mutable std::unique_ptr<Eigen::MatrixXd> mono_matrix_;
    mutable std::unique_ptr<DenseLuOracle> mono_lu_;
    mutable std::vector<double> m_kappa_mono_, m_sigma_mono_;
};

/// Initial state: a = 0 and phi from a static EQS solve against the drive
/// values at t0 (zero drive gives the all-zero state).
SimState init_state(const DarwinSystem& sys, const SourceSample& src_t0, double t0 = 0.0);

SimState advance_two_step(const DarwinSystem& sys, const SimState& state,
                          const SourceSample& src_next, StepDiagnostics& diag);

SimState advance_gauss_seidel(const DarwinSystem& sys, const SimState& state,
                              const SourceSample& src_next, StepDiagnostics& diag);

SimState advance_monolithic(const DarwinSystem& sys, const SimState& state,
                            const SourceSample& src_next, StepDiagnostics& diag);

/// Scheme dispatch.
SimState advance(const DarwinSystem& sys, const SimState& state,
                 const SourceSample& src_next, StepDiagnostics& diag);

Fields reconstruct_fields(const DarwinSystem& sys, const SimState& next,
                          const SimState& prev);

/// Field energies over the full entity sets:
/// W_e = 1/2 e^T M_eps e, W_m = 1/2 b^T M_nu b (J).
std::pair<double, double> energies(const Fields& f, const HodgeMatrices& hodge);

/// Cell-wise residual of the divergence-free constraint on b = curl a
/// (infinity norm; exact zero up to rounding by the mimetic identity).
double div_b_residual(const IncidenceOperators& ops, const std::vector<double>& b);

}  // namespace darwin
