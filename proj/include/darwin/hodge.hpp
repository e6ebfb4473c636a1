#pragma once

#include <vector>

#include "darwin/grid.hpp"

namespace darwin {

inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m
inline constexpr double vacuum_permeability = 1.25663706212e-6;  // H/m (4*pi*1e-7)

/// Cell-wise material samples: conductivity kappa (S/m), permittivity eps
/// (F/m), reluctivity nu = 1/mu (m/H). Indexed by cell flat index.
struct MaterialField {
    std::vector<double> kappa;
    std::vector<double> eps;
    std::vector<double> nu;
};

/// Diagonal material (Hodge) matrices of the staggered scheme, stored as the
/// diagonals over the full entity sets:
///   edge entries:  avg(material over adjacent cells, dual-area weighted)
///                  * dual_area / primal_length              (M_kappa, M_eps)
///   face entries:  avg(nu over the 2 adjacent cells, half-length weighted)
///                  * dual_length / primal_area              (M_nu)
/// edge_geom keeps the bare dual_area/primal_length factor so conductivity
/// floors can be applied without re-touching the grid.
struct HodgeMatrices {
    std::vector<double> nu_face;      // F entries
    std::vector<double> kappa_edge;   // E entries
    std::vector<double> eps_edge;     // E entries
    std::vector<double> sigma_edge;   // E entries, filled by combine_sigma
    std::vector<double> edge_geom;    // E entries
    double dt = 0.0;                  // time step baked into sigma_edge
};

HodgeMatrices build_hodge(const StaggeredGrid& grid, const MaterialField& mat);

/// sigma_edge = kappa_edge + eps_edge / dt (the implicit-step conduction+
/// displacement operator). Throws for dt <= 0.
void combine_sigma(HodgeMatrices& hodge, double dt);

/// Copy of kappa_edge with every entry floored at kappa_reg * edge_geom,
/// i.e. a uniform artificial conductivity in non-conducting regions. Entries
/// already above the floor are returned unchanged; kappa_reg = 0 is a no-op.
std::vector<double> regularized_kappa(const HodgeMatrices& hodge, double kappa_reg);

}  // namespace darwin
