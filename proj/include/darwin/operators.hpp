#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "darwin/grid.hpp"
#include "darwin/sparse.hpp"

namespace darwin {

/// Outer-wall treatment for the scalar potential. The vector potential always
/// gets the flux-wall condition (tangential A = 0 on outer-wall edges).
///   natural: wall nodes keep free phi DOFs (homogeneous natural condition);
///   ground:  all wall nodes are held at phi = 0 (wall galvanically grounded).
enum class WallPhi { natural, ground };

struct ElectrodeRegion {
    std::string name;
    std::array<int, 3> node_lo{};  // inclusive node-index box
    std::array<int, 3> node_hi{};
    int waveform = -1;             // waveform table id, -1 = constant value
    double scale = 1.0;
    double value = 0.0;            // constant potential when waveform == -1
};

struct BoundaryConfig {
    WallPhi wall_phi = WallPhi::natural;
    std::vector<ElectrodeRegion> electrodes;
};

/// Integer incidence operators of the primal complex plus boundary masks.
/// gradient: edges x nodes (one +1 at the head node, one -1 at the tail);
/// curl: faces x edges (right-hand rule around each face normal);
/// cell_div: cells x faces (outward flux balance). curl*gradient = 0 and
/// cell_div*curl = 0 hold exactly in integer arithmetic.
struct IncidenceOperators {
    IntMatrix gradient;
    IntMatrix curl;
    IntMatrix cell_div;
    std::vector<std::uint8_t> pec_edge;        // tangential outer-wall edges
    std::vector<std::uint8_t> dirichlet_node;  // electrode / grounded-wall nodes
    std::vector<int> electrode_of_node;        // electrode index per node, -1 none
};

IncidenceOperators build_incidence(const StaggeredGrid& grid);

/// Fills the masks from the wall rule and electrode regions.
/// Throws std::invalid_argument for empty electrode boxes, out-of-range boxes,
/// or overlapping electrodes whose potentials conflict.
void apply_boundary_masks(IncidenceOperators& ops, const StaggeredGrid& grid,
                          const BoundaryConfig& bc);

/// Free-DOF numbering after mask elimination. Edges drop the PEC set; nodes
/// drop Dirichlet nodes, nodes with no free incident edge (the box-frame nodes
/// under the default mask, whose potential couples to nothing), and one ground
/// node when the scenario defines no Dirichlet node at all (keeps the
/// electro-quasistatic operator positive definite).
struct DofMaps {
    std::vector<int> edge_dof;             // edge id -> free index or -1
    std::vector<int> node_dof;             // node id -> free index or -1
    std::vector<long> free_edges;          // inverse maps
    std::vector<long> free_nodes;
    std::vector<std::uint8_t> free_node_interior;  // free node not on the wall
    long ground_node = -1;
    int edge_dofs() const { return static_cast<int>(free_edges.size()); }
    int node_dofs() const { return static_cast<int>(free_nodes.size()); }
};

DofMaps build_dof_maps(const StaggeredGrid& grid, const IncidenceOperators& ops);

}  // namespace darwin
