#include "darwin/operators.hpp"

#include <stdexcept>
#include <tuple>

namespace darwin {

namespace {

long node_id(const StaggeredGrid& g, int i, int j, int k) {
    return g.flat_index({EntityKind::node, i, j, k});
}

using Trip = std::tuple<int, int, std::int64_t>;

}  // namespace

IncidenceOperators build_incidence(const StaggeredGrid& grid) {
    IncidenceOperators ops;
    const long n_nodes = grid.node_count();
    const long n_edges = grid.edge_count();
    const long n_faces = grid.face_count();
    const long n_cells = grid.cell_count();

    // Gradient: (G phi)_edge = phi(head) - phi(tail), head one step along the axis.
    {
        std::vector<Trip> t;
        t.reserve(2 * n_edges);
        for (Axis a : all_axes) {
            const auto ext = grid.extents(edge_kind(a));
            for (int k = 0; k < ext[2]; ++k)
                for (int j = 0; j < ext[1]; ++j)
                    for (int i = 0; i < ext[0]; ++i) {
                        const int row = static_cast<int>(grid.edge_id(a, i, j, k));
                        const int di = a == Axis::x ? 1 : 0;
                        const int dj = a == Axis::y ? 1 : 0;
                        const int dk = a == Axis::z ? 1 : 0;
                        t.emplace_back(row, static_cast<int>(node_id(grid, i, j, k)), -1);
                        t.emplace_back(row,
                                       static_cast<int>(node_id(grid, i + di, j + dj, k + dk)),
                                       +1);
                    }
        }
        ops.gradient = IntMatrix::from_triplets(static_cast<int>(n_edges),
                                                static_cast<int>(n_nodes), std::move(t));
    }

    // Curl: circulation around each face, right-hand rule about the face normal.
    {
        std::vector<Trip> t;
        t.reserve(4 * n_faces);
        // x-faces: (curl u)_x = d u_z / d y - d u_y / d z
        {
            const auto ext = grid.extents(EntityKind::face_x);
            for (int k = 0; k < ext[2]; ++k)
                for (int j = 0; j < ext[1]; ++j)
                    for (int i = 0; i < ext[0]; ++i) {
                        const int row = static_cast<int>(grid.face_id(Axis::x, i, j, k));
                        t.emplace_back(row, static_cast<int>(grid.edge_id(Axis::z, i, j + 1, k)), +1);
                        t.emplace_back(row, static_cast<int>(grid.edge_id(Axis::z, i, j, k)), -1);
                        t.emplace_back(row, static_cast<int>(grid.edge_id(Axis::y, i, j, k + 1)), -1);
                        t.emplace_back(row, static_cast<int>(grid.edge_id(Axis::y, i, j, k)), +1);
                    }
        }
        // y-faces: (curl u)_y = d u_x / d z - d u_z / d x
        {
            const auto ext = grid.extents(EntityKind::face_y);
            for (int k = 0; k < ext[2]; ++k)
                for (int j = 0; j < ext[1]; ++j)
                    for (int i = 0; i < ext[0]; ++i) {
                        const int row = static_cast<int>(grid.face_id(Axis::y, i, j, k));
                        t.emplace_back(row, static_cast<int>(grid.edge_id(Axis::x, i, j, k + 1)), +1);
                        t.emplace_back(row, static_cast<int>(grid.edge_id(Axis::x, i, j, k)), -1);
                        t.emplace_back(row, static_cast<int>(grid.edge_id(Axis::z, i + 1, j, k)), -1);
                        t.emplace_back(row, static_cast<int>(grid.edge_id(Axis::z, i, j, k)), +1);
                    }
        }
        // z-faces: (curl u)_z = d u_y / d x - d u_x / d y
        {
            const auto ext = grid.extents(EntityKind::face_z);
            for (int k = 0; k < ext[2]; ++k)
                for (int j = 0; j < ext[1]; ++j)
                    for (int i = 0; i < ext[0]; ++i) {
                        const int row = static_cast<int>(grid.face_id(Axis::z, i, j, k));
                        t.emplace_back(row, static_cast<int>(grid.edge_id(Axis::y, i + 1, j, k)), +1);
                        t.emplace_back(row, static_cast<int>(grid.edge_id(Axis::y, i, j, k)), -1);
                        t.emplace_back(row, static_cast<int>(grid.edge_id(Axis::x, i, j + 1, k)), -1);
                        t.emplace_back(row, static_cast<int>(grid.edge_id(Axis::x, i, j, k)), +1);
                    }
        }
        ops.curl = IntMatrix::from_triplets(static_cast<int>(n_faces),
                                            static_cast<int>(n_edges), std::move(t));
    }

    // Cell divergence: net outward flux through the six faces of each cell.
    {
        std::vector<Trip> t;
        t.reserve(6 * n_cells);
        const auto ext = grid.extents(EntityKind::cell);
        for (int k = 0; k < ext[2]; ++k)
            for (int j = 0; j < ext[1]; ++j)
                for (int i = 0; i < ext[0]; ++i) {
                    const int row =
                        static_cast<int>(grid.flat_index({EntityKind::cell, i, j, k}));
                    t.emplace_back(row, static_cast<int>(grid.face_id(Axis::x, i + 1, j, k)), +1);
                    t.emplace_back(row, static_cast<int>(grid.face_id(Axis::x, i, j, k)), -1);
                    t.emplace_back(row, static_cast<int>(grid.face_id(Axis::y, i, j + 1, k)), +1);
                    t.emplace_back(row, static_cast<int>(grid.face_id(Axis::y, i, j, k)), -1);
                    t.emplace_back(row, static_cast<int>(grid.face_id(Axis::z, i, j, k + 1)), +1);
                    t.emplace_back(row, static_cast<int>(grid.face_id(Axis::z, i, j, k)), -1);
                }
        ops.cell_div = IntMatrix::from_triplets(static_cast<int>(n_cells),
                                                static_cast<int>(n_faces), std::move(t));
    }

    ops.pec_edge.assign(n_edges, 0);
    ops.dirichlet_node.assign(n_nodes, 0);
    ops.electrode_of_node.assign(n_nodes, -1);
    return ops;
}

void apply_boundary_masks(IncidenceOperators& ops, const StaggeredGrid& grid,
                          const BoundaryConfig& bc) {
    const long n_nodes = grid.node_count();
    ops.pec_edge.assign(grid.edge_count(), 0);
    ops.dirichlet_node.assign(n_nodes, 0);
    ops.electrode_of_node.assign(n_nodes, -1);

    // Flux wall: every edge tangential to the outer boundary is eliminated.
    for (Axis a : all_axes) {
        const auto ext = grid.extents(edge_kind(a));
        const Axis t1 = a == Axis::x ? Axis::y : Axis::x;
        const Axis t2 = a == Axis::z ? Axis::y : Axis::z;
        for (int k = 0; k < ext[2]; ++k)
            for (int j = 0; j < ext[1]; ++j)
                for (int i = 0; i < ext[0]; ++i) {
                    const std::array<int, 3> ijk{i, j, k};
                    const int c1 = ijk[axis_index(t1)];
                    const int c2 = ijk[axis_index(t2)];
                    const bool wall = c1 == 0 || c1 == grid.nodes(t1) - 1 ||
                                      c2 == 0 || c2 == grid.nodes(t2) - 1;
                    if (wall) ops.pec_edge[grid.edge_id(a, i, j, k)] = 1;
                }
    }

    if (bc.wall_phi == WallPhi::ground) {
        const int nx = grid.nodes(Axis::x), ny = grid.nodes(Axis::y), nz = grid.nodes(Axis::z);
        for (int k = 0; k < nz; ++k)
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i)
                    if (i == 0 || i == nx - 1 || j == 0 || j == ny - 1 || k == 0 || k == nz - 1)
                        ops.dirichlet_node[node_id(grid, i, j, k)] = 1;
    }

    for (std::size_t e = 0; e < bc.electrodes.size(); ++e) {
        const ElectrodeRegion& el = bc.electrodes[e];
        long claimed = 0;
        for (int a = 0; a < 3; ++a) {
            if (el.node_lo[a] > el.node_hi[a] || el.node_lo[a] < 0 ||
                el.node_hi[a] >= grid.nodes(static_cast<Axis>(a)))
                throw std::invalid_argument("electrode '" + el.name +
                                            "': node box outside the grid");
        }
        for (int k = el.node_lo[2]; k <= el.node_hi[2]; ++k)
            for (int j = el.node_lo[1]; j <= el.node_hi[1]; ++j)
                for (int i = el.node_lo[0]; i <= el.node_hi[0]; ++i) {
                    const long n = node_id(grid, i, j, k);
                    const int prev = ops.electrode_of_node[n];
                    if (prev >= 0 && prev != static_cast<int>(e)) {
                        const ElectrodeRegion& other = bc.electrodes[prev];
                        const bool same = other.waveform == el.waveform &&
                                          other.scale == el.scale && other.value == el.value;
                        if (!same)
                            throw std::invalid_argument(
                                "electrodes '" + other.name + "' and '" + el.name +
                                "' overlap with conflicting potentials");
                    }
                    ops.electrode_of_node[n] = static_cast<int>(e);
                    ops.dirichlet_node[n] = 1;
                    ++claimed;
                }
        if (claimed == 0)
            throw std::invalid_argument("electrode '" + el.name + "': region contains no nodes");
    }
}

DofMaps build_dof_maps(const StaggeredGrid& grid, const IncidenceOperators& ops) {
    DofMaps dofs;
    const long n_edges = grid.edge_count();
    const long n_nodes = grid.node_count();
    dofs.edge_dof.assign(n_edges, -1);
    dofs.node_dof.assign(n_nodes, -1);

    for (long e = 0; e < n_edges; ++e)
        if (!ops.pec_edge[e]) {
            dofs.edge_dof[e] = static_cast<int>(dofs.free_edges.size());
            dofs.free_edges.push_back(e);
        }

    // A node participates only if at least one incident edge kept its DOF.
    std::vector<std::uint8_t> has_free_edge(n_nodes, 0);
    for (long e = 0; e < n_edges; ++e) {
        if (ops.pec_edge[e]) continue;
        const int r = static_cast<int>(e);
        for (int k = ops.gradient.row_ptr()[r]; k < ops.gradient.row_ptr()[r + 1]; ++k)
            has_free_edge[ops.gradient.col_idx()[k]] = 1;
    }

    bool any_dirichlet = false;
    for (long n = 0; n < n_nodes; ++n)
        if (ops.dirichlet_node[n]) any_dirichlet = true;

    const int nx = grid.nodes(Axis::x), ny = grid.nodes(Axis::y), nz = grid.nodes(Axis::z);
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const long n = node_id(grid, i, j, k);
                if (ops.dirichlet_node[n] || !has_free_edge[n]) continue;
                if (!any_dirichlet && dofs.ground_node < 0) {
                    dofs.ground_node = n;  // reference potential for pure-Neumann scenarios
                    continue;
                }
                dofs.node_dof[n] = static_cast<int>(dofs.free_nodes.size());
                dofs.free_nodes.push_back(n);
                const bool wall = i == 0 || i == nx - 1 || j == 0 || j == ny - 1 ||
                                  k == 0 || k == nz - 1;
                dofs.free_node_interior.push_back(wall ? 0 : 1);
            }
    return dofs;
}

}  // namespace darwin
