#include "darwin/hodge.hpp"

#include <stdexcept>

namespace darwin {

namespace {

long cell_id(const StaggeredGrid& g, int i, int j, int k) {
    return g.flat_index({EntityKind::cell, i, j, k});
}

}  // namespace

HodgeMatrices build_hodge(const StaggeredGrid& grid, const MaterialField& mat) {
    const long n_cells = grid.cell_count();
    if (static_cast<long>(mat.kappa.size()) != n_cells ||
        static_cast<long>(mat.eps.size()) != n_cells ||
        static_cast<long>(mat.nu.size()) != n_cells)
        throw std::invalid_argument("hodge: material arrays must have one entry per cell");
    for (long c = 0; c < n_cells; ++c) {
        if (mat.kappa[c] < 0.0) throw std::invalid_argument("hodge: kappa must be >= 0");
        if (!(mat.eps[c] > 0.0)) throw std::invalid_argument("hodge: eps must be > 0");
        if (!(mat.nu[c] > 0.0)) throw std::invalid_argument("hodge: nu must be > 0");
    }

    HodgeMatrices h;
    h.kappa_edge.assign(grid.edge_count(), 0.0);
    h.eps_edge.assign(grid.edge_count(), 0.0);
    h.edge_geom.assign(grid.edge_count(), 0.0);
    h.nu_face.assign(grid.face_count(), 0.0);

    // Edge entries: the edge's dual area is split into up to four quarter
    // patches, one per adjacent cell; each patch contributes its cell material
    // weighted by the patch area.
    for (Axis a : all_axes) {
        const Axis t1 = a == Axis::x ? Axis::y : Axis::x;
        const Axis t2 = a == Axis::z ? Axis::y : Axis::z;
        const auto ext = grid.extents(edge_kind(a));
        for (int k = 0; k < ext[2]; ++k)
            for (int j = 0; j < ext[1]; ++j)
                for (int i = 0; i < ext[0]; ++i) {
                    const std::array<int, 3> ijk{i, j, k};
                    const long e = grid.edge_id(a, i, j, k);
                    const double len = grid.primal_length(a, ijk);
                    const int c1 = ijk[axis_index(t1)];
                    const int c2 = ijk[axis_index(t2)];
                    double kappa_sum = 0.0, eps_sum = 0.0, area_sum = 0.0;
                    for (int d1 = -1; d1 <= 0; ++d1)
                        for (int d2 = -1; d2 <= 0; ++d2) {
                            const int u1 = c1 + d1, u2 = c2 + d2;
                            if (u1 < 0 || u1 >= grid.cells(t1)) continue;
                            if (u2 < 0 || u2 >= grid.cells(t2)) continue;
                            std::array<int, 3> cc{};
                            cc[axis_index(a)] = ijk[axis_index(a)];
                            cc[axis_index(t1)] = u1;
                            cc[axis_index(t2)] = u2;
                            const double w = 0.25 * grid.spacing(t1, u1) * grid.spacing(t2, u2);
                            const long c = cell_id(grid, cc[0], cc[1], cc[2]);
                            kappa_sum += mat.kappa[c] * w;
                            eps_sum += mat.eps[c] * w;
                            area_sum += w;
                        }
                    h.kappa_edge[e] = kappa_sum / len;
                    h.eps_edge[e] = eps_sum / len;
                    h.edge_geom[e] = area_sum / len;
                }
    }

    // Face entries: the dual edge pierces the face and sees the two adjacent
    // cells in series; reluctances add, i.e. nu averages arithmetically with
    // half-length weights (equivalently mu averages harmonically).
    for (Axis a : all_axes) {
        const auto ext = grid.extents(face_kind(a));
        for (int k = 0; k < ext[2]; ++k)
            for (int j = 0; j < ext[1]; ++j)
                for (int i = 0; i < ext[0]; ++i) {
                    const std::array<int, 3> ijk{i, j, k};
                    const long f = grid.face_id(a, i, j, k);
                    const double area = grid.primal_area(a, ijk);
                    const int ca = ijk[axis_index(a)];
                    double nu_sum = 0.0;
                    for (int d = -1; d <= 0; ++d) {
                        const int u = ca + d;
                        if (u < 0 || u >= grid.cells(a)) continue;
                        std::array<int, 3> cc = ijk;
                        cc[axis_index(a)] = u;
                        const double w = 0.5 * grid.spacing(a, u);
                        nu_sum += mat.nu[cell_id(grid, cc[0], cc[1], cc[2])] * w;
                    }
                    h.nu_face[f] = nu_sum / area;
                }
    }
    return h;
}

void combine_sigma(HodgeMatrices& hodge, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("combine_sigma: dt must be > 0");
    hodge.dt = dt;
    hodge.sigma_edge.resize(hodge.kappa_edge.size());
    for (std::size_t e = 0; e < hodge.kappa_edge.size(); ++e)
        hodge.sigma_edge[e] = hodge.kappa_edge[e] + hodge.eps_edge[e] / dt;
}

std::vector<double> regularized_kappa(const HodgeMatrices& hodge, double kappa_reg) {
    if (kappa_reg < 0.0) throw std::invalid_argument("regularized_kappa: negative floor");
    std::vector<double> out = hodge.kappa_edge;
    if (kappa_reg == 0.0) return out;
    for (std::size_t e = 0; e < out.size(); ++e) {
        const double floor = kappa_reg * hodge.edge_geom[e];
        if (out[e] < floor) out[e] = floor;
    }
    return out;
}

}  // namespace darwin
