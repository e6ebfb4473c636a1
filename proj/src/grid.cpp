#include "darwin/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace darwin {

EntityKind edge_kind(Axis a) {
    return static_cast<EntityKind>(static_cast<int>(EntityKind::edge_x) + axis_index(a));
}

EntityKind face_kind(Axis a) {
    return static_cast<EntityKind>(static_cast<int>(EntityKind::face_x) + axis_index(a));
}

Axis kind_axis(EntityKind k) {
    switch (k) {
        case EntityKind::edge_x: case EntityKind::face_x: return Axis::x;
        case EntityKind::edge_y: case EntityKind::face_y: return Axis::y;
        case EntityKind::edge_z: case EntityKind::face_z: return Axis::z;
        default: throw std::invalid_argument("kind_axis: entity kind has no axis");
    }
}

bool is_edge(EntityKind k) {
    return k == EntityKind::edge_x || k == EntityKind::edge_y || k == EntityKind::edge_z;
}

bool is_face(EntityKind k) {
    return k == EntityKind::face_x || k == EntityKind::face_y || k == EntityKind::face_z;
}

StaggeredGrid::StaggeredGrid(std::array<std::vector<double>, 3> planes)
    : planes_(std::move(planes)) {
    for (int a = 0; a < 3; ++a) {
        const auto& p = planes_[a];
        if (p.size() < 2)
            throw std::invalid_argument("grid: need at least 2 node planes per axis");
        spacing_[a].resize(p.size() - 1);
        for (std::size_t i = 0; i + 1 < p.size(); ++i) {
            const double h = p[i + 1] - p[i];
            if (!(h > 0.0) || !std::isfinite(h))
                throw std::invalid_argument("grid: node planes must be strictly increasing");
            spacing_[a][i] = h;
        }
        // Clipped dual spacings: half a cell on each side, half only at the wall.
        dual_[a].resize(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double lo = i > 0 ? 0.5 * spacing_[a][i - 1] : 0.0;
            const double hi = i + 1 < p.size() ? 0.5 * spacing_[a][i] : 0.0;
            dual_[a][i] = lo + hi;
        }
    }
}

StaggeredGrid StaggeredGrid::uniform(const std::array<int, 3>& cells,
                                     const std::array<double, 3>& size,
                                     const std::array<double, 3>& origin) {
    std::array<std::vector<double>, 3> planes;
    for (int a = 0; a < 3; ++a) {
        if (cells[a] < 1) throw std::invalid_argument("grid: need at least 1 cell per axis");
        if (!(size[a] > 0.0)) throw std::invalid_argument("grid: domain size must be positive");
        planes[a].resize(cells[a] + 1);
        for (int i = 0; i <= cells[a]; ++i)
            planes[a][i] = origin[a] + size[a] * static_cast<double>(i) / cells[a];
    }
    return StaggeredGrid(std::move(planes));
}

StaggeredGrid StaggeredGrid::from_planes(std::array<std::vector<double>, 3> planes) {
    return StaggeredGrid(std::move(planes));
}

long StaggeredGrid::node_count() const {
    return static_cast<long>(nodes(Axis::x)) * nodes(Axis::y) * nodes(Axis::z);
}

long StaggeredGrid::edge_count(Axis a) const {
    const auto e = extents(edge_kind(a));
    return static_cast<long>(e[0]) * e[1] * e[2];
}

long StaggeredGrid::edge_count() const {
    return edge_count(Axis::x) + edge_count(Axis::y) + edge_count(Axis::z);
}

long StaggeredGrid::face_count(Axis a) const {
    const auto e = extents(face_kind(a));
    return static_cast<long>(e[0]) * e[1] * e[2];
}

long StaggeredGrid::face_count() const {
    return face_count(Axis::x) + face_count(Axis::y) + face_count(Axis::z);
}

long StaggeredGrid::cell_count() const {
    return static_cast<long>(cells(Axis::x)) * cells(Axis::y) * cells(Axis::z);
}

long StaggeredGrid::count(EntityKind k) const {
    const auto e = extents(k);
    return static_cast<long>(e[0]) * e[1] * e[2];
}

std::array<int, 3> StaggeredGrid::extents(EntityKind k) const {
    const int nx = nodes(Axis::x), ny = nodes(Axis::y), nz = nodes(Axis::z);
    switch (k) {
        case EntityKind::node:   return {nx, ny, nz};
        case EntityKind::edge_x: return {nx - 1, ny, nz};
        case EntityKind::edge_y: return {nx, ny - 1, nz};
        case EntityKind::edge_z: return {nx, ny, nz - 1};
        case EntityKind::face_x: return {nx, ny - 1, nz - 1};
        case EntityKind::face_y: return {nx - 1, ny, nz - 1};
        case EntityKind::face_z: return {nx - 1, ny - 1, nz};
        case EntityKind::cell:   return {nx - 1, ny - 1, nz - 1};
    }
    throw std::invalid_argument("grid: unknown entity kind");
}

long StaggeredGrid::flat_index(const EntityIndex& e) const {
    const auto ext = extents(e.kind);
    if (e.i < 0 || e.i >= ext[0] || e.j < 0 || e.j >= ext[1] || e.k < 0 || e.k >= ext[2])
        throw std::out_of_range("grid: entity index out of range");
    return e.i + static_cast<long>(ext[0]) * (e.j + static_cast<long>(ext[1]) * e.k);
}

EntityIndex StaggeredGrid::unflatten(EntityKind k, long flat) const {
    const auto ext = extents(k);
    const long n = static_cast<long>(ext[0]) * ext[1] * ext[2];
    if (flat < 0 || flat >= n) throw std::out_of_range("grid: flat index out of range");
    const int i = static_cast<int>(flat % ext[0]);
    const int j = static_cast<int>((flat / ext[0]) % ext[1]);
    const int kk = static_cast<int>(flat / (static_cast<long>(ext[0]) * ext[1]));
    return {k, i, j, kk};
}

long StaggeredGrid::edge_block_offset(Axis a) const {
    long off = 0;
    for (int b = 0; b < axis_index(a); ++b) off += edge_count(static_cast<Axis>(b));
    return off;
}

long StaggeredGrid::face_block_offset(Axis a) const {
    long off = 0;
    for (int b = 0; b < axis_index(a); ++b) off += face_count(static_cast<Axis>(b));
    return off;
}

long StaggeredGrid::edge_id(Axis a, int i, int j, int k) const {
    return edge_block_offset(a) + flat_index({edge_kind(a), i, j, k});
}

long StaggeredGrid::face_id(Axis a, int i, int j, int k) const {
    return face_block_offset(a) + flat_index({face_kind(a), i, j, k});
}

double StaggeredGrid::primal_length(Axis edge_axis, const std::array<int, 3>& ijk) const {
    return spacing(edge_axis, ijk[axis_index(edge_axis)]);
}

double StaggeredGrid::primal_area(Axis face_axis, const std::array<int, 3>& ijk) const {
    double area = 1.0;
    for (Axis t : all_axes)
        if (t != face_axis) area *= spacing(t, ijk[axis_index(t)]);
    return area;
}

double StaggeredGrid::cell_volume(const std::array<int, 3>& ijk) const {
    return spacing(Axis::x, ijk[0]) * spacing(Axis::y, ijk[1]) * spacing(Axis::z, ijk[2]);
}

double StaggeredGrid::dual_area(Axis edge_axis, const std::array<int, 3>& ijk) const {
    double area = 1.0;
    for (Axis t : all_axes)
        if (t != edge_axis) area *= dual_spacing(t, ijk[axis_index(t)]);
    return area;
}

double StaggeredGrid::dual_length(Axis face_axis, const std::array<int, 3>& ijk) const {
    return dual_spacing(face_axis, ijk[axis_index(face_axis)]);
}

double StaggeredGrid::dual_volume(const std::array<int, 3>& ijk) const {
    return dual_spacing(Axis::x, ijk[0]) * dual_spacing(Axis::y, ijk[1]) *
           dual_spacing(Axis::z, ijk[2]);
}

double StaggeredGrid::dual_measure(const EntityIndex& e) const {
    flat_index(e);  // range check
    const std::array<int, 3> ijk{e.i, e.j, e.k};
    if (e.kind == EntityKind::node) return dual_volume(ijk);
    if (is_edge(e.kind)) return dual_area(kind_axis(e.kind), ijk);
    if (is_face(e.kind)) return dual_length(kind_axis(e.kind), ijk);
    throw std::invalid_argument("grid: cells have no dual measure");
}

double StaggeredGrid::total_volume() const {
    double v = 1.0;
    for (Axis a : all_axes)
        v *= planes_[axis_index(a)].back() - planes_[axis_index(a)].front();
    return v;
}

std::array<double, 3> StaggeredGrid::origin() const {
    return {planes_[0].front(), planes_[1].front(), planes_[2].front()};
}

std::array<double, 3> StaggeredGrid::size() const {
    return {planes_[0].back() - planes_[0].front(),
            planes_[1].back() - planes_[1].front(),
            planes_[2].back() - planes_[2].front()};
}

int StaggeredGrid::snap_plane(Axis a, double x) const {
    const auto& p = planes_[axis_index(a)];
    int best = 0;
    double best_d = std::abs(x - p[0]);
    for (std::size_t i = 1; i < p.size(); ++i) {
        const double d = std::abs(x - p[i]);
        if (d < best_d) {  // strict: ties keep the lower index
            best = static_cast<int>(i);
            best_d = d;
        }
    }
    return best;
}

}  // namespace darwin
