#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace darwin {

enum class Axis : int { x = 0, y = 1, z = 2 };

inline constexpr std::array<Axis, 3> all_axes{Axis::x, Axis::y, Axis::z};
inline int axis_index(Axis a) { return static_cast<int>(a); }

/// Entity kinds of the primal complex. Edges and faces are split by the axis
/// they are aligned with (edge) or normal to (face).
enum class EntityKind : int {
    node = 0,
    edge_x, edge_y, edge_z,
    face_x, face_y, face_z,
    cell,
};

EntityKind edge_kind(Axis a);
EntityKind face_kind(Axis a);
Axis kind_axis(EntityKind k);  // throws for node/cell
bool is_edge(EntityKind k);
bool is_face(EntityKind k);

struct EntityIndex {
    EntityKind kind;
    int i, j, k;
    bool operator==(const EntityIndex&) const = default;
};

/// Tensor-product Cartesian grid with the canonical staggered (primal/dual)
/// layout: potentials on nodes, voltages on edges, fluxes on faces. The dual
/// grid is the half-spacing midpoint lattice; dual cells are clipped at the
/// outer boundary so dual volumes always sum to the primal volume.
///
/// Lexicographic x-fastest ordering everywhere; global edge and face numbers
/// block the x-entities first, then y, then z.
class StaggeredGrid {
public:
    /// Uniform spacing: `cells[a]` cells of length size[a]/cells[a] per axis.
    static StaggeredGrid uniform(const std::array<int, 3>& cells,
                                 const std::array<double, 3>& size,
                                 const std::array<double, 3>& origin = {0, 0, 0});

    /// Explicit node-plane coordinates per axis (strictly increasing, >= 2 each).
    static StaggeredGrid from_planes(std::array<std::vector<double>, 3> planes);

    int nodes(Axis a) const { return static_cast<int>(planes_[axis_index(a)].size()); }
    int cells(Axis a) const { return nodes(a) - 1; }

    long node_count() const;
    long edge_count(Axis a) const;
    long edge_count() const;
    long face_count(Axis a) const;  ///< faces with normal a
    long face_count() const;
    long cell_count() const;
    long count(EntityKind k) const;

    /// Index-space extents (ni, nj, nk) of a given entity kind.
    std::array<int, 3> extents(EntityKind k) const;

    /// Flat index within the kind's block, x-fastest. Bijective with unflatten.
    long flat_index(const EntityIndex& e) const;
    EntityIndex unflatten(EntityKind k, long flat) const;

    /// Global edge/face numbering: x-block, then y-block, then z-block.
    long edge_id(Axis a, int i, int j, int k) const;
    long face_id(Axis a, int i, int j, int k) const;
    long edge_block_offset(Axis a) const;
    long face_block_offset(Axis a) const;

    double plane(Axis a, int i) const { return planes_[axis_index(a)][i]; }
    double spacing(Axis a, int cell) const { return spacing_[axis_index(a)][cell]; }
    /// Dual (half-open midpoint) spacing attached to node i along axis a;
    /// clipped to half a cell at the two boundary nodes.
    double dual_spacing(Axis a, int node) const { return dual_[axis_index(a)][node]; }

    double primal_length(Axis edge_axis, const std::array<int, 3>& ijk) const;
    double primal_area(Axis face_axis, const std::array<int, 3>& ijk) const;
    double cell_volume(const std::array<int, 3>& ijk) const;

    double dual_area(Axis edge_axis, const std::array<int, 3>& ijk) const;
    double dual_length(Axis face_axis, const std::array<int, 3>& ijk) const;
    double dual_volume(const std::array<int, 3>& ijk) const;

    /// Dual measure of the entity: face -> dual length, edge -> dual area,
    /// node -> dual volume. Cells have no dual measure here (throws).
    double dual_measure(const EntityIndex& e) const;

    double total_volume() const;
    std::array<double, 3> origin() const;
    std::array<double, 3> size() const;

    /// Nearest node plane to coordinate x along axis a (ties resolve to the
    /// lower index).
    int snap_plane(Axis a, double x) const;

private:
    explicit StaggeredGrid(std::array<std::vector<double>, 3> planes);
    std::array<std::vector<double>, 3> planes_;
    std::array<std::vector<double>, 3> spacing_;
    std::array<std::vector<double>, 3> dual_;
};

}  // namespace darwin
