#pragma once

#include "vagsim/common/csr.hpp"
#include "vagsim/mesh/mesh.hpp"

#include <cstdint>
#include <vector>

namespace vagsim {

/// Adjacency maps of the VAG scheme. Fracture faces are referred to by their
/// index in Mesh::fracture_faces, never by mesh face id.
struct Connectivity {
    Adjacency cell_nodes;           // V_K, sorted
    Adjacency cell_fracture_faces;  // F_K ∩ F_Γ, sorted
    Adjacency node_cells;           // M_s, sorted
    Adjacency fracture_face_cells;  // M_σ, sorted
    Adjacency fracture_face_nodes;  // V_σ in loop order
    Adjacency node_fracture_faces;  // F_{Γ,s}, sorted
    std::vector<int> face_fracture; // mesh face -> fracture face or -1
    std::vector<std::uint8_t> fracture_node;     // s ∈ V_Γ
    std::vector<std::uint8_t> intersection_node; // s ∈ V_Σ
    std::vector<std::uint8_t> dirichlet_node;    // s ∈ V_D

    int num_cells() const noexcept { return cell_nodes.size(); }
    int num_nodes() const noexcept { return node_cells.size(); }
    int num_fracture_faces() const noexcept { return fracture_face_cells.size(); }
};

Connectivity build_connectivity(const Mesh& mesh);

/// Global degree-of-freedom numbering shared by every module: cells first,
/// then nodes, then fracture faces.
struct DofNumbering {
    int num_cells = 0;
    int num_nodes = 0;
    int num_fracture_faces = 0;

    explicit DofNumbering(const Connectivity& c)
        : num_cells(c.num_cells()), num_nodes(c.num_nodes()), num_fracture_faces(c.num_fracture_faces())
    {
    }
    DofNumbering(int cells, int nodes, int fracture_faces)
        : num_cells(cells), num_nodes(nodes), num_fracture_faces(fracture_faces)
    {
    }
    DofNumbering() = default;

    int size() const noexcept { return num_cells + num_nodes + num_fracture_faces; }
    int cell(int k) const noexcept { return k; }
    int node(int s) const noexcept { return num_cells + s; }
    int fracture_face(int f) const noexcept { return num_cells + num_nodes + f; }
    bool is_cell(int d) const noexcept { return d < num_cells; }
    bool is_node(int d) const noexcept { return d >= num_cells && d < num_cells + num_nodes; }
    bool is_fracture_face(int d) const noexcept { return d >= num_cells + num_nodes; }
    int node_of(int d) const noexcept { return d - num_cells; }
    int fracture_face_of(int d) const noexcept { return d - num_cells - num_nodes; }
};

/// Ξ_K as dof ids: the nodes of K followed by its fracture faces.
std::vector<int> cell_stencil(const Connectivity& conn, const DofNumbering& dofs, int cell);

} // namespace vagsim
