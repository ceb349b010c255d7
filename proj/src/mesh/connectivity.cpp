#include "vagsim/mesh/connectivity.hpp"

#include <algorithm>
#include <set>

namespace vagsim {

namespace {

Adjacency transpose(const Adjacency& a, int ncols)
{
    std::vector<std::vector<int>> lists(ncols);
    for (int i = 0; i < a.size(); ++i)
        for (int j : a[i])
            lists[j].push_back(i);
    return Adjacency::from_lists(lists);
}

} // namespace

Connectivity build_connectivity(const Mesh& mesh)
{
    Connectivity c;
    const int nn = mesh.num_nodes();
    const int nfrac = mesh.num_fracture_faces();

    c.face_fracture.assign(mesh.num_faces(), -1);
    for (int i = 0; i < nfrac; ++i)
        c.face_fracture[mesh.fracture_faces[i].face] = i;

    std::vector<int> nodes, fracs;
    for (int k = 0; k < mesh.num_cells(); ++k) {
        nodes.clear();
        fracs.clear();
        for (int f : mesh.cells[k].faces) {
            const auto& fn = mesh.faces[f].nodes;
            nodes.insert(nodes.end(), fn.begin(), fn.end());
            if (c.face_fracture[f] >= 0) fracs.push_back(c.face_fracture[f]);
        }
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
        std::sort(fracs.begin(), fracs.end());
        c.cell_nodes.push_row(nodes);
        c.cell_fracture_faces.push_row(fracs);
    }
    c.node_cells = transpose(c.cell_nodes, nn);
    c.fracture_face_cells = transpose(c.cell_fracture_faces, nfrac);

    for (int i = 0; i < nfrac; ++i)
        c.fracture_face_nodes.push_row(mesh.faces[mesh.fracture_faces[i].face].nodes);
    c.node_fracture_faces = transpose(c.fracture_face_nodes, nn);

    c.fracture_node.assign(nn, 0);
    c.intersection_node.assign(nn, 0);
    std::set<int> ids;
    for (int s = 0; s < nn; ++s) {
        if (c.node_fracture_faces.degree(s) == 0) continue;
        c.fracture_node[s] = 1;
        ids.clear();
        for (int f : c.node_fracture_faces[s])
            ids.insert(mesh.fracture_faces[f].fracture);
        c.intersection_node[s] = ids.size() >= 2;
    }

    c.dirichlet_node.assign(nn, 0);
    for (int s = 0; s < static_cast<int>(mesh.node_tags.size()); ++s)
        c.dirichlet_node[s] = mesh.node_tags[s] == BoundaryTag::dirichlet_matrix ||
                              mesh.node_tags[s] == BoundaryTag::dirichlet_fracture;
    return c;
}

std::vector<int> cell_stencil(const Connectivity& conn, const DofNumbering& dofs, int cell)
{
    std::vector<int> xi;
    xi.reserve(conn.cell_nodes.degree(cell) + conn.cell_fracture_faces.degree(cell));
    for (int s : conn.cell_nodes[cell])
        xi.push_back(dofs.node(s));
    for (int f : conn.cell_fracture_faces[cell])
        xi.push_back(dofs.fracture_face(f));
    return xi;
}

} // namespace vagsim
