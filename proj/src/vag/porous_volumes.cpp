#include "vagsim/common/errors.hpp"
#include "vagsim/vag/vag.hpp"

#include <string>

namespace vagsim {

PorousVolumeTable distribute_porous_volumes(const Mesh& mesh, const Connectivity& conn,
                                            const std::vector<double>& phi_matrix,
                                            const std::vector<double>& phi_fracture, double omega)
{
    if (static_cast<int>(phi_matrix.size()) != mesh.num_cells() ||
        static_cast<int>(phi_fracture.size()) != mesh.num_fracture_faces())
        throw ConfigError("porosity: one value per cell and per fracture face is required");
    if (!(omega > 0.0))
        throw ConfigError("volume fraction weight must be positive");

    const DofNumbering dofs(conn);
    PorousVolumeTable t;
    t.phi.assign(dofs.size(), 0.0);
    t.phi_bar.assign(dofs.size(), 0.0);
    t.alpha_cell.assign(conn.cell_nodes.items.size(), 0.0);
    t.alpha_fracture.assign(conn.fracture_face_nodes.items.size(), 0.0);

    for (int k = 0; k < mesh.num_cells(); ++k) {
        const double phi = phi_matrix[k];
        if (!(phi > 0.0 && phi <= 1.0))
            throw ConfigError("matrix porosity of cell " + std::to_string(k) + " is outside (0, 1]");
        const double vol = cell_volume(mesh, k);
        double alpha_sum = 0.0;
        for (int i = conn.cell_nodes.offsets[k]; i < conn.cell_nodes.offsets[k + 1]; ++i) {
            const int s = conn.cell_nodes.items[i];
            if (conn.dirichlet_node[s] || conn.fracture_node[s]) continue;
            t.alpha_cell[i] = omega;
            alpha_sum += omega;
            t.phi[dofs.node(s)] += omega * phi * vol;
            t.phi_bar[dofs.node(s)] += omega * (1.0 - phi) * vol;
        }
        if (alpha_sum > 1.0 + 1e-14)
            throw ConfigError("volume fraction weight too large for cell " + std::to_string(k));
        t.phi[dofs.cell(k)] = (1.0 - alpha_sum) * phi * vol;
        t.phi_bar[dofs.cell(k)] = (1.0 - alpha_sum) * (1.0 - phi) * vol;
        t.pore_volume_total += phi * vol;
    }

    for (int f = 0; f < mesh.num_fracture_faces(); ++f) {
        const double phi = phi_fracture[f];
        if (!(phi > 0.0 && phi <= 1.0))
            throw ConfigError("fracture porosity of fracture face " + std::to_string(f) + " is outside (0, 1]");
        const double vol = mesh.fracture_faces[f].width * face_area(mesh, mesh.fracture_faces[f].face);
        double alpha_sum = 0.0;
        for (int i = conn.fracture_face_nodes.offsets[f]; i < conn.fracture_face_nodes.offsets[f + 1]; ++i) {
            const int s = conn.fracture_face_nodes.items[i];
            if (conn.dirichlet_node[s]) continue;
            t.alpha_fracture[i] = omega;
            alpha_sum += omega;
            t.phi[dofs.node(s)] += omega * phi * vol;
            t.phi_bar[dofs.node(s)] += omega * (1.0 - phi) * vol;
        }
        if (alpha_sum > 1.0 + 1e-14)
            throw ConfigError("volume fraction weight too large for fracture face " + std::to_string(f));
        t.phi[dofs.fracture_face(f)] = (1.0 - alpha_sum) * phi * vol;
        t.phi_bar[dofs.fracture_face(f)] = (1.0 - alpha_sum) * (1.0 - phi) * vol;
        t.pore_volume_total += phi * vol;
    }
    return t;
}

} // namespace vagsim
