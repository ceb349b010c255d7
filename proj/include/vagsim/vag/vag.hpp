#pragma once

#include "vagsim/mesh/connectivity.hpp"
#include "vagsim/mesh/mesh.hpp"

#include <Eigen/Dense>

#include <vector>

namespace vagsim {

/// T_K over Ξ_K in the order of cell_stencil(): nodes of K, then its
/// fracture faces. A cell's P1 stiffness restricted to its boundary dofs.
Eigen::MatrixXd compute_cell_transmissibility(const Mesh& mesh, const Connectivity& conn, int cell,
                                              const Mat3& lambda);

/// Orthonormal tangent basis (t1, t2) of a fracture face, columns of the result.
Eigen::Matrix<double, 3, 2> fracture_face_frame(const Mesh& mesh, int face);

/// T_σ over V_σ in face-loop order, for diffusion width * lambda_t where
/// lambda_t is expressed in fracture_face_frame().
Eigen::MatrixXd compute_fracture_transmissibility(const Mesh& mesh, int face, double width,
                                                  const Eigen::Matrix2d& lambda_t);

/// Transmissibilities for every cell and fracture face of a mesh.
struct TransmissibilityStencil {
    std::vector<Eigen::MatrixXd> cell;     // indexed by cell
    std::vector<Eigen::MatrixXd> fracture; // indexed by fracture face
};

/// Geometric stencils for unit isotropic diffusion (Λ = I, d_f Λ_f = I).
TransmissibilityStencil unit_stencils(const Mesh& mesh, const Connectivity& conn);

/// Darcy stencils for isotropic permeabilities: per-cell Λ_m and per fracture
/// face tangential Λ_f, fracture widths taken from the mesh.
TransmissibilityStencil darcy_stencils(const TransmissibilityStencil& unit, const Mesh& mesh,
                                       const std::vector<double>& perm_cell, const std::vector<double>& perm_fracture);

/// Fourier stencils from isotropic conductivities per cell and per fracture
/// face; λ must be positive everywhere.
TransmissibilityStencil fourier_transmissibilities(const TransmissibilityStencil& unit, const Mesh& mesh,
                                                   const std::vector<double>& lambda_cell,
                                                   const std::vector<double>& lambda_fracture);

/// F_ν = Σ_ν' T^{ν,ν'} (u_owner - u_ν') for every stencil member ν.
Eigen::VectorXd darcy_flux(const Eigen::MatrixXd& t, double u_owner, const Eigen::VectorXd& u_stencil);

struct PorousVolumeTable {
    /// Pore and rock volumes indexed by global dof (DofNumbering); zero at
    /// Dirichlet nodes.
    std::vector<double> phi;
    std::vector<double> phi_bar;
    /// α_{K,s} aligned with Connectivity::cell_nodes items, α_{σ,s} aligned
    /// with Connectivity::fracture_face_nodes items; zero where not eligible.
    std::vector<double> alpha_cell;
    std::vector<double> alpha_fracture;
    /// ∫ φ_m + ∫ φ_f d_f. Dirichlet nodes are never eligible, so their
    /// share stays with the owning cell or face and Σ phi equals this total.
    double pore_volume_total = 0.0;
};

/// Eligible nodes of every cell (resp. fracture face) receive the fraction
/// ω of its volume. Throws ConfigError unless 0 < ω·#eligible ≤ 1.
PorousVolumeTable distribute_porous_volumes(const Mesh& mesh, const Connectivity& conn,
                                            const std::vector<double>& phi_matrix,
                                            const std::vector<double>& phi_fracture, double omega);

} // namespace vagsim
