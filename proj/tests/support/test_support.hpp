#pragma once

#include "vagsim/assembly/assembly.hpp"
#include "vagsim/fluid/fluid.hpp"
#include "vagsim/mesh/connectivity.hpp"
#include "vagsim/mesh/mesh.hpp"

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace vagsim::test {

/// Stiffness of the P1 finite element on the sub-tetrahedra (x_K, x_σ, s, s')
/// of one cell, over (cell, Ξ_K) in cell_stencil order. Face centres of
/// non-fracture faces are eliminated with their barycentric weights. Built
/// from vertex coordinates only, so it is independent of the library's
/// transmissibility code.
Eigen::MatrixXd subtet_stiffness(const Mesh& mesh, const Connectivity& conn, int cell, const Mat3& lambda);

/// Rows and columns 1.. of subtet_stiffness: the oracle for T_K.
Eigen::MatrixXd subtet_transmissibility(const Mesh& mesh, const Connectivity& conn, int cell, const Mat3& lambda);

/// Discrete solution of div(grad u) = 0 in the matrix and in the fractures
/// (unit coefficients) with Dirichlet data u_exact on every node of the
/// bounding box. Returns the maximum nodal, cell and fracture-face error.
double affine_diffusion_error(const Mesh& mesh, const Vec3& gradient, double offset);

/// Move interior nodes off fracture planes by up to `amount` times the local
/// spacing; cell centres follow as node means.
void jitter_interior_nodes(Mesh& mesh, double amount, std::mt19937& rng);

/// Two unit cells along x with a fracture on their shared face.
Mesh two_cell_fractured_mesh(double width = 0.01);

/// Discretization with isotropic Darcy and, for thermal models, Fourier
/// stencils, ω = 0.05 and gravity along -z.
Discretization make_test_discretization(const Mesh& mesh, const Connectivity& conn, const FluidModel& m,
                                        double perm_matrix, double perm_fracture, double gravity = 9.81);

/// Random state with phase set q, away from relative-permeability kinks, with
/// pressures in p_mid (1 ± spread) and, for thermal models, temperatures in
/// t_mid (1 ± spread); t_mid = 0 draws them over the whole valid range. The
/// closure laws are not enforced.
CoatsState random_state(const FluidModel& m, unsigned q, double p_mid, std::mt19937& rng, double spread = 0.2,
                        double t_mid = 0.0);

/// Temperature away from the liquid viscosity floor near 408 K.
double random_temperature(std::mt19937& rng);

/// Phase sets a model can visit, drawn uniformly.
unsigned random_phase_set(const FluidModel& m, std::mt19937& rng);

/// Finite-difference step for one natural unknown.
double fd_step(const CoatsState& x, const Var& v);

/// Typical magnitude of one natural unknown, used to compare Jacobian
/// columns of different units.
double unknown_scale(const CoatsState& x, const Var& v);

} // namespace vagsim::test
