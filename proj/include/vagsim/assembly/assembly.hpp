#pragma once

#include "vagsim/common/block_pattern.hpp"
#include "vagsim/common/csr.hpp"
#include "vagsim/fluid/fluid.hpp"
#include "vagsim/mesh/connectivity.hpp"
#include "vagsim/vag/vag.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

namespace vagsim {

enum class NodeKind : std::uint8_t {
    free,
    dirichlet,          // full state pinned, no balance equation
    pinned_temperature, // mass balance kept, energy row replaced by T - T_D
};

/// Everything the residual needs about one (global or rank-local) domain.
/// Rank-local copies keep cells, nodes and fracture faces in ascending global
/// order so that accumulation order, and hence round-off, is rank-independent.
struct Discretization {
    DofNumbering dofs;
    Adjacency cell_nodes;
    Adjacency cell_fracture_faces;
    Adjacency fracture_face_nodes;
    TransmissibilityStencil darcy;
    TransmissibilityStencil fourier; // empty for isothermal models
    std::vector<double> phi;         // per dof
    std::vector<double> phi_bar;     // per dof
    std::vector<double> gravity;     // G_ν = -g·x_ν per dof
    std::vector<NodeKind> node_kind; // per node
    std::vector<double> pinned_temperature;                     // per node
    std::vector<std::array<double, kNumEquations>> source;      // per node, per equation, per second
    /// Per dof; balance tallies count only elements and nodes flagged here.
    /// Empty means everything is owned.
    std::vector<std::uint8_t> owned;

    bool is_owned(int dof) const { return owned.empty() || owned[dof] != 0; }
};

/// Geometry-only parts of a global discretization; node kinds default to free.
Discretization make_discretization(const Mesh& mesh, const Connectivity& conn, TransmissibilityStencil darcy,
                                   TransmissibilityStencil fourier, const PorousVolumeTable& volumes,
                                   const Vec3& gravity);

/// Pattern of the full Jacobian: every pair of dofs sharing a cell or a
/// fracture-face stencil.
BlockPattern build_pattern(const Discretization& d);

/// Residual, closure rows and their derivatives with respect to the natural
/// unknowns of every dof (columns beyond a dof's layout stay zero).
struct JacobianSystem {
    static constexpr int kBlock = kNumEquations * kMaxUnknowns;
    static constexpr int kMaxClosures = kMaxUnknowns - kNumEquations;

    std::vector<double> residual;        // dof-major, kNumEquations per dof
    std::vector<double> jac;             // pattern-entry-major, kBlock per entry, row-major
    std::vector<double> closure;         // kMaxClosures per dof
    std::vector<double> closure_jac;     // kMaxClosures x kMaxUnknowns per dof
    std::vector<double> accumulation_prev; // A(X^{n-1}), kNumEquations per dof

    /// Flux leaving the domain through Dirichlet nodes, per equation, per second.
    std::array<double, kNumEquations> boundary_outflow{};
    /// Prescribed sources summed over free and temperature-pinned nodes.
    std::array<double, kNumEquations> source_inflow{};
    /// Energy rate the temperature-pinned nodes must supply.
    double pinned_energy_inflow = 0.0;

    double& r(int dof, int eq) { return residual[dof * kNumEquations + eq]; }
    double r(int dof, int eq) const { return residual[dof * kNumEquations + eq]; }
    double* block(int entry) { return jac.data() + static_cast<std::size_t>(entry) * kBlock; }
    const double* block(int entry) const { return jac.data() + static_cast<std::size_t>(entry) * kBlock; }
};

class Assembler {
public:
    Assembler(const FluidModel& model, const Discretization& disc);

    const BlockPattern& pattern() const { return *pattern_; }
    const std::shared_ptr<const BlockPattern>& shared_pattern() const { return pattern_; }
    const FluidModel& model() const { return model_; }
    const Discretization& discretization() const { return disc_; }

    /// Residual only; the Jacobian arrays are left untouched.
    void residual(const std::vector<CoatsState>& x, const std::vector<CoatsState>& prev, double dt,
                  JacobianSystem& out);
    void assemble(const std::vector<CoatsState>& x, const std::vector<CoatsState>& prev, double dt,
                  JacobianSystem& out);

    /// Upwind choices of the last evaluation, one byte per (flux, phase).
    const std::vector<std::uint8_t>& upwind() const { return upwind_; }
    /// Reuse the given choices instead of the sign of V (finite-difference checks).
    void freeze_upwind(std::vector<std::uint8_t> choices);
    void unfreeze_upwind() { frozen_ = false; }

private:
    void run(const std::vector<CoatsState>& x, const std::vector<CoatsState>& prev, double dt, JacobianSystem& out,
             bool with_jac);

    FluidModel model_;
    const Discretization& disc_;
    std::shared_ptr<const BlockPattern> pattern_;
    std::vector<int> cell_entries_;     // per cell, (1+|Ξ_K|)^2 pattern positions
    std::vector<std::size_t> cell_entry_offset_;
    std::vector<int> frac_entries_;
    std::vector<std::size_t> frac_entry_offset_;
    std::vector<std::uint8_t> upwind_;
    bool frozen_ = false;
};

/// Accumulation A_ν(X) per equation (pore volume times moles, or energy).
std::array<double, kNumEquations> accumulation(const FluidModel& m, const CoatsState& x, double phi,
                                               double phi_bar);

} // namespace vagsim
