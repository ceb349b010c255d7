#pragma once

#include "vagsim/assembly/assembly.hpp"
#include "vagsim/linear/reduction.hpp"
#include "vagsim/linear/solvers.hpp"
#include "vagsim/mesh/connectivity.hpp"
#include "vagsim/sim/output.hpp"
#include "vagsim/sim/scenario.hpp"
#include "vagsim/spmd/spmd.hpp"
#include "vagsim/vag/vag.hpp"

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace vagsim {

struct NewtonResult {
    bool converged = false;
    int iterations = 0;
    int gmres_iterations = 0;
    double initial_norm = 0.0;
    double final_norm = 0.0;
    std::string failure; // empty on success
};

/// Global balance of one converged step, per conservation equation.
struct StepBalance {
    double time = 0.0;
    double dt = 0.0;
    int newton_iterations = 0;
    int gmres_iterations = 0;
    double newton_initial_norm = 0.0;
    double newton_final_norm = 0.0;
    std::array<double, kNumEquations> total{};            // after the step
    std::array<double, kNumEquations> boundary_outflow{}; // rate
    std::array<double, kNumEquations> source_inflow{};    // rate
    double pinned_energy_inflow = 0.0;                    // rate
    /// Δ total - dt (sources + pinned supply - outflow).
    std::array<double, kNumEquations> imbalance{};
};

struct RunReport {
    std::string scenario;
    int ranks = 1;
    bool completed = false;
    std::string abort_reason;
    double final_time = 0.0;
    int time_steps = 0;
    int failed_steps = 0;
    int newton_iterations = 0;
    int gmres_iterations = 0;

    double newton_per_step() const { return time_steps ? double(newton_iterations) / time_steps : 0.0; }
    double gmres_per_newton() const { return newton_iterations ? double(gmres_iterations) / newton_iterations : 0.0; }
    std::string to_json() const;
};

/// One scenario on N_p in-process ranks: setup, Newton solves and the time loop.
class Simulation {
public:
    explicit Simulation(const Scenario& scenario, bool threaded = true);
    ~Simulation();
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    const Scenario& scenario() const { return sc_; }
    const Mesh& mesh() const { return mesh_; }
    const Connectivity& connectivity() const { return conn_; }
    const FluidModel& model() const { return model_; }
    const Discretization& discretization() const { return disc_; }
    const PorousVolumeTable& volumes() const { return volumes_; }
    const Partition& partition() const { return part_; }
    double time() const { return time_; }

    /// Current state in global dof order.
    std::vector<CoatsState> state() const;
    /// Replace the state of every rank (owners and ghosts).
    void set_state(const std::vector<CoatsState>& global);

    /// Σ over dofs of the accumulation per equation.
    std::array<double, kNumEquations> totals() const;

    /// One implicit step of size dt from the current state. On success the
    /// state is advanced; on failure it is restored.
    NewtonResult newton_solve(double dt);

    /// First Newton system of a step of size dt from the current state, after
    /// closure elimination and, when schur is given, cell elimination.
    PrimarySystem primary_system(double dt, SchurSystem* schur = nullptr);

    /// Called after every converged step; returning false stops the run.
    using Observer = std::function<bool(const Simulation&, const StepBalance&)>;
    RunReport run(const Observer& observer = {});

    /// Balances of the converged steps of the last run().
    const std::vector<StepBalance>& balances() const { return balances_; }

private:
    struct RankData;

    void setup();
    void assemble_all(double dt);
    double residual_norm() const;
    PrimarySystem gather_primary();
    Eigen::VectorXd solve_reduced(const SchurSystem& schur, int& iterations, bool& ok) const;
    void write_fields(int index);

    Scenario sc_;
    Executor exec_;
    Mesh mesh_;
    Connectivity conn_;
    FluidModel model_;
    PorousVolumeTable volumes_;
    Discretization disc_;
    Partition part_;
    SyncPlan plan_;
    std::shared_ptr<const BlockPattern> pattern_;
    std::vector<std::unique_ptr<RankData>> ranks_;
    std::vector<std::vector<CoatsState>> x_;    // per rank, own and ghost dofs
    std::vector<std::vector<CoatsState>> prev_; // state at the start of the step
    std::vector<CoatsState> initial_;
    double time_ = 0.0;
    std::vector<StepBalance> balances_;
    std::vector<PvdEntry> pvd_cells_, pvd_fractures_;
};

/// Dirichlet, pinned-temperature and source data derived from the boundary
/// conditions; exposed for tests.
struct BoundarySetup {
    std::vector<std::uint8_t> dirichlet;        // per node
    std::vector<StateSpec> dirichlet_state;     // per node
    std::vector<std::uint8_t> pinned;           // per node
    std::vector<double> pinned_temperature;     // per node
    std::vector<double> mass_rate;              // per node, kg/s
};
BoundarySetup resolve_boundary(const Scenario& sc, const Mesh& mesh, const Connectivity& conn);

/// Initial state of every dof: pressure and temperature profiles, then the
/// phase recipe. Throws ConfigError when the hydrostatic iteration stalls.
std::vector<CoatsState> initial_state(const Scenario& sc, const FluidModel& model, const std::vector<Vec3>& dof_xyz,
                                      double z_top, double z_bottom);

/// Apply a StateSpec on top of a state, then flash-normalize it.
CoatsState apply_state_spec(const FluidModel& model, CoatsState x, const StateSpec& spec);

/// Position of every dof: cell centers, nodes, fracture-face centers.
std::vector<Vec3> dof_positions(const Mesh& mesh, const DofNumbering& dofs);

} // namespace vagsim
