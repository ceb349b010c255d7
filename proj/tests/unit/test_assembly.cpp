#include "test_support.hpp"

#include "vagsim/assembly/assembly.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace vagsim;

namespace {

Mesh small_mesh(std::mt19937& rng)
{
    BoxMeshSpec spec;
    spec.cells_per_axis = {3, 2, 3};
    spec.extent = Vec3(3.0, 2.0, 3.0);
    spec.fractures.push_back({0, 0, 1.0, {0.0, 0.0}, {2.0, 3.0}, 0.01});
    spec.fractures.push_back({1, 2, 2.0, {0.0, 0.0}, {3.0, 2.0}, 0.01});
    Mesh m = build_kuhn_tet_mesh(spec);
    test::jitter_interior_nodes(m, 0.15, rng);
    return m;
}

const FluidModel kModels[] = {FluidModel::immiscible(), FluidModel::blackoil(), FluidModel::water()};

std::vector<CoatsState> random_states(const FluidModel& m, int n, std::mt19937& rng)
{
    std::vector<CoatsState> x(n);
    const double t_mid = m.thermal() ? test::random_temperature(rng) : 0.0;
    for (auto& s : x)
        s = test::random_state(m, test::random_phase_set(m, rng), m.thermal() ? 2e5 : 1.5e6, rng, 0.05, t_mid);
    return x;
}

} // namespace

TEST_SUITE("assembly")
{
    TEST_CASE("pattern is symmetric with a diagonal in every row")
    {
        std::mt19937 rng(31);
        const Mesh mesh = small_mesh(rng);
        const Connectivity conn = build_connectivity(mesh);
        const Discretization d = test::make_test_discretization(mesh, conn, FluidModel::immiscible(), 1e-13, 1e-11);
        const BlockPattern p = build_pattern(d);
        REQUIRE(p.n == d.dofs.size());
        for (int i = 0; i < p.n; ++i) {
            CHECK(p.find(i, i) == p.diag[i]);
            for (int q = p.row_ptr[i]; q < p.row_ptr[i + 1]; ++q)
                CHECK(p.find(p.col[q], i) >= 0);
        }
        // Cell rows couple only the cell and its own stencil.
        for (int k = 0; k < d.dofs.num_cells; ++k)
            CHECK(p.row_ptr[k + 1] - p.row_ptr[k] == 1 + d.cell_nodes.degree(k) + d.cell_fracture_faces.degree(k));
    }

    TEST_CASE("hydrostatic water column is at rest")
    {
        std::mt19937 rng(32);
        const Mesh mesh = small_mesh(rng);
        const Connectivity conn = build_connectivity(mesh);
        const FluidModel m = FluidModel::immiscible();
        const Discretization d = test::make_test_discretization(mesh, conn, m, 1e-13, 1e-11);
        Assembler assembler(m, d);
        std::vector<CoatsState> x(d.dofs.size());
        for (int v = 0; v < d.dofs.size(); ++v) {
            x[v].q = 3u;
            x[v].p = 2e6 - 1000.0 * d.gravity[v];
            x[v].t = 300.0;
            x[v].s = {1.0, 0.0};
            x[v].c = {{{1.0, 0.0}, {0.0, 1.0}}};
        }
        JacobianSystem sys;
        assembler.assemble(x, x, 1e5, sys);
        // Potentials cancel up to the round-off of P itself, so the bound is
        // relative to T·P·mobility.
        const double scale = 1e-13 * 2e6 * 1000.0 / 1e-3;
        for (double r : sys.residual)
            CHECK(std::abs(r) <= 1e-13 * scale);
    }

    TEST_CASE("fluxes telescope: the residual sum is the accumulation change")
    {
        std::mt19937 rng(33);
        const Mesh mesh = small_mesh(rng);
        const Connectivity conn = build_connectivity(mesh);
        for (const FluidModel& m : kModels) {
            const Discretization d = test::make_test_discretization(mesh, conn, m, 1e-13, 1e-11);
            Assembler assembler(m, d);
            const auto x = random_states(m, d.dofs.size(), rng);
            const auto prev = random_states(m, d.dofs.size(), rng);
            const double dt = 1e6;
            JacobianSystem sys;
            assembler.assemble(x, prev, dt, sys);
            for (int e = 0; e < kNumEquations; ++e) {
                double rsum = 0.0, asum = 0.0, flux_size = 0.0;
                for (int v = 0; v < d.dofs.size(); ++v) {
                    const double a = accumulation(m, x[v], d.phi[v], d.phi_bar[v])[e];
                    const double da = (a - sys.accumulation_prev[v * kNumEquations + e]) / dt;
                    rsum += sys.r(v, e);
                    asum += da;
                    flux_size = std::max(flux_size, std::abs(sys.r(v, e) - da));
                }
                CAPTURE(m.name());
                CAPTURE(e);
                CHECK(std::abs(rsum - asum) <= 1e-12 * std::max(flux_size, std::abs(asum)) * d.dofs.size());
                CHECK(sys.boundary_outflow[e] == 0.0);
            }
        }
    }

    TEST_CASE("balance identity with Dirichlet nodes and sources")
    {
        std::mt19937 rng(34);
        Mesh mesh = small_mesh(rng);
        for (int s = 0; s < mesh.num_nodes(); ++s)
            if (mesh.nodes[s].z() > 3.0 - 1e-9) mesh.node_tags[s] = BoundaryTag::dirichlet_matrix;
        const Connectivity conn = build_connectivity(mesh);
        for (const FluidModel& m : kModels) {
            Discretization d = test::make_test_discretization(mesh, conn, m, 1e-13, 1e-11);
            for (int s = 0; s < d.dofs.num_nodes; ++s)
                if (conn.dirichlet_node[s]) d.node_kind[s] = NodeKind::dirichlet;
            d.source[0] = {1e-3, m.thermal() ? 50.0 : 2e-3};
            Assembler assembler(m, d);
            const auto x = random_states(m, d.dofs.size(), rng);
            const auto prev = random_states(m, d.dofs.size(), rng);
            JacobianSystem sys;
            assembler.assemble(x, prev, 1e6, sys);
            for (int e = 0; e < kNumEquations; ++e) {
                // Σ_free R = Σ_free ΔA/dt + outflow - sources.
                double lhs = 0.0, rhs = sys.boundary_outflow[e] - sys.source_inflow[e], size = 0.0;
                for (int v = 0; v < d.dofs.size(); ++v) {
                    if (d.dofs.is_node(v) && d.node_kind[d.dofs.node_of(v)] == NodeKind::dirichlet) {
                        CHECK(sys.r(v, e) == 0.0);
                        continue;
                    }
                    const double a = accumulation(m, x[v], d.phi[v], d.phi_bar[v])[e];
                    lhs += sys.r(v, e);
                    rhs += (a - sys.accumulation_prev[v * kNumEquations + e]) / 1e6;
                    size = std::max(size, std::abs(sys.r(v, e)));
                }
                CAPTURE(m.name());
                CHECK(std::abs(lhs - rhs) <= 1e-11 * std::max(size, std::abs(sys.boundary_outflow[e])) * d.dofs.size());
                CHECK(sys.source_inflow[e] == d.source[0][e]);
            }
        }
    }

    TEST_CASE("residual-only evaluation matches the full assembly")
    {
        std::mt19937 rng(35);
        const Mesh mesh = small_mesh(rng);
        const Connectivity conn = build_connectivity(mesh);
        for (const FluidModel& m : kModels) {
            const Discretization d = test::make_test_discretization(mesh, conn, m, 1e-13, 1e-11);
            Assembler assembler(m, d);
            const auto x = random_states(m, d.dofs.size(), rng);
            JacobianSystem full, res;
            assembler.assemble(x, x, 1e5, full);
            assembler.residual(x, x, 1e5, res);
            CHECK(full.residual == res.residual);
            CHECK(full.closure == res.closure);
            CHECK(res.jac.empty());
        }
    }

    TEST_CASE("pinned temperature row enforces the boundary temperature")
    {
        std::mt19937 rng(36);
        const Mesh mesh = small_mesh(rng);
        const Connectivity conn = build_connectivity(mesh);
        const FluidModel m = FluidModel::water();
        Discretization d = test::make_test_discretization(mesh, conn, m, 1e-13, 1e-11);
        d.node_kind[2] = NodeKind::pinned_temperature;
        d.pinned_temperature[2] = 450.0;
        Assembler assembler(m, d);
        const auto x = random_states(m, d.dofs.size(), rng);
        JacobianSystem sys;
        assembler.assemble(x, x, 1e5, sys);
        const int v = d.dofs.node(2);
        CHECK(sys.r(v, 1) == doctest::Approx(x[v].t - 450.0));
        const BlockPattern& p = assembler.pattern();
        for (int q = p.row_ptr[v]; q < p.row_ptr[v + 1]; ++q)
            for (int k = 0; k < kMaxUnknowns; ++k) {
                const double expected = (q == p.diag[v] && k == 1) ? 1.0 : 0.0;
                CHECK(sys.block(q)[1 * kMaxUnknowns + k] == expected);
            }
    }
}
