#include "test_support.hpp"

#include "vagsim/spmd/spmd.hpp"

#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <random>
#include <set>
#include <stdexcept>

using namespace vagsim;

namespace {

Mesh spmd_mesh()
{
    BoxMeshSpec spec;
    spec.cells_per_axis = {6, 4, 3};
    spec.extent = Vec3(6.0, 4.0, 3.0);
    spec.fractures.push_back({0, 0, 3.0, {0.0, 0.0}, {4.0, 3.0}, 0.01});
    spec.fractures.push_back({1, 1, 2.0, {0.0, 0.0}, {3.0, 2.0}, 0.01});
    return build_cartesian_hex_mesh(spec);
}

} // namespace

TEST_SUITE("spmd")
{
    TEST_CASE("partition is balanced and covers every cell")
    {
        const Mesh m = spmd_mesh();
        const Connectivity c = build_connectivity(m);
        for (int np : {1, 2, 3, 5, 8}) {
            const std::vector<int> part = partition_cells(c, np);
            REQUIRE(static_cast<int>(part.size()) == m.num_cells());
            std::vector<int> sizes(np, 0);
            for (int r : part) {
                REQUIRE(r >= 0);
                REQUIRE(r < np);
                ++sizes[r];
            }
            CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
        }
        CHECK_THROWS_AS(partition_cells(c, 0), ConfigError);
        CHECK_THROWS_AS(partition_cells(c, m.num_cells() + 1), ConfigError);
    }

    TEST_CASE("ownership follows the smallest adjacent cell")
    {
        const Mesh m = spmd_mesh();
        const Connectivity c = build_connectivity(m);
        const Partition p = make_partition(c, 3);
        for (int s = 0; s < c.num_nodes(); ++s)
            CHECK(p.node_rank[s] == p.cell_rank[c.node_cells[s][0]]);
        for (int f = 0; f < c.num_fracture_faces(); ++f)
            CHECK(p.fracture_face_rank[f] == p.cell_rank[c.fracture_face_cells[f][0]]);
        // Owned sets partition the entities.
        std::size_t owned_nodes = 0;
        for (const RankDomain& r : p.ranks)
            owned_nodes += r.owned_nodes.size();
        CHECK(static_cast<int>(owned_nodes) == c.num_nodes());
    }

    TEST_CASE("ghost layer holds every cell sharing a node with an owned cell")
    {
        const Mesh m = spmd_mesh();
        const Connectivity c = build_connectivity(m);
        const Partition p = make_partition(c, 4);
        for (int rank = 0; rank < p.num_ranks; ++rank) {
            const RankDomain& r = p.ranks[rank];
            std::set<int> expect_cells, expect_nodes, expect_faces;
            for (int k : r.owned_cells)
                for (int s : c.cell_nodes[k])
                    for (int k2 : c.node_cells[s])
                        expect_cells.insert(k2);
            for (int k : expect_cells) {
                for (int s : c.cell_nodes[k])
                    expect_nodes.insert(s);
                for (int f : c.cell_fracture_faces[k])
                    expect_faces.insert(f);
            }
            CHECK(r.cells == std::vector<int>(expect_cells.begin(), expect_cells.end()));
            CHECK(r.nodes == std::vector<int>(expect_nodes.begin(), expect_nodes.end()));
            CHECK(r.fracture_faces == std::vector<int>(expect_faces.begin(), expect_faces.end()));
            CHECK(std::includes(r.nodes.begin(), r.nodes.end(), r.owned_nodes.begin(), r.owned_nodes.end()));
        }
    }

    TEST_CASE("sync operator copies owners onto ghosts")
    {
        const Mesh m = spmd_mesh();
        const Connectivity c = build_connectivity(m);
        const DofNumbering global(c);
        const Partition p = make_partition(c, 3);
        const SyncPlan plan = build_sync_plan(p, global);
        REQUIRE(plan.global_size() == global.size());

        // U carries each dof's global id, so local values reveal the mapping.
        std::vector<int> owner_order;
        for (int rank = 0; rank < 3; ++rank)
            for (int g : p.ranks[rank].global_dofs(global))
                if (p.dof_rank(global, g) == rank) owner_order.push_back(g);
        REQUIRE(static_cast<int>(owner_order.size()) == global.size());
        std::vector<std::vector<int>> ubar;
        plan.scatter(owner_order, ubar);
        for (int rank = 0; rank < 3; ++rank)
            CHECK(ubar[rank] == p.ranks[rank].global_dofs(global));
        CHECK(plan.gather(ubar) == owner_order);

        // Corrupt every ghost; sync restores them from the owners.
        for (int rank = 0; rank < 3; ++rank)
            for (const auto& t : plan.recv[rank])
                ubar[rank][t.local] = -1;
        plan.sync(ubar);
        for (int rank = 0; rank < 3; ++rank)
            CHECK(ubar[rank] == p.ranks[rank].global_dofs(global));
    }

    TEST_CASE("rank-local residuals equal the global residual on owned dofs")
    {
        std::mt19937 rng(51);
        const Mesh m = spmd_mesh();
        const Connectivity c = build_connectivity(m);
        const FluidModel model = FluidModel::blackoil();
        const Discretization d = test::make_test_discretization(m, c, model, 1e-13, 1e-11);
        std::vector<CoatsState> x(d.dofs.size()), prev(d.dofs.size());
        for (int v = 0; v < d.dofs.size(); ++v) {
            x[v] = test::random_state(model, test::random_phase_set(model, rng), 1.5e6, rng);
            prev[v] = test::random_state(model, test::random_phase_set(model, rng), 1.5e6, rng);
        }
        Assembler global_asm(model, d);
        JacobianSystem gsys;
        global_asm.residual(x, prev, 1e5, gsys);

        const Partition p = make_partition(c, 3);
        for (int rank = 0; rank < 3; ++rank) {
            const Discretization ld = restrict_discretization(d, p, rank);
            const std::vector<int> g = p.ranks[rank].global_dofs(d.dofs);
            std::vector<CoatsState> lx, lprev;
            for (int gv : g) {
                lx.push_back(x[gv]);
                lprev.push_back(prev[gv]);
            }
            Assembler local_asm(model, ld);
            JacobianSystem lsys;
            local_asm.residual(lx, lprev, 1e5, lsys);
            for (int l = 0; l < ld.dofs.size(); ++l) {
                if (!ld.is_owned(l)) continue;
                for (int e = 0; e < kNumEquations; ++e)
                    CHECK(lsys.r(l, e) == gsys.r(g[l], e));
            }
        }
    }

    TEST_CASE("executor runs every rank and rethrows the lowest failing rank")
    {
        for (bool threaded : {true, false}) {
            std::atomic<int> ran{0};
            Executor(4, threaded).run([&](int) { ++ran; });
            CHECK(ran == 4);
            try {
                Executor(4, threaded).run([](int r) {
                    if (r == 1 || r == 3) throw std::runtime_error("rank " + std::to_string(r));
                });
                FAIL("exception swallowed");
            } catch (const std::runtime_error& e) {
                CHECK(std::string(e.what()) == "rank 1");
            }
        }
    }
}
