#include "vagsim/spmd/spmd.hpp"

#include "vagsim/common/errors.hpp"
#include "vagsim/common/log.hpp"

#include <algorithm>
#include <deque>

namespace vagsim {

namespace {

/// Cells sharing at least one node, sorted, without the cell itself.
std::vector<std::vector<int>> cell_graph(const Connectivity& conn)
{
    const int n = conn.num_cells();
    std::vector<std::vector<int>> g(n);
    for (int k = 0; k < n; ++k) {
        for (int s : conn.cell_nodes[k])
            for (int c : conn.node_cells[s])
                if (c != k) g[k].push_back(c);
        std::sort(g[k].begin(), g[k].end());
        g[k].erase(std::unique(g[k].begin(), g[k].end()), g[k].end());
    }
    return g;
}

/// Breadth-first levels restricted to unassigned cells; returns the visit order.
std::vector<int> bfs(const std::vector<std::vector<int>>& g, const std::vector<int>& owner, int start,
                     std::vector<int>& level)
{
    std::vector<int> order;
    std::deque<int> queue{start};
    level[start] = 0;
    while (!queue.empty()) {
        const int k = queue.front();
        queue.pop_front();
        order.push_back(k);
        for (int c : g[k])
            if (owner[c] < 0 && level[c] < 0) {
                level[c] = level[k] + 1;
                queue.push_back(c);
            }
    }
    return order;
}

/// Pseudo-peripheral cell of the unassigned component containing start.
int peripheral(const std::vector<std::vector<int>>& g, const std::vector<int>& owner, int start)
{
    std::vector<int> level(g.size(), -1);
    int cur = start;
    int depth = -1;
    for (int sweep = 0; sweep < 4; ++sweep) {
        const std::vector<int> order = bfs(g, owner, cur, level);
        int far = cur;
        for (int k : order)
            if (level[k] > level[far] || (level[k] == level[far] && k < far)) far = k;
        const int d = level[far];
        for (int k : order)
            level[k] = -1;
        if (d <= depth) break;
        depth = d;
        cur = far;
    }
    return cur;
}

/// Seed inside the largest unassigned component (lowest index on ties).
int largest_component_seed(const std::vector<std::vector<int>>& g, const std::vector<int>& owner)
{
    std::vector<int> level(g.size(), -1);
    int best = -1;
    std::size_t best_size = 0;
    for (int k = 0; k < static_cast<int>(g.size()); ++k) {
        if (owner[k] >= 0 || level[k] >= 0) continue;
        const std::vector<int> comp = bfs(g, owner, k, level);
        if (comp.size() > best_size) {
            best_size = comp.size();
            best = k;
        }
    }
    return best < 0 ? -1 : peripheral(g, owner, best);
}

} // namespace

std::vector<int> partition_cells(const Connectivity& conn, int num_ranks)
{
    const int n = conn.num_cells();
    if (num_ranks < 1) throw ConfigError("number of ranks must be at least 1");
    if (num_ranks > n)
        throw ConfigError("cannot split " + std::to_string(n) + " cells over " + std::to_string(num_ranks) +
                          " ranks");
    std::vector<int> owner(n, -1);
    if (num_ranks == 1) {
        std::fill(owner.begin(), owner.end(), 0);
        return owner;
    }
    const auto g = cell_graph(conn);
    std::vector<char> queued(n, 0);
    for (int p = 0; p < num_ranks; ++p) {
        const int target = n / num_ranks + (p < n % num_ranks ? 1 : 0);
        int taken = 0;
        std::deque<int> front;
        auto seed = [&](bool restart) {
            const int first = static_cast<int>(std::find(owner.begin(), owner.end(), -1) - owner.begin());
            const int s = restart ? largest_component_seed(g, owner) : peripheral(g, owner, first);
            front.push_back(s);
            queued[s] = 1;
        };
        seed(false);
        while (taken < target) {
            if (front.empty()) {
                log_info("partition: growth of part " + std::to_string(p) +
                         " stalled, reseeding in the largest unassigned component");
                seed(true);
            }
            const int k = front.front();
            front.pop_front();
            if (owner[k] >= 0) continue;
            owner[k] = p;
            ++taken;
            for (int c : g[k])
                if (owner[c] < 0 && !queued[c]) {
                    queued[c] = 1;
                    front.push_back(c);
                }
        }
        // Cells queued but not taken go back to the pool.
        for (int k : front)
            queued[k] = 0;
    }
    return owner;
}

std::vector<int> RankDomain::global_dofs(const DofNumbering& global) const
{
    std::vector<int> g;
    g.reserve(cells.size() + nodes.size() + fracture_faces.size());
    for (int k : cells)
        g.push_back(global.cell(k));
    for (int s : nodes)
        g.push_back(global.node(s));
    for (int f : fracture_faces)
        g.push_back(global.fracture_face(f));
    return g;
}

int Partition::dof_rank(const DofNumbering& dofs, int dof) const
{
    if (dofs.is_cell(dof)) return cell_rank[dof];
    if (dofs.is_node(dof)) return node_rank[dofs.node_of(dof)];
    return fracture_face_rank[dofs.fracture_face_of(dof)];
}

void assign_ownership(const Connectivity& conn, Partition& part)
{
    part.node_rank.assign(conn.num_nodes(), -1);
    part.fracture_face_rank.assign(conn.num_fracture_faces(), -1);
    part.ranks.assign(part.num_ranks, {});
    for (int k = 0; k < conn.num_cells(); ++k)
        part.ranks[part.cell_rank[k]].owned_cells.push_back(k);
    for (int s = 0; s < conn.num_nodes(); ++s) {
        if (conn.node_cells.degree(s) == 0) throw PartitionError("node " + std::to_string(s) + " has no cell");
        part.node_rank[s] = part.cell_rank[conn.node_cells[s][0]];
        part.ranks[part.node_rank[s]].owned_nodes.push_back(s);
    }
    for (int f = 0; f < conn.num_fracture_faces(); ++f) {
        if (conn.fracture_face_cells.degree(f) == 0)
            throw PartitionError("fracture face " + std::to_string(f) + " has no cell");
        part.fracture_face_rank[f] = part.cell_rank[conn.fracture_face_cells[f][0]];
        part.ranks[part.fracture_face_rank[f]].owned_fracture_faces.push_back(f);
    }
}

void build_ghost_layer(const Connectivity& conn, Partition& part)
{
    std::vector<int> mark_cell(conn.num_cells(), -1), mark_node(conn.num_nodes(), -1),
        mark_face(conn.num_fracture_faces(), -1);
    for (int p = 0; p < part.num_ranks; ++p) {
        RankDomain& r = part.ranks[p];
        r.cells.clear();
        r.nodes.clear();
        r.fracture_faces.clear();
        for (int k : r.owned_cells)
            for (int s : conn.cell_nodes[k])
                for (int c : conn.node_cells[s])
                    if (mark_cell[c] != p) {
                        mark_cell[c] = p;
                        r.cells.push_back(c);
                    }
        std::sort(r.cells.begin(), r.cells.end());
        for (int k : r.cells) {
            for (int s : conn.cell_nodes[k])
                if (mark_node[s] != p) {
                    mark_node[s] = p;
                    r.nodes.push_back(s);
                }
            for (int f : conn.cell_fracture_faces[k])
                if (mark_face[f] != p) {
                    mark_face[f] = p;
                    r.fracture_faces.push_back(f);
                }
        }
        std::sort(r.nodes.begin(), r.nodes.end());
        std::sort(r.fracture_faces.begin(), r.fracture_faces.end());
    }
}

Partition make_partition(const Connectivity& conn, int num_ranks)
{
    Partition part;
    part.num_ranks = num_ranks;
    part.cell_rank = partition_cells(conn, num_ranks);
    assign_ownership(conn, part);
    build_ghost_layer(conn, part);
    return part;
}

SyncPlan build_sync_plan(const Partition& part, const DofNumbering& global)
{
    SyncPlan plan;
    const int np = part.num_ranks;
    std::vector<std::vector<int>> gdofs(np);
    // Position of each global dof in U, and its owner's local id.
    std::vector<int> u_index(global.size(), -1), owner_local(global.size(), -1);
    plan.owned_offset.assign(np + 1, 0);
    plan.owned_local.resize(np);
    int next = 0;
    for (int p = 0; p < np; ++p) {
        plan.owned_offset[p] = next;
        gdofs[p] = part.ranks[p].global_dofs(global);
        for (int l = 0; l < static_cast<int>(gdofs[p].size()); ++l) {
            const int g = gdofs[p][l];
            if (part.dof_rank(global, g) != p) continue;
            u_index[g] = next++;
            owner_local[g] = l;
            plan.owned_local[p].push_back(l);
        }
    }
    plan.owned_offset[np] = next;
    if (next != global.size()) throw PartitionError("owned sets do not cover every dof");

    plan.source.resize(np);
    plan.recv.resize(np);
    for (int p = 0; p < np; ++p) {
        plan.source[p].resize(gdofs[p].size());
        for (int l = 0; l < static_cast<int>(gdofs[p].size()); ++l) {
            const int g = gdofs[p][l];
            const int owner = part.dof_rank(global, g);
            if (u_index[g] < 0 || owner < 0)
                throw PartitionError("ghost dof " + std::to_string(g) + " on rank " + std::to_string(p) +
                                     " has no owner");
            plan.source[p][l] = u_index[g];
            if (owner != p) plan.recv[p].push_back({l, owner, owner_local[g]});
        }
    }
    return plan;
}

Discretization restrict_discretization(const Discretization& global, const Partition& part, int rank)
{
    const RankDomain& r = part.ranks[rank];
    const DofNumbering& gd = global.dofs;
    Discretization d;
    d.dofs = r.local_dofs();

    std::vector<int> node_local(gd.num_nodes, -1), face_local(gd.num_fracture_faces, -1);
    for (int i = 0; i < static_cast<int>(r.nodes.size()); ++i)
        node_local[r.nodes[i]] = i;
    for (int i = 0; i < static_cast<int>(r.fracture_faces.size()); ++i)
        face_local[r.fracture_faces[i]] = i;

    auto map_row = [](std::span<const int> row, const std::vector<int>& local, const char* what) {
        std::vector<int> out;
        out.reserve(row.size());
        for (int x : row) {
            if (local[x] < 0) throw PartitionError(std::string("extended set misses a ") + what);
            out.push_back(local[x]);
        }
        return out;
    };
    for (int k : r.cells) {
        d.cell_nodes.push_row(map_row(global.cell_nodes[k], node_local, "node"));
        d.cell_fracture_faces.push_row(map_row(global.cell_fracture_faces[k], face_local, "fracture face"));
        d.darcy.cell.push_back(global.darcy.cell[k]);
        if (!global.fourier.cell.empty()) d.fourier.cell.push_back(global.fourier.cell[k]);
    }
    for (int f : r.fracture_faces) {
        d.fracture_face_nodes.push_row(map_row(global.fracture_face_nodes[f], node_local, "node"));
        d.darcy.fracture.push_back(global.darcy.fracture[f]);
        if (!global.fourier.fracture.empty()) d.fourier.fracture.push_back(global.fourier.fracture[f]);
    }

    const std::vector<int> g = r.global_dofs(gd);
    d.phi.reserve(g.size());
    d.owned.reserve(g.size());
    for (int v : g) {
        d.phi.push_back(global.phi[v]);
        d.phi_bar.push_back(global.phi_bar[v]);
        d.gravity.push_back(global.gravity[v]);
        d.owned.push_back(part.dof_rank(gd, v) == rank ? 1 : 0);
    }
    for (int s : r.nodes) {
        d.node_kind.push_back(global.node_kind[s]);
        d.pinned_temperature.push_back(global.pinned_temperature[s]);
        d.source.push_back(global.source[s]);
    }
    return d;
}

} // namespace vagsim
