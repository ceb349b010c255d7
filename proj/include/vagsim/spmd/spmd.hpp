#pragma once

#include "vagsim/assembly/assembly.hpp"
#include "vagsim/mesh/connectivity.hpp"

#include <functional>
#include <vector>

namespace vagsim {

/// Owner rank of every cell. Greedy breadth-first growth over the node-sharing
/// cell graph; part sizes differ by at most one cell. Throws ConfigError when
/// num_ranks < 1 or num_ranks > #cells.
std::vector<int> partition_cells(const Connectivity& conn, int num_ranks);

/// Local view of one rank. Every list is sorted by global index, and local
/// dofs are numbered cells, nodes, fracture faces in that order.
struct RankDomain {
    std::vector<int> owned_cells;
    std::vector<int> owned_nodes;
    std::vector<int> owned_fracture_faces;
    std::vector<int> cells;          // M̄^p
    std::vector<int> nodes;          // V̄^p
    std::vector<int> fracture_faces; // F̄_Γ^p

    DofNumbering local_dofs() const
    {
        return DofNumbering(static_cast<int>(cells.size()), static_cast<int>(nodes.size()),
                            static_cast<int>(fracture_faces.size()));
    }
    /// Global dof of each local dof.
    std::vector<int> global_dofs(const DofNumbering& global) const;
};

struct Partition {
    int num_ranks = 1;
    std::vector<int> cell_rank;
    std::vector<int> node_rank;
    std::vector<int> fracture_face_rank;
    std::vector<RankDomain> ranks;

    int dof_rank(const DofNumbering& dofs, int dof) const;
};

/// Nodes and fracture faces go to the rank of their smallest adjacent cell.
void assign_ownership(const Connectivity& conn, Partition& part);

/// Extended sets: cells sharing a node with an owned cell, and every node
/// and fracture face of those cells.
void build_ghost_layer(const Connectivity& conn, Partition& part);

/// partition_cells, assign_ownership and build_ghost_layer in sequence.
Partition make_partition(const Connectivity& conn, int num_ranks);

/// Copy operator from owners to ghosts. The concatenated owned vector U lists
/// rank 0's owned dofs (cells, nodes, fracture faces, ascending), then rank 1's,
/// and so on; source[p][l] is the position in U feeding local dof l of rank p.
struct SyncPlan {
    std::vector<int> owned_offset;           // start of each rank's block in U, size N_p + 1
    std::vector<std::vector<int>> source;    // per rank, per local dof
    std::vector<std::vector<int>> owned_local; // per rank, local ids of owned dofs in U order
    /// recv[p]: (local dof, sending rank, sender's local dof) for every ghost.
    struct Transfer {
        int local;
        int rank;
        int remote_local;
    };
    std::vector<std::vector<Transfer>> recv;

    int global_size() const { return owned_offset.back(); }

    /// Ū_p = S_p U.
    template <class T>
    void scatter(const std::vector<T>& u, std::vector<std::vector<T>>& ubar) const
    {
        ubar.resize(source.size());
        for (std::size_t p = 0; p < source.size(); ++p) {
            ubar[p].resize(source[p].size());
            for (std::size_t l = 0; l < source[p].size(); ++l)
                ubar[p][l] = u[source[p][l]];
        }
    }

    /// U from the owned entries of every rank.
    template <class T>
    std::vector<T> gather(const std::vector<std::vector<T>>& ubar) const
    {
        std::vector<T> u(global_size());
        for (std::size_t p = 0; p < owned_local.size(); ++p)
            for (std::size_t k = 0; k < owned_local[p].size(); ++k)
                u[owned_offset[p] + k] = ubar[p][owned_local[p][k]];
        return u;
    }

    /// Overwrite ghosts with the owners' values in place.
    template <class T>
    void sync(std::vector<std::vector<T>>& ubar) const
    {
        for (std::size_t p = 0; p < recv.size(); ++p)
            for (const Transfer& t : recv[p])
                ubar[p][t.local] = ubar[t.rank][t.remote_local];
    }
};

/// Throws PartitionError when a ghost has no owner among the ranks.
SyncPlan build_sync_plan(const Partition& part, const DofNumbering& global);

/// Rank-local discretization over the extended sets, in ascending global order.
/// Owned flags mark the rank's owned dofs.
Discretization restrict_discretization(const Discretization& global, const Partition& part, int rank);

/// In-process SPMD executor: runs one body per rank and joins. Threads are
/// used when more than one rank is requested and threading is enabled.
class Executor {
public:
    explicit Executor(int num_ranks, bool threaded = true) : num_ranks_(num_ranks), threaded_(threaded) {}

    int num_ranks() const { return num_ranks_; }
    /// Exceptions raised by any rank are rethrown, lowest rank first.
    void run(const std::function<void(int)>& body) const;

private:
    int num_ranks_;
    bool threaded_;
};

} // namespace vagsim
