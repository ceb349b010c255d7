#pragma once

#include "vagsim/assembly/assembly.hpp"
#include "vagsim/common/block_pattern.hpp"

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace vagsim {

using Block2 = Eigen::Matrix2d;

/// Square block-sparse matrix with 2x2 blocks.
struct BlockMatrix {
    std::shared_ptr<const BlockPattern> pattern;
    std::vector<Block2> val;

    BlockMatrix() = default;
    explicit BlockMatrix(std::shared_ptr<const BlockPattern> p)
        : pattern(std::move(p)), val(pattern->nnz(), Block2::Zero())
    {
    }

    int block_rows() const { return pattern->n; }
    int rows() const { return 2 * pattern->n; }
    /// y = A x, rows in order, columns in sorted order within a row.
    void multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
    Eigen::MatrixXd to_dense() const;
};

/// dX_ν = E_ν dX^pr_ν + e_ν for every dof; rows of E and e follow the dof's
/// natural-unknown layout. Dirichlet dofs have E = 0 and e = 0.
struct ClosureElimination {
    std::vector<Eigen::Matrix<double, kMaxUnknowns, kNumEquations>> e_mat;
    std::vector<Eigen::Matrix<double, kMaxUnknowns, 1>> e_vec;
};

/// Newton system in primary unknowns over every dof (cells, nodes, fracture
/// faces): A dX^pr = b.
struct PrimarySystem {
    BlockMatrix a;
    Eigen::VectorXd b;
    ClosureElimination elim;
};

/// Substitute the secondary unknowns. Throws EliminationError naming the dof
/// when its closure block is singular.
PrimarySystem eliminate_closure(const Assembler& assembler, const JacobianSystem& sys,
                                const std::vector<CoatsState>& x);

/// Node and fracture-face system after exact elimination of the cell
/// unknowns. Block row/column r maps to dof num_cells + r.
struct SchurSystem {
    BlockMatrix a;
    Eigen::VectorXd b;
    std::vector<Block2> cell_inverse; // (J_KK)^{-1}
};

SchurSystem schur_eliminate_cells(const PrimarySystem& sys, const DofNumbering& dofs);

/// Cell unknowns by back-substitution; returns primary increments for every dof.
Eigen::VectorXd recover_cells(const PrimarySystem& sys, const SchurSystem& schur, const DofNumbering& dofs,
                              const Eigen::VectorXd& reduced_solution);

/// Natural-unknown increments of dof v from its primary increment.
Eigen::Matrix<double, kMaxUnknowns, 1> expand_secondary(const ClosureElimination& elim, int v,
                                                        const Eigen::Vector2d& dpr);

} // namespace vagsim
