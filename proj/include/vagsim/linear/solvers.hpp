#pragma once

#include "vagsim/linear/reduction.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <memory>
#include <vector>

namespace vagsim {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using LinearOperator = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Block ILU(0): L and U share the block pattern of the input exactly.
class BlockIlu0 {
public:
    explicit BlockIlu0(const BlockMatrix& a);

    void apply(const Eigen::VectorXd& b, Eigen::VectorXd& x) const;
    /// Number of pivots that needed a diagonal shift.
    int shifted_pivots() const { return shifted_; }
    /// L (unit diagonal, strictly lower blocks) and U stored in one matrix.
    const BlockMatrix& factors() const { return lu_; }

private:
    BlockMatrix lu_;
    std::vector<Block2> diag_inv_;
    int shifted_ = 0;
};

struct AmgOptions {
    double strength_threshold = 0.08;
    double jacobi_weight = 2.0 / 3.0;
    double prolongator_weight = 2.0 / 3.0;
    int pre_sweeps = 1;
    int post_sweeps = 1;
    int coarse_size = 64;
    int max_levels = 25;
};

/// Smoothed-aggregation algebraic multigrid.
class Amg {
public:
    explicit Amg(const SparseMatrix& a, const AmgOptions& opt = {});

    /// One V-cycle from a zero initial guess.
    void vcycle(const Eigen::VectorXd& b, Eigen::VectorXd& x) const;
    int num_levels() const { return static_cast<int>(levels_.size()); }
    /// True when coarsening failed and the cycle is a damped Jacobi sweep.
    bool degraded() const { return degraded_; }
    const SparseMatrix& level_matrix(int l) const { return levels_[l].a; }

private:
    struct Level {
        SparseMatrix a;
        Eigen::VectorXd dinv;
        SparseMatrix p;  // to this level from the next coarser one
        SparseMatrix r;  // transpose of p
    };
    void cycle(int l, const Eigen::VectorXd& b, Eigen::VectorXd& x) const;

    AmgOptions opt_;
    std::vector<Level> levels_;
    Eigen::PartialPivLU<Eigen::MatrixXd> coarse_;
    bool degraded_ = false;
};

/// Pressure block of a 2x2-block system: the first `pressure_rows` rows of each
/// block are summed, the first column is kept.
SparseMatrix pressure_block(const BlockMatrix& a, int pressure_rows);

/// Two-stage CPR preconditioner: AMG on the pressure block, then block ILU(0)
/// on the full system.
class CprPreconditioner {
public:
    CprPreconditioner(const BlockMatrix& a, int pressure_rows, const AmgOptions& opt = {});

    void apply(const Eigen::VectorXd& b, Eigen::VectorXd& v) const;
    const Amg* amg() const { return amg_.get(); }

private:
    const BlockMatrix& a_;
    int pressure_rows_;
    std::unique_ptr<Amg> amg_;
    BlockIlu0 ilu_;
};

struct GmresOptions {
    double tolerance = 1e-4;
    int max_iterations = 150;
    int restart = 150;
};

struct GmresResult {
    bool converged = false;
    int iterations = 0;
    double relative_residual = 1.0;
};

/// Right-preconditioned restarted GMRES with modified Gram-Schmidt. Stops when
/// ||b - A x|| <= tolerance ||b||; x on entry is the initial guess.
GmresResult gmres(const LinearOperator& a, const LinearOperator& precond, const Eigen::VectorXd& b,
                  Eigen::VectorXd& x, const GmresOptions& opt);

} // namespace vagsim
