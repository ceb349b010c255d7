#include "vagsim/common/errors.hpp"
#include "vagsim/linear/reduction.hpp"
#include "vagsim/linear/solvers.hpp"

#include <doctest.h>

#include <random>

using namespace vagsim;

namespace {

/// Random block matrix on a pattern, strictly block diagonally dominant.
BlockMatrix random_block_matrix(std::shared_ptr<const BlockPattern> p, std::mt19937& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    BlockMatrix a(p);
    for (int i = 0; i < p->n; ++i)
        for (int q = p->row_ptr[i]; q < p->row_ptr[i + 1]; ++q) {
            a.val[q] << u(rng), u(rng), u(rng), u(rng);
            if (q == p->diag[i]) a.val[q] += Block2::Identity() * 4.0 * (p->row_ptr[i + 1] - p->row_ptr[i]);
        }
    return a;
}

std::shared_ptr<const BlockPattern> tridiagonal(int n)
{
    std::vector<std::vector<int>> rows(n);
    for (int i = 0; i < n; ++i)
        for (int j = std::max(0, i - 1); j <= std::min(n - 1, i + 1); ++j)
            rows[i].push_back(j);
    return std::make_shared<const BlockPattern>(BlockPattern::from_rows(rows));
}

/// 5-point Laplacian on an m x m grid with Dirichlet rows folded in.
SparseMatrix poisson2d(int m)
{
    std::vector<Eigen::Triplet<double>> t;
    auto id = [m](int i, int j) { return i * m + j; };
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            t.emplace_back(id(i, j), id(i, j), 4.0);
            if (i > 0) t.emplace_back(id(i, j), id(i - 1, j), -1.0);
            if (i + 1 < m) t.emplace_back(id(i, j), id(i + 1, j), -1.0);
            if (j > 0) t.emplace_back(id(i, j), id(i, j - 1), -1.0);
            if (j + 1 < m) t.emplace_back(id(i, j), id(i, j + 1), -1.0);
        }
    SparseMatrix a(m * m, m * m);
    a.setFromTriplets(t.begin(), t.end());
    a.makeCompressed();
    return a;
}

LinearOperator identity_op()
{
    return [](const Eigen::VectorXd& b, Eigen::VectorXd& x) { x = b; };
}

} // namespace

TEST_SUITE("linear")
{
    TEST_CASE("block multiply agrees with the dense matrix")
    {
        std::mt19937 rng(41);
        std::vector<std::vector<int>> rows{{0, 2}, {1}, {0, 1, 2, 3}, {3, 1}};
        const auto p = std::make_shared<const BlockPattern>(BlockPattern::from_rows(rows));
        const BlockMatrix a = random_block_matrix(p, rng);
        const Eigen::VectorXd x = Eigen::VectorXd::Random(a.rows());
        Eigen::VectorXd y;
        a.multiply(x, y);
        CHECK((y - a.to_dense() * x).cwiseAbs().maxCoeff() < 1e-14);
    }

    TEST_CASE("block ILU(0) is an exact solver on block tridiagonal matrices")
    {
        std::mt19937 rng(42);
        const BlockMatrix a = random_block_matrix(tridiagonal(30), rng);
        const BlockIlu0 ilu(a);
        CHECK(ilu.shifted_pivots() == 0);
        const Eigen::VectorXd b = Eigen::VectorXd::Random(a.rows());
        Eigen::VectorXd x;
        ilu.apply(b, x);
        const Eigen::VectorXd exact = a.to_dense().partialPivLu().solve(b);
        CHECK((x - exact).cwiseAbs().maxCoeff() < 1e-12 * exact.cwiseAbs().maxCoeff());
    }

    TEST_CASE("singular ILU pivots are shifted, not fatal")
    {
        const auto p = tridiagonal(3);
        BlockMatrix a(p);
        for (int i = 0; i < 3; ++i)
            a.val[p->diag[i]] = Block2::Identity();
        a.val[p->diag[1]].setZero();
        const BlockIlu0 ilu(a);
        CHECK(ilu.shifted_pivots() == 1);
    }

    TEST_CASE("AMG V-cycles make a scalable Poisson preconditioner")
    {
        for (int m : {20, 40}) {
            const SparseMatrix a = poisson2d(m);
            const Amg amg(a);
            CHECK(amg.num_levels() >= 2);
            CHECK_FALSE(amg.degraded());
            // Coarse levels shrink.
            for (int l = 1; l < amg.num_levels(); ++l)
                CHECK(amg.level_matrix(l).rows() < amg.level_matrix(l - 1).rows());
            const Eigen::VectorXd b = Eigen::VectorXd::Ones(a.rows());
            Eigen::VectorXd x = Eigen::VectorXd::Zero(a.rows());
            const GmresResult r = gmres([&](const Eigen::VectorXd& v, Eigen::VectorXd& y) { y = a * v; },
                                        [&](const Eigen::VectorXd& v, Eigen::VectorXd& y) { amg.vcycle(v, y); }, b, x,
                                        {1e-8, 100, 100});
            CAPTURE(m);
            CHECK(r.converged);
            CHECK(r.iterations <= 20);
            CHECK((b - a * x).norm() <= 1e-8 * b.norm() * 1.0001);
        }
    }

    TEST_CASE("GMRES reports true convergence, restarts and failure")
    {
        std::mt19937 rng(43);
        const int n = 40;
        Eigen::MatrixXd m = Eigen::MatrixXd::Random(n, n) + 6.0 * Eigen::MatrixXd::Identity(n, n);
        const LinearOperator op = [&](const Eigen::VectorXd& v, Eigen::VectorXd& y) { y = m * v; };
        const Eigen::VectorXd b = Eigen::VectorXd::Random(n);

        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        GmresResult r = gmres(op, identity_op(), b, x, {1e-10, n, n});
        CHECK(r.converged);
        CHECK(r.iterations <= n);
        CHECK((b - m * x).norm() <= 1e-10 * b.norm() * 1.0001);

        x.setZero();
        r = gmres(op, identity_op(), b, x, {1e-10, 400, 5});
        CHECK(r.converged);
        CHECK((b - m * x).norm() <= 1e-10 * b.norm() * 1.0001);

        x.setZero();
        r = gmres(op, identity_op(), b, x, {1e-14, 2, 2});
        CHECK_FALSE(r.converged);
        CHECK(r.iterations == 2);
        CHECK(r.relative_residual > 1e-14);

        // A zero right-hand side is solved by the zero vector at once.
        x.setZero();
        r = gmres(op, identity_op(), Eigen::VectorXd::Zero(n), x, {1e-4, 10, 10});
        CHECK(r.converged);
        CHECK(r.iterations == 0);
    }

    TEST_CASE("pressure block sums the mass rows of the pressure column")
    {
        std::mt19937 rng(44);
        const BlockMatrix a = random_block_matrix(tridiagonal(5), rng);
        const SparseMatrix p1 = pressure_block(a, 1), p2 = pressure_block(a, 2);
        const Eigen::MatrixXd d = a.to_dense();
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                CHECK(p1.coeff(i, j) == d(2 * i, 2 * j));
                CHECK(p2.coeff(i, j) == doctest::Approx(d(2 * i, 2 * j) + d(2 * i + 1, 2 * j)));
            }
    }

    TEST_CASE("CPR preconditioned GMRES solves a coupled block system")
    {
        std::mt19937 rng(45);
        const BlockMatrix a = random_block_matrix(tridiagonal(60), rng);
        const CprPreconditioner cpr(a, 2);
        const Eigen::VectorXd b = Eigen::VectorXd::Random(a.rows());
        Eigen::VectorXd x = Eigen::VectorXd::Zero(a.rows());
        const GmresResult r = gmres([&](const Eigen::VectorXd& v, Eigen::VectorXd& y) { a.multiply(v, y); },
                                    [&](const Eigen::VectorXd& v, Eigen::VectorXd& y) { cpr.apply(v, y); }, b, x,
                                    {1e-10, 100, 100});
        CHECK(r.converged);
        Eigen::VectorXd ax;
        a.multiply(x, ax);
        CHECK((b - ax).norm() <= 1e-10 * b.norm() * 1.0001);
    }

    TEST_CASE("cell Schur complement and recovery reproduce the full solve")
    {
        std::mt19937 rng(46);
        // Four cells over six nodes; cells touch only nodes, nodes couple
        // through shared cells.
        const DofNumbering dofs(4, 6, 0);
        const std::vector<std::vector<int>> cell_nodes{{0, 1, 2}, {2, 3}, {3, 4, 5}, {0, 5}};
        std::vector<std::vector<int>> rows(10);
        for (int k = 0; k < 4; ++k) {
            rows[k].push_back(k);
            for (int s : cell_nodes[k]) {
                rows[k].push_back(4 + s);
                rows[4 + s].push_back(k);
                for (int t : cell_nodes[k])
                    rows[4 + s].push_back(4 + t);
            }
        }
        const auto p = std::make_shared<const BlockPattern>(BlockPattern::from_rows(rows));
        PrimarySystem sys;
        sys.a = random_block_matrix(p, rng);
        sys.b = Eigen::VectorXd::Random(20);
        const SchurSystem schur = schur_eliminate_cells(sys, dofs);
        CHECK(schur.a.block_rows() == 6);
        const Eigen::VectorXd y = schur.a.to_dense().partialPivLu().solve(schur.b);
        const Eigen::VectorXd x = recover_cells(sys, schur, dofs, y);
        const Eigen::VectorXd exact = sys.a.to_dense().partialPivLu().solve(sys.b);
        CHECK((x - exact).cwiseAbs().maxCoeff() < 1e-12 * exact.cwiseAbs().maxCoeff());

        sys.a.val[p->diag[2]].setZero();
        try {
            (void)schur_eliminate_cells(sys, dofs);
            FAIL("singular cell block accepted");
        } catch (const EliminationError& e) {
            CHECK(e.dof() == 2);
        }
    }
}
