#include "vagsim/linear/solvers.hpp"

#include <cmath>

namespace vagsim {

GmresResult gmres(const LinearOperator& a, const LinearOperator& precond, const Eigen::VectorXd& b,
                  Eigen::VectorXd& x, const GmresOptions& opt)
{
    GmresResult res;
    const Eigen::Index n = b.size();
    if (x.size() != n) x = Eigen::VectorXd::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        x.setZero();
        res.converged = true;
        res.relative_residual = 0.0;
        return res;
    }
    const double target = opt.tolerance * bnorm;
    const int m = std::max(1, opt.restart);

    Eigen::VectorXd r(n), w(n), z(n);
    Eigen::MatrixXd v(n, m + 1);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs(m), sn(m), g(m + 1);

    a(x, w);
    r = b - w;
    double beta = r.norm();
    res.relative_residual = beta / bnorm;
    if (beta <= target) {
        res.converged = true;
        return res;
    }

    while (res.iterations < opt.max_iterations) {
        v.col(0) = r / beta;
        g.setZero();
        g[0] = beta;
        h.setZero();
        int k = 0;
        for (; k < m && res.iterations < opt.max_iterations; ++k) {
            ++res.iterations;
            precond(v.col(k), z);
            a(z, w);
            for (int i = 0; i <= k; ++i) {
                h(i, k) = w.dot(v.col(i));
                w -= h(i, k) * v.col(i);
            }
            h(k + 1, k) = w.norm();
            if (h(k + 1, k) > 0.0) v.col(k + 1) = w / h(k + 1, k);
            for (int i = 0; i < k; ++i) {
                const double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
                h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
                h(i, k) = t;
            }
            const double den = std::hypot(h(k, k), h(k + 1, k));
            cs[k] = den > 0.0 ? h(k, k) / den : 1.0;
            sn[k] = den > 0.0 ? h(k + 1, k) / den : 0.0;
            h(k, k) = den;
            h(k + 1, k) = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            if (std::abs(g[k + 1]) <= target || den == 0.0) {
                ++k;
                break;
            }
        }
        // x += M^{-1} V y with H y = g.
        const Eigen::VectorXd y =
            h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
        const Eigen::VectorXd vy = v.leftCols(k) * y;
        precond(vy, z);
        x += z;
        a(x, w);
        r = b - w;
        beta = r.norm();
        res.relative_residual = beta / bnorm;
        if (beta <= target) {
            res.converged = true;
            return res;
        }
        if (!std::isfinite(beta)) return res;
    }
    return res;
}

} // namespace vagsim
