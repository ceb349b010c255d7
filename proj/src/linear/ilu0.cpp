#include "vagsim/linear/solvers.hpp"

#include "vagsim/common/errors.hpp"
#include "vagsim/common/log.hpp"

#include <cmath>

namespace vagsim {

BlockIlu0::BlockIlu0(const BlockMatrix& a) : lu_(a)
{
    const BlockPattern& p = *lu_.pattern;
    diag_inv_.assign(p.n, Block2::Identity());
    std::vector<int> pos(p.n, -1);
    for (int i = 0; i < p.n; ++i) {
        if (p.diag[i] < 0) throw SolverError("ILU(0): missing diagonal block in row " + std::to_string(i));
        for (int q = p.row_ptr[i]; q < p.row_ptr[i + 1]; ++q)
            pos[p.col[q]] = q;
        double row_norm = 0.0;
        for (int q = p.row_ptr[i]; q < p.row_ptr[i + 1]; ++q)
            row_norm = std::max(row_norm, lu_.val[q].cwiseAbs().maxCoeff());

        for (int q = p.row_ptr[i]; q < p.diag[i]; ++q) {
            const int k = p.col[q];
            lu_.val[q] = lu_.val[q] * diag_inv_[k];
            const Block2 lik = lu_.val[q];
            for (int s = p.diag[k] + 1; s < p.row_ptr[k + 1]; ++s) {
                const int t = pos[p.col[s]];
                if (t >= 0) lu_.val[t].noalias() -= lik * lu_.val[s];
            }
        }

        Block2& u = lu_.val[p.diag[i]];
        const double scale = std::max(u.cwiseAbs().maxCoeff(), row_norm);
        if (!(std::abs(u.determinant()) > 1e-14 * scale * scale)) {
            // A zero pivot would stop the factorization; shift it instead.
            const double shift = scale > 0.0 ? 1e-12 * scale : 1e-12;
            u += shift * Block2::Identity();
            if (!(std::abs(u.determinant()) > 0.0)) u = Block2::Identity() * (scale > 0.0 ? scale : 1.0);
            ++shifted_;
        }
        diag_inv_[i] = u.inverse();

        for (int q = p.row_ptr[i]; q < p.row_ptr[i + 1]; ++q)
            pos[p.col[q]] = -1;
    }
    if (shifted_ > 0) log_warn("ILU(0): shifted " + std::to_string(shifted_) + " singular pivot block(s)");
}

void BlockIlu0::apply(const Eigen::VectorXd& b, Eigen::VectorXd& x) const
{
    const BlockPattern& p = *lu_.pattern;
    x.resize(b.size());
    for (int i = 0; i < p.n; ++i) {
        Eigen::Vector2d y = b.segment<2>(2 * i);
        for (int q = p.row_ptr[i]; q < p.diag[i]; ++q)
            y.noalias() -= lu_.val[q] * x.segment<2>(2 * p.col[q]);
        x.segment<2>(2 * i) = y;
    }
    for (int i = p.n - 1; i >= 0; --i) {
        Eigen::Vector2d y = x.segment<2>(2 * i);
        for (int q = p.diag[i] + 1; q < p.row_ptr[i + 1]; ++q)
            y.noalias() -= lu_.val[q] * x.segment<2>(2 * p.col[q]);
        x.segment<2>(2 * i) = diag_inv_[i] * y;
    }
}

} // namespace vagsim
