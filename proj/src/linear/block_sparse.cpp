#include "vagsim/linear/reduction.hpp"

namespace vagsim {

void BlockMatrix::multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const
{
    const BlockPattern& p = *pattern;
    y.setZero(rows());
    for (int i = 0; i < p.n; ++i) {
        Eigen::Vector2d acc = Eigen::Vector2d::Zero();
        for (int q = p.row_ptr[i]; q < p.row_ptr[i + 1]; ++q)
            acc.noalias() += val[q] * x.segment<2>(2 * p.col[q]);
        y.segment<2>(2 * i) = acc;
    }
}

Eigen::MatrixXd BlockMatrix::to_dense() const
{
    const BlockPattern& p = *pattern;
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows(), rows());
    for (int i = 0; i < p.n; ++i)
        for (int q = p.row_ptr[i]; q < p.row_ptr[i + 1]; ++q)
            d.block<2, 2>(2 * i, 2 * p.col[q]) = val[q];
    return d;
}

} // namespace vagsim
