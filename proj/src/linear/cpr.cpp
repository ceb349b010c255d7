#include "vagsim/linear/solvers.hpp"

namespace vagsim {

SparseMatrix pressure_block(const BlockMatrix& a, int pressure_rows)
{
    const BlockPattern& p = *a.pattern;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(p.nnz());
    for (int i = 0; i < p.n; ++i)
        for (int q = p.row_ptr[i]; q < p.row_ptr[i + 1]; ++q) {
            double v = 0.0;
            for (int e = 0; e < pressure_rows; ++e)
                v += a.val[q](e, 0);
            t.emplace_back(i, p.col[q], v);
        }
    SparseMatrix m(p.n, p.n);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

CprPreconditioner::CprPreconditioner(const BlockMatrix& a, int pressure_rows, const AmgOptions& opt)
    : a_(a), pressure_rows_(pressure_rows), amg_(std::make_unique<Amg>(pressure_block(a, pressure_rows), opt)),
      ilu_(a)
{
}

void CprPreconditioner::apply(const Eigen::VectorXd& b, Eigen::VectorXd& v) const
{
    const int n = a_.block_rows();
    Eigen::VectorXd bp(n);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int e = 0; e < pressure_rows_; ++e)
            s += b[2 * i + e];
        bp[i] = s;
    }
    Eigen::VectorXd xp;
    amg_->vcycle(bp, xp);
    Eigen::VectorXd half = Eigen::VectorXd::Zero(b.size());
    for (int i = 0; i < n; ++i)
        half[2 * i] = xp[i];
    Eigen::VectorXd ah;
    a_.multiply(half, ah);
    Eigen::VectorXd corr;
    ilu_.apply(b - ah, corr);
    v = half + corr;
}

} // namespace vagsim
